"""Jittered synthetic glyphs for smoke tests and demos.

Ten visually distinct stroke shapes stand in for the ten numeral classes.
They are not Devanagari numerals; they only exercise the pipeline.
"""
from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, ImageDraw

CANVAS = (48, 64)  # width, height

# Control points on a unit box (x, y in [0, 1]); "ellipse" entries are boxes.
SHAPES = {
    0: [("ellipse", (0.1, 0.05, 0.9, 0.95))],
    1: [("line", (0.5, 0.05, 0.5, 0.95))],
    2: [("line", (0.1, 0.1, 0.9, 0.1)), ("line", (0.9, 0.1, 0.1, 0.9)), ("line", (0.1, 0.9, 0.9, 0.9))],
    3: [("line", (0.5, 0.05, 0.5, 0.95)), ("line", (0.05, 0.5, 0.95, 0.5))],
    4: [("line", (0.1, 0.05, 0.9, 0.95)), ("line", (0.9, 0.05, 0.1, 0.95))],
    5: [("line", (0.15, 0.05, 0.15, 0.95)), ("line", (0.15, 0.95, 0.9, 0.95))],
    6: [("line", (0.05, 0.08, 0.95, 0.08)), ("line", (0.5, 0.08, 0.5, 0.95))],
    7: [("line", (0.5, 0.05, 0.95, 0.95)), ("line", (0.95, 0.95, 0.05, 0.95)), ("line", (0.05, 0.95, 0.5, 0.05))],
    8: [("ellipse", (0.15, 0.02, 0.85, 0.5)), ("ellipse", (0.1, 0.48, 0.9, 0.98))],
    9: [("line", (0.1, 0.05, 0.5, 0.95)), ("line", (0.5, 0.95, 0.9, 0.05))],
}


def render_glyph(label: int, rng: np.random.Generator, jitter: float = 0.04) -> np.ndarray:
    """Gray uint8 image: dark strokes on light paper with mild noise."""
    w, h = CANVAS
    margin = 6
    sx = (w - 2 * margin) * rng.uniform(0.85, 1.0)
    sy = (h - 2 * margin) * rng.uniform(0.85, 1.0)
    ox = margin + rng.uniform(-2, 2)
    oy = margin + rng.uniform(-2, 2)
    width = int(rng.integers(3, 6))
    im = Image.new("L", CANVAS, 255)
    draw = ImageDraw.Draw(im)
    for kind, pts in SHAPES[label]:
        pts = np.asarray(pts) + rng.uniform(-jitter, jitter, size=4)
        x0, y0, x1, y1 = ox + pts[0] * sx, oy + pts[1] * sy, ox + pts[2] * sx, oy + pts[3] * sy
        if kind == "ellipse":
            draw.ellipse((min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1)), outline=20, width=width)
        else:
            draw.line((x0, y0, x1, y1), fill=20, width=width)
    arr = np.asarray(im, dtype=np.float64) + rng.normal(0, 8, size=(h, w))
    return np.clip(arr, 0, 255).astype(np.uint8)


def write_dataset(root: Union[str, Path], per_class: int, seed: int = 0, start: int = 0) -> Path:
    """Write ``per_class`` PNGs for each of the ten shapes under root/<label>/."""
    root = Path(root)
    for label in SHAPES:
        rng = np.random.default_rng([seed, label, start])
        folder = root / str(label)
        folder.mkdir(parents=True, exist_ok=True)
        for i in range(start, start + per_class):
            Image.fromarray(render_glyph(label, rng)).save(folder / f"{label}_{i:04d}.png")
    return root
