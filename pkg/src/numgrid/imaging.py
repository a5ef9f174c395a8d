"""Preprocessing chain: grayscale scan -> filled 40x30 numeral + skeleton.

Images are plain 2-D numpy arrays indexed ``[row, col]``.  Gray images are
``uint8``; binary images are ``uint8`` over {0, 1} with 1 = ink once
:func:`invert` has been applied.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import BlankInputError, DegenerateImageError

NORM_ROWS = 40
NORM_COLS = 30
DEFAULT_MIN_COMPONENT_SIZE = 5

EIGHT = np.ones((3, 3), dtype=bool)
FOUR = ndimage.generate_binary_structure(2, 1)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class PreprocessedNumeral:
    filled: np.ndarray
    skeleton: np.ndarray

    def __post_init__(self):
        for name in ("filled", "skeleton"):
            img = getattr(self, name)
            if img.shape != (NORM_ROWS, NORM_COLS):
                raise ValueError(f"{name} must be {NORM_ROWS}x{NORM_COLS}, got {img.shape}")


def as_binary(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    return (arr != 0).astype(np.uint8)


def as_gray(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("gray intensities must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


# ---------------------------------------------------------------------------
# binarization


def otsu_threshold(gray) -> int:
    """Threshold t maximizing between-class variance of {<= t} vs {> t}.

    The smallest maximizer is returned.  Raises DegenerateImageError when
    every threshold leaves one class empty (constant image).
    """
    gray = as_gray(gray)
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    p = hist / hist.sum()
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(p)[:-1]
    mu = np.cumsum(p * levels)[:-1]
    mu_total = float(np.dot(p, levels))
    w1 = 1.0 - w0
    denom = w0 * w1
    valid = (w0 > 0) & (w1 > 0)
    between = np.zeros(255)
    between[valid] = (mu_total * w0[valid] - mu[valid]) ** 2 / denom[valid]
    t = int(np.argmax(between))
    if between[t] <= 0.0:
        raise DegenerateImageError("degenerate image: constant intensity, blank input")
    return t


def binarize(gray) -> np.ndarray:
    """Otsu binarization; pixel -> 1 iff intensity > threshold."""
    gray = as_gray(gray)
    return (gray > otsu_threshold(gray)).astype(np.uint8)


def invert(img) -> np.ndarray:
    return (1 - as_binary(img)).astype(np.uint8)


# ---------------------------------------------------------------------------
# cleaning, cropping, resampling


def remove_small_components(img, min_component_size: int) -> np.ndarray:
    img = as_binary(img)
    labels, n = ndimage.label(img, structure=EIGHT)
    if n == 0:
        return img
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_component_size
    keep[0] = False
    return keep[labels].astype(np.uint8)


def close(img) -> np.ndarray:
    """3x3 closing computed on a 1-pixel padded canvas so border ink survives."""
    img = as_binary(img)
    padded = np.pad(img, 1).astype(bool)
    closed = ndimage.binary_erosion(ndimage.binary_dilation(padded, EIGHT), EIGHT)
    return closed[1:-1, 1:-1].astype(np.uint8)


def denoise(img, min_component_size: int = DEFAULT_MIN_COMPONENT_SIZE) -> np.ndarray:
    """Drop 8-connected specks smaller than ``min_component_size``, then close."""
    if min_component_size < 1:
        raise ValueError("min_component_size must be >= 1")
    return close(remove_small_components(img, min_component_size))


def crop_to_content(img) -> np.ndarray:
    img = as_binary(img)
    rows = np.flatnonzero(img.any(axis=1))
    if rows.size == 0:
        raise BlankInputError("blank input: image contains no ink")
    cols = np.flatnonzero(img.any(axis=0))
    return img[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1].copy()


def normalize(img, rows: int = NORM_ROWS, cols: int = NORM_COLS) -> np.ndarray:
    """Nearest-neighbour resample: out[r, c] = in[r*H//rows, c*W//cols].

    If the sampling grid misses every ink pixel (sparse strokes being
    downscaled), ink pixels are forward-mapped instead so the result is
    never blank.
    """
    img = as_binary(img)
    if not img.any():
        raise BlankInputError("blank input: nothing to normalize")
    h, w = img.shape
    src_r = np.arange(rows) * h // rows
    src_c = np.arange(cols) * w // cols
    out = img[np.ix_(src_r, src_c)]
    if not out.any():
        rr, cc = np.nonzero(img)
        out = np.zeros((rows, cols), dtype=np.uint8)
        out[rr * rows // h, cc * cols // w] = 1
    return np.ascontiguousarray(out, dtype=np.uint8)


# ---------------------------------------------------------------------------
# thinning

# ring order P2..P9 = N, NE, E, SE, S, SW, W, NW
_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def _ring_arrays(padded: np.ndarray):
    h, w = padded.shape[0] - 2, padded.shape[1] - 2
    return [padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w] for dr, dc in _RING]


def _ring_at(img: np.ndarray, r: int, c: int) -> list:
    h, w = img.shape
    out = []
    for dr, dc in _RING:
        rr, cc = r + dr, c + dc
        out.append(int(img[rr, cc]) if 0 <= rr < h and 0 <= cc < w else 0)
    return out


def _transitions(ring) -> int:
    return sum(1 for i in range(8) if ring[i] == 0 and ring[(i + 1) % 8] == 1)


def _zs_deletable(ring, first: bool) -> bool:
    n, _, e, _, s, _, w, _ = ring
    b = sum(ring)
    if not 2 <= b <= 6 or _transitions(ring) != 1:
        return False
    if first:
        return n * e * s == 0 and e * s * w == 0
    return n * e * w == 0 and n * s * w == 0


def is_simple(ring) -> bool:
    """8-connectivity simple point test (Yokoi connectivity number == 1)."""
    n, ne, e, se, s, sw, w, nw = (1 - v for v in ring)
    # x1..x8 = E, NE, N, NW, W, SW, S, SE
    x = (e, ne, n, nw, w, sw, s, se, e)
    return sum(x[k] - x[k] * x[k + 1] * x[k + 2] for k in (0, 2, 4, 6)) == 1


def _zs_subiteration(img: np.ndarray, first: bool) -> bool:
    padded = np.pad(img, 1)
    n, ne, e, se, s, sw, w, nw = _ring_arrays(padded)
    ring = [n, ne, e, se, s, sw, w, nw]
    b = sum(a.astype(np.int16) for a in ring)
    a = sum(((ring[i] == 0) & (ring[(i + 1) % 8] == 1)).astype(np.int16) for i in range(8))
    if first:
        side = ((n & e & s) == 0) & ((e & s & w) == 0)
    else:
        side = ((n & e & w) == 0) & ((n & s & w) == 0)
    cand = (img == 1) & (b >= 2) & (b <= 6) & (a == 1) & side
    changed = False
    # parallel candidates re-checked against the live image: two candidates
    # deleted together may otherwise erase a whole component (2x2 blocks)
    for r, c in zip(*np.nonzero(cand)):
        if _zs_deletable(_ring_at(img, r, c), first):
            img[r, c] = 0
            changed = True
    return changed


def _in_square(img: np.ndarray, r: int, c: int) -> bool:
    h, w = img.shape
    for dr in (-1, 0):
        for dc in (-1, 0):
            r0, c0 = r + dr, c + dc
            if 0 <= r0 < h - 1 and 0 <= c0 < w - 1 and img[r0:r0 + 2, c0:c0 + 2].all():
                return True
    return False


def _is_corner(ring) -> bool:
    n, _, e, _, s, _, w, _ = ring
    four = (n, e, s, w)
    if sum(four) != 2:
        return False
    return (n or s) and (e or w)


def _cleanup(img: np.ndarray) -> bool:
    """Delete simple non-end pixels in 2x2 blocks or at staircase corners."""
    changed = False
    for r, c in zip(*np.nonzero(img)):
        ring = _ring_at(img, r, c)
        if sum(ring) < 2 or not is_simple(ring):
            continue
        if _is_corner(ring) or _in_square(img, r, c):
            img[r, c] = 0
            changed = True
    return changed


def thin(img) -> np.ndarray:
    """Zhang-Suen thinning to a fixpoint.

    Topology (8-connected ink, 4-connected background) and end points are
    preserved; leftover 2x2 blocks and staircase corners are removed by a
    final simple-point pass, repeated with Zhang-Suen until nothing moves.
    """
    out = as_binary(img).copy()
    if not out.any():
        raise BlankInputError("blank input: nothing to thin")
    while True:
        changed = _zs_subiteration(out, True)
        changed |= _zs_subiteration(out, False)
        if not changed:
            changed = _cleanup(out)
        if not changed:
            return out


# ---------------------------------------------------------------------------
# pipeline


def preprocess(gray, min_component_size: int = DEFAULT_MIN_COMPONENT_SIZE) -> PreprocessedNumeral:
    ink = invert(binarize(gray))
    filled = normalize(crop_to_content(denoise(ink, min_component_size)))
    return PreprocessedNumeral(filled=filled, skeleton=thin(filled))


def read_image(path: PathLike) -> np.ndarray:
    """Load PNG/PGM (or anything Pillow decodes) as an 8-bit gray array."""
    with Image.open(path) as im:
        im.load()
        if im.mode in ("RGBA", "LA", "PA") or (im.mode == "P" and "transparency" in im.info):
            im = im.convert("RGBA")
            bg = Image.new("RGBA", im.size, (255, 255, 255, 255))
            im = Image.alpha_composite(bg, im)
        if im.mode in ("I;16", "I;16B", "I;16L", "I"):
            arr = np.asarray(im, dtype=np.float64)
            top = arr.max() if arr.max() > 0 else 1.0
            return np.round(arr * 255.0 / top).astype(np.uint8)
        return np.asarray(im.convert("L"), dtype=np.uint8).copy()


def write_binary_image(path: PathLike, img) -> None:
    """Write ink as black on white, the polarity :func:`preprocess` expects."""
    arr = np.where(as_binary(img) == 1, 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(path)
