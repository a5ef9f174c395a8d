import numpy as np
import pytest
from PIL import Image, ImageDraw


def random_blobs(rng, shape=(30, 30), n=3):
    """Binary image made of a few random filled ellipses and thick lines."""
    h, w = shape
    im = Image.new("L", (w, h), 0)
    draw = ImageDraw.Draw(im)
    for _ in range(n):
        x0, y0 = rng.integers(0, w), rng.integers(0, h)
        x1, y1 = rng.integers(0, w), rng.integers(0, h)
        if rng.random() < 0.5:
            draw.ellipse((min(x0, x1), min(y0, y1), max(x0, x1) + 2, max(y0, y1) + 2), fill=1)
        else:
            draw.line((x0, y0, x1, y1), fill=1, width=int(rng.integers(2, 6)))
    return np.asarray(im, dtype=np.uint8)


def random_scan(rng, shape=(60, 50)):
    """Gray scan: dark random strokes on light paper plus noise."""
    h, w = shape
    im = Image.new("L", (w, h), int(rng.integers(200, 256)))
    draw = ImageDraw.Draw(im)
    ink = int(rng.integers(0, 80))
    for _ in range(int(rng.integers(1, 5))):
        pts = [(int(rng.integers(3, w - 3)), int(rng.integers(3, h - 3))) for _ in range(int(rng.integers(2, 5)))]
        if rng.random() < 0.3:
            xs, ys = zip(*pts[:2])
            draw.ellipse((min(xs), min(ys), max(xs) + 4, max(ys) + 4), outline=ink, width=int(rng.integers(2, 6)))
        else:
            draw.line(pts, fill=ink, width=int(rng.integers(3, 7)))
    arr = np.asarray(im, dtype=float) + rng.normal(0, 6, size=(h, w))
    return np.clip(arr, 0, 255).astype(np.uint8)


def render(draw_fn, size=(60, 80)):
    """Dark-on-white gray image drawn by ``draw_fn(ImageDraw)``."""
    im = Image.new("L", size, 255)
    draw_fn(ImageDraw.Draw(im))
    return np.asarray(im, dtype=np.uint8)


STEPS = {"E": (0, 1), "NE": (-1, 1), "N": (-1, 0), "NW": (-1, -1),
         "W": (0, -1), "SW": (1, -1), "S": (1, 0), "SE": (1, 1)}
COMPASS = ("E", "NE", "N", "NW", "W", "SW", "S", "SE")


def random_stroke(rng, canvas=40):
    """One-pixel-wide open stroke: straight runs joined by 45 degree turns.

    Rejected (None) if it leaves the canvas or touches itself.
    """
    heading = int(rng.integers(0, 8))
    r, c = canvas // 2, canvas // 2
    pixels = [(r, c)]
    for _ in range(int(rng.integers(1, 5))):
        for _ in range(int(rng.integers(3, 9))):
            dr, dc = STEPS[COMPASS[heading]]
            r, c = r + dr, c + dc
            pixels.append((r, c))
        heading = (heading + int(rng.choice([-1, 1]))) % 8
    if len(set(pixels)) != len(pixels):
        return None
    if any(not (1 <= y < canvas - 1 and 1 <= x < canvas - 1) for y, x in pixels):
        return None
    for i, p in enumerate(pixels):
        for q in pixels[i + 2:]:
            if max(abs(p[0] - q[0]), abs(p[1] - q[1])) <= 1:
                return None
    img = np.zeros((canvas, canvas), np.uint8)
    for y, x in pixels:
        img[y, x] = 1
    return img


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary ----------------------------------------------------------

ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[number])
