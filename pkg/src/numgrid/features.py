"""Seventeen geometric/structural features of a preprocessed numeral.

Features 1-8 come from directional line runs along the skeleton; features
9-17 are region properties of the filled 40x30 image.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Tuple

import numpy as np
from scipy import ndimage

from .errors import BlankInputError
from .imaging import EIGHT, FOUR, PreprocessedNumeral, as_binary

DEFAULT_MIN_RUN = 3

FEATURE_NAMES = (
    "n_horiz_lines",
    "n_vert_lines",
    "n_rdiag_lines",
    "n_ldiag_lines",
    "len_horiz",
    "len_vert",
    "len_rdiag",
    "len_ldiag",
    "euler_number",
    "convex_area",
    "filled_area",
    "solidity",
    "perimeter",
    "area",
    "eccentricity",
    "extent",
    "orientation",
)

H, V, RD, LD = "H", "V", "RD", "LD"
DIRECTIONS = (H, V, RD, LD)

Pixel = Tuple[int, int]


class FeatureVector(NamedTuple):
    n_horiz_lines: int
    n_vert_lines: int
    n_rdiag_lines: int
    n_ldiag_lines: int
    len_horiz: int
    len_vert: int
    len_rdiag: int
    len_ldiag: int
    euler_number: int
    convex_area: int
    filled_area: int
    solidity: float
    perimeter: float
    area: int
    eccentricity: float
    extent: float
    orientation: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=np.float64)


class RegionProperties(NamedTuple):
    euler_number: int
    convex_area: int
    filled_area: int
    solidity: float
    perimeter: float
    area: int
    eccentricity: float
    extent: float
    orientation: float


@dataclass
class LineSegments:
    """Segment lengths (in pixels) grouped by direction class."""

    segments: Dict[str, List[int]] = field(default_factory=lambda: {d: [] for d in DIRECTIONS})

    def count(self, direction: str) -> int:
        return len(self.segments[direction])

    def length(self, direction: str) -> int:
        return sum(self.segments[direction])

    def counts(self) -> Tuple[int, int, int, int]:
        return tuple(self.count(d) for d in DIRECTIONS)

    def lengths(self) -> Tuple[int, int, int, int]:
        return tuple(self.length(d) for d in DIRECTIONS)


# ---------------------------------------------------------------------------
# line features

# P2..P9: N, NE, E, SE, S, SW, W, NW
_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def step_direction(a: Pixel, b: Pixel) -> str:
    dr, dc = b[0] - a[0], b[1] - a[1]
    if dr == 0:
        return H
    if dc == 0:
        return V
    # rows grow downward: NE is (-1, +1)
    return RD if dr == -dc else LD


def _crossings(pix: set, p: Pixel) -> int:
    ring = [(p[0] + dr, p[1] + dc) in pix for dr, dc in _RING]
    return sum(1 for i in range(8) if not ring[i] and ring[(i + 1) % 8])


class _SkeletonGraph:
    def __init__(self, skeleton: np.ndarray):
        self.pixels = {(int(r), int(c)) for r, c in zip(*np.nonzero(skeleton))}
        self.nbrs = {
            p: [(p[0] + dr, p[1] + dc) for dr, dc in _RING if (p[0] + dr, p[1] + dc) in self.pixels]
            for p in self.pixels
        }
        self.junction = {p for p in self.pixels if len(self.nbrs[p]) >= 3 and _crossings(self.pixels, p) >= 3}
        # junction clusters: 8-connected groups of junction pixels
        self.cluster = {}
        for j in sorted(self.junction):
            if j in self.cluster:
                continue
            stack = [j]
            self.cluster[j] = j
            while stack:
                q = stack.pop()
                for n in self.nbrs[q]:
                    if n in self.junction and n not in self.cluster:
                        self.cluster[n] = j
                        stack.append(n)


def _rank(prev_dir, cur: Pixel, cand: Pixel):
    d = step_direction(cur, cand)
    orthogonal = cand[0] == cur[0] or cand[1] == cur[1]
    return (d != prev_dir, not orthogonal, cand)


def _walk(g: _SkeletonGraph, start: Pixel, first: Pixel, visited: set) -> List[Pixel]:
    path = [start, first]
    visited.add(first)
    home = g.cluster.get(start)
    prev, cur = start, first
    while True:
        nbrs = [n for n in g.nbrs[cur] if n != prev]
        junctions = [n for n in nbrs if n in g.junction]
        if len(path) == 2 and home is not None:
            junctions = [n for n in junctions if g.cluster[n] != home]
        if junctions:
            path.append(min(junctions, key=lambda n: _rank(None, cur, n)))
            return path
        cands = [n for n in nbrs if n not in g.junction and n not in visited]
        if not cands:
            return path
        prev_dir = step_direction(prev, cur)
        nxt = min(cands, key=lambda n: _rank(prev_dir, cur, n))
        visited.add(nxt)
        path.append(nxt)
        prev, cur = cur, nxt


def _runs(dirs: List[str]) -> List[Tuple[str, int]]:
    runs: List[Tuple[str, int]] = []
    for d in dirs:
        if runs and runs[-1][0] == d:
            runs[-1] = (d, runs[-1][1] + 1)
        else:
            runs.append((d, 1))
    return runs


def _trace_branches(g: _SkeletonGraph) -> List[Tuple[List[Pixel], bool]]:
    """All skeleton branches as (pixel path, is_closed_loop)."""
    visited: set = set()
    branches = []
    ends = sorted(p for p in g.pixels if len(g.nbrs[p]) == 1)
    for p in ends:
        if p in visited:
            continue
        visited.add(p)
        n = g.nbrs[p][0]
        if n in g.junction:
            branches.append(([p, n], False))
        else:
            branches.append((_walk(g, p, n, visited), False))
    for j in sorted(g.junction):
        for n in sorted(g.nbrs[j], key=lambda n: _rank(None, j, n)):
            if n not in g.junction and n not in visited:
                branches.append((_walk(g, j, n, visited), False))
    for p in sorted(g.pixels):
        if p in visited or p in g.junction:
            continue
        visited.add(p)
        nbrs = sorted((n for n in g.nbrs[p] if n not in g.junction), key=lambda n: _rank(None, p, n))
        if not nbrs:
            branches.append(([p], False))
            continue
        path = _walk(g, p, nbrs[0], visited)
        closed = len(path) > 2 and path[-1] not in g.junction and p in g.nbrs[path[-1]]
        if closed:
            path.append(p)
        branches.append((path, closed))
    return branches


def extract_line_features(skeleton, min_run: int = DEFAULT_MIN_RUN) -> LineSegments:
    """Split skeleton branches into maximal same-direction step runs.

    A run of at least ``min_run`` unit steps becomes one segment whose
    length is steps + 1 pixels.  Steps into or out of a junction pixel
    belong to no run.
    """
    if min_run < 1:
        raise ValueError("min_run must be >= 1")
    skeleton = as_binary(skeleton)
    if not skeleton.any():
        raise BlankInputError("blank input: empty skeleton")
    g = _SkeletonGraph(skeleton)
    out = LineSegments()
    for path, closed in _trace_branches(g):
        if len(path) < 2:
            continue
        dirs = [step_direction(a, b) for a, b in zip(path, path[1:])]
        if closed:
            # rotate so no run wraps around the arbitrary start pixel
            k = next((i for i in range(len(dirs)) if dirs[i] != dirs[i - 1]), 0)
            dirs = dirs[k:] + dirs[:k]
        else:
            if path[0] in g.junction:
                dirs[0] = None
            if path[-1] in g.junction:
                dirs[-1] = None
        for d, n in _runs(dirs):
            if d is not None and n >= min_run:
                out.segments[d].append(n + 1)
    return out


# ---------------------------------------------------------------------------
# region properties


def _label_holes(img: np.ndarray) -> np.ndarray:
    """Boolean mask of background pixels not 4-connected to the border."""
    padded = np.pad(1 - img, 1, constant_values=1)
    labels, _ = ndimage.label(padded, structure=FOUR)
    outside = labels[0, 0]
    holes = (labels != outside) & (labels != 0)
    return holes[1:-1, 1:-1]


def euler_number(img) -> int:
    img = as_binary(img)
    _, n_objects = ndimage.label(img, structure=EIGHT)
    _, n_holes = ndimage.label(_label_holes(img), structure=FOUR)
    return int(n_objects - n_holes)


def fill_holes(img) -> np.ndarray:
    img = as_binary(img)
    return (img.astype(bool) | _label_holes(img)).astype(np.uint8)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> List[Tuple[int, int]]:
    """Andrew's monotone chain; counter-clockwise, collinear points dropped."""
    pts = sorted(set(map(tuple, points)))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def convex_image(img) -> np.ndarray:
    """Pixels whose centres lie inside or on the hull of the ink centres."""
    img = as_binary(img)
    rr, cc = np.nonzero(img)
    if rr.size == 0:
        raise BlankInputError("blank input: no ink")
    hull = convex_hull(zip(cc.tolist(), rr.tolist()))
    out = np.zeros_like(img)
    r0, r1, c0, c1 = rr.min(), rr.max(), cc.min(), cc.max()
    gy, gx = np.mgrid[r0:r1 + 1, c0:c1 + 1]
    if len(hull) == 1:
        inside = np.ones_like(gx, dtype=bool)
    elif len(hull) == 2:
        (ax, ay), (bx, by) = hull
        cross = (bx - ax) * (gy - ay) - (by - ay) * (gx - ax)
        dot = (gx - ax) * (bx - ax) + (gy - ay) * (by - ay)
        inside = (cross == 0) & (dot >= 0) & (dot <= (bx - ax) ** 2 + (by - ay) ** 2)
    else:
        inside = np.ones_like(gx, dtype=bool)
        for (ax, ay), (bx, by) in zip(hull, hull[1:] + hull[:1]):
            # integer coordinates: the cross product is exact
            inside &= (bx - ax) * (gy - ay) - (by - ay) * (gx - ax) >= 0
    out[r0:r1 + 1, c0:c1 + 1] = inside
    return out


# clockwise on screen, starting west
_MOORE = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_MOORE_INDEX = {d: i for i, d in enumerate(_MOORE)}


def _trace_length(mask: np.ndarray) -> float:
    """Length of the outer 8-connected boundary of a single component.

    Moore-neighbour tracing; stops when the first move out of the start
    pixel is about to be repeated.
    """
    mask = np.pad(mask, 1)
    rr, cc = np.nonzero(mask)
    start = (int(rr[0]), int(cc[0]))
    cur, back = start, 0
    first_state = None
    total = 0.0
    for _ in range(8 * int(rr.size) + 16):
        for k in range(1, 9):
            d = (back + k) % 8
            nb = (cur[0] + _MOORE[d][0], cur[1] + _MOORE[d][1])
            if mask[nb]:
                break
        else:
            return 0.0
        pd = _MOORE[(back + k - 1) % 8]
        state = (cur, nb)
        if first_state is None:
            first_state = state
        elif state == first_state:
            return total
        step = _MOORE[d]
        total += math.sqrt(2.0) if step[0] and step[1] else 1.0
        back = _MOORE_INDEX[(cur[0] + pd[0] - nb[0], cur[1] + pd[1] - nb[1])]
        cur = nb
    raise RuntimeError("boundary trace did not close")


def perimeter(img) -> float:
    img = as_binary(img)
    labels, n = ndimage.label(img, structure=EIGHT)
    return float(sum(_trace_length(labels == k) for k in range(1, n + 1)))


def ellipse_moments(img) -> Tuple[float, float]:
    """(eccentricity, orientation in degrees) of the equal-moment ellipse.

    Coordinates are x = column, y = -row so that orientation is measured
    counter-clockwise from the x axis as seen on screen.
    """
    rr, cc = np.nonzero(as_binary(img))
    x = cc.astype(np.float64)
    y = -rr.astype(np.float64)
    dx, dy = x - x.mean(), y - y.mean()
    uxx = np.mean(dx * dx) + 1.0 / 12.0
    uyy = np.mean(dy * dy) + 1.0 / 12.0
    uxy = np.mean(dx * dy)
    common = math.sqrt((uxx - uyy) ** 2 + 4.0 * uxy * uxy)
    lam1 = 0.5 * (uxx + uyy + common)
    lam2 = 0.5 * (uxx + uyy - common)
    ecc = math.sqrt(max(0.0, 1.0 - lam2 / lam1))
    orientation = math.degrees(0.5 * math.atan2(2.0 * uxy, uxx - uyy))
    return ecc, orientation


def region_properties(filled) -> RegionProperties:
    img = as_binary(filled)
    if not img.any():
        raise BlankInputError("blank input: region has no ink")
    area = int(img.sum())
    filled_area = int(fill_holes(img).sum())
    convex_area = int(convex_image(img).sum())
    rows = np.flatnonzero(img.any(axis=1))
    cols = np.flatnonzero(img.any(axis=0))
    bbox = (rows[-1] - rows[0] + 1) * (cols[-1] - cols[0] + 1)
    ecc, orientation = ellipse_moments(img)
    return RegionProperties(
        euler_number=euler_number(img),
        convex_area=convex_area,
        filled_area=filled_area,
        solidity=area / convex_area,
        perimeter=perimeter(img),
        area=area,
        eccentricity=ecc,
        extent=area / float(bbox),
        orientation=orientation,
    )


def extract_features(p: PreprocessedNumeral, min_run: int = DEFAULT_MIN_RUN) -> FeatureVector:
    lines = extract_line_features(p.skeleton, min_run=min_run)
    props = region_properties(p.filled)
    return FeatureVector(*lines.counts(), *lines.lengths(), *props)
