"""Brute-force reference computations used by the tests.

Nothing here calls into numgrid; each function recomputes its quantity
by the most direct method available.
"""
from collections import Counter, deque

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.stats import multivariate_normal

N4 = ((-1, 0), (1, 0), (0, -1), (0, 1))
N8 = N4 + ((-1, -1), (-1, 1), (1, -1), (1, 1))


def components(mask, nbhd):
    """List of pixel sets, BFS over ``nbhd`` offsets."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    seen = np.zeros_like(mask)
    out = []
    for r in range(h):
        for c in range(w):
            if not mask[r, c] or seen[r, c]:
                continue
            comp, q = set(), deque([(r, c)])
            seen[r, c] = True
            while q:
                y, x = q.popleft()
                comp.add((y, x))
                for dy, dx in nbhd:
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < h and 0 <= xx < w and mask[yy, xx] and not seen[yy, xx]:
                        seen[yy, xx] = True
                        q.append((yy, xx))
            out.append(comp)
    return out


def holes(img):
    img = np.asarray(img, dtype=bool)
    h, w = img.shape
    return [c for c in components(~img, N4)
            if not any(y in (0, h - 1) or x in (0, w - 1) for y, x in c)]


def euler(img):
    return len(components(img, N8)) - len(holes(img))


def filled_area(img):
    return int(np.count_nonzero(img)) + sum(len(c) for c in holes(img))


def convex_area(img):
    """Grid points inside the qhull hull of ink centres (with tolerance)."""
    rr, cc = np.nonzero(img)
    pts = np.column_stack([cc, rr]).astype(float)
    gy, gx = np.mgrid[0:img.shape[0], 0:img.shape[1]]
    grid = np.column_stack([gx.ravel(), gy.ravel()]).astype(float)
    try:
        hull = ConvexHull(pts)
    except (QhullError, ValueError):
        # collinear or tiny: points on the segment between the extreme points
        if len(pts) == 1:
            return 1
        d = pts - pts[0]
        axis = d[np.argmax(np.abs(d).sum(axis=1))]
        t = (grid - pts[0]) @ axis / (axis @ axis)
        proj = pts[0] + np.outer(t, axis)
        on = np.all(np.abs(grid - proj) < 1e-9, axis=1)
        ts = d @ axis / (axis @ axis)
        return int(np.count_nonzero(on & (t >= ts.min() - 1e-9) & (t <= ts.max() + 1e-9)))
    inside = np.all(grid @ hull.equations[:, :2].T + hull.equations[:, 2] <= 1e-9, axis=1)
    return int(np.count_nonzero(inside))


def ellipse(img):
    """(eccentricity, orientation deg) from eigen-decomposition of the pixel covariance."""
    rr, cc = np.nonzero(img)
    coords = np.column_stack([cc, -rr]).astype(float)
    cov = np.cov(coords, rowvar=False, ddof=0) + np.eye(2) / 12.0
    vals, vecs = np.linalg.eigh(cov)
    major = vecs[:, 1]
    ecc = np.sqrt(1 - vals[0] / vals[1])
    ang = np.degrees(np.arctan2(major[1], major[0]))
    if ang > 90:
        ang -= 180
    elif ang < -90:
        ang += 180
    return ecc, ang


def otsu_scan(gray):
    """Smallest t maximizing w0*w1*(mu0-mu1)^2 over all 256 thresholds."""
    v = np.asarray(gray, dtype=float).ravel()
    best, best_t = 0.0, None
    for t in range(256):
        lo, hi = v[v <= t], v[v > t]
        if lo.size == 0 or hi.size == 0:
            continue
        w0, w1 = lo.size / v.size, hi.size / v.size
        s = w0 * w1 * (lo.mean() - hi.mean()) ** 2
        if best_t is None or s > best + 1e-9 * max(best, 1.0):
            best, best_t = s, t
    return best_t


def gaussian_log_posterior(x, means, covs, priors):
    """ln(pi_k N(x; mu_k, Sigma_k)) for every class, via scipy.stats."""
    return np.column_stack([
        multivariate_normal(mean=m, cov=S).logpdf(x) + np.log(p)
        for m, S, p in zip(means, covs, priors)
    ])


def mode_with_fallback(votes, fallback_index=1):
    counts = Counter(votes)
    label, n = counts.most_common(1)[0]
    return label if n >= 2 else votes[fallback_index]


def pooled_covariance(X, y):
    """Sum of outer products of within-class deviations over N - K."""
    classes = sorted(set(y.tolist()))
    d = X.shape[1]
    acc = np.zeros((d, d))
    for c in classes:
        rows = X[y == c]
        mu = rows.sum(axis=0) / len(rows)
        for row in rows:
            dev = row - mu
            acc += np.outer(dev, dev)
    return acc / (len(X) - len(classes))


def has_square(img):
    img = np.asarray(img, dtype=bool)
    return bool((img[:-1, :-1] & img[1:, :-1] & img[:-1, 1:] & img[1:, 1:]).any())
