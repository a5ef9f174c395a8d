"""Acceptance suite: one test per numbered criterion.

Each test records a single PASS/FAIL line, printed in the terminal summary.
Set NUMGRID_DATASET to a digit-folder dataset root (optionally holding
train/ and test/ subfolders) to also run criterion 8 on real data.
"""
import itertools
import os
import time
from collections import Counter
from contextlib import contextmanager
from pathlib import Path

import numpy as np

import oracles
from conftest import ACCEPTANCE_RESULTS, random_scan, random_stroke
from numgrid import classifier as clf
from numgrid import features as F
from numgrid import harness, synth
from numgrid.combiner import majority3, majority5
from numgrid.imaging import preprocess, thin


@contextmanager
def criterion(number, title):
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        ACCEPTANCE_RESULTS[number] = f"[{number}] FAIL {title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        raise
    extra = ", ".join(f"{k}={v}" for k, v in detail.items())
    ACCEPTANCE_RESULTS[number] = f"[{number}] PASS {title}" + (f" ({extra})" if extra else "")


def test_1_combiner_truth_tables():
    with criterion(1, "combiner truth tables") as info:
        t0 = time.perf_counter()
        for t in itertools.product(range(10), repeat=3):
            out = majority3(*t)
            assert out in t
            assert out == oracles.mode_with_fallback(t), t
        for t in itertools.product(range(10), repeat=5):
            out = majority5(*t)
            assert out in t, t
            label, n = Counter(t).most_common(1)[0]
            if n >= 3:
                assert out == label, t
        elapsed = time.perf_counter() - t0
        info["seconds"] = f"{elapsed:.2f}"
        assert elapsed < 5.0


def _mixture(rng, n, means, covs, priors):
    y = rng.choice(len(means), size=n, p=priors)
    X = np.empty((n, len(means[0])))
    for k in range(len(means)):
        idx = np.flatnonzero(y == k)
        X[idx] = rng.multivariate_normal(means[k], covs[k], size=len(idx))
    return X, y


def test_2_classifier_bayes_equivalence():
    with criterion(2, "classifier/Bayes equivalence") as info:
        rng = np.random.default_rng(2024)
        means = [np.array([0.0, 0.0, 0.0, 0.0]), np.array([1.5, -1.0, 0.5, 1.0]), np.array([-1.0, 1.5, 1.0, -0.5])]
        covs = [np.diag([1.0, 0.6, 1.4, 0.8]),
                np.array([[1.0, 0.4, 0.1, 0.0], [0.4, 1.2, 0.0, 0.2], [0.1, 0.0, 0.7, 0.1], [0.0, 0.2, 0.1, 0.9]]),
                np.array([[0.8, -0.2, 0.0, 0.1], [-0.2, 0.6, 0.1, 0.0], [0.0, 0.1, 1.5, 0.3], [0.1, 0.0, 0.3, 1.1]])]
        priors = [0.5, 0.3, 0.2]
        X, y = _mixture(rng, 5000, means, covs, priors)
        pts, _ = _mixture(rng, 2000, means, covs, priors)
        worst = 1.0
        for kind in clf.TYPES:
            model = clf.fit(X, y, kind)
            fitted_covs = [model.covariance(k) for k in range(3)]
            if kind == clf.MAHALANOBIS:
                ref = np.column_stack([
                    -np.einsum("ij,jk,ik->i", pts - m, np.linalg.inv(S), pts - m)
                    for m, S in zip(model.means, fitted_covs)])
            else:
                ref = oracles.gaussian_log_posterior(pts, model.means, fitted_covs, model.priors)
            agree = np.mean(np.argmax(ref, axis=1) == np.array(clf.classify_batch(model, pts)))
            worst = min(worst, agree)
            assert agree >= 0.995, (kind, agree)
        model = clf.fit(X, y, clf.QUADRATIC)
        ref = oracles.gaussian_log_posterior(pts, model.means, list(model.covariances), model.priors)
        offset = clf.scores(model, pts) - ref
        dev = float(np.max(np.abs(offset - 2 * np.log(2 * np.pi))))  # d/2 ln(2 pi), d = 4
        info["min agreement"] = f"{worst:.4f}"
        info["max score deviation"] = f"{dev:.1e}"
        assert dev <= 1e-9


def test_3_diagonal_degeneracy():
    with criterion(3, "diagonal degeneracy") as info:
        # full factorial designs have exactly zero within-class cross covariance
        grid = np.array(list(itertools.product([-1.0, 0.0, 1.0], repeat=4)))
        scales = [np.array([1.0, 2.0, 0.5, 1.5]), np.array([0.5, 1.0, 3.0, 1.0]), np.array([2.0, 0.75, 1.0, 0.25])]
        shifts = [np.zeros(4), np.array([2.0, 1.0, -1.0, 0.5]), np.array([-1.5, 2.0, 1.0, -1.0])]
        X = np.vstack([grid * s + m for s, m in zip(scales, shifts)])
        y = np.repeat([0, 1, 2], len(grid))
        for k in range(3):
            S = np.cov(X[y == k], rowvar=False)
            assert np.count_nonzero(S - np.diag(np.diag(S))) == 0
        pts = np.random.default_rng(3).normal(0, 3, (1000, 4))
        for diag, full in ((clf.DIAGLINEAR, clf.LINEAR), (clf.DIAGQUADRATIC, clf.QUADRATIC)):
            a = clf.classify_batch(clf.fit(X, y, diag), pts)
            b = clf.classify_batch(clf.fit(X, y, full), pts)
            assert a == b, diag
        info["points"] = 1000


def test_4_euler_region_oracle():
    with criterion(4, "Euler/region oracle") as info:
        rng = np.random.default_rng(44)
        done = 0
        while done < 200:
            shape = (int(rng.integers(1, 13)), int(rng.integers(1, 13)))
            img = (rng.random(shape) < rng.uniform(0.2, 0.8)).astype(np.uint8)
            if not img.any():
                continue
            p = F.region_properties(img)
            assert p.euler_number == oracles.euler(img), img
            assert p.area <= p.filled_area <= p.convex_area, img
            done += 1
        pairs = [(int(w), int(h)) for w, h in rng.integers(1, 25, size=(20, 2))]
        for w, h in pairs:
            img = np.zeros((h + 4, w + 4), np.uint8)
            img[2:2 + h, 2:2 + w] = 1
            assert F.perimeter(img) == 2 * (w - 1) + 2 * (h - 1), (w, h)
        info["images"] = done
        info["rectangles"] = len(pairs)


def test_5_geometry_invariances():
    with criterion(5, "geometry invariances") as info:
        rng = np.random.default_rng(55)
        strokes = 0
        while strokes < 20:
            img = random_stroke(rng)
            if img is None:
                continue
            a = F.extract_line_features(img)
            b = F.extract_line_features(np.rot90(img))
            assert (b.count(F.H), b.count(F.V), b.count(F.RD), b.count(F.LD)) == \
                   (a.count(F.V), a.count(F.H), a.count(F.LD), a.count(F.RD))
            strokes += 1
        bar = np.zeros((20, 40), np.uint8)
        bar[8:12, 4:36] = 1
        h = F.region_properties(bar).orientation
        v = F.region_properties(bar.T).orientation
        assert abs(h) <= 0.5
        assert abs(abs(v) - 90) <= 0.5
        yy, xx = np.mgrid[:41, :41]
        disk = ((yy - 20) ** 2 + (xx - 20) ** 2 <= 15 ** 2).astype(np.uint8)
        disk_ecc = F.region_properties(disk).eccentricity
        assert disk_ecc < 0.1
        line = np.zeros((5, 40), np.uint8)
        line[2, 5:35] = 1
        line_ecc = F.region_properties(line).eccentricity
        assert line_ecc > 0.99
        info.update(strokes=strokes, disk=f"{disk_ecc:.4f}", line=f"{line_ecc:.4f}")


def test_6_pipeline_shape():
    with criterion(6, "pipeline shape") as info:
        rng = np.random.default_rng(66)
        for i in range(100):
            gray = random_scan(rng, (int(rng.integers(30, 90)), int(rng.integers(30, 90))))
            num = preprocess(gray)
            assert num.filled.shape == (40, 30) and num.skeleton.shape == (40, 30)
            assert num.skeleton.any()
            assert not oracles.has_square(num.skeleton), i
            assert np.array_equal(thin(num.skeleton), num.skeleton), i
        info["inputs"] = 100


def test_7_end_to_end_sanity_floor(tmp_path):
    with criterion(7, "end-to-end sanity floor") as info:
        t0 = time.perf_counter()
        synth.write_dataset(tmp_path / "train", 20, seed=7)
        synth.write_dataset(tmp_path / "test", 20, seed=7, start=20)
        train = harness.load_dataset(tmp_path / "train")
        test = harness.load_dataset(tmp_path / "test")
        assert not set(p.name for p, _ in train.entries) & set(p.name for p, _ in test.entries)
        cache = harness.FeatureCache()
        resub = harness.evaluate(train, train, [clf.QUADRATIC], [], cache=cache)
        q = resub.row(clf.QUADRATIC).average
        assert q >= 90.0
        report = harness.evaluate(train, test, cache=cache)
        lines = harness.render_report(report).strip().splitlines()
        assert len(lines) == 8
        assert all(len(line.split(",")) == 12 for line in lines)
        elapsed = time.perf_counter() - t0
        info.update(quadratic_resub=f"{q:.2f}%", quadratic_test=f"{report.row(clf.QUADRATIC).average:.2f}%",
                    seconds=f"{elapsed:.1f}")
        assert elapsed < 60.0


def _report_structure(report):
    names = [row.name for row in report.rows]
    assert names == ["Linear (L)", "Quadratic (Q)", "DiagLinear (DL)", "DiagQuadratic (DQ)",
                     "Mahalanobis (M)", "L+DL+DQ+M majority", "L+Q+M majority"]
    header = harness.render_report(report).splitlines()[0].split(",")
    assert header == ["Discriminator function"] + [str(d) for d in range(10)] + ["Avg. % Accuracy"]


def test_8_table_structure(tmp_path):
    with criterion(8, "report table structure") as info:
        synth.write_dataset(tmp_path, 20, seed=8)
        ds = harness.load_dataset(tmp_path)
        _report_structure(harness.evaluate(ds, ds, label_style="legacy"))
        root = os.environ.get("NUMGRID_DATASET")
        if root:
            root = Path(root)
            if (root / "train").is_dir() and (root / "test").is_dir():
                train, test = harness.load_dataset(root / "train"), harness.load_dataset(root / "test")
            else:
                train = test = harness.load_dataset(root)
            cache = harness.FeatureCache(jobs=os.cpu_count() or 1)
            report = harness.evaluate(train, test, label_style="legacy", cache=cache)
            _report_structure(report)
            info["dataset"] = str(root)
            info["quadratic"] = f"{report.row(clf.QUADRATIC).average:.2f}%"
        else:
            info["dataset"] = "synthetic only; set NUMGRID_DATASET for real data"


def test_9_persistence_round_trip(tmp_path):
    with criterion(9, "persistence round-trip") as info:
        rng = np.random.default_rng(99)
        centers = rng.normal(0, 4, (10, 17))
        X = np.vstack([c + rng.normal(0, 1, (30, 17)) for c in centers])
        y = np.repeat(np.arange(10), 30)
        samples = rng.normal(0, 5, (100, 17))
        for kind in clf.TYPES:
            model = clf.fit(X, y, kind)
            path = tmp_path / f"{kind}.json"
            clf.save_model(model, path)
            loaded = clf.load_model(path)
            assert clf.classify_batch(loaded, samples) == clf.classify_batch(model, samples), kind
            assert [clf.classify(loaded, s) for s in samples] == clf.classify_batch(model, samples), kind
        info["types"] = len(clf.TYPES)
