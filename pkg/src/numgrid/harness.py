"""Train/test protocol and per-class accuracy tables.

Datasets are directory trees with one sub-folder per class, named "0".."9".
Training and test sets are two such trees; reusing the training tree as
the test tree gives resubstitution accuracy.
"""
from __future__ import annotations

import csv
import hashlib
import io
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import classifier as clf
from .combiner import MAJORITY3_ORDER, MAJORITY5_ORDER, majority3, majority5
from .errors import DatasetStructureError, NumgridError, TooManySkippedError
from .features import DEFAULT_MIN_RUN, extract_features
from .imaging import DEFAULT_MIN_COMPONENT_SIZE, preprocess, read_image

log = logging.getLogger(__name__)

DIGITS = tuple(range(10))
IMAGE_SUFFIXES = {".png", ".pgm", ".pbm", ".ppm", ".pnm", ".tif", ".tiff", ".bmp", ".jpg", ".jpeg", ".gif"}
MAX_SKIP_FRACTION = 0.10

MAJORITY3 = "majority3"
MAJORITY5 = "majority5"
COMBINERS = (MAJORITY5, MAJORITY3)

ROW_NAMES = {
    clf.LINEAR: "Linear (L)",
    clf.QUADRATIC: "Quadratic (Q)",
    clf.DIAGLINEAR: "DiagLinear (DL)",
    clf.DIAGQUADRATIC: "DiagQuadratic (DQ)",
    clf.MAHALANOBIS: "Mahalanobis (M)",
    MAJORITY5: "L+Q+DL+DQ+M majority",
    MAJORITY3: "L+Q+M majority",
}
# older row label for the five-way combiner
LEGACY_ROW_NAMES = dict(ROW_NAMES, **{MAJORITY5: "L+DL+DQ+M majority"})

PathLike = Union[str, Path]


@dataclass
class LabeledDataset:
    root: Path
    entries: List[Tuple[Path, int]]
    classes: Tuple[int, ...] = DIGITS
    skipped: Counter = field(default_factory=Counter)

    @property
    def counts(self) -> Dict[int, int]:
        c = Counter(label for _, label in self.entries)
        return {k: c.get(k, 0) for k in self.classes}

    def __len__(self) -> int:
        return len(self.entries)


def parse_combiner(name: str) -> str:
    key = name.strip().lower()
    aliases = {"majority3": MAJORITY3, "m3": MAJORITY3, "3": MAJORITY3,
               "majority5": MAJORITY5, "m5": MAJORITY5, "5": MAJORITY5}
    if key not in aliases:
        raise ValueError(f"unknown combiner {name!r}; valid combiners: majority3, majority5")
    return aliases[key]


def _decodes(path: Path) -> bool:
    try:
        with Image.open(path) as im:
            im.verify()
        return True
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError):
        return False


def load_dataset(root: PathLike, classes: Sequence[int] = DIGITS) -> LabeledDataset:
    """List image files under ``root/<class>/`` in lexicographic order."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetStructureError(f"{root}: not a directory")
    entries: List[Tuple[Path, int]] = []
    skipped: Counter = Counter()
    for label in classes:
        folder = root / str(label)
        if not folder.is_dir():
            raise DatasetStructureError(f"{root}: missing class directory {label!r}")
        files = sorted(p for p in folder.iterdir()
                       if p.is_file() and not p.name.startswith(".") and p.suffix.lower() in IMAGE_SUFFIXES)
        if not files:
            raise DatasetStructureError(f"{folder}: class {label} has no images")
        for p in files:
            if _decodes(p):
                entries.append((p, label))
            else:
                log.warning("skipping undecodable image %s", p)
                skipped[label] += 1
    return LabeledDataset(root, entries, tuple(classes), skipped)


# ---------------------------------------------------------------------------
# feature extraction with a content-addressed cache


def _feature_job(args) -> Tuple[Optional[Tuple[float, ...]], Optional[str]]:
    path, min_component_size, min_run = args
    try:
        fv = extract_features(preprocess(read_image(path), min_component_size), min_run)
        return tuple(float(v) for v in fv), None
    except (NumgridError, OSError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


class FeatureCache:
    """Feature vectors keyed by (path, content hash, pipeline parameters)."""

    def __init__(self, min_component_size: int = DEFAULT_MIN_COMPONENT_SIZE,
                 min_run: int = DEFAULT_MIN_RUN, jobs: int = 1):
        self.min_component_size = min_component_size
        self.min_run = min_run
        self.jobs = max(1, int(jobs))
        self._store: Dict[Tuple[str, str, int, int], Tuple[Optional[Tuple[float, ...]], Optional[str]]] = {}
        self.misses = 0

    def _key(self, path: Path) -> Tuple[str, str, int, int]:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        return (str(path), digest, self.min_component_size, self.min_run)

    def lookup(self, paths: Sequence[Path]):
        keys = [self._key(p) for p in paths]
        todo = [(k, p) for k, p in zip(keys, paths) if k not in self._store]
        todo = list(dict(todo).items())
        if todo:
            self.misses += len(todo)
            args = [(p, self.min_component_size, self.min_run) for _, p in todo]
            if self.jobs > 1 and len(args) > 1:
                with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                    results = list(pool.map(_feature_job, args, chunksize=8))
            else:
                results = [_feature_job(a) for a in args]
            for (k, _), res in zip(todo, results):
                self._store[k] = res
        return [self._store[k] for k in keys]


def dataset_features(ds: LabeledDataset, cache: FeatureCache) -> Tuple[np.ndarray, np.ndarray, List[Path]]:
    """Feature matrix, labels and kept paths; enforces the skip policy."""
    results = cache.lookup([p for p, _ in ds.entries])
    skipped = Counter(ds.skipped)
    rows, labels, kept = [], [], []
    for (path, label), (vec, err) in zip(ds.entries, results):
        if vec is None:
            log.warning("skipping %s: %s", path, err)
            skipped[label] += 1
            continue
        rows.append(vec)
        labels.append(label)
        kept.append(path)
    for label in ds.classes:
        total = ds.counts[label] + ds.skipped[label]
        if total and skipped[label] / total > MAX_SKIP_FRACTION:
            raise TooManySkippedError(
                f"{ds.root}: class {label}: {skipped[label]} of {total} images skipped "
                f"(limit {MAX_SKIP_FRACTION:.0%})")
    X = np.array(rows, dtype=np.float64).reshape(len(rows), -1)
    return X, np.array(labels, dtype=int), kept


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class EvaluationRow:
    key: str
    name: str
    classes: Tuple[int, ...]
    truth: np.ndarray
    predictions: np.ndarray

    @property
    def confusion(self) -> np.ndarray:
        index = {c: i for i, c in enumerate(self.classes)}
        m = np.zeros((len(self.classes), len(self.classes)), dtype=int)
        for t, p in zip(self.truth, self.predictions):
            m[index[int(t)], index[int(p)]] += 1
        return m

    @property
    def class_accuracy(self) -> List[float]:
        m = self.confusion
        totals = m.sum(axis=1)
        return [100.0 * m[i, i] / totals[i] if totals[i] else float("nan") for i in range(len(self.classes))]

    @property
    def average(self) -> float:
        return float(np.nanmean(self.class_accuracy))

    @property
    def overall(self) -> float:
        return 100.0 * float(np.mean(self.truth == self.predictions))


@dataclass
class EvaluationReport:
    classes: Tuple[int, ...]
    rows: List[EvaluationRow]
    test_paths: List[Path] = field(default_factory=list)

    def row(self, key: str) -> EvaluationRow:
        for r in self.rows:
            if r.key == key:
                return r
        raise KeyError(key)


def evaluate(train: LabeledDataset, test: LabeledDataset,
             types: Iterable[str] = clf.TYPES, combiners: Iterable[str] = COMBINERS, *,
             ridge: float = clf.DEFAULT_RIDGE, ridge_cap: float = clf.DEFAULT_RIDGE_CAP,
             cache: Optional[FeatureCache] = None, label_style: str = "default") -> EvaluationReport:
    """Fit every requested discriminant on ``train`` and score ``test``."""
    types = {clf.parse_type(t) for t in types}
    combiners = {parse_combiner(c) for c in combiners}
    if MAJORITY3 in combiners and not set(MAJORITY3_ORDER) <= types:
        raise ValueError("majority3 needs linear, quadratic and mahalanobis")
    if MAJORITY5 in combiners and not set(MAJORITY5_ORDER) <= types:
        raise ValueError("majority5 needs all five discriminant types")
    if not types:
        raise ValueError("no discriminant types requested")
    names = LEGACY_ROW_NAMES if label_style == "legacy" else ROW_NAMES
    cache = cache or FeatureCache()

    X_train, y_train, _ = dataset_features(train, cache)
    X_test, y_test, test_paths = dataset_features(test, cache)
    if len(y_train) == 0 or len(y_test) == 0:
        raise DatasetStructureError("empty training or test set")
    classes = tuple(sorted(set(test.classes) | set(train.classes)))

    preds: Dict[str, np.ndarray] = {}
    rows = []
    for kind in clf.TYPES:
        if kind not in types:
            continue
        model = clf.fit(X_train, y_train, kind, ridge=ridge, ridge_cap=ridge_cap)
        preds[kind] = np.array(clf.classify_batch(model, X_test), dtype=int)
        rows.append(EvaluationRow(kind, names[kind], classes, y_test, preds[kind]))
    for key, order, rule in ((MAJORITY5, MAJORITY5_ORDER, majority5), (MAJORITY3, MAJORITY3_ORDER, majority3)):
        if key not in combiners:
            continue
        votes = zip(*(preds[k] for k in order))
        combined = np.array([rule(*map(int, v)) for v in votes], dtype=int)
        rows.append(EvaluationRow(key, names[key], classes, y_test, combined))
    return EvaluationReport(classes, rows, test_paths)


# ---------------------------------------------------------------------------
# rendering


def _header(classes: Sequence[int]) -> List[str]:
    return ["Discriminator function"] + [str(c) for c in classes] + ["Avg. % Accuracy"]


def _cells(row: EvaluationRow) -> List[str]:
    return [row.name] + [f"{a:.2f}" for a in row.class_accuracy] + [f"{row.average:.2f}"]


def render_report(report: EvaluationReport, fmt: str = "csv") -> str:
    header = _header(report.classes)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(header)
        for row in report.rows:
            w.writerow(_cells(row))
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |",
                 "|" + "|".join([":---"] + ["---:"] * (len(header) - 1)) + "|"]
        lines += ["| " + " | ".join(_cells(row)) + " |" for row in report.rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}; use csv or markdown")


def read_report_csv(text: str) -> Dict[str, List[float]]:
    """Parse a rendered CSV back into {row name: [per-class..., average]}."""
    reader = csv.reader(io.StringIO(text))
    next(reader)
    return {r[0]: [float(v) for v in r[1:]] for r in reader if r}


def confusion_csv(row: EvaluationRow) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["true\\predicted"] + [str(c) for c in row.classes])
    for c, counts in zip(row.classes, row.confusion):
        w.writerow([str(c)] + [str(int(v)) for v in counts])
    return buf.getvalue()


def write_confusion_matrices(report: EvaluationReport, directory: PathLike) -> List[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for row in report.rows:
        path = directory / f"confusion_{row.key}.csv"
        path.write_text(confusion_csv(row), newline="")
        written.append(path)
    return written
