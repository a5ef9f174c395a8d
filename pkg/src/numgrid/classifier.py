"""Gaussian discriminant classifiers: linear, quadratic, their diagonal
variants, and a Mahalanobis minimum-distance rule."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateClassError, InsufficientDataError, InvalidSampleError, ModelFormatError

LINEAR = "linear"
DIAGLINEAR = "diaglinear"
QUADRATIC = "quadratic"
DIAGQUADRATIC = "diagquadratic"
MAHALANOBIS = "mahalanobis"

TYPES = (LINEAR, QUADRATIC, DIAGLINEAR, DIAGQUADRATIC, MAHALANOBIS)
SHORT_NAMES = {LINEAR: "L", QUADRATIC: "Q", DIAGLINEAR: "DL", DIAGQUADRATIC: "DQ", MAHALANOBIS: "M"}
POOLED = {LINEAR, DIAGLINEAR}
DIAGONAL = {DIAGLINEAR, DIAGQUADRATIC}

DEFAULT_RIDGE = 1e-6
DEFAULT_RIDGE_CAP = 1e-2
MODEL_VERSION = 1


def parse_type(name: str) -> str:
    """Accept long ("quadratic") or short ("Q") discriminant names."""
    key = name.strip().lower()
    for long_name, short in SHORT_NAMES.items():
        if key in (long_name, short.lower()):
            return long_name
    valid = ", ".join(f"{t} ({SHORT_NAMES[t]})" for t in TYPES)
    raise ValueError(f"unknown discriminant type {name!r}; valid types: {valid}")


@dataclass(frozen=True)
class DiscriminantModel:
    type: str
    classes: Tuple[int, ...]
    means: np.ndarray          # (K, d)
    covariances: np.ndarray    # (1, d, d) when pooled, else (K, d, d)
    priors: np.ndarray         # (K,)
    ridge: float

    @property
    def pooled(self) -> bool:
        return self.type in POOLED

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def covariance(self, k_index: int) -> np.ndarray:
        return self.covariances[0 if self.pooled else k_index]

    def __post_init__(self):
        # Cholesky factors are derived data; caching them keeps a model immutable
        # while letting every scoring call share one factorization.
        chol = [np.linalg.cholesky(c) for c in self.covariances]
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_logdet", [2.0 * float(np.sum(np.log(np.diag(L)))) for L in chol])
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.classes)})


# ---------------------------------------------------------------------------
# fitting


def _regularize(cov: np.ndarray, ridge: float, ridge_cap: float, what: str) -> Tuple[np.ndarray, float]:
    """Return (cov + eps*mean_diag*I, eps) for the smallest eps that is PD."""
    try:
        np.linalg.cholesky(cov)
        return cov, 0.0
    except np.linalg.LinAlgError:
        pass
    scale = float(np.trace(cov)) / cov.shape[0]
    if scale > 0:
        eps = ridge
        while eps <= ridge_cap * (1 + 1e-9):
            reg = cov + eps * scale * np.eye(cov.shape[0])
            try:
                np.linalg.cholesky(reg)
                return reg, eps
            except np.linalg.LinAlgError:
                eps *= 10.0
    raise DegenerateClassError(f"{what}: covariance is singular even with ridge {ridge_cap:g}")


def fit(samples, labels, kind: str, ridge: float = DEFAULT_RIDGE,
        ridge_cap: float = DEFAULT_RIDGE_CAP) -> DiscriminantModel:
    """Estimate class means, covariance structure and priors.

    Pooled covariance is the (N_k - 1)-weighted average of class sample
    covariances over N - K degrees of freedom; stratified types keep each
    class covariance.  Diagonal types zero the off-diagonal entries.
    A relative ridge is added only when a matrix is not positive definite.
    """
    kind = parse_type(kind)
    X = np.asarray(samples, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("samples must be (N, d) with one label per row")
    if not np.all(np.isfinite(X)):
        raise InvalidSampleError("training samples contain non-finite values")
    classes = tuple(sorted(int(c) for c in np.unique(y)))
    if len(classes) < 2:
        raise InsufficientDataError(f"need at least two classes, got {len(classes)}")
    n, d = X.shape
    need = 2 if kind in POOLED else d + 1
    groups = []
    for c in classes:
        Xk = X[y == c]
        if Xk.shape[0] < need:
            raise InsufficientDataError(
                f"class {c}: {Xk.shape[0]} samples, {kind} needs at least {need}")
        groups.append(Xk)

    means = np.stack([g.mean(axis=0) for g in groups])
    counts = np.array([g.shape[0] for g in groups], dtype=np.float64)
    priors = counts / n
    class_covs = [np.cov(g, rowvar=False, ddof=1).reshape(d, d) for g in groups]

    if kind in POOLED:
        scatter = sum((nk - 1) * S for nk, S in zip(counts, class_covs))
        raw = [scatter / (n - len(classes))]
        names = ["pooled"]
    else:
        raw = class_covs
        names = [f"class {c}" for c in classes]
    if kind in DIAGONAL:
        raw = [np.diag(np.diag(S)) for S in raw]

    covs, used = [], 0.0
    for S, what in zip(raw, names):
        if not np.any(S):
            raise DegenerateClassError(f"{what}: zero within-class variance")
        reg, eps = _regularize(S, ridge, ridge_cap, what)
        covs.append(reg)
        used = max(used, eps)
    return DiscriminantModel(kind, classes, means, np.stack(covs), priors, used)


# ---------------------------------------------------------------------------
# scoring


def _check_rows(X: np.ndarray, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != d:
        raise InvalidSampleError(f"expected {d} features, got {X.shape[1]}")
    bad = ~np.all(np.isfinite(X), axis=1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise InvalidSampleError(f"sample {i}: non-finite feature value")
    return X


def scores(model: DiscriminantModel, X) -> np.ndarray:
    """Discriminant scores, shape (N, K); larger is more likely."""
    X = _check_rows(X, model.n_features)
    out = np.empty((X.shape[0], len(model.classes)))
    for k in range(len(model.classes)):
        i = 0 if model.pooled else k
        z = solve_triangular(model._chol[i], (X - model.means[k]).T, lower=True)
        maha = np.sum(z * z, axis=0)
        if model.type == MAHALANOBIS:
            out[:, k] = -maha
        elif model.type in POOLED:
            out[:, k] = -0.5 * maha + math.log(model.priors[k])
        else:
            out[:, k] = -0.5 * model._logdet[i] - 0.5 * maha + math.log(model.priors[k])
    return out


def score(model: DiscriminantModel, x, k: int) -> float:
    if k not in model._index:
        raise KeyError(f"unknown class label {k}; model classes are {list(model.classes)}")
    return float(scores(model, x)[0, model._index[k]])


def classify(model: DiscriminantModel, x) -> int:
    """Arg-max class; exact ties go to the smallest label."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidSampleError("classify expects a single feature vector")
    return classify_batch(model, [x])[0]


def classify_batch(model: DiscriminantModel, xs) -> List[int]:
    xs = list(xs)
    if not xs:
        return []
    s = scores(model, np.stack([np.asarray(x, dtype=np.float64) for x in xs]))
    # classes are sorted, and argmax returns the first maximum
    return [model.classes[i] for i in np.argmax(s, axis=1)]


# ---------------------------------------------------------------------------
# persistence


def model_to_dict(model: DiscriminantModel) -> Dict:
    return {
        "version": MODEL_VERSION,
        "type": model.type,
        "classes": list(model.classes),
        "means": [float(v) for v in model.means.ravel()],
        "n_features": model.n_features,
        "pooled": model.pooled,
        "covariances": [float(v) for v in model.covariances.ravel()],
        "priors": [float(v) for v in model.priors],
        "ridge": model.ridge,
    }


def model_from_dict(data: Dict) -> DiscriminantModel:
    try:
        if data["version"] != MODEL_VERSION:
            raise ModelFormatError(f"unsupported model version {data['version']!r}")
        kind = parse_type(data["type"])
        classes = tuple(int(c) for c in data["classes"])
        k, d = len(classes), int(data["n_features"])
        n_cov = 1 if data["pooled"] else k
        if bool(data["pooled"]) != (kind in POOLED):
            raise ModelFormatError(f"pooled flag does not match type {kind}")
        means = np.array(data["means"], dtype=np.float64).reshape(k, d)
        covs = np.array(data["covariances"], dtype=np.float64).reshape(n_cov, d, d)
        priors = np.array(data["priors"], dtype=np.float64)
        return DiscriminantModel(kind, classes, means, covs, priors, float(data["ridge"]))
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, np.linalg.LinAlgError) as exc:
        raise ModelFormatError(f"malformed model: {exc}") from exc


def save_model(model: DiscriminantModel, path: Union[str, Path]) -> None:
    # json writes floats with repr(), which round-trips float64 exactly
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1))


def load_model(path: Union[str, Path]) -> DiscriminantModel:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not a JSON model file ({exc})") from exc
    return model_from_dict(data)


def fit_predict(sample, training, group, kind: str) -> List[int]:
    """Fit on (training, group) and label each row of ``sample``."""
    return classify_batch(fit(training, group, kind), np.atleast_2d(sample))
