"""Classifiers over pooled feature vectors.

Two classifiers are provided: a nearest-subspace PCA classifier
(per-class mean plus principal subspace, smallest projection residual
wins) operating on raw features, and a linear one-vs-rest max-margin
classifier trained by seeded stochastic subgradient descent on
hinge loss + L2, operating on max-abs normalized features.

Ties are always broken toward the smallest class id.  Models
round-trip bit-exactly through a plain-text serialization.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

MODEL_FORMAT_VERSION = "riesz-model v1"


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"expected a non-empty 2d feature matrix, got {X.shape}")
    return X


@dataclass(frozen=True)
class MaxAbsNormalizer:
    scales: np.ndarray  # positive, per coordinate

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.scales.shape[0]:
            raise ValueError("feature dimension mismatch")
        return X / self.scales


def maxabs_fit(X) -> MaxAbsNormalizer:
    """Per-coordinate max absolute value over the training set; zeros map to 1."""
    X = _as_matrix(X)
    scales = np.abs(X).max(axis=0)
    scales[scales == 0] = 1.0
    return MaxAbsNormalizer(scales=scales)


@dataclass(frozen=True)
class PcaClassModel:
    means: np.ndarray  # (classes, dim)
    bases: tuple  # per class: (dim, d_c) with orthonormal columns
    components: int


def pca_fit(X, y, components: int) -> PcaClassModel:
    """Per-class mean and top-d principal directions via thin SVD."""
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if components < 1:
        raise ValueError("component count must be >= 1")
    class_count = int(y.max()) + 1
    means = np.zeros((class_count, X.shape[1]))
    bases = []
    for c in range(class_count):
        rows = X[y == c]
        if rows.shape[0] < 2:
            raise ValueError(f"class {c} has fewer than 2 training samples")
        means[c] = rows.mean(axis=0)
        centered = rows - means[c]
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        rank = int(np.sum(s > s[0] * max(centered.shape) * np.finfo(float).eps))
        d = min(components, max(rank, 1))
        if d < components:
            warnings.warn(
                f"class {c}: requested {components} components, "
                f"rank allows only {d}",
                stacklevel=2,
            )
        bases.append(vt[:d].T.copy())
    return PcaClassModel(means=means, bases=tuple(bases), components=components)


def pca_residuals(model: PcaClassModel, X) -> np.ndarray:
    """Projection residual norm of each sample against each class subspace."""
    X = _as_matrix(np.atleast_2d(X))
    if X.shape[1] != model.means.shape[1]:
        raise ValueError("feature dimension mismatch")
    res = np.empty((X.shape[0], model.means.shape[0]))
    for c, basis in enumerate(model.bases):
        centered = X - model.means[c]
        residual = centered - (centered @ basis) @ basis.T
        res[:, c] = np.linalg.norm(residual, axis=1)
    return res


def pca_predict(model: PcaClassModel, X) -> np.ndarray:
    """Class of the smallest projection residual (argmin keeps lowest id)."""
    return np.argmin(pca_residuals(model, X), axis=1)


@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray  # (classes, dim)
    biases: np.ndarray  # (classes,)
    reg: float
    epochs: int
    seed: int
    normalizer: MaxAbsNormalizer | None = None


def svm_fit(
    X,
    y,
    reg: float = 1e-4,
    epochs: int = 50,
    seed: int = 0,
    normalizer: MaxAbsNormalizer | None = None,
) -> SvmModel:
    """One-vs-rest linear hinge-loss classifiers, Pegasos-style SGD.

    Step size 1/(reg * t + 1): same 1/(reg*t) asymptotics, but bounded
    early steps so the unregularized bias stays stable.  The bias is
    updated on margin violations but not shrunk.  Training order is
    fully determined by the seed.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    class_count = int(y.max()) + 1
    if class_count < 2:
        raise ValueError("need at least 2 classes")
    if normalizer is not None:
        X = normalizer.apply(X)
    n, dim = X.shape
    signs = np.where(y[:, None] == np.arange(class_count)[None, :], 1.0, -1.0)
    w = np.zeros((class_count, dim))
    b = np.zeros(class_count)
    rng = np.random.default_rng(seed)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (reg * t + 1.0)
            x = X[i]
            s = signs[i]
            margin = s * (w @ x + b)
            w *= 1.0 - eta * reg
            violated = margin < 1.0
            if np.any(violated):
                upd = eta * s * violated
                w += upd[:, None] * x[None, :]
                b += upd
    return SvmModel(
        weights=w, biases=b, reg=reg, epochs=epochs, seed=seed, normalizer=normalizer
    )


def svm_scores(model: SvmModel, X) -> np.ndarray:
    X = _as_matrix(np.atleast_2d(X))
    if X.shape[1] != model.weights.shape[1]:
        raise ValueError("feature dimension mismatch")
    if model.normalizer is not None:
        X = model.normalizer.apply(X)
    return X @ model.weights.T + model.biases


def svm_predict(model: SvmModel, X) -> np.ndarray:
    """Class of the highest decision score (argmax keeps lowest id on ties)."""
    return np.argmax(svm_scores(model, X), axis=1)


def predict(model, X) -> np.ndarray:
    if isinstance(model, PcaClassModel):
        return pca_predict(model, X)
    if isinstance(model, SvmModel):
        return svm_predict(model, X)
    raise TypeError(f"unknown model type {type(model).__name__}")


def evaluate(model, X, y):
    """Accuracy and per-class confusion matrix (rows = true class)."""
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise ValueError("empty test set")
    pred = predict(model, X)
    class_count = int(max(y.max(), pred.max())) + 1
    confusion = np.zeros((class_count, class_count), dtype=np.int64)
    np.add.at(confusion, (y, pred), 1)
    accuracy = float(np.mean(pred == y))
    return accuracy, confusion


def _parse_row(line: str) -> np.ndarray:
    return np.array([float(t) for t in line.split()])


def _fmt_row(row) -> str:
    return " ".join(format(float(v), ".17g") for v in np.atleast_1d(row))


def save_model(model, path):
    """Write a model as versioned plain text with full decimal precision."""
    lines = [MODEL_FORMAT_VERSION]
    if isinstance(model, PcaClassModel):
        lines.append("kind pca")
        lines.append(f"classes {model.means.shape[0]} dim {model.means.shape[1]}")
        lines.append(f"components {model.components}")
        for c, basis in enumerate(model.bases):
            lines.append(f"class {c} retained {basis.shape[1]}")
            lines.append(_fmt_row(model.means[c]))
            for j in range(basis.shape[1]):
                lines.append(_fmt_row(basis[:, j]))
    elif isinstance(model, SvmModel):
        lines.append("kind svm")
        lines.append(f"classes {model.weights.shape[0]} dim {model.weights.shape[1]}")
        lines.append(
            f"hyper reg {format(model.reg, '.17g')} "
            f"epochs {model.epochs} seed {model.seed}"
        )
        lines.append(f"normalized {int(model.normalizer is not None)}")
        if model.normalizer is not None:
            lines.append(_fmt_row(model.normalizer.scales))
        for row in model.weights:
            lines.append(_fmt_row(row))
        lines.append(_fmt_row(model.biases))
    else:
        raise TypeError(f"unknown model type {type(model).__name__}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path):
    with open(path, encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != MODEL_FORMAT_VERSION:
        raise ValueError(f"{path}: unrecognized model format")
    kind = lines[1].split()[1]
    _, classes, _, dim = lines[2].split()
    classes, dim = int(classes), int(dim)
    if kind == "pca":
        components = int(lines[3].split()[1])
        means = np.zeros((classes, dim))
        bases = []
        pos = 4
        for c in range(classes):
            retained = int(lines[pos].split()[3])
            pos += 1
            means[c] = _parse_row(lines[pos])
            pos += 1
            basis = np.empty((dim, retained))
            for j in range(retained):
                basis[:, j] = _parse_row(lines[pos])
                pos += 1
            bases.append(basis)
        return PcaClassModel(means=means, bases=tuple(bases), components=components)
    if kind == "svm":
        hyper = lines[3].split()
        reg, epochs, seed = float(hyper[2]), int(hyper[4]), int(hyper[6])
        pos = 4
        normalizer = None
        if lines[pos].split()[1] == "1":
            pos += 1
            normalizer = MaxAbsNormalizer(scales=_parse_row(lines[pos]))
        pos += 1
        weights = np.empty((classes, dim))
        for c in range(classes):
            weights[c] = _parse_row(lines[pos])
            pos += 1
        biases = _parse_row(lines[pos])
        return SvmModel(
            weights=weights,
            biases=biases,
            reg=reg,
            epochs=epochs,
            seed=seed,
            normalizer=normalizer,
        )
    raise ValueError(f"{path}: unknown model kind {kind!r}")
