"""Hierarchical Riesz feature representation.

One layer convolves the input with M rotated complex base filters
(first-order steered Hilbert response as imaginary part, second-order
as real part), scales by the constant C, and takes the pointwise
amplitude.  Layers are stacked to depth K; global pooling of every
intermediate map yields the translation-invariant feature vector.

Feature maps are ordered depth-major, then lexicographically by the
sequence of rotation indices, so the empty path (the raw input) comes
first.  With mean pooling the representation is exactly invariant to
circular shifts.  Max pooling is also provided but does not preserve
nonexpansiveness of the layer operator.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass

import numpy as np

from .image_core import as_image, fft2, freq_coords, ifft2
from .riesz import first_order_multipliers

_POOLINGS = ("mean", "max")

_bank_lock = threading.Lock()
_bank_cache: dict = {}


@dataclass(frozen=True)
class RieszConfig:
    depth: int = 3
    angles: int = 4
    scale_constant: float = 1.0
    pooling: str = "mean"
    presmooth_sigma: float | None = None

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.angles < 1 or self.angles % 4 != 0:
            raise ValueError("angle count must be a positive multiple of 4")
        if self.scale_constant <= 0:
            raise ValueError("scale constant must be positive")
        if self.pooling not in _POOLINGS:
            raise ValueError(f"pooling must be one of {_POOLINGS}")
        if self.presmooth_sigma is not None and self.presmooth_sigma <= 0:
            raise ValueError("presmooth sigma must be positive")


def feature_count(depth: int, angles: int) -> int:
    """Total number of feature maps: sum of M^k for k = 0..K."""
    return sum(angles**k for k in range(depth + 1))


def feature_paths(depth: int, angles: int):
    """All rotation-index paths up to length K, depth-major lexicographic."""
    paths = []
    for k in range(depth + 1):
        paths.extend(itertools.product(range(angles), repeat=k))
    return paths


def path_label(path) -> str:
    """Column name for a feature path, e.g. '[]', '[0]', '[2,1,3]'."""
    return "[" + ",".join(str(i) for i in path) + "]"


def parse_path_label(label: str):
    label = label.strip()
    if not (label.startswith("[") and label.endswith("]")):
        raise ValueError(f"malformed feature path label {label!r}")
    inner = label[1:-1].strip()
    if not inner:
        return ()
    return tuple(int(t) for t in inner.split(","))


def steered_bank(angles: int, height: int, width: int):
    """First-order steered multipliers for the angles k*pi/M, cached."""
    key = (angles, height, width)
    with _bank_lock:
        cached = _bank_cache.get(key)
    if cached is not None:
        return cached
    m1, m2 = first_order_multipliers(height, width)
    bank = tuple(
        math.cos(k * math.pi / angles) * m1 + math.sin(k * math.pi / angles) * m2
        for k in range(angles)
    )
    with _bank_lock:
        _bank_cache.setdefault(key, bank)
    return bank


def base_response(f: np.ndarray, angle_index: int, angles: int):
    """Complex base-filter response at angle k*pi/M.

    Returns (real_part, imag_part): the second- and first-order steered
    Hilbert responses of f.
    """
    f = as_image(f)
    if not 0 <= angle_index < angles:
        raise ValueError(f"angle index {angle_index} out of range for M={angles}")
    m = steered_bank(angles, *f.shape)[angle_index]
    spec = fft2(f)
    return ifft2(m * m * spec), ifft2(m * spec)


def layer_S(f: np.ndarray, config: RieszConfig):
    """One transformation layer: C * amplitude of each rotated base response."""
    f = as_image(f)
    spec = fft2(f)
    out = []
    for m in steered_bank(config.angles, *f.shape):
        imag_part = ifft2(m * spec)
        real_part = ifft2(m * m * spec)
        out.append(config.scale_constant * np.hypot(real_part, imag_part))
    return out


def build_hierarchy(f: np.ndarray, config: RieszConfig):
    """All feature maps up to depth K, keyed by rotation-index path."""
    f = as_image(f)
    if config.presmooth_sigma is not None:
        f = gaussian_presmooth(f, config.presmooth_sigma)
    maps = {(): f}
    level = [((), f)]
    for _ in range(config.depth):
        nxt = []
        for path, g in level:
            for idx, h in enumerate(layer_S(g, config)):
                nxt.append((path + (idx,), h))
        maps.update(nxt)
        level = nxt
    return maps


def pool_global(feature_map: np.ndarray, kind: str) -> float:
    """Reduce a feature map to one scalar by global mean or max."""
    feature_map = as_image(feature_map)
    if kind == "mean":
        return float(feature_map.mean())
    if kind == "max":
        return float(feature_map.max())
    raise ValueError(f"pooling must be one of {_POOLINGS}")


def extract_features(f: np.ndarray, config: RieszConfig) -> np.ndarray:
    """Pooled feature vector over all paths, in the fixed path order.

    Only the current depth level is kept in memory; the pooled scalars
    are accumulated depth by depth.
    """
    f = as_image(f)
    if config.presmooth_sigma is not None:
        f = gaussian_presmooth(f, config.presmooth_sigma)
    values = [pool_global(f, config.pooling)]
    level = [f]
    for _ in range(config.depth):
        nxt = []
        for g in level:
            nxt.extend(layer_S(g, config))
        values.extend(pool_global(g, config.pooling) for g in nxt)
        level = nxt
    return np.array(values)


def write_features_csv(path, matrix, paths, labels=None):
    """Write one feature row per image; column names are path labels.

    Column names contain commas, so fields are quoted per standard CSV
    rules.  Values use full decimal (round-trippable) precision; an
    optional integer label column comes last.
    """
    import csv

    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    header = [path_label(p) for p in paths]
    if matrix.shape[1] != len(header):
        raise ValueError("feature matrix width does not match path count")
    if labels is not None and len(labels) != matrix.shape[0]:
        raise ValueError("label count does not match row count")
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header + (["label"] if labels is not None else []))
        for i, row in enumerate(matrix):
            out = [format(v, ".17g") for v in row]
            if labels is not None:
                out.append(str(int(labels[i])))
            writer.writerow(out)


def read_features_csv(path):
    """Read a feature CSV; returns (matrix, paths, labels-or-None)."""
    import csv

    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty feature file") from None
        has_labels = bool(header) and header[-1] == "label"
        paths = [parse_path_label(h) for h in (header[:-1] if has_labels else header)]
        rows, labels = [], []
        for row in reader:
            if not row:
                continue
            if has_labels:
                rows.append([float(v) for v in row[:-1]])
                labels.append(int(row[-1]))
            else:
                rows.append([float(v) for v in row])
    if not rows:
        raise ValueError(f"{path}: feature file has no data rows")
    matrix = np.array(rows)
    return matrix, paths, (np.array(labels) if has_labels else None)


def gaussian_presmooth(f: np.ndarray, sigma: float) -> np.ndarray:
    """Periodic Gaussian smoothing realized in the frequency domain."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    f = as_image(f)
    u1, u2 = freq_coords(*f.shape)
    kernel = np.exp(-2 * np.pi**2 * sigma**2 * (u1**2 + u2**2))
    return ifft2(kernel * fft2(f))
