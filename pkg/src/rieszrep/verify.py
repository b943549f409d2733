"""Executable property suite over seeded random inputs.

Each property is a named check with a tolerance and a measured value;
the CLI `verify` subcommand runs all of them and exits nonzero if any
fails.  A fault-injection hook (bypassing the DC zeroing of the
multipliers) exists so the suite itself can be tested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import representation, riesz
from .image_core import fft2, freq_coords, ifft2
from .representation import RieszConfig, extract_features, layer_S


@dataclass(frozen=True)
class PropertyResult:
    name: str
    tolerance: float
    measured: float

    @property
    def passed(self) -> bool:
        return self.measured <= self.tolerance


def _random_image(rng, height=32, width=32, mean_free=False):
    f = rng.standard_normal((height, width))
    if mean_free:
        f -= f.mean()
    return f


def _relative(err, ref):
    return float(err / ref) if ref > 0 else float(err)


def _faulty_multiplier(order, height, width):
    # DC left at the raw formula value instead of 0 (division by |u|=1 stub)
    m = riesz.riesz_multiplier(order, height, width).copy()
    m[0, 0] = 1.0
    return m


def run_all(seed: int = 0, inject_fault: str | None = None):
    """Run every property; returns a list of PropertyResult."""
    rng = np.random.default_rng(seed)
    results = []

    multiplier = riesz.riesz_multiplier
    if inject_fault == "dc-not-zeroed":
        multiplier = _faulty_multiplier
    elif inject_fault is not None:
        raise ValueError(f"unknown fault {inject_fault!r}")

    # DFT round trip and Parseval
    worst = 0.0
    for h, w in ((8, 8), (31, 17), (64, 64)):
        f = _random_image(rng, h, w)
        worst = max(worst, np.linalg.norm(ifft2(fft2(f)) - f) / np.linalg.norm(f))
    results.append(PropertyResult("dft-round-trip", 1e-10, worst))
    f = _random_image(rng, 33, 16)
    spec = fft2(f)
    par = abs(np.sum(f**2) - np.sum(np.abs(spec) ** 2) / f.size) / np.sum(f**2)
    results.append(PropertyResult("dft-parseval", 1e-10, float(par)))

    # energy identity / reconstruction (Theorems on the DC-free part)
    worst_e = worst_r = 0.0
    for _ in range(5):
        f = _random_image(rng, 32, 32, mean_free=True)
        for n_total in (1, 2):
            lhs, rhs = riesz.energy_identity(f, n_total)
            worst_e = max(worst_e, abs(lhs - rhs) / rhs)
            comps = [
                (order, riesz.riesz_transform(f, order))
                for order in riesz.enumerate_orders(n_total)
            ]
            rec = riesz.reconstruct_from_order(comps)
            worst_r = max(worst_r, np.linalg.norm(rec - f) / np.linalg.norm(f))
    results.append(PropertyResult("energy-identity", 1e-8, worst_e))
    results.append(PropertyResult("order-reconstruction", 1e-8, worst_r))

    # all-pass of the first-order pair (unit energy off DC, zero at DC)
    m1 = multiplier((1, 0), 64, 64)
    m2 = multiplier((0, 1), 64, 64)
    energy = np.abs(m1) ** 2 + np.abs(m2) ** 2
    expected = np.ones_like(energy)
    expected[0, 0] = 0.0
    results.append(
        PropertyResult("all-pass", 1e-12, float(np.abs(energy - expected).max()))
    )

    # zero integral of the base-filter impulse response (DC of both parts)
    worst_z = 0.0
    for h, w in ((33, 33), (64, 64)):
        impulse = np.zeros((h, w))
        impulse[0, 0] = 1.0
        for k in range(4):
            real_part, imag_part = representation.base_response(impulse, k, 4)
            worst_z = max(worst_z, abs(real_part.sum()), abs(imag_part.sum()))
        dc = abs(multiplier((1, 0), h, w)[0, 0])
        worst_z = max(worst_z, float(dc))
    results.append(PropertyResult("zero-integral", 1e-8, worst_z))

    # steered Hilbert norm bounds (8 random angles)
    worst_h = 0.0
    for _ in range(8):
        phi = rng.uniform(0, 2 * np.pi)
        f = _random_image(rng, 32, 32, mean_free=True)
        e = np.sum(f**2)
        h1 = np.sum(riesz.hilbert_steered(f, phi) ** 2)
        h1b = np.sum(riesz.hilbert_steered(f, phi + np.pi / 2) ** 2)
        h2 = np.sum(riesz.hilbert2_steered(f, phi) ** 2)
        worst_h = max(worst_h, (h1 + h1b) / e - 1.0, h2 / e - 1.0)
    results.append(PropertyResult("steered-norm-bound", 1e-10, worst_h))

    # contraction up to order 3
    worst_c = 0.0
    f = _random_image(rng, 32, 32)
    for n_total in (1, 2, 3):
        for order in riesz.enumerate_orders(n_total):
            ratio = np.linalg.norm(riesz.riesz_transform(f, order)) / np.linalg.norm(f)
            worst_c = max(worst_c, ratio - 1.0)
    results.append(PropertyResult("contraction", 1e-10, worst_c))

    # translation equivariance of R^n and invariance of the pooled features
    f = _random_image(rng, 32, 32)
    shift = (int(rng.integers(1, 31)), int(rng.integers(1, 31)))
    g = np.roll(f, shift, axis=(0, 1))
    err = np.linalg.norm(
        riesz.riesz_transform(g, (1, 1))
        - np.roll(riesz.riesz_transform(f, (1, 1)), shift, axis=(0, 1))
    )
    results.append(
        PropertyResult(
            "translation-equivariance", 1e-10, _relative(err, np.linalg.norm(f))
        )
    )
    cfg = RieszConfig(depth=2, angles=4)
    pf = extract_features(f, cfg)
    pg = extract_features(g, cfg)
    results.append(
        PropertyResult(
            "shift-invariant-features",
            1e-10,
            _relative(np.abs(pf - pg).max(), np.abs(pf).max()),
        )
    )

    # layer nonexpansiveness with C = 1/M
    cfg_ne = RieszConfig(depth=1, angles=4, scale_constant=0.25)
    worst_n = 0.0
    for _ in range(20):
        f = _random_image(rng, 16, 16)
        g = _random_image(rng, 16, 16)
        num = sum(
            np.sum((a - b) ** 2)
            for a, b in zip(layer_S(f, cfg_ne), layer_S(g, cfg_ne))
        )
        worst_n = max(worst_n, num / np.sum((f - g) ** 2) - 1.0)
    results.append(PropertyResult("layer-nonexpansive", 1e-10, worst_n))

    # approximate scale equivariance on a low-pass family
    worst_s = 0.0
    for _ in range(3):
        f = lowpass_image(rng, 64, 64, cutoff=0.1)
        coarse = block_average(f)
        for order in ((1, 0), (0, 1)):
            a = riesz.riesz_transform(coarse, order)
            b = block_average(riesz.riesz_transform(f, order))
            worst_s = max(worst_s, np.linalg.norm(a - b) / np.linalg.norm(b))
    results.append(PropertyResult("scale-equivariance", 0.05, worst_s))

    return results


def lowpass_image(rng, height, width, cutoff=0.1):
    """Unit-norm random image with spectrum supported in |u| < cutoff."""
    spec = rng.standard_normal((height, width)) + 1j * rng.standard_normal(
        (height, width)
    )
    u1, u2 = freq_coords(height, width)
    spec = np.where(np.hypot(u1, u2) < cutoff, spec, 0)
    f = np.fft.ifft2(spec).real
    return f / np.linalg.norm(f)


def block_average(f: np.ndarray) -> np.ndarray:
    """Downscale by 2 with non-overlapping 2x2 block means."""
    h, w = f.shape
    return f[: h - h % 2, : w - w % 2].reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))
