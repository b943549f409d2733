"""Frequency-domain Riesz transforms and the monogenic signal.

First-order multipliers follow -i * u_j / |u| on the signed DFT grid,
with two discretization fixes that keep outputs exactly real:

* DC is hard-zeroed (the continuous transform is undefined at u = 0),
  so outputs are mean-free.
* On even-sized axes the Nyquist line is self-conjugate under index
  negation, where a purely imaginary multiplier would break Hermitian
  symmetry.  There the multiplier is rotated onto the real axis with
  its magnitude kept (value |u_j| / |u|).  Keeping the magnitude,
  rather than zeroing, preserves the all-pass property and the exact
  energy/reconstruction identities on even grids.

Higher-order transforms are products of the first-order multipliers,
so each output map costs a single FFT pair.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .image_core import as_image, fft2, freq_coords, ifft2

_cache_lock = threading.Lock()
_first_order_cache: dict = {}


def first_order_multipliers(height: int, width: int):
    """The pair (m1, m2) of first-order Riesz multipliers, cached per size."""
    key = (height, width)
    with _cache_lock:
        cached = _first_order_cache.get(key)
    if cached is not None:
        return cached
    u1, u2 = freq_coords(height, width)
    mag = np.hypot(u1, u2)
    mag[0, 0] = 1.0  # avoid division at DC; value overwritten below
    m1 = -1j * u1 / mag + np.zeros((height, width))
    m2 = -1j * u2 / mag + np.zeros((height, width))
    if height % 2 == 0:
        m1[height // 2, :] = np.abs(u1[height // 2, 0]) / mag[height // 2, :]
    if width % 2 == 0:
        m2[:, width // 2] = np.abs(u2[0, width // 2]) / mag[:, width // 2]
    m1[0, 0] = 0.0
    m2[0, 0] = 0.0
    m1.setflags(write=False)
    m2.setflags(write=False)
    with _cache_lock:
        _first_order_cache.setdefault(key, (m1, m2))
    return m1, m2


def riesz_multiplier(order, height: int, width: int) -> np.ndarray:
    """Composite multiplier for the Riesz transform of a given order.

    ``order`` is a pair (n1, n2) of non-negative integers with
    n1 + n2 >= 1.
    """
    n1, n2 = order
    if n1 < 0 or n2 < 0 or n1 + n2 < 1:
        raise ValueError(f"invalid Riesz order {order}")
    if height < 2 or width < 2:
        raise ValueError("grid must be at least 2x2")
    m1, m2 = first_order_multipliers(height, width)
    return m1**n1 * m2**n2


def riesz_transform(f: np.ndarray, order) -> np.ndarray:
    """Apply the Riesz transform of the given order in the frequency domain."""
    f = as_image(f)
    m = riesz_multiplier(order, *f.shape)
    return ifft2(m * fft2(f))


def adjoint_riesz_transform(f: np.ndarray, order) -> np.ndarray:
    """Adjoint of the Riesz transform (conjugated multiplier)."""
    f = as_image(f)
    m = riesz_multiplier(order, *f.shape)
    return ifft2(np.conj(m) * fft2(f))


def steered_multiplier(phi: float, height: int, width: int) -> np.ndarray:
    """Fused first-order multiplier of the direction (cos phi, sin phi)."""
    m1, m2 = first_order_multipliers(height, width)
    return math.cos(phi) * m1 + math.sin(phi) * m2


def hilbert_steered(f: np.ndarray, phi: float) -> np.ndarray:
    """Directional Hilbert transform cos(phi)*R1 f + sin(phi)*R2 f."""
    f = as_image(f)
    return ifft2(steered_multiplier(phi, *f.shape) * fft2(f))


def hilbert2_steered(f: np.ndarray, phi: float) -> np.ndarray:
    """Second-order directional Hilbert transform (squared steered multiplier)."""
    f = as_image(f)
    m = steered_multiplier(phi, *f.shape)
    return ifft2(m * m * fft2(f))


@dataclass(frozen=True)
class MonogenicSignal:
    f: np.ndarray
    f1: np.ndarray  # R1 f
    f2: np.ndarray  # R2 f


def monogenic(f: np.ndarray) -> MonogenicSignal:
    """Bundle the signal with its two first-order Riesz components."""
    f = as_image(f)
    spec = fft2(f)
    m1, m2 = first_order_multipliers(*f.shape)
    return MonogenicSignal(f=f, f1=ifft2(m1 * spec), f2=ifft2(m2 * spec))


def local_amplitude(m: MonogenicSignal) -> np.ndarray:
    """Pointwise sqrt(f^2 + f1^2 + f2^2)."""
    return np.sqrt(m.f**2 + m.f1**2 + m.f2**2)


def local_orientation(m: MonogenicSignal) -> np.ndarray:
    """Pointwise angle atan(f2/f1); degenerate pixels map to 0 or pi/2."""
    out = np.zeros_like(m.f1)
    axis = m.f1 == 0
    np.divide(m.f2, m.f1, out=out, where=~axis)
    out = np.arctan(out)
    out[axis & (m.f2 != 0)] = np.pi / 2
    return out


def local_phase(m: MonogenicSignal) -> np.ndarray:
    """Pointwise phase atan(sqrt(f1^2+f2^2)/f) in (-pi/2, pi/2].

    Pixels with f = 0 but nonzero Riesz part map to pi/2; fully zero
    pixels map to 0.
    """
    s = np.hypot(m.f1, m.f2)
    even = m.f == 0
    ratio = np.zeros_like(s)
    np.divide(s, m.f, out=ratio, where=~even)
    out = np.arctan(ratio)
    out[even & (s > 0)] = np.pi / 2
    return out


def enumerate_orders(order_total: int):
    """All multi-indices (n1, n2) with n1 + n2 = N, in n1-descending order."""
    if order_total < 1:
        raise ValueError("transform order must be >= 1")
    return [(order_total - n2, n2) for n2 in range(order_total + 1)]


def multinomial_weight(order) -> float:
    """N! / (n1! * n2!) for a multi-index of order N."""
    n1, n2 = order
    return float(math.comb(n1 + n2, n1))


def reconstruct_from_order(components) -> np.ndarray:
    """Reassemble the DC-free signal from all order-N Riesz components.

    ``components`` pairs each multi-index (n1, n2) with the map R^n f;
    the set must enumerate all indices of one order N.  Returns
    sum over |n| = N of (N!/n!) * adjoint(R^n)(R^n f).
    """
    orders = [tuple(order) for order, _ in components]
    if not orders:
        raise ValueError("empty component list")
    order_total = sum(orders[0])
    if sorted(orders) != sorted(enumerate_orders(order_total)):
        raise ValueError(
            f"components must enumerate all multi-indices of order {order_total}"
        )
    total = None
    for order, g in components:
        term = multinomial_weight(order) * adjoint_riesz_transform(g, order)
        total = term if total is None else total + term
    return total


def energy_identity(f: np.ndarray, order_total: int):
    """Both sides of the order-N energy identity.

    Returns (lhs, rhs) with lhs = sum (N!/n!) ||R^n f||^2 and
    rhs = ||f - mean(f)||^2.
    """
    f = as_image(f)
    lhs = 0.0
    for order in enumerate_orders(order_total):
        lhs += multinomial_weight(order) * float(
            np.sum(riesz_transform(f, order) ** 2)
        )
    rhs = float(np.sum((f - f.mean()) ** 2))
    return lhs, rhs
