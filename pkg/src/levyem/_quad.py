"""Quadrature for slowly decaying oscillatory power integrals.

The workhorse is ``cos_power_tail``, which evaluates
``int_lower^inf cos(omega z) z**(-p) dz`` for ``p > 1`` by Gauss-Legendre on
panels aligned with half periods and octaves, and an integration-by-parts
expansion beyond a cutoff where ``omega * z`` is large.
"""

from functools import lru_cache
from math import factorial

import numpy as np

from .errors import NumericalFailure

_CUTOFF_PHASE = 200.0
_LOW_ORDER, _HIGH_ORDER = 20, 30


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _panels(lower, upper, omega):
    pts = [lower, upper]
    b = 2.0 * lower
    while b < upper:
        pts.append(b)
        b *= 2.0
    half = np.pi / omega
    k0 = int(np.floor(lower / half)) + 1
    k1 = int(np.ceil(upper / half))
    pts.extend(half * np.arange(k0, k1))
    pts = np.unique(np.asarray(pts, dtype=np.float64))
    return pts[(pts >= lower) & (pts <= upper)]


def _panel_sum(f, edges, order):
    x, w = gauss_legendre(order)
    a = edges[:-1, None]
    h = (edges[1:] - edges[:-1])[:, None]
    return float(np.sum(h * w * f(a + h * x)))


def _ibp_tail(omega, p, z):
    # int_z^inf e^{i omega t} t^{-p} dt = -(e^{i omega z} z^{-p} / (i omega)) sum_k (p)_k / (i omega z)^k
    iwz = 1j * omega * z
    total = 0.0 + 0.0j
    term = 1.0 + 0.0j
    prev = np.inf
    for k in range(200):
        if k:
            term = term * (p + k - 1) / iwz
        if abs(term) > prev:
            raise NumericalFailure("asymptotic tail expansion diverged", achieved_error=prev)
        total += term
        prev = abs(term)
        if prev < 1e-18 * abs(total):
            break
    return (-np.exp(iwz) * z ** (-p) / (1j * omega) * total).real


def cos_power_tail(omega, p, lower, tol=None):
    """``int_lower^inf cos(omega z) z**(-p) dz`` with ``omega > 0``, ``p > 1``, ``lower > 0``.

    Returns ``(value, error_estimate)``. With ``tol`` given, an estimate above
    it raises ``NumericalFailure``; callers that rescale the integral check the
    rescaled error themselves.
    """
    if omega <= 0 or p <= 1 or lower <= 0:
        raise ValueError("need omega > 0, p > 1, lower > 0")
    cutoff = max(lower, _CUTOFF_PHASE / omega)

    def f(z):
        return np.cos(omega * z) * z ** (-p)

    body = err = 0.0
    if cutoff > lower:
        edges = _panels(lower, cutoff, omega)
        lo = _panel_sum(f, edges, _LOW_ORDER)
        body = _panel_sum(f, edges, _HIGH_ORDER)
        err = abs(body - lo)
    value = body + _ibp_tail(omega, p, cutoff)
    # rounding floor relative to the dominant scale of the integrand
    err += 1e-15 * lower ** (1.0 - p) / (p - 1.0)
    if tol is not None and err > tol:
        raise NumericalFailure(
            f"oscillatory quadrature error {err:.3g} exceeds tolerance {tol:.3g}",
            achieved_error=err,
        )
    return value, err


def one_minus_cos_head(alpha, x):
    """``int_0^x (1 - cos u) u**(-1-alpha) du`` for ``0 <= x <= 2`` by its power series."""
    if x == 0:
        return 0.0
    total = 0.0
    for k in range(1, 60):
        term = x ** (2 * k - alpha) / (factorial(2 * k) * (2 * k - alpha))
        total += term if k % 2 else -term
        if abs(term) <= 1e-18 * abs(total):
            break
    return total


def one_minus_cos_integral(alpha, tol=1e-12):
    """``int_0^inf (1 - cos u) u**(-1-alpha) du`` for ``0 < alpha < 2``."""
    tail, _ = cos_power_tail(1.0, 1.0 + alpha, 1.0, tol)
    return one_minus_cos_head(alpha, 1.0) + 1.0 / alpha - tail
