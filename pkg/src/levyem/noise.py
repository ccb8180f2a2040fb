"""Normalization constants and exact samplers for rotationally invariant stable noise.

All samplers draw from counter-based Philox4x64-10 streams keyed by
``(seed, stream_id)``. Draw ``i`` of a sampler reads a fixed block of counters,
so any draw can be regenerated without replaying the ones before it.
"""

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np
from scipy import integrate

from . import _backend
from ._quad import one_minus_cos_integral
from .errors import DomainError

ALPHA_MARGIN = 1e-9

KIND_SYM1D, KIND_ISO, KIND_POS, KIND_PARETO = 0, 1, 2, 3

_U64 = 2**64


def check_alpha(alpha):
    """Reject stability indices outside the open interval (1, 2)."""
    alpha = float(alpha)
    if not (1.0 + ALPHA_MARGIN < alpha < 2.0 - ALPHA_MARGIN):
        raise DomainError(f"alpha must lie strictly inside (1, 2), got {alpha!r}")
    return alpha


def surface_area(d):
    """Surface area of the unit sphere in R^d, ``2 pi^(d/2) / Gamma(d/2)``."""
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d!r}")
    return 2.0 * pi ** (d / 2.0) / gamma(d / 2.0)


def c_d_alpha(d, alpha):
    """Closed-form constant making ``C * int (1 - cos<xi, y>) |y|^-(alpha+d) dy = |xi|^alpha``."""
    surface_area(d)
    alpha = check_alpha(alpha)
    return alpha * 2.0 ** (alpha - 1.0) * pi ** (-d / 2.0) * gamma((d + alpha) / 2.0) / gamma(1.0 - alpha / 2.0)


def _angular_moment(d, alpha):
    # int over S^{d-1} of |theta_1|^alpha
    if d == 1:
        return 2.0
    inner, _ = integrate.quad(
        lambda phi: np.cos(phi) ** alpha * np.sin(phi) ** (d - 2),
        0.0, pi / 2.0, epsabs=1e-15, epsrel=1e-13, limit=200,
    )
    return 2.0 * surface_area(d - 1) * inner


def levy_integral(d, alpha):
    """``int_{R^d \\ 0} (1 - cos y_1) |y|^-(alpha+d) dy`` by quadrature.

    Polar coordinates split it into an angular moment and the one-dimensional
    radial integral ``int_0^inf (1 - cos s) s^(-1-alpha) ds``.
    """
    surface_area(d)
    alpha = check_alpha(alpha)
    return _angular_moment(d, alpha) * one_minus_cos_integral(alpha)


def c_d_alpha_quadrature(d, alpha):
    """The same constant as :func:`c_d_alpha`, computed from its integral definition."""
    return 1.0 / levy_integral(d, alpha)


@dataclass(frozen=True)
class NoiseSpec:
    """Stability index and dimension together with the derived constants."""

    alpha: float
    dim: int = 1
    surface_area: float = field(init=False)
    c_d_alpha: float = field(init=False)
    sigma: float = field(init=False)

    def __post_init__(self):
        alpha = check_alpha(self.alpha)
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "dim", int(self.dim))
        s = surface_area(self.dim)
        c = c_d_alpha(self.dim, alpha)
        object.__setattr__(self, "surface_area", s)
        object.__setattr__(self, "c_d_alpha", c)
        object.__setattr__(self, "sigma", (alpha / (s * c)) ** (1.0 / alpha))


@dataclass(frozen=True)
class RngStream:
    """A Philox stream keyed by ``(seed, stream_id)``; both are 64-bit unsigned."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v < _U64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    def child(self, k):
        """A stream keyed by ``(seed, mix(stream_id, k))`` for independent sub-draws."""
        z = (self.stream_id * 0x9E3779B97F4A7C15 + (int(k) + 1) * 0xD1B54A32D192ED03) % _U64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) % _U64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) % _U64
        return RngStream(self.seed, z ^ (z >> 31))

    def raw(self, first_block, n_blocks):
        """Raw 64-bit words; four per counter block."""
        return _backend.kernels.philox_raw(self.seed, self.stream_id, first_block, n_blocks)

    def uniforms(self, first_block, n_blocks):
        """Uniforms on the open interval (0, 1), four per counter block."""
        raw = self.raw(first_block, n_blocks)
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def _draw(kind, d, alpha, rng, size, start):
    n = 1 if size is None else int(size)
    if n < 0:
        raise DomainError("size must be nonnegative")
    return _backend.kernels.draw_units(kind, d, alpha, rng.seed, rng.stream_id, start, n)


def _check_t(t):
    t = float(t)
    if not t > 0:
        raise DomainError(f"time must be positive, got {t!r}")
    return t


def sample_sym_stable_1d(spec, t, rng, size=None, start=0):
    """Symmetric stable variates with characteristic function ``exp(-t |xi|^alpha)``.

    Chambers-Mallows-Stuck construction scaled by ``t**(1/alpha)``. Returns a
    float when ``size`` is None, else an array of shape ``(size,)``.
    """
    if spec.dim != 1:
        raise DomainError("sample_sym_stable_1d needs a one-dimensional NoiseSpec")
    t = _check_t(t)
    x = t ** (1.0 / spec.alpha) * _draw(KIND_SYM1D, 1, spec.alpha, rng, size, start)[:, 0]
    return float(x[0]) if size is None else x


def sample_pos_stable(alpha_half, t, rng, size=None, start=0):
    """Positive stable variates with Laplace transform ``exp(-t lambda^alpha_half)``."""
    alpha_half = float(alpha_half)
    if not 0.5 < alpha_half < 1.0:
        raise DomainError(f"alpha_half must lie in (1/2, 1), got {alpha_half!r}")
    t = _check_t(t)
    x = t ** (1.0 / alpha_half) * _draw(KIND_POS, 1, alpha_half, rng, size, start)[:, 0]
    return float(x[0]) if size is None else x


def sample_isotropic_stable(spec, t, rng, size=None, start=0):
    """Rotationally invariant stable vectors via Gaussian subordination.

    Draws ``S`` with Laplace exponent ``lambda^(alpha/2)`` and returns
    ``sqrt(2 S) G``, whose characteristic function is ``exp(-t |xi|^alpha)``.
    Shape ``(dim,)`` when ``size`` is None, else ``(size, dim)``.
    """
    t = _check_t(t)
    x = t ** (1.0 / spec.alpha) * _draw(KIND_ISO, spec.dim, spec.alpha, rng, size, start)
    return x[0] if size is None else x


def sample_pareto_vec(spec, rng, size=None, start=0):
    """Pareto vectors with density ``alpha / (surface_area |z|^(alpha+d))`` on ``|z| > 1``."""
    x = _draw(KIND_PARETO, spec.dim, spec.alpha, rng, size, start)
    return x[0] if size is None else x


def uniform_directions(d, n, rng, start=0):
    """``n`` points uniform on the unit sphere in R^d, shape ``(n, d)``."""
    # the Pareto radius is independent of its direction; alpha only affects the radius
    z = _backend.kernels.draw_units(KIND_PARETO, d, 1.5, rng.seed, rng.stream_id, start, n)
    return z / np.linalg.norm(z, axis=1, keepdims=True)
