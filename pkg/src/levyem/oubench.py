"""Deterministic benchmark on the one-dimensional Ornstein-Uhlenbeck process ``dX = -X dt + dZ``.

The invariant law of the SDE is that of ``alpha^(-1/alpha) Z_1``, with
characteristic function ``exp(-|xi|^alpha / alpha)``. Both EM chains are
linear, so their invariant laws are infinite convolutions and their
characteristic functions are infinite products:

* stable scheme: ``prod_i exp(-eta (1-eta)^(alpha i) |xi|^alpha)``, which sums in
  closed form;
* Pareto scheme: ``prod_i phi((eta^(1/alpha) / sigma) (1-eta)^i xi)`` with ``phi``
  the characteristic function of a Pareto variate.

Integrating the difference against ``1`` over ``[-1, 1]`` gives the CF gap.
Since ``int_{-1}^1 e^(i xi x) d xi = 2 sin(x)/x`` and ``sin(x)/(M x)`` is
1-Lipschitz, ``|gap| / (2M)`` is a certified lower bound on W1 between the two
invariant laws.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from . import _backend
from ._quad import cos_power_tail, gauss_legendre
from .errors import DomainError, NumericalFailure
from .noise import KIND_ISO, KIND_SYM1D, NoiseSpec, check_alpha
from .scheme import Scheme

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_TAIL_TOL = 1e-12
TAIL_MARGIN = 1.0
# |xi| below this uses the power series of phi, above it the oscillatory quadrature
SERIES_LIMIT = 1.0
# product factors with argument above this are evaluated by quadrature
SERIES_FACTOR_LIMIT = 2.0
GAP_NODES = (24, 40)
EXACT_STREAM = 2**64 - 1


def _check_eta(eta):
    eta = float(eta)
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta must lie in (0, 1), got {eta!r}")
    return eta


def _sigma_alpha(alpha):
    spec = NoiseSpec(alpha, 1)
    return spec.sigma**alpha, spec.sigma


@dataclass(frozen=True)
class OUBenchConfig:
    alpha: float
    eta_grid: tuple
    quad_tol: float = DEFAULT_QUAD_TOL
    product_tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        grid = tuple(float(e) for e in self.eta_grid)
        if len(grid) < 1 or not all(0.0 < e < 1.0 for e in grid):
            raise DomainError("eta_grid entries must lie in (0, 1)")
        if any(b >= a for a, b in zip(grid, grid[1:])):
            raise DomainError("eta_grid must be strictly decreasing")
        if not (self.quad_tol > 0 and self.product_tail_tol > 0):
            raise DomainError("tolerances must be positive")
        object.__setattr__(self, "eta_grid", grid)


def exact_inv_cf(alpha, xi):
    """``exp(-|xi|^alpha / alpha)``, the CF of the OU invariant law."""
    alpha = check_alpha(alpha)
    return np.exp(-np.abs(xi) ** alpha / alpha)


def stable_scheme_inv_cf(alpha, eta, xi):
    """Invariant CF of the stable-noise chain, ``exp(-|xi|^alpha eta / (1 - (1-eta)^alpha))``."""
    alpha = check_alpha(alpha)
    eta = _check_eta(eta)
    g = eta / -np.expm1(alpha * np.log1p(-eta))
    return np.exp(-np.abs(xi) ** alpha * g)


def _pareto_cf_quad(alpha, u):
    # phi(u) = alpha u^alpha int_u^inf cos(t) t^(-alpha-1) dt
    scale = alpha * u**alpha
    val, err = cos_power_tail(1.0, alpha + 1.0, u)
    return scale * val, scale * err


def pareto_cf(alpha, xi, quad_tol=DEFAULT_QUAD_TOL):
    """CF of the symmetric Pareto law, ``1 - alpha int_1^inf (1 - cos(xi z)) z^(-alpha-1) dz``.

    Small arguments use the convergent expansion
    ``1 - sigma^alpha |xi|^alpha + alpha sum_k (-1)^(k+1) xi^(2k) / ((2k)! (2k - alpha))``;
    larger ones an oscillatory quadrature whose estimated error must stay
    below ``quad_tol``.
    """
    alpha = check_alpha(alpha)
    u = abs(float(xi))
    if u == 0.0:
        return 1.0
    if u < SERIES_LIMIT:
        sa, _ = _sigma_alpha(alpha)
        return 1.0 + float(_backend.kernels.phim1_series(np.array([u]), alpha, sa)[0])
    val, err = _pareto_cf_quad(alpha, u)
    if err > quad_tol:
        raise NumericalFailure(f"pareto_cf quadrature error {err:.3g} exceeds {quad_tol:.3g}",
                               achieved_error=err)
    return val


def truncation_index(alpha, eta, xi, tail_tol=DEFAULT_TAIL_TOL, margin=TAIL_MARGIN):
    """Smallest ``I`` with ``eta |xi|^alpha q^I / (1 - q) (1 + margin) < tail_tol``, ``q = (1-eta)^alpha``."""
    log_q = alpha * np.log1p(-eta)
    g = eta / -np.expm1(log_q)
    lead = g * abs(xi) ** alpha * (1.0 + margin)
    if lead < tail_tol:
        return 0
    return int(np.ceil(np.log(tail_tol / lead) / log_q))


def pareto_scheme_inv_cf(alpha, eta, xi, tail_tol=DEFAULT_TAIL_TOL, quad_tol=DEFAULT_QUAD_TOL):
    """Invariant CF of the Pareto-noise chain as a truncated infinite product.

    Keeps factors ``i < I`` (see :func:`truncation_index`) and replaces the
    rest by their leading order ``exp(-eta |xi|^alpha q^I / (1 - q))``.
    Raises :class:`NumericalFailure` if a retained factor is not positive.
    """
    alpha = check_alpha(alpha)
    eta = _check_eta(eta)
    xi = abs(float(xi))
    if xi == 0.0:
        return 1.0
    sa, sigma = _sigma_alpha(alpha)
    u0 = eta ** (1.0 / alpha) / sigma * xi
    ratio = 1.0 - eta
    n = truncation_index(alpha, eta, xi, tail_tol)

    log_prod = 0.0
    i = 0
    while i < n:
        u = u0 * ratio**i
        if u <= SERIES_FACTOR_LIMIT:
            break
        f, err = _pareto_cf_quad(alpha, u)
        if err > quad_tol:
            raise NumericalFailure(f"factor {i} quadrature error {err:.3g} exceeds {quad_tol:.3g}",
                                   achieved_error=err)
        if f <= 0.0:
            raise NumericalFailure(f"nonpositive product factor phi({u:.6g}) = {f:.6g} at index {i}")
        log_prod += np.log(f)
        i += 1
    if i < n:
        part = _backend.kernels.log_pareto_product(u0, ratio, i, n, alpha, sa)
        if not np.isfinite(part):
            raise NumericalFailure("nonpositive factor in the retained product range")
        log_prod += part
    log_q = alpha * np.log1p(-eta)
    tail = eta / -np.expm1(log_q) * xi**alpha * np.exp(n * log_q)
    return float(np.exp(log_prod - tail))


def _scheme_cf(scheme, alpha, eta, tail_tol, quad_tol):
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.STABLE:
        return lambda xi: stable_scheme_inv_cf(alpha, eta, xi)
    return lambda xi: pareto_scheme_inv_cf(alpha, eta, xi, tail_tol, quad_tol)


def _gap_rule(f, alpha, n):
    # xi = t^4 smooths the |xi|^alpha cusp at the origin
    t, w = gauss_legendre(n)
    xi = t**4
    diff = np.array([f(x) for x in xi]) - exact_inv_cf(alpha, xi)
    return 2.0 * float(np.sum(w * 4.0 * t**3 * diff))


def cf_gap_with_error(alpha, eta, scheme, quad_tol=DEFAULT_QUAD_TOL, tail_tol=DEFAULT_TAIL_TOL):
    """``(gap, error_estimate)``; the estimate compares two Gauss-Legendre orders."""
    alpha = check_alpha(alpha)
    eta = _check_eta(eta)
    f = _scheme_cf(scheme, alpha, eta, tail_tol, quad_tol)
    lo, hi = (_gap_rule(f, alpha, n) for n in GAP_NODES)
    return hi, abs(hi - lo)


def cf_gap(alpha, eta, scheme, quad_tol=DEFAULT_QUAD_TOL, tail_tol=DEFAULT_TAIL_TOL):
    """``int_{-1}^{1}`` (scheme invariant CF - exact invariant CF) ``d xi``."""
    gap, err = cf_gap_with_error(alpha, eta, scheme, quad_tol, tail_tol)
    if err > quad_tol:
        raise NumericalFailure(f"cf_gap quadrature error {err:.3g} exceeds {quad_tol:.3g}",
                               achieved_error=err)
    return gap


def _lipschitz_profile(x):
    return (x * np.cos(x) - np.sin(x)) / (x * x)


@lru_cache(maxsize=None)
def lipschitz_constant_M():
    """``(M, x*)`` with ``M = sup_x |(x cos x - sin x) / x^2|`` attained at ``x*``."""
    x = np.arange(1, 500001) * 1e-4
    k = int(np.argmax(np.abs(_lipschitz_profile(x))))
    res = minimize_scalar(lambda s: -abs(_lipschitz_profile(s)), bounds=(x[k] - 1e-4, x[k] + 1e-4),
                          method="bounded", options={"xatol": 1e-12})
    return float(-res.fun), float(res.x)


def witness_h(x):
    """``sin(x) / (M x)``, a 1-Lipschitz function, with ``h(0) = 1/M``."""
    M, _ = lipschitz_constant_M()
    return np.sinc(np.asarray(x, dtype=np.float64) / np.pi) / M


def lipschitz_witness_bound(alpha, eta, scheme, quad_tol=DEFAULT_QUAD_TOL, tail_tol=DEFAULT_TAIL_TOL):
    """Lower bound ``|cf_gap| / (2M)`` on W1 between the exact and the scheme invariant law."""
    M, _ = lipschitz_constant_M()
    return abs(cf_gap(alpha, eta, scheme, quad_tol, tail_tol)) / (2.0 * M)


def benchmark_table(config):
    """Rows ``(eta, gap_pareto, gap_stable, w1_lower_bound)`` over the grid, in grid order.

    ``w1_lower_bound`` refers to the Pareto scheme.
    """
    M, _ = lipschitz_constant_M()
    rows = []
    for eta in config.eta_grid:
        gp = cf_gap(config.alpha, eta, Scheme.PARETO, config.quad_tol, config.product_tail_tol)
        gs = cf_gap(config.alpha, eta, Scheme.STABLE, config.quad_tol, config.product_tail_tol)
        rows.append((eta, gp, gs, abs(gp) / (2.0 * M)))
    return rows


def sample_exact_invariant(alpha, m, seed, dim=1, start=0):
    """``m`` draws of ``alpha^(-1/alpha) Z_1``, the OU invariant law; shape ``(m, dim)``.

    Uses its own stream ``(seed, 2^64 - 1)`` so it never overlaps chain streams.
    """
    alpha = check_alpha(alpha)
    if int(m) != m or m < 1:
        raise DomainError("m must be a positive integer")
    kind = KIND_SYM1D if dim == 1 else KIND_ISO
    z = _backend.kernels.draw_units(kind, int(dim), alpha, int(seed), EXACT_STREAM, start, int(m))
    return alpha ** (-1.0 / alpha) * z
