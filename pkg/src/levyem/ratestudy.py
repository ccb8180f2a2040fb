"""Step-size sweeps, log-log slope fits and the theoretical exponents they are compared to."""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import oubench
from .drift import builtin_drift
from .errors import DomainError
from .metrics import EmpiricalMeasure, sliced_w1, w1_1d
from .noise import RngStream, check_alpha
from .scheme import (DEFAULT_REFINEMENT, ChainConfig, Scheme, reference_sde_ensemble,
                     run_ensemble)

HORIZON_FACTOR = 20.0
REFERENCE_SEED_OFFSET = 0x9E3779B97F4A7C15
SLICE_STREAM = 2**64 - 2


class Method(enum.Enum):
    MCW1 = "mcw1"
    CFGAP = "cfgap"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for m in cls:
            if m.value == key:
                return m
        raise DomainError(f"unknown method {value!r}; expected mcw1 or cfgap")


def theoretical_rate(alpha, scheme, beta=None):
    """Exponent of the W1 bound: ``2/alpha - 1`` (Pareto) or ``1 + 1/alpha - 1/beta`` (stable)."""
    alpha = check_alpha(alpha)
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.PARETO:
        return 2.0 / alpha - 1.0
    if beta is None:
        raise DomainError("the stable-noise rate needs beta in [1, alpha)")
    beta = float(beta)
    if not 1.0 <= beta < alpha:
        raise DomainError(f"beta must satisfy 1 <= beta < alpha = {alpha}, got {beta}")
    return 1.0 + 1.0 / alpha - 1.0 / beta


def fit_loglog(points):
    """Least squares line through ``(log eta, log distance)``; returns ``(slope, intercept, r2)``."""
    pts = [(float(e), float(v)) for e, v in points]
    if len(pts) < 2:
        raise DomainError("a slope fit needs at least two points")
    for e, v in pts:
        if not (e > 0 and v > 0) or not (math.isfinite(e) and math.isfinite(v)):
            raise DomainError(f"nonpositive or non-finite point (eta={e!r}, distance={v!r}); "
                              "log is undefined, increase the ensemble size")
    x = np.log([e for e, _ in pts])
    y = np.log([v for _, v in pts])
    if np.ptp(x) == 0:
        raise DomainError("step sizes must not all coincide")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    if ss_tot == 0.0 or ss_res <= 1e-24 * max(1.0, ss_tot):
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return float(slope), float(intercept), r2


def _fmt(v):
    return "%.17g" % v


@dataclass
class RateReport:
    scheme: Scheme
    alpha: float
    eta_grid: list
    distances: list
    theoretical_slope: float
    method: Method
    fitted_slope: float = field(default=None)
    intercept: float = field(default=None)
    r_squared: float = field(default=None)

    def __post_init__(self):
        self.scheme = Scheme.parse(self.scheme)
        self.method = Method.parse(self.method)
        self.eta_grid = [float(e) for e in self.eta_grid]
        self.distances = [float(v) for v in self.distances]
        if len(self.eta_grid) != len(self.distances) or len(self.eta_grid) < 2:
            raise DomainError("eta_grid and distances must share a length of at least 2")
        if self.fitted_slope is None:
            self.fitted_slope, self.intercept, self.r_squared = fit_loglog(
                zip(self.eta_grid, self.distances))

    def to_csv(self):
        lines = ["eta,distance"]
        lines += [f"{_fmt(e)},{_fmt(v)}" for e, v in zip(self.eta_grid, self.distances)]
        lines.append(f"# slope={_fmt(self.fitted_slope)} intercept={_fmt(self.intercept)} "
                     f"r2={_fmt(self.r_squared)} theory={_fmt(self.theoretical_slope)}")
        lines.append(f"# scheme={self.scheme.value} alpha={_fmt(self.alpha)} method={self.method.value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text):
        rows, meta = [], {}
        lines = text.strip().splitlines()
        if not lines or lines[0].strip() != "eta,distance":
            raise DomainError("rate CSV must start with the header eta,distance")
        for line in lines[1:]:
            line = line.strip()
            if line.startswith("#"):
                for tok in line[1:].split():
                    k, _, v = tok.partition("=")
                    meta[k] = v
            elif line:
                e, v = line.split(",")
                rows.append((float(e), float(v)))
        try:
            return cls(scheme=meta["scheme"], alpha=float(meta["alpha"]),
                       eta_grid=[e for e, _ in rows], distances=[v for _, v in rows],
                       theoretical_slope=float(meta["theory"]), method=meta["method"],
                       fitted_slope=float(meta["slope"]), intercept=float(meta["intercept"]),
                       r_squared=float(meta["r2"]))
        except KeyError as exc:
            raise DomainError(f"rate CSV footer lacks {exc.args[0]!r}") from None


def _is_ou(drift):
    return drift is not None and drift.name == "ou"


def _distance(a, b, seed):
    if a.dim == 1:
        return w1_1d(a, b)
    return sliced_w1(a, b, rng=RngStream(seed, SLICE_STREAM))


def run_rate_study(alpha, scheme, drift=None, eta_grid=(), ensemble=10**5, seed=0,
                   method=Method.MCW1, *, horizon=None, beta=None, refinement=DEFAULT_REFINEMENT,
                   start=None, workers=1, quad_tol=oubench.DEFAULT_QUAD_TOL,
                   tail_tol=oubench.DEFAULT_TAIL_TOL):
    """Measure distances to the invariant law over ``eta_grid`` and fit their slope.

    ``MCW1``: chains run to ``N = ceil(T / eta)`` with ``T = horizon`` (default
    ``20 / theta1``); every step size reuses the same seed. For the ou drift
    the comparison law is sampled exactly, otherwise a fine-step reference
    chain at the smallest step size stands in for it. ``d > 1`` uses the
    sliced W1 proxy.

    ``CFGAP``: absolute CF gaps of the ou benchmark (d = 1, no sampling).

    The theoretical slope of the stable scheme is ``1 + 1/alpha - 1/beta``
    when ``beta`` is given, else its limit 1 as ``beta`` approaches ``alpha``.
    """
    alpha = check_alpha(alpha)
    scheme = Scheme.parse(scheme)
    method = Method.parse(method)
    grid = [float(e) for e in eta_grid]
    if len(grid) < 2:
        raise DomainError("a rate study needs at least two step sizes")
    if scheme is Scheme.STABLE and beta is None:
        theory = 1.0
    else:
        theory = theoretical_rate(alpha, scheme, beta)

    if method is Method.CFGAP:
        if drift is not None and not (_is_ou(drift) and drift.dim == 1):
            raise DomainError("the CF-gap method is defined only for the ou drift in d = 1")
        dists = [abs(oubench.cf_gap(alpha, e, scheme, quad_tol, tail_tol)) for e in grid]
        return RateReport(scheme, alpha, grid, dists, theory, method)

    if drift is None:
        drift = builtin_drift("ou", 1)
    T = HORIZON_FACTOR / drift.theta1 if horizon is None else float(horizon)
    x0 = tuple(np.zeros(drift.dim)) if start is None else tuple(np.atleast_1d(start))

    def config(eta):
        return ChainConfig(scheme, alpha, eta, math.ceil(T / eta - 1e-9), x0, ensemble, seed)

    if _is_ou(drift):
        target = EmpiricalMeasure(oubench.sample_exact_invariant(alpha, ensemble, seed, drift.dim))
    else:
        ref_seed = (int(seed) + REFERENCE_SEED_OFFSET) % 2**64
        ref_cfg = config(min(grid)).replace(seed=ref_seed)
        target = reference_sde_ensemble(ref_cfg, drift, refinement, workers=workers)

    dists = []
    for eta in grid:
        ens = run_ensemble(config(eta), drift, workers=workers)
        dists.append(_distance(ens, target, seed))
    return RateReport(scheme, alpha, grid, dists, theory, method)
