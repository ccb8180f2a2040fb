"""Euler-Maruyama chains driven by stable or Pareto noise.

Two schemes share one step map ``y + eta b(y) + increment``:

* ``StableNoise``: increments are exact stable draws at time ``eta``,
  i.e. ``eta^(1/alpha) Z_1``;
* ``ParetoNoise``: increments are ``(eta^(1/alpha) / sigma) Z~`` with ``Z~``
  Pareto distributed on ``|z| > 1``.

Chain ``j`` of an ensemble reads its increments from the stream
``(seed, j)``, step ``k`` from a fixed block of counters, so ensembles are
reproducible bit for bit whatever the number of workers. Ensembles are cut
into fixed chunks of :data:`CHUNK` chains; per-step statistics are summed
chunk by chunk in chunk order.
"""

import enum
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DomainError, NumericalFailure
from .metrics import EmpiricalMeasure
from .noise import KIND_ISO, KIND_PARETO, KIND_SYM1D, NoiseSpec, check_alpha

CHUNK = 1024
MIN_REFINEMENT = 16
DEFAULT_REFINEMENT = 64

MODE_FINAL, MODE_MOMENT, MODE_COUPLED = 0, 1, 2


class Scheme(enum.Enum):
    STABLE = "stable"
    PARETO = "pareto"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"stable": cls.STABLE, "stablenoise": cls.STABLE,
                   "pareto": cls.PARETO, "paretonoise": cls.PARETO}
        if key not in aliases:
            raise DomainError(f"unknown scheme {value!r}; expected stable or pareto")
        return aliases[key]


class StepSizeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ChainConfig:
    scheme: Scheme
    alpha: float
    eta: float
    steps: int
    start: tuple
    ensemble: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        eta = float(self.eta)
        if not 0.0 < eta < 1.0:
            raise DomainError(f"step size must lie in (0, 1), got {eta!r}")
        object.__setattr__(self, "eta", eta)
        if int(self.steps) != self.steps or self.steps < 0:
            raise DomainError("steps must be a nonnegative integer")
        if int(self.ensemble) != self.ensemble or self.ensemble < 1:
            raise DomainError("ensemble size must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        start = np.atleast_1d(np.asarray(self.start, dtype=np.float64))
        if start.ndim != 1 or not np.all(np.isfinite(start)):
            raise DomainError("start must be a finite vector")
        object.__setattr__(self, "start", tuple(float(v) for v in start))
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "ensemble", int(self.ensemble))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def dim(self):
        return len(self.start)

    @property
    def noise(self):
        return NoiseSpec(self.alpha, self.dim)

    def replace(self, **changes):
        fields = dict(scheme=self.scheme, alpha=self.alpha, eta=self.eta, steps=self.steps,
                      start=self.start, ensemble=self.ensemble, seed=self.seed)
        fields.update(changes)
        return ChainConfig(**fields)


@dataclass
class MomentReport:
    beta: float
    per_step_moment: np.ndarray
    weight_at_start: float
    sup_moment: float = field(init=False)

    def __post_init__(self):
        self.sup_moment = float(np.max(self.per_step_moment))


def step_size_warning(config, drift):
    """Message when ``eta`` exceeds the step-size bound under which the W1 error bounds hold."""
    bound = drift.step_size_bound()
    if config.eta >= bound:
        return (f"step size {config.eta:g} is not below min(1, theta1/(8 theta2^2), 1/theta1) = {bound:g}; "
                "convergence guarantees do not apply")
    return None


def weight(x, beta):
    """``V_beta(x) = (1 + |x|^2)^(beta/2)``."""
    x = np.asarray(x, dtype=np.float64)
    return (1.0 + np.sum(x * x, axis=-1)) ** (beta / 2.0)


def _finite_or_raise(y, step=None):
    if not np.all(np.isfinite(y)):
        raise NumericalFailure("non-finite state in Euler-Maruyama step", step=step)
    return y


def em_step_stable(y, drift, eta, dz, step=None):
    """``y + eta b(y) + dz`` with ``dz`` a stable increment over time ``eta``."""
    y = np.asarray(y, dtype=np.float64)
    return _finite_or_raise(y + eta * drift(y) + np.asarray(dz, dtype=np.float64), step)


def em_step_pareto(y, drift, eta, ztilde, sigma, alpha, step=None):
    """``y + eta b(y) + (eta^(1/alpha) / sigma) ztilde``."""
    y = np.asarray(y, dtype=np.float64)
    inc = eta ** (1.0 / alpha) / sigma * np.asarray(ztilde, dtype=np.float64)
    return _finite_or_raise(y + eta * drift(y) + inc, step)


def _noise_setup(config):
    spec = config.noise
    if config.scheme is Scheme.STABLE:
        kind = KIND_SYM1D if spec.dim == 1 else KIND_ISO
        scale = config.eta ** (1.0 / spec.alpha)
    else:
        kind = KIND_PARETO
        scale = config.eta ** (1.0 / spec.alpha) / spec.sigma
    return kind, scale


def _simulate(config, drift, mode, *, other=None, beta=0.0, workers=1, noise_off=False):
    if drift.dim != config.dim:
        raise DomainError(f"drift dimension {drift.dim} does not match start dimension {config.dim}")
    kind, scale = _noise_setup(config)
    x0 = np.ascontiguousarray(config.start, dtype=np.float64)
    y0 = np.ascontiguousarray(other if other is not None else config.start, dtype=np.float64)
    if y0.shape != x0.shape:
        raise DomainError("coupled starting points must have the same dimension")
    compiled = drift.kernel_code is not None
    kern = _backend.kernels if compiled else _backend.fallback
    A = drift.matrix if drift.matrix is not None else np.zeros((1, 1))
    A = np.ascontiguousarray(A, dtype=np.float64)
    code = drift.kernel_code if compiled else -1
    extra = {} if compiled else {"drift_fn": drift.eval}

    m = config.ensemble
    chunks = [(s, min(CHUNK, m - s)) for s in range(0, m, CHUNK)]

    def run(chunk):
        first, n = chunk
        return kern.simulate_chunk(mode, kind, code, A, drift.coef, x0, y0, config.eta,
                                   config.steps, config.alpha, scale, config.seed, first, n,
                                   bool(noise_off), float(beta), **extra)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]

    finals = []
    acc = np.zeros(config.steps + 1)
    for final, part, status, chain, step in results:
        if status:
            raise NumericalFailure(f"non-finite state in chain {chain} at step {step}",
                                   chain=int(chain), step=int(step))
        finals.append(final)
        acc = acc + part
    return np.concatenate(finals, axis=0), acc


def run_ensemble(config, drift, *, workers=1, noise_off=False):
    """Final states of ``config.ensemble`` independent chains as an :class:`EmpiricalMeasure`.

    ``noise_off`` zeroes every increment; it exists for testing the drift part.
    """
    final, _ = _simulate(config, drift, MODE_FINAL, workers=workers, noise_off=noise_off)
    return EmpiricalMeasure(final)


def reference_sde_ensemble(config, drift, refinement=DEFAULT_REFINEMENT, *, workers=1):
    """Stand-in for the law of the SDE at time ``eta * steps``.

    Runs the stable scheme with step ``eta / refinement`` for
    ``refinement * steps`` steps. Refinements below 16 are allowed but warned
    about, since the surrogate then carries visible discretization error.
    """
    if int(refinement) != refinement or refinement < 1:
        raise DomainError("refinement must be a positive integer")
    if refinement < MIN_REFINEMENT:
        warnings.warn(f"refinement {refinement} < {MIN_REFINEMENT}: reference law is coarse",
                      StepSizeWarning, stacklevel=2)
    fine = config.replace(scheme=Scheme.STABLE, eta=config.eta / refinement,
                          steps=config.steps * int(refinement))
    return run_ensemble(fine, drift, workers=workers)


def coupled_pair_decay(drift, x, y, config, *, workers=1):
    """Mean of ``|X_k - Y_k|`` over the ensemble for two chains sharing all increments.

    Returns an array of length ``steps + 1``. Under this synchronous coupling
    the mean bounds ``W1(law X_k, law Y_k)`` from above.
    """
    cfg = config.replace(start=tuple(np.atleast_1d(np.asarray(x, dtype=np.float64))))
    _, acc = _simulate(cfg, drift, MODE_COUPLED, other=np.atleast_1d(y), workers=workers)
    return acc / cfg.ensemble


def moment_track(config, drift, beta, *, workers=1):
    """Per-step Monte Carlo estimate of ``E |Y_k|^beta`` for ``1 <= beta < alpha``."""
    beta = float(beta)
    if not 1.0 <= beta < config.alpha:
        raise DomainError(f"beta must satisfy 1 <= beta < alpha = {config.alpha}, got {beta}")
    _, acc = _simulate(config, drift, MODE_MOMENT, beta=beta, workers=workers)
    return MomentReport(beta, acc / config.ensemble, float(weight(config.start, beta)))
