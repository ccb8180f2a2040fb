"""Drift functions with declared dissipativity constants and a sampling falsifier.

A :class:`DriftModel` carries the constants ``theta1, theta2, theta3, K`` of the
conditions

    <b(x) - b(y), x - y> <= -theta1 |x - y|^2 + K,
    |grad_v b(x)| <= theta2 |v|,   |grad_v1 grad_v2 b(x)| <= theta3 |v1| |v2|.

:func:`check_assumption_a` probes those inequalities at random points. It can
only falsify them; passing is not a proof of the global bounds.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NumericalFailure
from .noise import uniform_directions

DRIFT_OU, DRIFT_LINEAR, DRIFT_OU_SINE = 0, 1, 2

FD_STEP = 1e-5
FD_STEP_SECOND = 1e-4
DISS_SLACK = 1e-8
GRAD_RTOL = 1e-4


@dataclass(frozen=True)
class DriftModel:
    """A drift ``b: R^d -> R^d`` with its declared constants.

    ``eval`` must accept a batch of shape ``(n, d)`` as well as a single
    ``(d,)`` vector. ``kernel_code``/``matrix``/``coef`` let the compiled core
    evaluate builtin drifts without calling back into Python.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    dim: int
    theta1: float
    theta2: float
    theta3: float = 0.0
    K: float = 0.0
    name: str = "custom"
    kernel_code: Optional[int] = None
    matrix: Optional[np.ndarray] = field(default=None, repr=False)
    coef: float = 0.0
    params: tuple = ()

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=np.float64))

    def step_size_bound(self):
        """``min(1, theta1 / (8 theta2^2), 1 / theta1)``; the W1 error bounds need ``eta`` below it."""
        return min(1.0, self.theta1 / (8.0 * self.theta2**2), 1.0 / self.theta1)

    def spec_string(self):
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(repr(float(p)) for p in self.params)


def _ou(x):
    return -x


def builtin_drift(name, dim=1, params=()):
    """Build one of the builtin drifts ``ou``, ``linear`` or ``ou-sine``.

    ``linear`` takes the row-major entries of a matrix ``A`` and uses
    ``b(x) = -A x``; ``ou-sine`` takes ``c`` in (0, 1) and uses
    ``b(x) = -x + c sin(x)`` componentwise.
    """
    params = tuple(float(p) for p in params)
    if int(dim) != dim or dim < 1:
        raise DomainError(f"dimension must be a positive integer, got {dim!r}")
    dim = int(dim)
    if name == "ou":
        if params:
            raise DomainError("the ou drift takes no parameters")
        return DriftModel(_ou, dim, 1.0, 1.0, 0.0, 0.0, name="ou", kernel_code=DRIFT_OU)
    if name == "linear":
        if len(params) != dim * dim:
            raise DomainError(f"linear drift in dimension {dim} needs {dim * dim} matrix entries")
        A = np.array(params, dtype=np.float64).reshape(dim, dim)
        lam_min = float(np.linalg.eigvalsh(0.5 * (A + A.T))[0])
        if not lam_min > 0:
            raise DomainError(f"symmetric part of A must be positive definite (min eigenvalue {lam_min:.3g})")
        op_norm = float(np.linalg.norm(A, 2))
        At = np.ascontiguousarray(A.T)

        def linear(x):
            return -(x @ At)

        return DriftModel(linear, dim, lam_min, op_norm, 0.0, 0.0, name="linear",
                          kernel_code=DRIFT_LINEAR, matrix=np.ascontiguousarray(A), params=params)
    if name == "ou-sine":
        if len(params) != 1:
            raise DomainError("ou-sine takes exactly one parameter c")
        c = params[0]
        if not 0.0 < c < 1.0:
            raise DomainError(f"ou-sine needs 0 < c < 1, got {c!r}")

        def ou_sine(x):
            return -x + c * np.sin(x)

        return DriftModel(ou_sine, dim, 1.0 - c, 1.0 + c, c, 0.0, name="ou-sine",
                          kernel_code=DRIFT_OU_SINE, coef=c, params=params)
    raise DomainError(f"unknown drift {name!r}; expected ou, linear or ou-sine")


def parse_drift(text, dim=1):
    """Parse ``"name"`` or ``"name:p1,p2,..."``, e.g. ``"ou-sine:0.5"``."""
    name, _, rest = text.strip().partition(":")
    try:
        params = [float(p) for p in rest.split(",")] if rest.strip() else []
    except ValueError as exc:
        raise DomainError(f"bad drift parameters in {text!r}") from exc
    if name == "linear" and params:
        root = int(round(len(params) ** 0.5))
        if root * root == len(params):
            dim = root
    return builtin_drift(name, dim, params)


@dataclass
class AssumptionReport:
    dissipativity_ok: bool
    gradient_ok: bool
    second_deriv_ok: bool
    # largest observed violation of each inequality; <= 0 means it held
    worst_margins: tuple

    @property
    def ok(self):
        return self.dissipativity_ok and self.gradient_ok and self.second_deriv_ok


def _ball(d, n, radius, rng):
    dirs = uniform_directions(d, n, rng.child(0))
    u = rng.child(1).uniforms(0, (n + 3) // 4)[:n]
    return dirs * (radius * u ** (1.0 / d))[:, None]


def check_assumption_a(model, n_pairs, radius, rng):
    """Probe the declared constants of ``model`` at random points of a ball.

    Pairs ``(x, y)`` are uniform in the ball of the given radius. The
    dissipativity inequality gets an absolute slack of ``1e-8 (1 + |x-y|^2)``;
    the first-derivative bound uses central differences with step ``1e-5`` and
    relative slack ``1e-4``; the second-derivative bound uses a four-point
    mixed difference with step ``1e-4``. ``worst_margins`` are the raw largest
    values of lhs minus rhs, before slack.
    """
    if n_pairs < 1:
        raise DomainError("n_pairs must be at least 1")
    if not radius > 0:
        raise DomainError("radius must be positive")
    d = model.dim
    x = _ball(d, n_pairs, radius, rng.child(10))
    y = _ball(d, n_pairs, radius, rng.child(11))
    v1 = uniform_directions(d, n_pairs, rng.child(12))
    v2 = uniform_directions(d, n_pairs, rng.child(13))

    bx, by = model(x), model(y)
    if not (np.all(np.isfinite(bx)) and np.all(np.isfinite(by))):
        raise NumericalFailure(f"drift {model.name} returned non-finite values")
    dxy = x - y
    sq = np.sum(dxy * dxy, axis=1)
    diss = np.sum((bx - by) * dxy, axis=1) + model.theta1 * sq - model.K
    diss_ok = bool(np.all(diss <= DISS_SLACK * (1.0 + sq)))

    h = FD_STEP
    gnorm = np.linalg.norm((model(x + h * v1) - model(x - h * v1)) / (2.0 * h), axis=1)
    xnorm = np.linalg.norm(x, axis=1)
    growth = np.linalg.norm(bx - model(np.zeros((1, d))), axis=1)
    grad_excess = np.maximum(gnorm - model.theta2, growth - model.theta2 * xnorm)
    grad_ok = bool(np.all(gnorm <= model.theta2 * (1.0 + GRAD_RTOL))
                   and np.all(growth <= model.theta2 * (1.0 + GRAD_RTOL) * xnorm + DISS_SLACK))

    h2 = FD_STEP_SECOND
    mixed = (model(x + h2 * v1 + h2 * v2) - model(x + h2 * v1 - h2 * v2)
             - model(x - h2 * v1 + h2 * v2) + model(x - h2 * v1 - h2 * v2)) / (4.0 * h2 * h2)
    second_excess = np.linalg.norm(mixed, axis=1) - model.theta3
    # truncation O(h^2 theta3) plus cancellation O(eps |b| / h^2)
    slack = GRAD_RTOL * (1.0 + model.theta3) + 1e-7 * (1.0 + np.max(np.abs(bx), axis=1))
    second_ok = bool(np.all(second_excess <= slack))

    margins = (float(np.max(diss)), float(np.max(grad_excess)), float(np.max(second_excess)))
    if not all(np.isfinite(margins)):
        raise NumericalFailure(f"drift {model.name} produced non-finite derivative estimates")
    return AssumptionReport(diss_ok, grad_ok, second_ok, margins)
