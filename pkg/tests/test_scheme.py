import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from levyem.drift import DriftModel, builtin_drift
from levyem.errors import DomainError, NumericalFailure
from levyem.metrics import empirical_cf, w1_1d
from levyem.noise import NoiseSpec, RngStream, sample_pareto_vec, sample_sym_stable_1d
from levyem.scheme import (CHUNK, ChainConfig, Scheme, StepSizeWarning, coupled_pair_decay,
                           em_step_pareto, em_step_stable, moment_track, reference_sde_ensemble,
                           run_ensemble, step_size_warning, weight)

OU = builtin_drift("ou")
SIGMA_1_15 = 1.8452701486440284  # mpmath oracle


def cfg(**kw):
    base = dict(scheme="pareto", alpha=1.5, eta=0.1, steps=10, start=(0.0,), ensemble=100, seed=1)
    base.update(kw)
    return ChainConfig(**base)


def test_em_step_stable_arithmetic():
    assert em_step_stable(np.array([1.0]), OU, 0.1, np.array([0.5]))[0] == pytest.approx(1.4, abs=1e-15)


def test_em_step_stable_pure_contraction():
    y = np.array([3.0, -2.0])
    assert np.array_equal(em_step_stable(y, builtin_drift("ou", 2), 0.25, np.zeros(2)), y * 0.75)


def test_em_step_pareto_arithmetic():
    got = em_step_pareto(np.array([0.0]), OU, 0.1, np.array([2.0]), SIGMA_1_15, 1.5)[0]
    assert got == pytest.approx(0.1 ** (2 / 3) / SIGMA_1_15 * 2, rel=1e-14)
    assert got == pytest.approx(0.2335, abs=1e-4)


def test_em_step_pareto_small_eta_limit():
    x0 = np.array([1.7])
    assert em_step_pareto(x0, OU, 1e-15, np.array([1.5]), SIGMA_1_15, 1.5)[0] == pytest.approx(1.7, abs=1e-9)


def test_em_step_non_finite():
    with pytest.raises(NumericalFailure) as info:
        em_step_stable(np.array([1.0]), OU, 0.1, np.array([np.inf]), step=7)
    assert info.value.step == 7


def test_stable_increment_law():
    spec = NoiseSpec(1.5)
    eta = 0.05
    dz = sample_sym_stable_1d(spec, eta, RngStream(1), size=10**5)
    ref = eta ** (1 / 1.5) * sample_sym_stable_1d(spec, 1.0, RngStream(2), size=10**5)
    assert stats.ks_2samp(dz, ref).pvalue > 0.01


def test_pareto_increment_floor():
    spec = NoiseSpec(1.5, 2)
    eta = 0.01
    inc = eta ** (1 / 1.5) / spec.sigma * sample_pareto_vec(spec, RngStream(3), size=10**5)
    assert np.all(np.linalg.norm(inc, axis=1) > eta ** (1 / 1.5) / spec.sigma)


def test_config_validation():
    for bad in (dict(eta=0.0), dict(eta=1.0), dict(steps=-1), dict(ensemble=0), dict(seed=-1),
                dict(alpha=2.0), dict(scheme="euler"), dict(start=(np.nan,))):
        with pytest.raises(DomainError):
            cfg(**bad)
    assert cfg(scheme="StableNoise").scheme is Scheme.STABLE


def test_zero_steps_returns_start():
    out = run_ensemble(cfg(steps=0, ensemble=3, start=(2.5,)), OU)
    assert np.array_equal(out.samples, np.full((3, 1), 2.5))


def test_noise_off_geometric_contraction():
    out = run_ensemble(cfg(eta=0.5, steps=4, start=(16.0,), ensemble=5), OU, noise_off=True)
    assert np.array_equal(out.samples.ravel(), np.ones(5))


def test_invariant_median_symmetric():
    out = run_ensemble(cfg(eta=0.01, steps=2000, ensemble=10**5, seed=4), OU)
    assert abs(np.median(out.samples)) < 0.05


@pytest.mark.parametrize("scheme", ["stable", "pareto"])
@pytest.mark.parametrize("dim", [1, 3])
def test_worker_count_invariance(scheme, dim):
    c = cfg(scheme=scheme, start=tuple([0.5] * dim), ensemble=2 * CHUNK + 17, steps=50)
    drift = builtin_drift("ou-sine", dim, [0.4])
    a = run_ensemble(c, drift, workers=1).samples
    b = run_ensemble(c, drift, workers=4).samples
    assert np.array_equal(a, b)
    assert np.array_equal(a, run_ensemble(c, drift, workers=3).samples)


def test_chain_j_uses_stream_j():
    # chain 5 of a big ensemble equals chain 5 of a smaller one with the same seed
    big = run_ensemble(cfg(ensemble=CHUNK + 10, steps=30), OU).samples
    small = run_ensemble(cfg(ensemble=6, steps=30), OU).samples
    assert np.array_equal(big[:6], small)


def test_custom_drift_matches_builtin():
    d = builtin_drift("ou-sine", 2, [0.5])
    custom = DriftModel(d.eval, 2, d.theta1, d.theta2, d.theta3)
    c = cfg(start=(1.0, -1.0), steps=40, ensemble=300)
    assert np.allclose(run_ensemble(c, d).samples, run_ensemble(c, custom).samples, rtol=0, atol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        run_ensemble(cfg(start=(0.0, 0.0)), OU)


def test_overflow_reports_chain_and_step():
    blowup = DriftModel(lambda x: 1e300 * (x + 1.0), 1, 1.0, 1.0)
    with pytest.raises(NumericalFailure) as info:
        with np.errstate(all="ignore"):
            run_ensemble(cfg(steps=5, ensemble=3), blowup)
    assert info.value.chain is not None and info.value.step is not None


def test_reference_refinement_one_is_stable_run():
    c = cfg(steps=20, ensemble=200)
    with pytest.warns(StepSizeWarning):
        ref = reference_sde_ensemble(c, OU, 1)
    assert np.array_equal(ref.samples, run_ensemble(c.replace(scheme="stable"), OU).samples)


def test_reference_rejects_bad_refinement():
    with pytest.raises(DomainError):
        reference_sde_ensemble(cfg(), OU, 0)


def test_reference_cf_approaches_exact():
    c = cfg(eta=0.5, steps=20, ensemble=10**5, seed=8)
    target = math.exp(-1 / 1.5)
    errs = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StepSizeWarning)
        for r in (1, 4, 16, 64):
            errs.append(abs(empirical_cf(reference_sde_ensemble(c, OU, r), 1.0).real - target))
    assert errs[0] > errs[1] > errs[2]
    assert errs[3] < 4 / math.sqrt(10**5) * 3


def test_reference_self_consistency():
    # coarse step 0.5 with horizon 5; refinements 32 and 64 against the coarse stable chain
    c = cfg(scheme="stable", eta=0.5, steps=10, ensemble=10**5, seed=5)
    r32 = reference_sde_ensemble(c, OU, 32)
    r64 = reference_sde_ensemble(c.replace(seed=6), OU, 64)
    coarse = run_ensemble(c.replace(seed=7), OU)
    assert w1_1d(r32, r64) < w1_1d(r64, coarse) / 4


def test_coupling_ou_exact():
    c = cfg(eta=0.1, steps=50, ensemble=7)
    d = coupled_pair_decay(OU, [4.0], [0.0], c)
    expected = 4.0 * 0.9 ** np.arange(51)
    assert np.allclose(d, expected, rtol=1e-13, atol=0)


def test_coupling_same_start_is_zero():
    d = coupled_pair_decay(builtin_drift("ou-sine", 1, [0.5]), [1.0], [1.0], cfg(steps=30))
    assert np.all(d == 0.0)


def test_coupling_linear_exact():
    A = np.diag([1.0, 3.0])
    drift = builtin_drift("linear", 2, A.ravel())
    x, y = np.array([2.0, 1.0]), np.array([-1.0, 0.5])
    eta = 0.05
    d = coupled_pair_decay(drift, x, y, cfg(start=(0.0, 0.0), eta=eta, steps=40, ensemble=9))
    k = np.arange(41)
    diff = (x - y)[None, :] * np.power(1 - eta * np.diag(A)[None, :], k[:, None])
    assert np.allclose(d, np.linalg.norm(diff, axis=1), rtol=1e-12, atol=1e-15)


def test_coupling_ou_sine_contraction_rate():
    eta, c = 0.05, 0.5
    d = coupled_pair_decay(builtin_drift("ou-sine", 1, [c]), [2.0], [-2.0],
                           cfg(eta=eta, steps=200, ensemble=2000, seed=9))
    slope = np.polyfit(np.arange(201), np.log(d), 1)[0]
    assert math.exp(slope) <= 1 - eta * (1 - c) / 2


@settings(max_examples=15, deadline=None)
@given(x=st.floats(-5, 5), y=st.floats(-5, 5), eta=st.floats(0.01, 0.9), k=st.integers(0, 60))
def test_coupling_ou_property(x, y, eta, k):
    d = coupled_pair_decay(OU, [x], [y], cfg(eta=eta, steps=k, ensemble=3))
    assert d[-1] == pytest.approx(abs(x - y) * (1 - eta) ** k, rel=1e-12, abs=1e-300)


def test_moment_zero_steps():
    r = moment_track(cfg(steps=0, start=(2.0,)), OU, 1.2)
    assert r.per_step_moment.tolist() == [pytest.approx(2.0**1.2, rel=1e-15)]
    assert r.sup_moment == r.per_step_moment.max()
    assert r.weight_at_start == pytest.approx(5.0**0.6)


def test_moment_beta_domain():
    with pytest.raises(DomainError):
        moment_track(cfg(), OU, 1.5)
    with pytest.raises(DomainError):
        moment_track(cfg(), OU, 0.9)


def test_moment_stationarity_example():
    r = moment_track(cfg(scheme="stable", eta=0.05, steps=5000, ensemble=10**4, seed=10), OU, 1.2)
    tail = r.per_step_moment[-1000:]
    assert np.isfinite(r.sup_moment)
    assert (tail.max() - tail.min()) / tail.mean() < 0.10


@pytest.mark.parametrize("name,params", [("ou", []), ("ou-sine", [0.5]), ("linear", [2.0])])
@pytest.mark.parametrize("scheme", ["stable", "pareto"])
def test_moment_bound_builtins(name, params, scheme):
    drift = builtin_drift(name, 1, params)
    x = 1.0
    eta = 0.9 * drift.step_size_bound()
    r = moment_track(cfg(scheme=scheme, eta=eta, steps=10**4, ensemble=10**4, start=(x,), seed=11), drift, 1.2)
    assert r.sup_moment <= 10 * (1 + x**1.2)


def test_step_size_warning_text():
    assert step_size_warning(cfg(eta=0.5), OU) is not None
    assert step_size_warning(cfg(eta=0.1), OU) is None


def test_weight():
    assert weight(np.array([3.0, 4.0]), 2.0) == pytest.approx(26.0)
