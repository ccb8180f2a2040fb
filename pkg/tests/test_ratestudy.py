import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyem.drift import builtin_drift
from levyem.errors import DomainError
from levyem.ratestudy import Method, RateReport, fit_loglog, run_rate_study, theoretical_rate
from levyem.scheme import Scheme, StepSizeWarning


def test_theoretical_rate_examples():
    assert theoretical_rate(1.5, "pareto") == pytest.approx(1 / 3)
    assert theoretical_rate(1.5, "stable", 1.2) == pytest.approx(1 + 1 / 1.5 - 1 / 1.2)
    assert theoretical_rate(1.2, "pareto") == pytest.approx(2 / 3)


def test_theoretical_rate_errors():
    with pytest.raises(DomainError):
        theoretical_rate(1.5, "stable")
    with pytest.raises(DomainError):
        theoretical_rate(1.5, "stable", 1.5)
    with pytest.raises(DomainError):
        theoretical_rate(1.5, "stable", 0.9)
    with pytest.raises(DomainError):
        theoretical_rate(2.0, "pareto")


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(1.01, 1.99), frac=st.floats(0, 0.999))
def test_theoretical_rate_ordering(alpha, frac):
    # the stable bound is never weaker than the Pareto one and is at most 1
    beta = 1 + frac * (alpha - 1)
    s = theoretical_rate(alpha, "stable", beta)
    assert theoretical_rate(alpha, "pareto") <= s + 1e-12
    assert 0 < s < 1 + 1e-12


def test_fit_exact_power_law():
    slope, icpt, r2 = fit_loglog([(e, 3 * e**0.5) for e in (0.1, 0.01, 0.001)])
    assert slope == pytest.approx(0.5, abs=1e-12)
    assert icpt == pytest.approx(math.log(3), abs=1e-12)
    assert r2 == 1.0


def test_fit_rejects_nonpositive():
    with pytest.raises(DomainError):
        fit_loglog([(0.1, 1.0), (0.01, 0.0)])
    with pytest.raises(DomainError):
        fit_loglog([(0.1, 1.0)])
    with pytest.raises(DomainError):
        fit_loglog([(0.1, 1.0), (0.1, 2.0)])


@settings(max_examples=100, deadline=None)
@given(slope=st.floats(-3, 3), c=st.floats(1e-3, 1e3),
       etas=st.lists(st.floats(1e-6, 0.9), min_size=2, max_size=8, unique=True))
def test_fit_recovers_power_law(slope, c, etas):
    if np.ptp(np.log(etas)) < 1e-3:
        return
    s, icpt, r2 = fit_loglog([(e, c * e**slope) for e in etas])
    assert s == pytest.approx(slope, abs=1e-8)
    assert icpt == pytest.approx(math.log(c), abs=1e-6 * (1 + abs(slope) * 15))
    assert 0.0 <= r2 <= 1.0


@settings(max_examples=100, deadline=None)
@given(pts=st.lists(st.tuples(st.floats(1e-6, 1), st.floats(1e-6, 1e3)), min_size=3, max_size=10))
def test_fit_r2_range(pts):
    if np.ptp(np.log([e for e, _ in pts])) == 0:
        return
    _, _, r2 = fit_loglog(pts)
    assert 0.0 <= r2 <= 1.0


def test_csv_example():
    rep = RateReport("pareto", 1.5, [0.25, 0.125], [0.2, 0.16], 1 / 3, "mcw1")
    text = rep.to_csv()
    assert text.splitlines()[0] == "eta,distance"
    assert text.splitlines()[1] == "0.25,0.20000000000000001"
    assert "# slope=" in text and "theory=" in text


@settings(max_examples=100, deadline=None)
@given(scheme=st.sampled_from(["stable", "pareto"]), alpha=st.floats(1.01, 1.99),
       method=st.sampled_from(["mcw1", "cfgap"]),
       data=st.lists(st.tuples(st.floats(1e-8, 0.99), st.floats(1e-12, 1e6)), min_size=2, max_size=9,
                     unique_by=lambda t: t[0]))
def test_csv_round_trip(scheme, alpha, method, data):
    etas, dists = [e for e, _ in data], [d for _, d in data]
    if np.ptp(np.log(etas)) == 0:
        return
    rep = RateReport(scheme, alpha, etas, dists, 0.25, method)
    back = RateReport.from_csv(rep.to_csv())
    assert back == rep


def test_csv_bad_header():
    with pytest.raises(DomainError):
        RateReport.from_csv("eta,gap\n0.1,1\n")
    with pytest.raises(DomainError):
        RateReport.from_csv("eta,distance\n0.1,1\n0.01,2\n# slope=1\n")


def test_method_parse():
    assert Method.parse("CF-Gap") is Method.CFGAP
    assert Method.parse("mc_w1") is Method.MCW1
    with pytest.raises(DomainError):
        Method.parse("ks")


def test_cfgap_study_slopes():
    grid = [2.0**-k for k in range(8, 15)]
    p = run_rate_study(1.5, "pareto", eta_grid=grid, method="cfgap")
    s = run_rate_study(1.5, "stable", eta_grid=grid, method="cfgap")
    assert p.fitted_slope == pytest.approx(1 / 3, abs=0.05)
    assert s.fitted_slope == pytest.approx(1.0, abs=0.05)
    assert s.theoretical_slope == 1.0 and p.scheme is Scheme.PARETO
    assert p.r_squared > 0.99


def test_cfgap_rejects_other_drift():
    with pytest.raises(DomainError):
        run_rate_study(1.5, "pareto", builtin_drift("ou-sine", 1, [0.5]), [0.1, 0.01], method="cfgap")


def test_grid_too_short():
    with pytest.raises(DomainError):
        run_rate_study(1.5, "pareto", eta_grid=[0.1], method="cfgap")


def test_mcw1_smoke_and_determinism():
    kw = dict(eta_grid=[0.25, 0.125], ensemble=2000, seed=3, horizon=2.0)
    a = run_rate_study(1.5, "pareto", **kw)
    b = run_rate_study(1.5, "pareto", workers=3, **kw)
    assert a == b
    assert all(v > 0 for v in a.distances)


def test_mcw1_reference_route():
    with pytest.warns(StepSizeWarning):
        rep = run_rate_study(1.5, "stable", builtin_drift("ou-sine", 2, [0.5]), [0.25, 0.125],
                             ensemble=1500, seed=4, horizon=1.0, refinement=4)
    assert len(rep.distances) == 2 and all(np.isfinite(rep.distances))
