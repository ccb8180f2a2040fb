import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from levyem.errors import DomainError
from levyem.metrics import EmpiricalMeasure, empirical_cf, sliced_w1, w1_1d
from levyem.noise import RngStream

finite = st.floats(-1e3, 1e3, allow_nan=False)
samples = st.lists(finite, min_size=1, max_size=40)


def lp_w1(a, b):
    """Exact W1 between uniform empirical measures via the transport LP."""
    m, n = len(a), len(b)
    cost = np.abs(np.subtract.outer(a, b)).ravel()
    rows = np.zeros((m + n, m * n))
    for i in range(m):
        rows[i, i * n:(i + 1) * n] = 1
    for j in range(n):
        rows[m + j, j::n] = 1
    rhs = np.concatenate([np.full(m, 1 / m), np.full(n, 1 / n)])
    res = linprog(cost, A_eq=rows, b_eq=rhs, bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    assert res.success
    return res.fun


def test_examples():
    a = EmpiricalMeasure([0.3, -1.0, 2.0])
    assert w1_1d(a, a) == 0.0
    assert w1_1d([0, 0, 0], [1, 1, 1]) == 1.0
    assert w1_1d([0, 1], [1, 2]) == 1.0


def test_lp_oracle_equal_sizes():
    rng = np.random.default_rng(0)
    for _ in range(100):
        a, b = rng.normal(size=8), rng.standard_cauchy(size=8)
        assert w1_1d(a, b) == pytest.approx(lp_w1(a, b), abs=1e-10)


def test_lp_oracle_unequal_sizes():
    rng = np.random.default_rng(1)
    for _ in range(30):
        m, n = rng.integers(1, 9, size=2)
        a, b = rng.normal(size=m), rng.normal(size=n) + 0.5
        assert w1_1d(a, b) == pytest.approx(lp_w1(a, b), abs=1e-10)


def test_unequal_example():
    assert w1_1d([0, 1, 2], [0, 1]) == pytest.approx(0.5, abs=1e-15)


def test_empty_rejected():
    with pytest.raises(DomainError):
        EmpiricalMeasure([])
    with pytest.raises(DomainError):
        EmpiricalMeasure([1.0, np.inf])


def test_immutable_and_sorted_cache():
    m = EmpiricalMeasure([3.0, 1.0, 2.0])
    assert list(m.sorted) == [1.0, 2.0, 3.0]
    with pytest.raises(ValueError):
        m.samples[0, 0] = 5.0
    with pytest.raises(DomainError):
        EmpiricalMeasure(np.zeros((3, 2))).sorted
    assert m.dim == 1 and m.size == 3 and len(m) == 3


@settings(max_examples=100, deadline=None)
@given(a=samples)
def test_sorted_cache_is_sorted_permutation(a):
    m = EmpiricalMeasure(a)
    assert np.all(np.diff(m.sorted) >= 0)
    assert sorted(m.sorted) == sorted(float(v) for v in a)


@settings(max_examples=100, deadline=None)
@given(data=st.data(), n=st.integers(1, 30))
def test_metric_properties(data, n):
    xs = [data.draw(st.lists(finite, min_size=n, max_size=n)) for _ in range(3)]
    a, b, c = (EmpiricalMeasure(x) for x in xs)
    ab, bc, ac = w1_1d(a, b), w1_1d(b, c), w1_1d(a, c)
    assert ab >= 0
    assert ab == pytest.approx(w1_1d(b, a), abs=1e-12)
    assert ac <= ab + bc + 1e-9 * (1 + ab + bc)


@settings(max_examples=100, deadline=None)
@given(a=samples, c=st.integers(-1000, 1000))
def test_translation_equivariance(a, c):
    # integer shifts of integer-valued samples are exact in floating point
    a = np.round(np.asarray(a))
    assert w1_1d(a, a + c) == abs(c)


@settings(max_examples=100, deadline=None)
@given(a=samples, c=finite)
def test_translation_equivariance_real(a, c):
    m = EmpiricalMeasure(a)
    assert w1_1d(m, m.shifted(c)) == pytest.approx(abs(c), rel=1e-12, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(data=st.data(), n=st.integers(1, 30))
def test_general_route_agrees(data, n):
    a = data.draw(st.lists(finite, min_size=n, max_size=n))
    b = data.draw(st.lists(finite, min_size=n, max_size=n))
    assert w1_1d(a, b, general=True) == pytest.approx(w1_1d(a, b), rel=1e-12, abs=1e-9)


def test_sliced_identity_and_errors():
    a = np.random.default_rng(2).normal(size=(100, 2))
    assert sliced_w1(a, a) == 0.0
    with pytest.raises(DomainError):
        sliced_w1(a, np.zeros((10, 3)))
    with pytest.raises(DomainError):
        sliced_w1(a[:, :1], a[:, :1])


def test_sliced_translation_limit():
    a = np.random.default_rng(3).normal(size=(50, 2))
    v = np.array([0.6, -0.8])
    got = sliced_w1(a, a + v, n_dirs=20000, rng=RngStream(4))
    assert got == pytest.approx(2 / math.pi, rel=0.01)


def test_sliced_translation_dense_grid():
    # 2|v|/pi is the average of |cos| over the circle
    th = np.linspace(0, 2 * np.pi, 200001)[:-1]
    assert np.mean(np.abs(np.cos(th))) == pytest.approx(2 / math.pi, abs=1e-9)


def test_sliced_permutation_invariance():
    rng = np.random.default_rng(5)
    a, b = rng.normal(size=(64, 3)), rng.normal(size=(64, 3))
    perm = rng.permutation(64)
    assert sliced_w1(a, b, rng=RngStream(9)) == sliced_w1(a[perm], b, rng=RngStream(9))


def test_sliced_below_w1_on_lines():
    # on a line all projections shrink distances
    rng = np.random.default_rng(6)
    s, t = rng.normal(size=30), rng.normal(size=30)
    u = np.array([1.0, 1.0]) / math.sqrt(2)
    assert sliced_w1(s[:, None] * u, t[:, None] * u) <= w1_1d(s, t) + 1e-12


def test_empirical_cf_examples():
    a = EmpiricalMeasure([0.5, -2.0])
    assert empirical_cf(a, 0.0) == 1
    assert empirical_cf([0.0], 7.3) == 1
    assert empirical_cf([-1.0, 1.0], math.pi) == pytest.approx(-1.0, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(a=samples, xi=st.floats(-50, 50))
def test_empirical_cf_properties(a, xi):
    z = empirical_cf(a, xi)
    assert abs(z) <= 1 + 1e-12
    assert empirical_cf(a, -xi) == pytest.approx(z.conjugate(), abs=1e-12)
