import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from trimot.errors import DegenerateProblemError, DimensionError, PreconditionError
from trimot.matching import (MatchingProblem, brute_force_partial_matching, kept_count,
                             solve_partial_matching, untrimmed_matching)
from trimot.measures import Sample
from trimot.wasserstein1d import DiscreteMeasure1D, w_p_quantile

X2, Y2 = Sample([0.0, 0.4]), Sample([0.41, 1.0])


def test_two_point_examples(backend):
    res = solve_partial_matching(MatchingProblem(X2, Y2, 1.0, 0.5))
    assert res.cost == pytest.approx(0.01, abs=1e-15)
    assert res.pairing == [(1, 0)]
    full = untrimmed_matching(X2, Y2, 1.0)
    assert full.cost == pytest.approx(0.505, abs=1e-15)
    for alpha in (0.0, 0.5):
        prob = MatchingProblem(X2, Y2, 1.0, alpha)
        assert brute_force_partial_matching(prob) == pytest.approx(solve_partial_matching(prob).cost,
                                                                   abs=1e-15)


def test_identical_samples_zero(rng, backend):
    s = Sample(rng.random((15, 2)))
    for alpha in (0.0, 0.3):
        res = solve_partial_matching(MatchingProblem(s, s, 2.0, alpha))
        assert res.cost == 0.0
        assert all(i == j for i, j in res.pairing)


def test_kept_count():
    assert kept_count(10, 0.3) == 7      # 0.3*10 = 3.0000000000000004
    assert kept_count(7, 0.25) == 6      # floor(1.75) = 1
    assert kept_count(4, 0.0) == 4


@pytest.mark.parametrize("seed", range(30))
def test_flow_equals_enumeration(seed, backend):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 8))
    d = int(rng.choice([1, 2, 3]))
    prob = MatchingProblem(Sample(rng.random((n, d))), Sample(rng.random((n, d))),
                           float(rng.choice([1.0, 1.5, 2.0])), float(rng.choice([0.0, 0.25, 0.5])))
    if prob.m < 1:
        pytest.skip("nothing kept")
    assert solve_partial_matching(prob).cost == pytest.approx(brute_force_partial_matching(prob),
                                                              abs=1e-12)


def _lsa_oracle(prob):
    """Partial assignment as a square assignment: pad with n-m dummy rows and
    columns; dummy-dummy pairs are forbidden by a large cost."""
    C = prob.cost_matrix()
    n, m = prob.n, prob.m
    k = n - m
    big = 1e6
    M = np.zeros((n + k, n + k))
    M[:n, :n] = C
    M[n:, n:] = big
    r, c = linear_sum_assignment(M)
    return sum(M[i, j] for i, j in zip(r, c) if i < n and j < n) / m


@pytest.mark.parametrize("n,alpha,p", [(40, 0.25, 1.0), (120, 0.1, 2.0), (200, 0.5, 1.5), (64, 0.0, 1.0)])
def test_flow_equals_scipy_assignment(n, alpha, p, backend):
    rng = np.random.default_rng(n)
    prob = MatchingProblem(Sample(rng.random((n, 2))), Sample(rng.random((n, 2))), p, alpha)
    res = solve_partial_matching(prob)
    assert res.cost == pytest.approx(_lsa_oracle(prob), rel=1e-12)
    assert res.flow_stats["iterations"] == prob.m


def test_dense_and_on_demand_costs_agree(rng):
    prob = MatchingProblem(Sample(rng.random((150, 3))), Sample(rng.random((150, 3))), 1.5, 0.2)
    a = solve_partial_matching(prob, use_matrix=True)
    b = solve_partial_matching(prob, use_matrix=False)
    assert a.cost == b.cost and a.pairing == b.pairing


def test_backends_identical_pairing(rng, monkeypatch):
    from trimot import kernels
    from trimot.kernels import _numba, _numpy
    prob = MatchingProblem(Sample(rng.random((90, 2))), Sample(rng.random((90, 2))), 1.0, 0.3)
    monkeypatch.setattr(kernels, "ssp_matching", _numba.ssp_matching)
    a = solve_partial_matching(prob)
    monkeypatch.setattr(kernels, "ssp_matching", _numpy.ssp_matching)
    b = solve_partial_matching(prob)
    assert a.pairing == b.pairing and a.cost == b.cost


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_1d_untrimmed_is_monotone_matching(p, rng):
    x, y = rng.random(50), rng.random(50)
    res = untrimmed_matching(Sample(x), Sample(y), p)
    ref = np.mean(np.abs(np.sort(x) - np.sort(y)) ** p)
    assert res.cost == pytest.approx(ref, rel=1e-12)
    q = w_p_quantile(DiscreteMeasure1D.empirical(x), DiscreteMeasure1D.empirical(y), p) ** p
    assert res.cost == pytest.approx(q, rel=1e-10)


def test_result_invariants(rng):
    prob = MatchingProblem(Sample(rng.random((60, 2))), Sample(rng.random((60, 2))), 2.0, 0.25)
    res = solve_partial_matching(prob)
    assert res.m == prob.m == 45
    assert len(set(res.kept_x.tolist())) == 45 and len(set(res.kept_y.tolist())) == 45
    direct = cdist(prob.x_sample.points[res.kept_x], prob.y_sample.points[res.kept_y],
                   "sqeuclidean").diagonal().mean()
    assert res.cost == pytest.approx(direct, rel=1e-12)


pts = st.integers(2, 25).flatmap(
    lambda n: st.tuples(st.integers(0, 2 ** 32 - 1), st.just(n)))


@settings(max_examples=25, deadline=None)
@given(pts, st.sampled_from([1.0, 2.0]), st.sampled_from([0.1, 0.3, 0.6]))
def test_symmetry_scaling_and_monotonicity(seed_n, p, alpha):
    seed, n = seed_n
    rng = np.random.default_rng(seed)
    x, y = rng.random((n, 2)), rng.random((n, 2))
    base = solve_partial_matching(MatchingProblem(Sample(x), Sample(y), p, alpha)).cost
    swap = solve_partial_matching(MatchingProblem(Sample(y), Sample(x), p, alpha)).cost
    assert swap == pytest.approx(base, rel=1e-10, abs=1e-15)
    lam = 0.37
    scaled = solve_partial_matching(MatchingProblem(Sample(lam * x), Sample(lam * y), p, alpha)).cost
    assert scaled == pytest.approx(lam ** p * base, rel=1e-9, abs=1e-15)
    less = solve_partial_matching(MatchingProblem(Sample(x), Sample(y), p, alpha / 2)).cost
    assert base <= less + 1e-12


def test_errors():
    with pytest.raises(DimensionError):
        MatchingProblem(Sample([0.1, 0.2]), Sample([0.3]), 1.0, 0.0)
    with pytest.raises(DimensionError):
        MatchingProblem(Sample(np.zeros((2, 2))), Sample([0.3, 0.4]), 1.0, 0.0)
    with pytest.raises(DegenerateProblemError):
        solve_partial_matching(MatchingProblem(Sample([0.1]), Sample([0.3]), 1.0, 1 - 1e-12))
    with pytest.raises(PreconditionError):
        brute_force_partial_matching(MatchingProblem(Sample(np.zeros(9)), Sample(np.zeros(9))))
    with pytest.raises(PreconditionError):
        MatchingProblem(Sample([0.1]), Sample([0.3]), 0.5, 0.0)
