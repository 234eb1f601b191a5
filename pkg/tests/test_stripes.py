import numpy as np
import pytest
from scipy.integrate import dblquad

from trimot.errors import DimensionError, InfeasiblePlanError, PreconditionError
from trimot.measures import Sample, TrimParams
from trimot.stripes import (_corner_integral, _recursive, build_stripe_plan, check_capacity,
                            int_root, shrink_factor, slab_index, stripe_cost,
                            stripe_cost_recursive, upper_bound)

QUAD = Sample([[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]])


def _feasible_sample(n, alpha, seed):
    rng = np.random.default_rng(seed)
    for _ in range(200):
        s = Sample(rng.random((n, 2)))
        plan = build_stripe_plan(s, TrimParams(alpha, 2.0))
        if plan.feasible:
            return plan
    raise RuntimeError("no feasible draw")


def test_quadrant_example():
    plan = build_stripe_plan(QUAD, TrimParams(0.25, 2.0))
    assert plan.N == 2 and plan.counts.tolist() == [2, 2]
    assert shrink_factor(0.25) == pytest.approx(0.75 / 0.875)
    assert plan.feasible and check_capacity(plan)


def test_single_stripe_is_infeasible():
    s = Sample(np.column_stack([np.full(9, 0.05), np.linspace(0.1, 0.9, 9)]))
    plan = build_stripe_plan(s, TrimParams(0.25, 2.0))
    assert not plan.feasible and not plan.complete
    assert any("empty" in d for d in plan.diagnostics)
    assert upper_bound(plan) == np.inf
    with pytest.raises(InfeasiblePlanError):
        stripe_cost(plan)


def test_alpha_near_one_only_needs_nonempty_stripes():
    # N = 3 stripes holding 1, 4 and 4 points
    x1 = [0.1, 0.5, 0.5, 0.5, 0.5, 0.9, 0.9, 0.9, 0.9]
    s = Sample(np.column_stack([x1, np.linspace(0.05, 0.95, 9)]))
    assert build_stripe_plan(s, TrimParams(0.999, 2.0)).feasible
    assert not build_stripe_plan(s, TrimParams(0.25, 2.0)).feasible


def test_half_open_stripes():
    assert slab_index([0.0, 0.5, 0.50000001, 1.0], 2).tolist() == [0, 0, 1, 1]
    assert slab_index([1 / 3, 2 / 3], 3).tolist() == [0, 1]
    assert [int_root(n, 3) for n in (7, 8, 26, 27, 64, 124, 125)] == [1, 2, 2, 3, 4, 4, 5]


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_corner_integral(p):
    for u, v in [(0.3, 0.1), (0.02, 0.7), (0.5, 0.5)]:
        ref = dblquad(lambda y, x: (x * x + y * y) ** (p / 2), 0, u, 0, v, epsabs=1e-15)[0]
        got = _corner_integral(np.array([u]), np.array([v]), p)[0]
        assert got == pytest.approx(ref, rel=1e-10)


def test_exact_matches_monte_carlo_p2():
    plan = _feasible_sample(100, 0.9, 0)
    exact = stripe_cost(plan, method="exact")
    mc = stripe_cost(plan, method="monte_carlo", n_mc=10 ** 6, seed=7)
    assert abs(mc.exact_or_mc_cost - exact.exact_or_mc_cost) <= 3 * mc.mc_std_error


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_exact_matches_quadrature(p):
    plan = _feasible_sample(64, 0.9, 1)
    a = stripe_cost(plan, p=p, method="exact").exact_or_mc_cost
    b = stripe_cost(plan, p=p, method="quadrature").exact_or_mc_cost
    assert a == pytest.approx(b, rel=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_bound_dominates_cost_and_capacity(seed):
    plan = _feasible_sample(144, 0.8, seed)
    rep = stripe_cost(plan, method="exact")
    assert rep.feasible and rep.exact_or_mc_cost <= rep.upper_bound
    w = plan.image_weights()
    assert w.sum() == pytest.approx(1.0)
    assert w.max() <= plan.params.retained_mass_cap(plan.n) + 1e-12


def test_diagnostic_evaluation_of_underpopulated_plan():
    rng = np.random.default_rng(3)
    plan = build_stripe_plan(Sample(rng.random((256, 2))), TrimParams(0.25, 2.0))
    assert plan.complete and not plan.feasible
    with pytest.raises(InfeasiblePlanError):
        stripe_cost(plan)
    rep = stripe_cost(plan, require_feasible=False)
    assert not rep.feasible and rep.exact_or_mc_cost <= rep.upper_bound


def test_recursive_octants():
    c = np.array([[a, b, d] for a in (0.25, 0.75) for b in (0.25, 0.75) for d in (0.25, 0.75)])
    rep = stripe_cost_recursive(Sample(c), TrimParams(0.25, 2.0))
    assert np.isfinite(rep.upper_bound)
    assert rep.details["max_atom_mass"] <= rep.details["cap"] + 1e-12


def test_recursive_one_slab_infeasible():
    s = Sample(np.column_stack([np.full(27, 0.1), np.random.default_rng(0).random((27, 2))]))
    with pytest.raises(InfeasiblePlanError) as ei:
        stripe_cost_recursive(s, TrimParams(0.25, 2.0))
    assert ei.value.level == 0


def test_recursive_reduces_to_plan_in_2d():
    plan = _feasible_sample(81, 0.9, 2)
    b, _ = _recursive(plan.sample.points, np.arange(2), 0.9, 2.0, 0, 1e-9)
    assert b == pytest.approx(upper_bound(plan), rel=1e-12)


def test_errors():
    with pytest.raises(DimensionError):
        build_stripe_plan(Sample(np.zeros((5, 3))), TrimParams(0.2))
    with pytest.raises(PreconditionError):
        build_stripe_plan(Sample(np.zeros((3, 2))), TrimParams(0.2))
    with pytest.raises(PreconditionError):
        build_stripe_plan(QUAD, TrimParams(0.0))
    with pytest.raises(DimensionError):
        stripe_cost_recursive(QUAD, TrimParams(0.2))
    with pytest.raises(PreconditionError):
        stripe_cost(build_stripe_plan(QUAD, TrimParams(0.25)), method="simpson")
