"""Optimal alpha-trimming of a 1-D empirical measure towards U(0, 1).

The trimmed cost is ``V_n(p)`` plus a separable convex penalty in the trim
vector ``h``, minimised over the chain polytope
``0 <= h_i - h_{i-1} <= 1/(n(1-alpha))``. Explicit upper and lower envelopes
bracket the minimiser; the solver runs a dynamic program over that band.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import EnvelopeConsistencyError, PreconditionError
from .kernels._numpy import _stage_costs
from .measures import TOL, TrimParams, TrimVector, as_sorted_points, validate_trim_vector
from .wasserstein1d import objective_terms, w_p_empirical_to_uniform

GRID_POINTS = 64
MAX_REFINEMENTS = 40
DP_SLACK = 1e-13
POLISH_SWEEPS = 200


@dataclass(frozen=True)
class Envelopes:
    """``u`` (length n), ``f_bar``/``h_bar``/``h_lower`` (length n+1, indices 0..n)."""

    u: np.ndarray
    f_bar: np.ndarray
    h_bar: np.ndarray
    f_lower: np.ndarray
    h_lower: np.ndarray

    @property
    def upper(self):
        return TrimVector(self.h_bar[1:-1])

    @property
    def lower(self):
        return TrimVector(self.h_lower[1:-1])

    def midpoint(self):
        """Diagnostic only: the average of the two envelopes."""
        return TrimVector(0.5 * (self.h_bar[1:-1] + self.h_lower[1:-1]))


@dataclass(frozen=True)
class TrimSolve1DResult:
    h_opt: TrimVector
    cost: float
    lower_bound: float
    upper_bound: float
    solver_stats: dict = field(default_factory=dict)


def _drift(x, alpha):
    """``c_i = (x_i + x_{i+1})/2 - i/(n(1-alpha))`` for i = 1..n-1."""
    n = x.size
    i = np.arange(1, n)
    return 0.5 * (x[:-1] + x[1:]) - i / (n * (1.0 - alpha))


def compute_envelopes(sample, params):
    """Upper envelope by a backward running max of the midpoint drift, lower
    envelope by the mirrored forward running min, both clipped to
    ``[-alpha/(1-alpha), 0]`` and shifted back by ``i/(n(1-alpha))``."""
    x = as_sorted_points(sample)
    alpha = params.alpha
    n = x.size
    floor = -alpha / (1.0 - alpha)
    ramp = np.arange(n + 1) / (n * (1.0 - alpha))
    c = _drift(x, alpha)

    u = np.empty(n)
    if n > 1:
        u[:-1] = np.maximum(np.maximum.accumulate(c[::-1])[::-1], floor)
    u[-1] = floor
    f_bar = np.empty(n + 1)
    f_bar[0] = 0.0
    f_bar[1:] = np.minimum(u, 0.0)

    f_lower = np.empty(n + 1)
    f_lower[0] = 0.0
    f_lower[-1] = floor
    if n > 1:
        f_lower[1:-1] = np.maximum(np.minimum(np.minimum.accumulate(c), 0.0), floor)

    h_bar = f_bar + ramp
    h_lower = f_lower + ramp
    h_bar[0], h_bar[-1] = 0.0, 1.0
    h_lower[0], h_lower[-1] = 0.0, 1.0
    return Envelopes(u=u, f_bar=f_bar, h_bar=h_bar, f_lower=f_lower, h_lower=h_lower)


def sandwich_bounds(sample, params):
    """``(V_n(p), V_n(p) + penalty at the upper envelope)``."""
    x = as_sorted_points(sample)
    obj = objective_terms(x, params.p)
    if x.size == 1:
        return obj.v_n, obj.v_n
    env = compute_envelopes(x, params)
    return obj.v_n, obj.cost(env.h_bar[1:-1])


def _bands(n, params, env):
    """Per-coordinate box for h_1..h_{n-1}: chain reachability from both ends,
    intersected with the envelope band when ``env`` is given."""
    delta = params.retained_mass_cap(n)
    i = np.arange(1, n)
    lo = np.maximum(0.0, 1.0 - (n - i) * delta)
    hi = np.minimum(1.0, i * delta)
    if env is not None:
        lo = np.maximum(lo, env.h_lower[1:-1])
        hi = np.minimum(hi, env.h_bar[1:-1])
    return lo, hi


def _uniform_grid(lo, hi, m):
    t = np.linspace(0.0, 1.0, m)
    grid = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    grid[:, -1] = hi
    counts = np.full(lo.size, m, dtype=np.int64)
    return grid, counts


def _lattice_grid(center, step, radius, lo, hi):
    """Points ``center + k*step`` (|k| <= radius) kept inside [lo, hi], packed
    to the left of each row. Also reports which rows hit the lattice edge."""
    k = np.arange(-radius, radius + 1)
    pts = center[:, None] + step * k[None, :]
    pts[:, radius] = center
    inside = (pts >= lo[:, None] - DP_SLACK) & (pts <= hi[:, None] + DP_SLACK)
    counts = inside.sum(axis=1).astype(np.int64)
    order = np.argsort(~inside, axis=1, kind="stable")
    grid = np.take_along_axis(np.where(inside, pts, np.inf), order, axis=1)
    return grid, counts


def _polish(h, mid, delta, lo, hi, sweeps=POLISH_SWEEPS):
    """Red-black coordinate descent: each coordinate moves to the exact
    minimiser of its own (convex, midpoint-centred) penalty given its two
    neighbours. Never increases the cost; pins coordinates whose penalty is
    too small for the grid search to resolve (tiny spacings)."""
    h = h.copy()
    n1 = h.size
    for _ in range(sweeps):
        old = h.copy()
        for parity in (0, 1):
            idx = np.arange(parity, n1, 2)
            full = np.concatenate(([0.0], h, [1.0]))
            left, right = full[idx], full[idx + 2]
            a = np.maximum(np.maximum(left, right - delta), lo[idx])
            b = np.minimum(np.minimum(left + delta, right), hi[idx])
            h[idx] = np.where(a <= b, np.clip(mid[idx], a, b), h[idx])
        if np.array_equal(h, old):
            break
    return h


def solve_trim1d(sample, params, tol=1e-9, use_envelopes=True,
                 grid_points=GRID_POINTS, max_refinements=MAX_REFINEMENTS):
    """Minimise the trimmed cost over the chain polytope.

    A first dynamic program runs on ``grid_points`` uniform points per
    coordinate inside the envelope band. Each refinement round then solves the
    same program on a lattice of common step centred on the incumbent; the step
    is halved unless the incumbent sits on the lattice edge, in which case the
    lattice is only re-centred. Iteration stops once a halving round improves
    the objective by less than ``tol`` at a step below ``tol``.

    A final coordinate-descent pass pins coordinates whose penalty is below
    floating-point resolution of the total.

    ``use_envelopes=False`` drops the envelope band (slower; used to check the
    envelope property independently of the solver).
    """
    x = as_sorted_points(sample)
    n = x.size
    p = params.p
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    obj = objective_terms(x, p)
    stats = {"grid_points": grid_points, "rounds": 0, "final_step": 0.0, "recentred": 0,
             "backend": kernels.backend_name()}
    if n == 1:
        return TrimSolve1DResult(TrimVector(np.empty(0)), obj.v_n, obj.v_n, obj.v_n, stats)
    if params.alpha == 0.0:
        h = TrimVector.uniform(n)
        cost = w_p_empirical_to_uniform(x, p)
        return TrimSolve1DResult(h, cost, obj.v_n, obj.cost(h.h), stats)

    env = compute_envelopes(x, params)
    upper = obj.cost(env.h_bar[1:-1])
    lo, hi = _bands(n, params, env if use_envelopes else None)
    if np.any(lo > hi + 1e-12):
        raise EnvelopeConsistencyError("empty envelope band; envelopes cross")
    hi = np.maximum(hi, lo)
    delta = params.retained_mass_cap(n)
    mid, half = obj.midpoints, obj.half_spacings

    grid, counts = _uniform_grid(lo, hi, grid_points)
    value, h = kernels.chain_dp(grid, counts, mid, half, float(p), delta, DP_SLACK)
    if not np.isfinite(value):
        raise EnvelopeConsistencyError("no feasible chain on the initial grid")
    step = float(np.max(hi - lo)) / (grid_points - 1)
    radius = grid_points // 2
    rounds = 0
    while rounds < max_refinements and step > 0.0:
        rounds += 1
        center = h
        lat, cnt = _lattice_grid(center, step, radius, lo, hi)
        new_value, new_h = kernels.chain_dp(lat, cnt, mid, half, float(p), delta, DP_SLACK)
        if new_value <= value:
            improvement = value - new_value
            value, h = new_value, new_h
        else:
            improvement = 0.0
        k = np.rint((h - center) / step)
        reach = step * (radius + 1)
        at_edge = np.any((k >= radius) & (center + reach <= hi)) or \
            np.any((k <= -radius) & (center - reach >= lo))
        if at_edge:
            stats["recentred"] += 1
            continue
        step *= 0.5
        if improvement < tol and step < tol:
            break
    stats["rounds"] = rounds
    stats["final_step"] = step

    h = np.clip(h, lo, hi)
    polished = _polish(h, mid, delta, lo, hi)
    if obj.cost(polished) <= obj.cost(h):
        h = polished
    vec = TrimVector(h)
    if not validate_trim_vector(vec, params, n):
        raise EnvelopeConsistencyError("solver produced an infeasible trim vector")
    cost = obj.cost(h)
    return TrimSolve1DResult(vec, cost, obj.v_n, upper, stats)


def brute_force_trim1d(sample, params, grid):
    """Exhaustive nested grid search over the chain polytope (test oracle).

    Coordinate ``h_k`` ranges over ``grid`` equally spaced points of its exact
    feasible interval given ``h_{k-1}``, so every enumerated vector is feasible
    and constraint-active optima are hit exactly. Cost is ``grid**(n-1)``.
    """
    x = as_sorted_points(sample)
    n = x.size
    if n > 6:
        raise PreconditionError("brute_force_trim1d refuses n > 6")
    if grid > 2001 or grid < 2:
        raise PreconditionError("grid must be in [2, 2001]")
    obj = objective_terms(x, params.p)
    if n == 1:
        return obj.v_n
    delta = params.retained_mass_cap(n)
    t = np.linspace(0.0, 1.0, grid)
    mid, half, p = obj.midpoints, obj.half_spacings, params.p

    def penalty(k, h):
        return _stage_costs(h, mid[k], half[k], p + 1.0)

    def interval(k, prev):
        # h_{k+1} given h_k = prev (k is 0-based coordinate index)
        lo = np.maximum(prev, 1.0 - (n - k - 1) * delta)
        hi = np.minimum(prev + delta, 1.0)
        return lo, np.maximum(hi, lo)

    def expand(k, prev, acc):
        lo, hi = interval(k, prev)
        h = lo[:, None] + (hi - lo)[:, None] * t[None, :]
        return h.ravel(), (acc[:, None] + penalty(k, h)).ravel()

    best = np.inf

    def search(k, prev, acc):
        nonlocal best
        remaining = n - 1 - k
        if remaining <= 2:
            h, c = prev, acc
            for kk in range(k, n - 1):
                h, c = expand(kk, h, c)
            best = min(best, float(c.min()))
            return
        h, c = expand(k, prev, acc)
        for hv, cv in zip(h, c):
            search(k + 1, np.array([hv]), np.array([cv]))

    search(0, np.array([0.0]), np.array([0.0]))
    return obj.v_n + best
