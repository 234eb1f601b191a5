"""Stripe construction: a rate-optimal (not optimal) incomplete transport map
from the uniform law on the unit square onto a trimming of the sample.

The square is cut into ``N = floor(sqrt(n))`` vertical stripes. Inside each
stripe the second coordinate is transported with the optimal 1-D map onto an
``alpha/2``-trimming of the stripe's points. When every stripe holds at least
``(n/N) (1-alpha)/(1-alpha/2)`` points the image is an ``alpha``-trimming of
the empirical measure.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import hyp2f1, roots_legendre

from .errors import DimensionError, InfeasiblePlanError, PreconditionError
from .measures import TOL, Sample, TrimParams
from .quantization import _seed_sequence
from .trim1d import solve_trim1d

METHODS = ("exact", "quadrature", "monte_carlo")
MC_DRAWS = 100_000
QUAD_ORDER = 24
_MC_CHUNK = 1 << 16


def int_root(n, d):
    """``floor(n ** (1/d))`` without floating-point surprises (64**(1/3) < 4)."""
    r = int(round(n ** (1.0 / d)))
    while r > 0 and r ** d > n:
        r -= 1
    while (r + 1) ** d <= n:
        r += 1
    return r


def slab_index(x, N):
    """0-based slab of each coordinate for the half-open cells
    ``((i-1)/N, i/N]``; ``x = 0`` goes to the first slab."""
    idx = np.ceil(np.asarray(x, dtype=float) * N).astype(np.int64) - 1
    return np.clip(idx, 0, N - 1)


def shrink_factor(alpha):
    """``(1 - alpha) / (1 - alpha/2)``: minimal stripe occupancy relative to ``n/N``."""
    return (1.0 - alpha) / (1.0 - 0.5 * alpha)


@dataclass(frozen=True)
class StripeTrim:
    """Optimal 1-D map of one stripe: ``points[k]`` (indices into the sample,
    ordered by second coordinate) receives the level set ``(h[k], h[k+1]]``."""

    points: np.ndarray
    values: np.ndarray
    h: np.ndarray
    cost: float


@dataclass(frozen=True, eq=False)
class StripePlan:
    sample: Sample
    params: TrimParams
    N: int
    assignment: np.ndarray
    counts: np.ndarray
    per_stripe: tuple
    feasible: bool
    diagnostics: tuple = ()

    @property
    def n(self):
        return self.sample.n

    @property
    def complete(self):
        """Every stripe nonempty, so the map is defined everywhere."""
        return bool(np.all(self.counts > 0))

    def image_weights(self):
        """Mass the map sends to each sample point."""
        w = np.zeros(self.n)
        for st in self.per_stripe:
            if st is not None:
                w[st.points] += np.diff(st.h) / self.N
        return w


@dataclass(frozen=True)
class StripeCostReport:
    exact_or_mc_cost: float
    upper_bound: float
    method: str
    feasible: bool
    mc_std_error: float = float("nan")
    details: dict = field(default_factory=dict)


def _solve_stripe(idx, coords, alpha, p, tol):
    order = np.argsort(coords[idx], kind="stable")
    pts = idx[order]
    vals = coords[pts]
    res = solve_trim1d(vals, TrimParams(alpha, p), tol=tol)
    return StripeTrim(pts, vals, res.h_opt.full(), res.cost)


def build_stripe_plan(sample, params, tol=1e-9):
    """Assign points to stripes and solve the per-stripe 1-D trimming.

    Parameters
    ----------
    sample : Sample
        Two-dimensional, ``n >= 4``.
    params : TrimParams
        ``alpha`` in (0, 1); ``p`` is the exponent the 1-D maps optimise.
    tol : float
        Passed to the 1-D solver.

    Returns
    -------
    StripePlan
        ``feasible`` is False when a stripe is empty or under-populated; the
        reason is listed in ``diagnostics``.
    """
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    if sample.dim != 2:
        raise DimensionError(f"stripe construction needs d=2, got d={sample.dim}")
    n = sample.n
    if n < 4:
        raise PreconditionError("stripe construction needs n >= 4")
    if not 0.0 < params.alpha < 1.0:
        raise PreconditionError("stripe construction needs alpha in (0, 1)")
    N = math.isqrt(n)
    pts = sample.points
    assign = slab_index(pts[:, 0], N)
    counts = np.bincount(assign, minlength=N)
    need = n / N * shrink_factor(params.alpha)
    diag = []
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        diag.append(f"{empty.size} empty stripe(s), first at index {empty[0] + 1}; map undefined there")
    if counts.min() < need:
        diag.append(f"min stripe count {counts.min()} < required {need:.6g}")
    per = []
    for i in range(N):
        idx = np.flatnonzero(assign == i)
        per.append(_solve_stripe(idx, pts[:, 1], 0.5 * params.alpha, params.p, tol)
                   if idx.size else None)
    return StripePlan(sample, params, N, assign, counts, tuple(per), not diag, tuple(diag))


def check_capacity(plan):
    """True iff no atom receives more than ``1/(n(1-alpha)) + 1e-12``."""
    cap = plan.params.retained_mass_cap(plan.n)
    return bool(plan.image_weights().max() <= cap + TOL)


def upper_bound(plan, p=None):
    """``2^(p-1)/N^p + 2^(p-1)/N * sum_i W_p^p(stripe i)``; ``inf`` if a stripe
    is empty. The per-stripe 1-D costs are re-evaluated at exponent ``p``."""
    p = plan.params.p if p is None else p
    if not plan.complete:
        return math.inf
    inner = math.fsum(_w1d(st, p) for st in plan.per_stripe)
    c = 2.0 ** (p - 1.0)
    return c / plan.N ** p + c / plan.N * inner


def _w1d(st, p):
    """``int_0^1 |t - phi(t)|^p dt`` for a stripe's step map."""
    a, b = st.h[:-1] - st.values, st.h[1:] - st.values
    s = np.sign(b) * np.abs(b) ** (p + 1) - np.sign(a) * np.abs(a) ** (p + 1)
    return math.fsum((s / (p + 1)).tolist())


# --- cell integrals --------------------------------------------------------

def _corner_integral(u, v, p):
    """``int_0^u int_0^v (x^2 + y^2)^(p/2) dy dx`` for u, v >= 0 (arrays)."""
    w, h = np.maximum(u, v), np.minimum(u, v)
    out = np.zeros_like(w)
    ok = h > 0.0
    w, h = w[ok], h[ok]
    c = h / w
    if p == 2.0:
        phi = (c + c ** 3) / 3.0
    else:
        phi = (c * hyp2f1(-0.5 * p, 0.5, 1.5, -c * c)
               + c ** (p + 1) * hyp2f1(-0.5 * p, 0.5, 1.5, -1.0 / (c * c))) / (p + 2.0)
    out[ok] = w ** (p + 2) * phi
    return out


def _signed_corner(u, v, p):
    return np.sign(u) * np.sign(v) * _corner_integral(np.abs(u), np.abs(v), p)


def _rect_integral_exact(x0, x1, y0, y1, a, b, p):
    """``int int_[x0,x1]x[y0,y1] ||z - (a, b)||^p dz`` by inclusion-exclusion
    over rectangles anchored at the atom."""
    return (_signed_corner(x1 - a, y1 - b, p) - _signed_corner(x0 - a, y1 - b, p)
            - _signed_corner(x1 - a, y0 - b, p) + _signed_corner(x0 - a, y0 - b, p))


def _rect_integral_quadrature(x0, x1, y0, y1, a, b, p, order=QUAD_ORDER):
    """Tensor Gauss-Legendre on the (up to four) sub-rectangles obtained by
    cutting at the atom, so the integrand is smooth inside each piece."""
    t, wt = roots_legendre(order)
    t, wt = 0.5 * (t + 1.0), 0.5 * wt
    total = np.zeros_like(x0)
    xs = [(x0, np.clip(a, x0, x1)), (np.clip(a, x0, x1), x1)]
    ys = [(y0, np.clip(b, y0, y1)), (np.clip(b, y0, y1), y1)]
    for lx, hx in xs:
        for ly, hy in ys:
            dx, dy = hx - lx, hy - ly
            X = lx[:, None] + dx[:, None] * t[None, :]
            Y = ly[:, None] + dy[:, None] * t[None, :]
            gx = (X - a[:, None]) ** 2
            gy = (Y - b[:, None]) ** 2
            g = (gx[:, :, None] + gy[:, None, :]) ** (0.5 * p)
            total += dx * dy * np.einsum("kij,i,j->k", g, wt, wt)
    return total


def _cells(plan):
    """Rectangles ``[x0,x1] x [y0,y1]`` with the atom each is mapped to."""
    x0, x1, y0, y1, a, b = [], [], [], [], [], []
    pts = plan.sample.points
    for i, st in enumerate(plan.per_stripe):
        k = st.points.size
        x0.append(np.full(k, i / plan.N))
        x1.append(np.full(k, (i + 1) / plan.N))
        y0.append(st.h[:-1])
        y1.append(st.h[1:])
        a.append(pts[st.points, 0])
        b.append(pts[st.points, 1])
    return [np.concatenate(v) for v in (x0, x1, y0, y1, a, b)]


def _mc_cost(plan, p, n_mc, seed):
    rng = np.random.Generator(np.random.Philox(_seed_sequence(seed)))
    pts = plan.sample.points
    sums = []
    sq = []
    left = n_mc
    while left > 0:
        k = min(left, _MC_CHUNK)
        left -= k
        U = rng.random((k, 2))
        s = slab_index(U[:, 0], plan.N)
        tgt = np.empty(k, dtype=np.int64)
        for i in np.unique(s):
            st = plan.per_stripe[i]
            sel = s == i
            lvl = np.searchsorted(st.h, U[sel, 1], side="left") - 1
            lvl = np.clip(lvl, 0, st.points.size - 1)
            tgt[sel] = st.points[lvl]
        d = np.sqrt(np.sum((U - pts[tgt]) ** 2, axis=1)) ** p
        sums.append(d.sum())
        sq.append(np.sum(d * d))
    mean = math.fsum(sums) / n_mc
    var = max(math.fsum(sq) / n_mc - mean * mean, 0.0)
    return mean, math.sqrt(var / max(n_mc - 1, 1))


def stripe_cost(plan, p=None, method="exact", n_mc=MC_DRAWS, seed=0, require_feasible=True):
    """Transport cost ``int ||x - phi(x)||^p dx`` of the stripe map and the
    stripe upper bound.

    Parameters
    ----------
    plan : StripePlan
    p : float, optional
        Cost exponent; defaults to the plan's.
    method : {'exact', 'quadrature', 'monte_carlo'}
        ``exact`` integrates each stripe-by-level-set rectangle in closed form
        (polynomial for p=2, hypergeometric otherwise); ``quadrature`` uses
        tensor Gauss-Legendre; ``monte_carlo`` averages ``n_mc`` uniform draws.
    require_feasible : bool
        When False an under-populated (but complete) plan is still evaluated,
        for diagnostics.

    Raises
    ------
    InfeasiblePlanError
        If the plan is infeasible; fall back to untrimmed transport or resample.
    """
    p = plan.params.p if p is None else float(p)
    if method not in METHODS:
        raise PreconditionError(f"method must be one of {METHODS}, got {method!r}")
    if not plan.complete or (require_feasible and not plan.feasible):
        raise InfeasiblePlanError(
            "stripe plan infeasible (" + "; ".join(plan.diagnostics)
            + "); fall back to untrimmed transport or resample", level=0)
    ub = upper_bound(plan, p)
    se = float("nan")
    if method == "monte_carlo":
        if n_mc < 1000:
            raise PreconditionError("n_mc must be >= 1000")
        cost, se = _mc_cost(plan, p, n_mc, seed)
    else:
        cells = _cells(plan)
        f = _rect_integral_exact if method == "exact" else _rect_integral_quadrature
        cost = math.fsum(f(*cells, p).tolist())
    return StripeCostReport(cost, ub, method, plan.feasible, se, {"N": plan.N})


# --- d >= 3 ----------------------------------------------------------------

def _recursive(points, coords, alpha, p, level, tol):
    """Bound on the cost per unit mass for one cell: ``coords`` are the
    coordinates still to be split, the last one solved in 1-D."""
    if coords.size == 1:
        res = solve_trim1d(np.sort(points[:, coords[0]]), TrimParams(alpha, p), tol=tol)
        return res.cost, [res.h_opt.increments()]
    n = points.shape[0]
    N = int_root(n, coords.size)
    s = slab_index(points[:, coords[0]], N)
    counts = np.bincount(s, minlength=N)
    need = n / N * shrink_factor(alpha)
    if N < 1 or counts.min() < need or counts.min() == 0:
        raise InfeasiblePlanError(
            f"level {level}: min slab count {counts.min()} < required {need:.6g} (N={N})",
            level=level)
    inner = []
    weights = []
    for i in range(N):
        b, w = _recursive(points[s == i], coords[1:], 0.5 * alpha, p, level + 1, tol)
        inner.append(b)
        weights.extend(wi / N for wi in w)
    c = 2.0 ** (p - 1.0)
    return c / N ** p + c * math.fsum(inner) / N, weights


def stripe_cost_recursive(sample, params, depth=0, tol=1e-9):
    """Upper bound for the recursive slab construction in ``d >= 3``.

    Slabs are cut on one coordinate per level with ``floor(n_level^(1/d_level))``
    slabs, the trim budget halves per level (alpha, alpha/2, ...), and the last
    coordinate is solved by the 1-D trimmed solver. ``depth`` is the index of the
    first coordinate to split (0 for a full construction).

    Returns a report whose ``exact_or_mc_cost`` is NaN (only the bound is
    computed). Raises :class:`InfeasiblePlanError` with ``level`` set when any
    slab is under-populated.
    """
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    if sample.dim < 3:
        raise DimensionError(f"recursive construction needs d >= 3, got d={sample.dim}")
    if not 0 <= depth < sample.dim - 1:
        raise PreconditionError("depth must index a coordinate before the last")
    if not 0.0 < params.alpha < 1.0:
        raise PreconditionError("alpha must lie in (0, 1)")
    coords = np.arange(depth, sample.dim)
    bound, w = _recursive(sample.points, coords, params.alpha, params.p, 0, tol)
    mass = np.concatenate(w)
    return StripeCostReport(float("nan"), bound, "bound_only", True,
                            details={"max_atom_mass": float(mass.max()),
                                     "cap": params.retained_mass_cap(sample.n)})
