"""Exact partial matching between two equal-size samples.

Keep ``m`` points of each sample and pair them bijectively at minimal total
``||x - y||^p``. The linear relaxation has a totally unimodular constraint
matrix, so a min-cost flow with ``m`` units of flow
(source -> x_i -> y_j -> sink, unit capacities) returns an integer optimum.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from . import kernels
from .errors import DegenerateProblemError, DimensionError, PreconditionError
from .measures import Sample

MATRIX_LIMIT = 4096   # above this n, costs are recomputed on demand
BRUTE_FORCE_LIMIT = 8


def kept_count(n, alpha):
    """``m = n - floor(alpha n)``; a tiny guard absorbs products like 0.3*10."""
    return n - int(math.floor(alpha * n + 1e-9))


def _as_sample(s):
    return s if isinstance(s, Sample) else Sample(s)


@dataclass(frozen=True, eq=False)
class MatchingProblem:
    x_sample: Sample
    y_sample: Sample
    p: float = 2.0
    alpha: float = 0.0

    def __post_init__(self):
        x, y = _as_sample(self.x_sample), _as_sample(self.y_sample)
        object.__setattr__(self, "x_sample", x)
        object.__setattr__(self, "y_sample", y)
        if x.n != y.n or x.dim != y.dim:
            raise DimensionError(f"samples differ: {x.points.shape} vs {y.points.shape}")
        if not self.p >= 1.0:
            raise PreconditionError(f"p must be >= 1, got {self.p}")
        if not 0.0 <= self.alpha < 1.0:
            raise PreconditionError(f"alpha must lie in [0, 1), got {self.alpha}")

    @property
    def n(self):
        return self.x_sample.n

    @property
    def m(self):
        return kept_count(self.n, self.alpha)

    def cost_matrix(self):
        """Dense ``n x n`` matrix of ``||x_i - y_j||^p``."""
        X, Y = self.x_sample.points, self.y_sample.points
        if self.p == 2.0:
            C = cdist(X, Y, "sqeuclidean")
        else:
            C = cdist(X, Y) ** self.p
        if not np.all(np.isfinite(C)):
            raise PreconditionError("non-finite pair cost")
        return C


@dataclass(frozen=True)
class MatchingResult:
    """``pairing[k] = (kept_x[k], kept_y[k])``, sorted by the x index."""

    kept_x: np.ndarray
    kept_y: np.ndarray
    cost: float
    flow_stats: dict = field(default_factory=dict)

    @property
    def pairing(self):
        return list(zip(self.kept_x.tolist(), self.kept_y.tolist()))

    @property
    def m(self):
        return self.kept_x.size


def _pair_costs(X, Y, p):
    d = np.sqrt(np.sum((X - Y) ** 2, axis=1))
    return d ** 2 if p == 2.0 else d ** p


def solve_partial_matching(problem, use_matrix=None):
    """Globally optimal partial matching by successive shortest paths.

    Parameters
    ----------
    problem : MatchingProblem
    use_matrix : bool, optional
        Precompute the dense cost matrix. Defaults to ``n <= 4096``; above
        that, pair costs are recomputed on demand to keep memory linear.

    Returns
    -------
    MatchingResult
        ``cost`` is the average over the ``m`` kept pairs.
    """
    m = problem.m
    if m < 1:
        raise DegenerateProblemError("no points kept (m = 0)")
    n = problem.n
    if use_matrix is None:
        use_matrix = n <= MATRIX_LIMIT
    X = np.ascontiguousarray(problem.x_sample.points)
    Y = np.ascontiguousarray(problem.y_sample.points)
    C = problem.cost_matrix() if use_matrix else np.zeros((1, 1))
    mx, my, pot_x, pot_y, settled, ok = kernels.ssp_matching(
        C, X, Y, float(problem.p), bool(use_matrix), m)
    if not ok:  # pragma: no cover - the complete bipartite graph always admits m units
        raise DegenerateProblemError("augmenting path not found")
    kept_x = np.flatnonzero(mx >= 0)
    kept_y = mx[kept_x]
    pc = _pair_costs(X[kept_x], Y[kept_y], problem.p)
    if not np.all(np.isfinite(pc)):
        raise PreconditionError("non-finite pair cost")
    cost = math.fsum(pc.tolist()) / m
    stats = {"iterations": m, "settled": int(settled), "pot_x": pot_x, "pot_y": pot_y,
             "dense": bool(use_matrix), "backend": kernels.backend_name()}
    return MatchingResult(kept_x, kept_y.astype(np.int64), cost, stats)


def untrimmed_matching(x_sample, y_sample, p=2.0):
    """Classical assignment: every point kept."""
    return solve_partial_matching(MatchingProblem(x_sample, y_sample, p, 0.0))


def brute_force_partial_matching(problem):
    """Exhaustive minimum over kept subsets of both samples and all bijections
    between them (test oracle, ``n <= 8``)."""
    n, m = problem.n, problem.m
    if n > BRUTE_FORCE_LIMIT:
        raise PreconditionError(f"brute force refuses n > {BRUTE_FORCE_LIMIT}")
    if m < 1:
        raise DegenerateProblemError("no points kept (m = 0)")
    C = problem.cost_matrix()
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.int64)
    rows = np.arange(m)
    best = np.inf
    for xs in itertools.combinations(range(n), m):
        sub = C[list(xs)]
        for ys in itertools.combinations(range(n), m):
            block = sub[:, list(ys)]
            best = min(best, float(block[rows, perms].sum(axis=1).min()))
    return best / m
