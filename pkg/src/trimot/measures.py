"""Samples, trimming parameters, trim vectors and trimmed measures."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError, FeasibilityError, MeasureError, PreconditionError

TOL = 1e-12
TIE_STEP = 1e-15


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Sample:
    """``n`` points in ``[0, 1]^d`` kept in insertion order.

    ``points`` has shape ``(n, d)``; ``seed`` records provenance only.
    """

    points: np.ndarray
    seed: Optional[int] = None
    distribution: str = "uniform"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise DimensionError(f"points must be 1-D or 2-D, got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DimensionError("a sample needs n >= 1 points of dimension d >= 1")
        if not np.all(np.isfinite(pts)):
            raise PreconditionError("sample coordinates must be finite")
        if pts.min() < 0.0 or pts.max() > 1.0:
            raise PreconditionError("sample coordinates must lie in [0, 1]")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def order(self, axis=0):
        """Stable permutation sorting the points by coordinate ``axis``."""
        return np.argsort(self.points[:, axis], kind="stable")

    def sorted_1d(self):
        """Strictly increasing coordinates of a 1-D sample plus the sorting
        permutation. Exact ties are pulled apart by multiples of ``TIE_STEP``."""
        if self.dim != 1:
            raise DimensionError(f"expected a 1-D sample, got d={self.dim}")
        perm = self.order()
        return separate_ties(self.points[perm, 0]), perm

    def subset(self, idx):
        return Sample(self.points[np.asarray(idx)], seed=self.seed, distribution=self.distribution)


def separate_ties(x):
    """Return a strictly increasing copy of sorted ``x``; each value is raised to
    at least ``previous + TIE_STEP``. Continuous samples pass through unchanged."""
    x = np.array(x, dtype=float)
    if x.size > 1 and np.any(np.diff(x) <= 0.0):
        if np.any(np.diff(x) < 0.0):
            raise PreconditionError("points must be sorted")
        for i in range(1, x.size):
            if x[i] <= x[i - 1]:
                x[i] = x[i - 1] + TIE_STEP
    return x


def as_sorted_points(sample):
    """Coerce a 1-D :class:`Sample` or array-like to strictly increasing floats."""
    if isinstance(sample, Sample):
        x, _ = sample.sorted_1d()
        return x
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 1:
        raise DimensionError("empty sample")
    if np.any(np.diff(x) < 0.0):
        raise PreconditionError("points must be sorted in nondecreasing order")
    return separate_ties(x)


@dataclass(frozen=True)
class TrimParams:
    """Trimming level ``alpha`` in [0, 1) and cost exponent ``p >= 1``."""

    alpha: float
    p: float = 2.0

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise PreconditionError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not (self.p >= 1.0):
            raise PreconditionError(f"p must be >= 1, got {self.p}")

    def retained_mass_cap(self, n):
        """Largest mass a single atom may carry, ``1 / (n (1 - alpha))``."""
        return 1.0 / (n * (1.0 - self.alpha))


@dataclass(frozen=True, eq=False)
class TrimVector:
    """Cumulative weights ``h_1..h_{n-1}``; ``h_0 = 0`` and ``h_n = 1`` are implicit."""

    h: np.ndarray = field()

    def __post_init__(self):
        object.__setattr__(self, "h", _frozen(np.asarray(self.h, dtype=float).ravel()))

    @property
    def n(self):
        return self.h.size + 1

    def full(self):
        """``h_0, ..., h_n`` including the fixed endpoints."""
        return np.concatenate(([0.0], self.h, [1.0]))

    def increments(self):
        return np.diff(self.full())

    @classmethod
    def uniform(cls, n):
        """The vector ``h_i = i / n``, feasible for every alpha."""
        return cls(np.arange(1, n) / n)


@dataclass(frozen=True, eq=False)
class TrimmedMeasure:
    """Atom weights ``b_i`` on the points of ``base``."""

    base: Sample
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size != self.base.n:
            raise DimensionError(f"{w.size} weights for {self.base.n} points")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def n(self):
        return self.base.n


def validate_trim_vector(h, params, n):
    """True iff ``h`` lies in the chain polytope: every increment of
    ``0, h_1, ..., h_{n-1}, 1`` is in ``[0, 1/(n(1-alpha))]`` within ``TOL``."""
    vec = h if isinstance(h, TrimVector) else TrimVector(h)
    if vec.h.size != n - 1:
        raise DimensionError(f"trim vector has length {vec.h.size}, expected {n - 1}")
    inc = vec.increments()
    cap = params.retained_mass_cap(n)
    return bool(np.all(inc >= -TOL) and np.all(inc <= cap + TOL))


def trim_vector_to_measure(h, sample, params=None):
    """Weights ``b_i = h_i - h_{i-1}`` on the sorted points of a 1-D sample.

    The returned measure's base is the sorted sample. Pass ``params`` to have
    the chain constraints checked.
    """
    vec = h if isinstance(h, TrimVector) else TrimVector(h)
    if isinstance(sample, Sample):
        x = as_sorted_points(sample)
        seed = sample.seed
    else:
        x = as_sorted_points(sample)
        seed = None
    if vec.n != x.size:
        raise DimensionError(f"trim vector for n={vec.n} but sample has n={x.size}")
    if params is not None and not validate_trim_vector(vec, params, x.size):
        raise FeasibilityError("trim vector violates the chain constraints")
    inc = vec.increments()
    if np.any(inc < -TOL):
        raise FeasibilityError("trim vector is not nondecreasing")
    return TrimmedMeasure(Sample(x, seed=seed), np.clip(inc, 0.0, None))


def is_trimming_of(r, alpha):
    """True iff the weights of ``r`` form an ``alpha``-trimming of the
    empirical measure on its base points."""
    w = r.weights
    if np.any(w < -TOL):
        return False
    if abs(w.sum() - 1.0) > TOL:
        return False
    if alpha >= 1.0:
        return True
    return bool(w.max() <= 1.0 / (r.n * (1.0 - alpha)) + TOL)


def check_probability(weights, what="measure"):
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0.0) or abs(w.sum() - 1.0) > TOL * max(1, w.size):
        raise MeasureError(f"{what} weights must be nonnegative and sum to 1")
    return w


# --- CSV serialisation -----------------------------------------------------

def write_sample_csv(sample, path):
    """One comment line ``# dim=..,n=..,seed=..`` then one row per point,
    coordinates printed with 17 significant digits."""
    seed = "none" if sample.seed is None else str(int(sample.seed))
    lines = [f"# dim={sample.dim},n={sample.n},seed={seed}"]
    lines += [",".join(f"{v:.17g}" for v in row) for row in sample.points]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sample_csv(path):
    """Inverse of :func:`write_sample_csv`; also accepts bare coordinate files
    (comma separated, ``#`` comments ignored)."""
    seed = None
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("#"):
        for part in first.lstrip("# ").strip().split(","):
            key, _, val = part.partition("=")
            if key.strip() == "seed" and val.strip() not in ("", "none"):
                seed = int(val)
    pts = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return Sample(pts, seed=seed)
