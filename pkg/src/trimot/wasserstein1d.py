"""One-dimensional Wasserstein machinery against the uniform law on [0, 1]."""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DimensionError, PreconditionError
from .kernels import fp_array
from .kernels._numpy import _stage_costs
from .measures import TrimVector, as_sorted_points, check_probability

UNIFORM = "uniform"


def signed_power(t, p):
    """Odd extension of ``t**p``: ``sign(t) * |t|**p``."""
    t = np.asarray(t, dtype=float)
    return np.sign(t) * np.abs(t) ** p


def f_p(y, p):
    """``(1+|y|)^(p+1) + sgn(1-|y|) |1-|y||^(p+1) - 2``.

    Even, convex, zero at the origin. Accepts scalars or arrays.
    """
    if not p >= 1.0:
        raise PreconditionError(f"f_p needs p >= 1, got {p}")
    out = fp_array(y, p)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DiscreteMeasure1D:
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float).ravel()
        w = check_probability(np.asarray(self.weights, dtype=float).ravel())
        if a.size != w.size:
            raise DimensionError("atoms and weights differ in length")
        order = np.argsort(a, kind="stable")
        object.__setattr__(self, "atoms", a[order])
        object.__setattr__(self, "weights", w[order])

    @classmethod
    def empirical(cls, points):
        pts = np.asarray(points, dtype=float).ravel()
        return cls(pts, np.full(pts.size, 1.0 / pts.size))

    def cdf_knots(self):
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c


def _segment_integral_uniform(x, a, b, p):
    """``int_a^b |x - t|^p dt`` elementwise."""
    return (signed_power(b - x, p + 1) - signed_power(a - x, p + 1)) / (p + 1)


def w_p_quantile(mu, nu, p):
    """``W_p`` between two 1-D laws through their quantile functions.

    Each argument is a :class:`DiscreteMeasure1D` or :data:`UNIFORM`. The
    integral of ``|F^{-1} - G^{-1}|^p`` is exact on the merged breakpoints.
    """
    if mu is UNIFORM and nu is UNIFORM:
        return 0.0
    if mu is UNIFORM:
        mu, nu = nu, mu
    if nu is UNIFORM:
        knots = np.concatenate(([0.0], mu.cdf_knots()))
        total = _segment_integral_uniform(mu.atoms, knots[:-1], knots[1:], p).sum()
        return float(max(total, 0.0) ** (1.0 / p))
    k_mu, k_nu = mu.cdf_knots(), nu.cdf_knots()
    breaks = np.union1d(np.concatenate(([0.0], k_mu)), k_nu)
    breaks = breaks[(breaks >= 0.0) & (breaks <= 1.0)]
    lengths = np.diff(breaks)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    q_mu = mu.atoms[np.minimum(np.searchsorted(k_mu, mids), mu.atoms.size - 1)]
    q_nu = nu.atoms[np.minimum(np.searchsorted(k_nu, mids), nu.atoms.size - 1)]
    total = float(np.sum(np.abs(q_mu - q_nu) ** p * lengths))
    return total ** (1.0 / p)


def w_p_empirical_to_uniform(sample, p):
    """``W_p^p(P_n, U(0,1))`` for a sorted sample, via the telescoped sum
    ``sum_i [(i/n - x_i)^(p+1) - ((i-1)/n - x_i)^(p+1)] / (p+1)`` (signed powers)."""
    x = _sorted_or_raise(sample)
    n = x.size
    i = np.arange(1, n + 1)
    return float(np.sum(signed_power(i / n - x, p + 1) - signed_power((i - 1) / n - x, p + 1)) / (p + 1))


def _sorted_or_raise(sample):
    if not hasattr(sample, "sorted_1d"):
        raw = np.asarray(sample, dtype=float).ravel()
        if np.any(np.diff(raw) < 0.0):
            raise PreconditionError("points must be sorted")
    return as_sorted_points(sample)


@dataclass(frozen=True)
class Objective1D:
    """Split of the 1-D trimmed cost into the part that does not depend on the
    trim vector and a sum of ``f_p`` penalties around the midpoints."""

    points: np.ndarray
    p: float
    boundary_term: float
    spacing_term: float
    midpoints: np.ndarray
    half_spacings: np.ndarray

    @property
    def v_n(self):
        return self.boundary_term + self.spacing_term

    def stage_costs(self, h):
        """Per-coordinate penalties ``r_i^(p+1) f_p((h_i - m_i)/r_i) / (p+1)``."""
        h = np.asarray(h.h if isinstance(h, TrimVector) else h, dtype=float)
        return _stage_costs(h, self.midpoints, self.half_spacings, self.p + 1.0)

    def cost(self, h):
        """``W_p^p`` of the trimming described by ``h``."""
        return self.v_n + float(np.sum(self.stage_costs(h)))

    def direct_cost(self, h):
        """Same quantity as :meth:`cost`, summed cell by cell over the quantile
        function: ``sum_i int_{h_{i-1}}^{h_i} |x_i - t|^p dt``."""
        vec = h if isinstance(h, TrimVector) else TrimVector(h)
        full = vec.full()
        return float(_segment_integral_uniform(self.points, full[:-1], full[1:], self.p).sum())


def objective_terms(sample, p):
    """Decompose the trimmed cost for strictly increasing points in [0, 1]."""
    x = np.asarray(sample.sorted_1d()[0] if hasattr(sample, "sorted_1d") else sample, dtype=float).ravel()
    if x.size > 1 and np.any(np.diff(x) <= 0.0):
        raise PreconditionError("objective_terms needs strictly increasing points")
    if x.size == 0:
        raise DimensionError("empty sample")
    q = p + 1.0
    gaps = np.diff(x)
    boundary = (x[0] ** q + (1.0 - x[-1]) ** q) / q
    spacing = float(np.sum(gaps ** q)) / (2.0 ** p * q)
    return Objective1D(
        points=x,
        p=float(p),
        boundary_term=float(boundary),
        spacing_term=spacing,
        midpoints=0.5 * (x[:-1] + x[1:]),
        half_spacings=0.5 * gaps,
    )


def v_n_expectation(n, p):
    """``E V_n(p)`` for ``n`` i.i.d. uniforms:
    ``Gamma(n+1) Gamma(p+2) / ((p+1) Gamma(n+p+2)) * (2 + (n-1)/2^p)``."""
    if n < 1 or p < 1:
        raise PreconditionError("need n >= 1 and p >= 1")
    log_beta = gammaln(n + 1) + gammaln(p + 2) - gammaln(n + p + 2)
    return float(np.exp(log_beta) / (p + 1) * (2.0 + (n - 1) / 2.0 ** p))


def v_n_scaled_limit(p):
    """Limit of ``n^p E V_n(p)``: ``Gamma(p+2) / (2^p (p+1))``."""
    return float(np.exp(gammaln(p + 2)) / (2.0 ** p * (p + 1)))
