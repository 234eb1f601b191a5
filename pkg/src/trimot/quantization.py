"""Random quantization: the full-trimming endpoint, where every point of the
cube is sent to its nearest sample point."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gammaln

from .errors import PreconditionError
from .measures import Sample

LEAF_SIZE = 16
MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class QuantizationReport:
    """``scaled`` is ``n^(p/d) * cost``."""

    cost: float
    method: str
    scaled: float
    n: int
    d: int
    p: float
    mc_std_error: Optional[float] = None


def _points_1d(sample):
    if isinstance(sample, Sample):
        x = np.sort(sample.points[:, 0]) if sample.dim == 1 else None
        if x is None:
            raise PreconditionError("quantization_cost_1d needs a 1-D sample")
        return x
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise PreconditionError("empty sample")
    if np.any(np.diff(x) < 0.0):
        raise PreconditionError("points must be sorted")
    return x


def quantization_cost_1d(sample, p):
    """Exact ``int_0^1 min_i |t - x_i|^p dt`` over midpoint Voronoi cells."""
    x = _points_1d(sample)
    n = x.size
    edges = np.concatenate(([0.0], 0.5 * (x[:-1] + x[1:]), [1.0]))
    left, right = x - edges[:-1], edges[1:] - x
    cost = math.fsum(((left ** (p + 1) + right ** (p + 1)) / (p + 1)).tolist())
    return QuantizationReport(cost, "exact_1d", n ** p * cost, n, 1, float(p))


def _seed_sequence(seed):
    # a fresh copy: spawn() advances the caller's sequence otherwise
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    return np.random.SeedSequence(seed)


def _chunk_sums(tree, d, p, n_draws, seed_seq):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    dist, _ = tree.query(rng.random((n_draws, d)), k=1)
    v = dist ** p
    return float(v.sum()), float(np.dot(v, v))


def quantization_cost_mc(sample, p, n_mc=100_000, seed=0, workers=1):
    """Monte Carlo ``E min_i ||U - x_i||^p`` with exact k-d tree neighbours.

    Draws are split into fixed chunks of 65536, each with its own child seed,
    so the estimate depends on ``seed`` only, never on ``workers``.
    """
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    if n_mc < 1000:
        raise PreconditionError("n_mc must be >= 1000")
    tree = cKDTree(sample.points, leafsize=LEAF_SIZE, balanced_tree=True)
    sizes = [MC_CHUNK] * (n_mc // MC_CHUNK)
    if n_mc % MC_CHUNK:
        sizes.append(n_mc % MC_CHUNK)
    seeds = _seed_sequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda j: _chunk_sums(tree, sample.dim, p, *j), jobs))
    else:
        parts = [_chunk_sums(tree, sample.dim, p, *j) for j in jobs]
    mean = math.fsum(s for s, _ in parts) / n_mc
    var = max(math.fsum(q for _, q in parts) / n_mc - mean * mean, 0.0)
    se = math.sqrt(var / (n_mc - 1))
    n, d = sample.n, sample.dim
    return QuantizationReport(mean, "monte_carlo", n ** (p / d) * mean, n, d, float(p), se)


def unit_ball_volume(d):
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(1.0 + 0.5 * d))


def quantization_constant(d, p):
    """Limit of ``n^(p/d) E cost``: ``Gamma(1 + p/d) * omega_d^(-p/d)`` with
    ``omega_d`` the volume of the unit ball."""
    if d < 1 or p < 1:
        raise PreconditionError("need d >= 1 and p >= 1")
    return math.exp(gammaln(1.0 + p / d)) * unit_ball_volume(d) ** (-p / d)
