"""Seeded replications, log-log rate fits and report files.

Every replication ``(n, rep)`` draws from its own counter-based stream keyed by
``(master_seed, n, rep)``, so results do not depend on scheduling or on the
number of workers.
"""

import io
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats as _stats

from .errors import DimensionError, InfeasiblePlanError, PreconditionError
from .matching import MatchingProblem, solve_partial_matching
from .measures import Sample, TrimParams
from .quantization import quantization_cost_1d, quantization_cost_mc
from .stripes import build_stripe_plan, stripe_cost_recursive, upper_bound
from .trim1d import solve_trim1d
from .wasserstein1d import w_p_empirical_to_uniform

STATISTICS = ("trim1d_cost", "untrimmed_1d_cost", "partial_match", "untrimmed_match",
              "stripe_bound", "quantization")
ROWS_HEADER = "statistic,d,p,alpha,n,rep,value,excluded"
SUMMARY_HEADER = "statistic,d,p,alpha,n,mean,stderr,n_included"
SLOPE_HEADER = "statistic,d,p,alpha,slope,slope_se"


def rng_for(*key):
    """Philox generator seeded from the integer tuple ``key``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


def sample_uniform(n, d, seed):
    """``n`` i.i.d. uniform points in ``[0, 1]^d``.

    ``seed`` is an int or a tuple of ints (e.g. ``(master, n, rep)``).
    """
    if n < 1 or d < 1:
        raise PreconditionError("need n >= 1 and d >= 1")
    key = seed if isinstance(seed, (tuple, list)) else (seed,)
    seed0 = int(key[0]) if len(key) == 1 else None
    return Sample(rng_for(*key).random((n, d)), seed=seed0)


@dataclass(frozen=True)
class ExperimentConfig:
    statistic: str
    d: int = 1
    p: float = 2.0
    alpha: float = 0.1
    n_grid: tuple = (50, 100, 200)
    reps: int = 100
    master_seed: int = 0
    workers: int = 1
    mc_draws: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.statistic not in STATISTICS:
            raise PreconditionError(f"unknown statistic {self.statistic!r}; choose from {STATISTICS}")
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise PreconditionError("n_grid must be nonempty and strictly increasing")
        if self.n_grid[0] < 1:
            raise PreconditionError("n_grid entries must be positive")
        if self.reps < 1 or self.workers < 1:
            raise PreconditionError("reps and workers must be >= 1")
        if self.statistic in ("trim1d_cost", "untrimmed_1d_cost") and self.d != 1:
            raise DimensionError(f"{self.statistic} requires d=1")
        if self.statistic == "stripe_bound" and self.d < 2:
            raise DimensionError("stripe_bound requires d >= 2")
        TrimParams(self.alpha, self.p)


@dataclass
class RateTable:
    """``rows``: ``(n, rep, value, excluded)`` in key order. ``summary``:
    ``(n, mean, stderr, n_included)`` over included rows."""

    config: ExperimentConfig
    rows: list
    summary: list = field(default_factory=list)
    slope: float = float("nan")
    slope_se: float = float("nan")

    def exclusion_rate(self, n):
        ex = [r[3] for r in self.rows if r[0] == n]
        return sum(ex) / len(ex) if ex else float("nan")

    def means(self):
        return {n: mean for n, mean, _, _ in self.summary}


def _one_replication(cfg, n, rep):
    """Statistic value and exclusion flag for replication ``(n, rep)``."""
    key = (cfg.master_seed, n, rep)
    params = TrimParams(cfg.alpha, cfg.p)
    s = cfg.statistic
    if s == "trim1d_cost":
        x = np.sort(sample_uniform(n, 1, key).points[:, 0])
        return solve_trim1d(x, params).cost, False
    if s == "untrimmed_1d_cost":
        x = np.sort(sample_uniform(n, 1, key).points[:, 0])
        return w_p_empirical_to_uniform(x, cfg.p), False
    if s in ("partial_match", "untrimmed_match"):
        pts = sample_uniform(2 * n, cfg.d, key).points
        alpha = cfg.alpha if s == "partial_match" else 0.0
        prob = MatchingProblem(Sample(pts[:n]), Sample(pts[n:]), cfg.p, alpha)
        return solve_partial_matching(prob).cost, False
    if s == "stripe_bound":
        sample = sample_uniform(n, cfg.d, key)
        if cfg.d == 2:
            plan = build_stripe_plan(sample, params)
            return upper_bound(plan), not plan.feasible
        try:
            return stripe_cost_recursive(sample, params).upper_bound, False
        except InfeasiblePlanError:
            return float("nan"), True
    # quantization
    sample = sample_uniform(n, cfg.d, key)
    if cfg.d == 1:
        return quantization_cost_1d(np.sort(sample.points[:, 0]), cfg.p).cost, False
    rep_seed = np.random.SeedSequence([cfg.master_seed, n, rep, 1])
    return quantization_cost_mc(sample, cfg.p, cfg.mc_draws, rep_seed).cost, False


def fit_loglog_slope(pairs):
    """OLS slope of ``log mean`` on ``log n`` and its standard error."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise PreconditionError("slope fit needs at least 3 points")
    n = np.array([a for a, _ in pairs], dtype=float)
    y = np.array([b for _, b in pairs], dtype=float)
    if np.any(~(y > 0.0)) or np.any(n <= 0.0):
        raise PreconditionError("slope fit needs positive n and means")
    res = _stats.linregress(np.log(n), np.log(y))
    return float(res.slope), float(res.stderr)


def summarize(config, rows):
    table = RateTable(config, rows)
    for n in config.n_grid:
        vals = np.array([r[2] for r in rows if r[0] == n and not r[3]], dtype=float)
        k = vals.size
        mean = float(np.mean(vals)) if k else float("nan")
        se = float(np.std(vals, ddof=1) / math.sqrt(k)) if k > 1 else float("nan")
        table.summary.append((n, mean, se, k))
    pts = [(n, m) for n, m, _, k in table.summary if k > 0 and m > 0]
    if len(pts) >= 3:
        table.slope, table.slope_se = fit_loglog_slope(pts)
    return table


def run_experiment(config, statistic_fn: Optional[Callable] = None):
    """Run ``reps`` replications per ``n`` and fit the rate.

    Parameters
    ----------
    config : ExperimentConfig
    statistic_fn : callable, optional
        ``fn(config, n, rep) -> (value, excluded)`` replacing the built-in
        statistic (used to inject synthetic data).

    Returns
    -------
    RateTable
        Excluded replications (infeasible stripe plans) stay in ``rows`` with
        ``excluded=True`` and are left out of the means.
    """
    fn = statistic_fn or _one_replication
    keys = [(n, rep) for n in config.n_grid for rep in range(config.reps)]

    def task(key):
        value, excluded = fn(config, *key)
        return key, float(value), bool(excluded)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as ex:
            out = list(ex.map(task, keys))
    else:
        out = [task(k) for k in keys]
    results = {k: (v, e) for k, v, e in out}
    rows = [(n, rep, *results[(n, rep)]) for n, rep in sorted(results)]
    return summarize(config, rows)


# --- reports ---------------------------------------------------------------

def fmt(x):
    """17 significant digits; ints unchanged."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _prefix(cfg):
    return [cfg.statistic, fmt(cfg.d), fmt(float(cfg.p)), fmt(float(cfg.alpha))]


def render_csvs(table):
    """Rows, summary and slope CSV texts."""
    cfg = table.config
    pre = _prefix(cfg)
    rows = [ROWS_HEADER] + [",".join(pre + [fmt(n), fmt(rep), fmt(v), fmt(bool(e))])
                            for n, rep, v, e in table.rows]
    summ = [SUMMARY_HEADER] + [",".join(pre + [fmt(n), fmt(m), fmt(se), fmt(k)])
                               for n, m, se, k in table.summary]
    slope = [SLOPE_HEADER, ",".join(pre + [fmt(table.slope), fmt(table.slope_se)])]
    return tuple("\n".join(lines) + "\n" for lines in (rows, summ, slope))


def render_svg(table):
    """Log-log plot of the per-n means with the fitted line, as SVG text."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cfg = table.config
    ns = np.array([n for n, m, _, k in table.summary if k > 0 and m > 0], dtype=float)
    ms = np.array([m for n, m, _, k in table.summary if k > 0 and m > 0], dtype=float)
    with matplotlib.rc_context({"svg.hashsalt": "trimot", "svg.fonttype": "path",
                                "path.simplify": False}):
        fig, ax = plt.subplots(figsize=(800 / 72, 600 / 72), dpi=72)
        if ns.size:
            ax.loglog(ns, ms, "o", label="mean")
        if ns.size >= 2 and np.isfinite(table.slope):
            b = np.mean(np.log(ms)) - table.slope * np.mean(np.log(ns))
            ax.loglog(ns, np.exp(b) * ns ** table.slope, "-",
                      label=f"slope {table.slope:.4f} ± {table.slope_se:.4f}")
        ax.set_xlabel("n")
        ax.set_ylabel(f"E[{cfg.statistic}]")
        ax.set_title(f"{cfg.statistic}  d={cfg.d}  p={cfg.p:g}  alpha={cfg.alpha:g}")
        if ns.size:
            ax.legend(loc="best")
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def report_paths(out_dir, stem):
    return {k: os.path.join(out_dir, f"{stem}_{k}.{ext}")
            for k, ext in (("rows", "csv"), ("summary", "csv"), ("slope", "csv"), ("plot", "svg"))}


def emit_report(table, out_dir, stem=None):
    """Write ``<stem>_rows.csv``, ``_summary.csv``, ``_slope.csv`` and
    ``_plot.svg`` into ``out_dir``; returns the path dict.

    Everything is rendered in memory first and moved into place afterwards,
    so a failure leaves no partial files.
    """
    if not table.rows:
        raise PreconditionError("no rows to report")
    stem = stem or table.config.statistic
    rows, summ, slope = render_csvs(table)
    texts = {"rows": rows, "summary": summ, "slope": slope, "plot": render_svg(table)}
    os.makedirs(out_dir, exist_ok=True)
    paths = report_paths(out_dir, stem)
    tmp = {}
    try:
        for k, text in texts.items():
            fd, name = tempfile.mkstemp(dir=out_dir, prefix=f".{stem}_{k}.", suffix=".tmp")
            tmp[k] = name
            with os.fdopen(fd, "w", newline="\n", encoding="utf-8") as fh:
                fh.write(text)
        for k, name in tmp.items():
            os.replace(name, paths[k])
    finally:
        for name in tmp.values():
            if os.path.exists(name):
                os.unlink(name)
    return paths
