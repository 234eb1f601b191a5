"""Quick oracle-equivalence checks run by ``trimot selftest``."""

import numpy as np

from .matching import MatchingProblem, brute_force_partial_matching, solve_partial_matching
from .measures import Sample, TrimParams
from .quantization import quantization_cost_1d, quantization_cost_mc
from .trim1d import brute_force_trim1d, sandwich_bounds, solve_trim1d


def _matching(rng):
    worst = 0.0
    for _ in range(40):
        n = int(rng.integers(1, 7))
        d = int(rng.choice([1, 2]))
        prob = MatchingProblem(Sample(rng.random((n, d))), Sample(rng.random((n, d))),
                               float(rng.choice([1.0, 2.0])), float(rng.choice([0.0, 0.25, 0.5])))
        if prob.m < 1:
            continue
        worst = max(worst, abs(solve_partial_matching(prob).cost - brute_force_partial_matching(prob)))
    return worst <= 1e-12, f"max |flow - enumeration| = {worst:.3g}"


def _trim1d(rng):
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 4))
        x = np.sort(rng.random(n))
        params = TrimParams(float(rng.choice([0.1, 0.25, 0.5])), float(rng.choice([1.0, 2.0])))
        worst = max(worst, abs(solve_trim1d(x, params).cost - brute_force_trim1d(x, params, 2001)))
    return worst <= 1e-4, f"max |solver - grid search| = {worst:.3g}"


def _sandwich(rng):
    ok = True
    for _ in range(50):
        x = np.sort(rng.random(int(rng.integers(2, 100))))
        params = TrimParams(float(rng.choice([0.1, 0.5])), 2.0)
        lo, hi = sandwich_bounds(x, params)
        c = solve_trim1d(x, params).cost
        ok &= lo - 1e-12 <= c <= hi + 1e-12
    return ok, "lower <= cost <= upper on 50 instances"


def _quantization(rng):
    x = np.sort(rng.random(40))
    exact = quantization_cost_1d(x, 2.0).cost
    mc = quantization_cost_mc(Sample(x), 2.0, 100_000, int(rng.integers(1 << 30)))
    z = abs(mc.cost - exact) / mc.mc_std_error
    return z <= 4.0, f"|mc - exact| = {z:.2f} standard errors"


CHECKS = (("partial matching vs enumeration", _matching),
          ("1-D trimming vs grid search", _trim1d),
          ("sandwich bounds", _sandwich),
          ("quantization MC vs exact 1-D", _quantization))


def run_selftest(seed=0, out=print):
    rng = np.random.default_rng(seed)
    ok_all = True
    for name, fn in CHECKS:
        ok, msg = fn(rng)
        ok_all &= ok
        out(f"{'PASS' if ok else 'FAIL'}  {name}: {msg}")
    return bool(ok_all)
