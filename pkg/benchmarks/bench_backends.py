#!/usr/bin/env python3
"""Compare the numba kernels against their numpy twins.

Each backend runs in its own interpreter (the switch is read at import), e.g.

    python3 benchmarks/bench_backends.py --repeat 3

Workloads: the 1-D trimmed solver (chain DP) and the partial matching
(successive shortest paths). The first call per backend is a warm-up so
numba compilation is not timed.
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from trimot import MatchingProblem, Sample, TrimParams, solve_partial_matching, solve_trim1d
from trimot.kernels import backend_name

n_trim, n_match, repeat = map(int, sys.argv[1:4])
rng = np.random.default_rng(0)
x = np.sort(rng.random(n_trim))
pts = rng.random((2 * n_match, 2))
prob = MatchingProblem(Sample(pts[:n_match]), Sample(pts[n_match:]), 1.0, 0.25)

def timed(f):
    f()  # warm-up / compile
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = f()
        best = min(best, time.perf_counter() - t)
    return best, out

t_trim, r = timed(lambda: solve_trim1d(x, TrimParams(0.25, 1.0)))
t_match, m = timed(lambda: solve_partial_matching(prob))
print(json.dumps({"backend": backend_name(), "trim1d_s": t_trim, "trim1d_cost": r.cost,
                  "match_s": t_match, "match_cost": m.cost}))
"""


def run(disable_numba, args):
    env = dict(os.environ)
    env.pop("TRIMOT_DISABLE_NUMBA", None)
    if disable_numba:
        env["TRIMOT_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKER, str(args.n_trim), str(args.n_match),
                          str(args.repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-trim", type=int, default=1600, help="1-D sample size")
    ap.add_argument("--n-match", type=int, default=256, help="matching sample size")
    ap.add_argument("--repeat", type=int, default=3, help="timed repetitions (best kept)")
    args = ap.parse_args()

    t0 = time.perf_counter()
    fast = run(False, args)
    slow = run(True, args)
    print(f"{'workload':<12}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for key, label in (("trim1d_s", "trim1d"), ("match_s", "matching")):
        print(f"{label:<12}{fast[key]:>12.4f}{slow[key]:>12.4f}{slow[key] / fast[key]:>10.1f}x")
    same = (abs(fast["trim1d_cost"] - slow["trim1d_cost"]) <= 1e-12
            and abs(fast["match_cost"] - slow["match_cost"]) <= 1e-12)
    print(f"results agree across backends: {same}   (total {time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
