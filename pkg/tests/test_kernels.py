import os
import subprocess
import sys

import numpy as np
import pytest

from trimot.kernels import _numba, _numpy
from trimot.measures import TrimParams
from trimot.trim1d import _bands, _uniform_grid, compute_envelopes
from trimot.wasserstein1d import objective_terms


@pytest.mark.parametrize("seed", range(6))
def test_chain_dp_backends_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 60))
    x = np.sort(rng.random(n))
    params = TrimParams(float(rng.choice([0.1, 0.5])), float(rng.choice([1.0, 2.0, 3.0])))
    obj = objective_terms(x, params.p)
    lo, hi = _bands(n, params, compute_envelopes(x, params))
    grid, counts = _uniform_grid(lo, np.maximum(hi, lo), 17)
    counts[::3] -= 4          # ragged rows, like refinement lattices
    delta = params.retained_mass_cap(n)
    a = _numba.chain_dp(grid, counts, obj.midpoints, obj.half_spacings, params.p, delta, 1e-13)
    b = _numpy.chain_dp(grid, counts, obj.midpoints, obj.half_spacings, params.p, delta, 1e-13)
    assert np.array_equal(a[1], b[1], equal_nan=True)
    assert a[0] == pytest.approx(b[0], rel=1e-13)


def test_chain_dp_infeasible_grid():
    grid = np.array([[0.9, 0.95], [0.1, 0.2]])
    for mod in (_numba, _numpy):
        value, path = mod.chain_dp(grid, np.array([2, 2]), np.array([0.5, 0.5]),
                                   np.array([0.1, 0.1]), 2.0, 0.5, 0.0)
        assert value == np.inf and np.all(np.isnan(path))


def test_fp_backends_agree():
    y = np.concatenate([np.geomspace(1e-12, 10, 200), -np.geomspace(1e-6, 3, 50), [0.0, 1.0]])
    for p in (1.0, 1.5, 2.0, 3.0):
        a = _numpy.fp_array(y, p)
        b = np.array([_numba.fp_scalar(v, p) for v in y])
        assert np.allclose(a, b, rtol=1e-13, atol=0)


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, TRIMOT_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from trimot.kernels import backend_name;"
                          "print(backend_name())"], env=env, capture_output=True, text=True,
                         check=True).stdout.strip()
    assert out == expected
