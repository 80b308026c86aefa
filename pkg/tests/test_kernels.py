import os
import subprocess
import sys

import numpy as np
import pytest

from monocert import _kernels


def _workload(seed, T=57, q=400, n=3):
    rng = np.random.default_rng(seed)
    traj = rng.uniform(-5, 5, size=(T + 1, n))
    offsets = np.cumsum(rng.uniform(0, 0.1, size=T + 1))
    queries = rng.uniform(-6, 6, size=(q, n))
    return traj, offsets, queries


def test_scan_semantics_against_reference():
    traj, offsets, queries = _workload(0)
    t_hi = traj.shape[0] - 1
    got = _kernels.last_dominated_index(traj, offsets, queries, t_hi, True)
    for qi in (0, 17, 399):
        expect = -1
        for t in range(t_hi + 1):
            if np.all(queries[qi] <= traj[t] + offsets[t]):
                expect = t
        assert got[qi] == expect


def test_lower_scan_mirrors_upper():
    traj, offsets, queries = _workload(1)
    t_hi = traj.shape[0] - 1
    lower = _kernels.last_dominated_index(traj, offsets, queries, t_hi, False)
    upper_of_negated = _kernels.last_dominated_index(-traj, offsets, -queries, t_hi, True)
    assert np.array_equal(lower, upper_of_negated)


def test_t_hi_restricts_the_index_range():
    traj = np.array([[0.0], [10.0], [20.0]])
    offsets = np.zeros(3)
    q = np.array([[15.0]])
    assert _kernels.last_dominated_index(traj, offsets, q, 2, True)[0] == 2
    assert _kernels.last_dominated_index(traj, offsets, q, 1, True)[0] == -1


def test_no_qualifying_index_returns_minus_one():
    traj = np.array([[0.0], [1.0]])
    out = _kernels.last_dominated_index(traj, np.zeros(2), np.array([[5.0]]), 1, True)
    assert out[0] == -1


@pytest.mark.skipif(_kernels._scan_numba is None, reason="numba unavailable")
def test_backends_agree_bit_exactly():
    for seed in range(5):
        traj, offsets, queries = _workload(seed, T=123, q=1000, n=4)
        t_hi = traj.shape[0] - 1
        for upper in (True, False):
            a = _kernels._scan_numba(traj, offsets, queries, t_hi, upper)
            b = _kernels._scan_numpy(traj, offsets, queries, t_hi, upper)
            assert np.array_equal(a, b)


def test_env_flag_forces_numpy_backend():
    env = dict(os.environ, MONOCERT_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from monocert import _kernels; print(_kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "numpy"


def test_shape_validation():
    traj, offsets, queries = _workload(2)
    with pytest.raises(ValueError):
        _kernels.last_dominated_index(traj, offsets[:-1], queries, 10, True)
    with pytest.raises(ValueError):
        _kernels.last_dominated_index(traj, offsets, queries[:, :2], 10, True)
    with pytest.raises(ValueError):
        _kernels.last_dominated_index(traj, offsets, queries, traj.shape[0], True)
