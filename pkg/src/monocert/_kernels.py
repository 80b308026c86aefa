"""Hot inner loops: last-index dominance scans over stored trajectories.

Two interchangeable backends:

* numba ``@njit`` kernels (default when numba imports cleanly), and
* a chunked pure-numpy fallback.

Set the environment variable ``MONOCERT_DISABLE_NUMBA=1`` before import to
force the numpy path. Both backends must agree bit-exactly; the returned
arrays are integer time indices, so equality is well defined and tested.

Scan semantics, shared by every dominance variant:

    upper:  largest t in [0, t_hi] with  q <= traj[t] + offsets[t]  (componentwise)
    lower:  largest t in [0, t_hi] with  q >= traj[t] - offsets[t]

A result of -1 means no index qualifies.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "MONOCERT_DISABLE_NUMBA"
_disabled = os.environ.get(_ENV_FLAG, "").strip() not in ("", "0")

# Fallback chunk size: bounds the (chunk, t_hi+1, n) comparison tensor.
_CHUNK = 2048


def _scan_numpy(traj: np.ndarray, offsets: np.ndarray, queries: np.ndarray,
                t_hi: int, upper: bool) -> np.ndarray:
    nq = queries.shape[0]
    out = np.empty(nq, dtype=np.int64)
    env = traj[: t_hi + 1] + offsets[: t_hi + 1, None] if upper \
        else traj[: t_hi + 1] - offsets[: t_hi + 1, None]
    for start in range(0, nq, _CHUNK):
        q = queries[start:start + _CHUNK]
        if upper:
            ok = np.all(q[:, None, :] <= env[None, :, :], axis=2)
        else:
            ok = np.all(q[:, None, :] >= env[None, :, :], axis=2)
        any_ok = ok.any(axis=1)
        # last True index = t_hi - argmax over the reversed axis
        last = t_hi - np.argmax(ok[:, ::-1], axis=1)
        out[start:start + _CHUNK] = np.where(any_ok, last, -1)
    return out


def _make_numba_scan():
    from numba import njit

    @njit(cache=True)
    def scan(traj, offsets, queries, t_hi, upper):  # pragma: no cover - jitted
        nq = queries.shape[0]
        n = traj.shape[1]
        out = np.empty(nq, dtype=np.int64)
        for i in range(nq):
            res = -1
            for t in range(t_hi, -1, -1):
                ok = True
                if upper:
                    for j in range(n):
                        if queries[i, j] > traj[t, j] + offsets[t]:
                            ok = False
                            break
                else:
                    for j in range(n):
                        if queries[i, j] < traj[t, j] - offsets[t]:
                            ok = False
                            break
                if ok:
                    res = t
                    break
            out[i] = res
        return out

    return scan


if not _disabled:
    try:
        _scan_numba = _make_numba_scan()
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - depends on environment
        _scan_numba = None
        BACKEND = "numpy"
else:
    _scan_numba = None
    BACKEND = "numpy"


def last_dominated_index(traj: np.ndarray, offsets: np.ndarray, queries: np.ndarray,
                         t_hi: int, upper: bool) -> np.ndarray:
    """Batched scan; see module docstring for semantics.

    traj: (T+1, n) float64, offsets: (T+1,) float64, queries: (Q, n) float64.
    Returns int64 array of shape (Q,) with values in {-1} | [0, t_hi].
    """
    traj = np.ascontiguousarray(traj, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    if not 0 <= t_hi < traj.shape[0]:
        raise ValueError(f"t_hi {t_hi} out of range for horizon {traj.shape[0] - 1}")
    if offsets.shape[0] != traj.shape[0]:
        raise ValueError("offsets length must match trajectory length")
    if queries.shape[1] != traj.shape[1]:
        raise ValueError("query dimension must match trajectory dimension")
    if BACKEND == "numba":
        return _scan_numba(traj, offsets, queries, t_hi, upper)
    return _scan_numpy(traj, offsets, queries, t_hi, upper)
