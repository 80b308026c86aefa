"""Dominance times and dominance functions built from one stored trajectory.

A dominance time asks: what is the last stored index at which the
(possibly inflated) trajectory still dominates the query state from above
(upper family), or is dominated by it from below (lower family)?  The
corresponding scalar value is 1/(t+1) for a finite time, alpha (> 1) when
no index qualifies, and 0 for an unbounded time -- which cannot occur on
stored finite data and is kept only so constructed times round-trip.

Eight variants = {robust, controlled} x {upper, lower} x {full, truncated}:

* robust variants compare against the trajectory inflated by the
  disturbance envelope lam(t-1) = L_w * D_w * sum_{s=0}^{t-1} L_x^s;
* controlled variants compare against the raw states;
* truncated robust variants additionally relax the query by the tail
  envelope eps_T (upper: x - eps qualifies; lower: x + eps qualifies);
* truncated controlled variants drop the final stored index and require
  the matching dominating-tail property, which is what makes their
  dissipation sound on finite data.

"Full" variants take the sup over the stored range only: infinite
trajectories do not exist as data, so the unbounded-time case of the
idealized definition is unreachable here. Certification paths use only
truncated variants, whose finite-sample guarantees account for the
missing tail.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._kernels import last_dominated_index
from .errors import TailAssumptionError, UsageError
from .order import as_state
from .systems import FeedbackPolicy, LipschitzBounds, Trajectory

_EMPTY = -1
_INFINITE = -2


@dataclass(frozen=True)
class DominanceTime:
    """Finite(t) | Infinite | Empty, encoded as t >= 0 | -2 | -1."""

    code: int

    @classmethod
    def finite(cls, t: int) -> "DominanceTime":
        if t < 0:
            raise UsageError("finite dominance time must be >= 0")
        return cls(int(t))

    @property
    def is_finite(self) -> bool:
        return self.code >= 0

    @property
    def is_empty(self) -> bool:
        return self.code == _EMPTY

    @property
    def is_infinite(self) -> bool:
        return self.code == _INFINITE

    @property
    def t(self) -> int:
        if not self.is_finite:
            raise UsageError("no index on an empty/infinite dominance time")
        return self.code

    def __repr__(self):
        if self.is_finite:
            return f"DominanceTime(t={self.code})"
        return "DominanceTime(empty)" if self.is_empty else "DominanceTime(infinite)"


EMPTY_TIME = DominanceTime(_EMPTY)
INFINITE_TIME = DominanceTime(_INFINITE)


def dominance_value(time: DominanceTime, alpha: float) -> float:
    """Finite(t) -> 1/(t+1); Infinite -> 0; Empty -> alpha."""
    if alpha <= 1:
        raise UsageError("alpha must exceed 1")
    if time.is_finite:
        return 1.0 / (time.t + 1)
    return 0.0 if time.is_infinite else float(alpha)


@dataclass(frozen=True, eq=False)
class InflationSchedule:
    """Precomputed disturbance envelope.

    ``lam_prev[t]`` is the inflation applied when comparing against index t,
    i.e. lam(t-1); the t = 0 entry is 0 (empty sum), so the first comparison
    is against the raw initial state.
    """

    bounds: LipschitzBounds
    lam_prev: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.lam_prev, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "lam_prev", arr)

    @property
    def horizon(self) -> int:
        return self.lam_prev.size - 1

    def lam(self, t: int) -> float:
        """lam(t) = L_w * D_w * sum_{s=0}^{t} L_x^s, with lam(-1) = 0."""
        if t < -1 or t + 1 >= self.lam_prev.size:
            raise UsageError(f"lambda index {t} out of range")
        return float(self.lam_prev[t + 1])


def lambda_schedule(lip: LipschitzBounds, T: int) -> InflationSchedule:
    """Envelope lam(0..T-1) plus the lam(-1) = 0 convention.

    Computed by cumulative summation of the geometric terms, which keeps
    the schedule exactly nondecreasing; for L_x < 1 every entry is below
    the closed-form ceiling L_w * D_w / (1 - L_x).
    """
    if T < 1:
        raise UsageError("need horizon >= 1")
    powers = lip.L_x ** np.arange(T, dtype=np.float64)
    lam = lip.L_w * lip.D_w * np.cumsum(powers)
    return InflationSchedule(bounds=lip, lam_prev=np.concatenate(([0.0], lam)))


def zero_inflation(T: int) -> np.ndarray:
    return np.zeros(T + 1)


# --------------------------------------------------------------------------
# time computation
# --------------------------------------------------------------------------

def _offsets_for(traj: Trajectory, infl: InflationSchedule | None, extra: float) -> np.ndarray:
    T = traj.horizon
    if infl is None:
        offs = zero_inflation(T)
    else:
        if infl.lam_prev.size < T + 1:
            raise UsageError("inflation schedule shorter than trajectory")
        offs = infl.lam_prev[: T + 1].copy()
    if extra:
        offs += extra
    return offs


def _times(traj: Trajectory, offsets: np.ndarray, queries: np.ndarray,
           t_hi: int, upper: bool) -> np.ndarray:
    q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if q.shape[1] != traj.dim:
        raise UsageError(f"query dimension {q.shape[1]} != trajectory dimension {traj.dim}")
    return last_dominated_index(traj.states, offsets, q, t_hi, upper)


def _single_time(traj, offsets, x, t_hi, upper) -> DominanceTime:
    code = int(_times(traj, offsets, as_state(x, dim=traj.dim), t_hi, upper)[0])
    return DominanceTime(code)


def robust_upper_time(traj: Trajectory, infl: InflationSchedule, x) -> DominanceTime:
    """Last stored t with x <= x~(t) + lam(t-1) * 1; Empty if none."""
    return _single_time(traj, _offsets_for(traj, infl, 0.0), x, traj.horizon, upper=True)


def robust_lower_time(traj: Trajectory, infl: InflationSchedule, x) -> DominanceTime:
    """Last stored t with x >= x~(t) - lam(t-1) * 1."""
    return _single_time(traj, _offsets_for(traj, infl, 0.0), x, traj.horizon, upper=False)


def controlled_upper_time(traj: Trajectory, x) -> DominanceTime:
    """Last stored t with x <= x~(t) (no inflation)."""
    return _single_time(traj, zero_inflation(traj.horizon), x, traj.horizon, upper=True)


def controlled_lower_time(traj: Trajectory, x) -> DominanceTime:
    return _single_time(traj, zero_inflation(traj.horizon), x, traj.horizon, upper=False)


# --------------------------------------------------------------------------
# truncated value functions
# --------------------------------------------------------------------------

def _values_from_codes(codes: np.ndarray, alpha: float) -> np.ndarray:
    denom = np.maximum(codes, 0) + 1.0
    return np.where(codes >= 0, 1.0 / denom, float(alpha))


def trunc_robust_upper(traj: Trajectory, infl: InflationSchedule, eps_T: float,
                       alpha: float, x) -> float:
    """Value of the tail-relaxed upper scan: x - eps_T must fit under the envelope.

    Never 0: on a stored horizon the qualifying-index set is bounded.
    """
    return float(trunc_robust_upper_many(traj, infl, eps_T, alpha,
                                         np.atleast_2d(as_state(x, dim=traj.dim)))[0])


def trunc_robust_lower(traj: Trajectory, infl: InflationSchedule, eps_T: float,
                       alpha: float, x) -> float:
    return float(trunc_robust_lower_many(traj, infl, eps_T, alpha,
                                         np.atleast_2d(as_state(x, dim=traj.dim)))[0])


def trunc_robust_upper_many(traj, infl, eps_T, alpha, queries) -> np.ndarray:
    if eps_T < 0:
        raise UsageError("tail epsilon must be >= 0")
    if alpha <= 1:
        raise UsageError("alpha must exceed 1")
    offs = _offsets_for(traj, infl, eps_T)
    codes = _times(traj, offs, queries, traj.horizon, upper=True)
    return _values_from_codes(codes, alpha)


def trunc_robust_lower_many(traj, infl, eps_T, alpha, queries) -> np.ndarray:
    if eps_T < 0:
        raise UsageError("tail epsilon must be >= 0")
    if alpha <= 1:
        raise UsageError("alpha must exceed 1")
    offs = _offsets_for(traj, infl, eps_T)
    codes = _times(traj, offs, queries, traj.horizon, upper=False)
    return _values_from_codes(codes, alpha)


def _require_tail(traj: Trajectory, upper: bool) -> None:
    if traj.tail is None:
        raise TailAssumptionError(
            f"{traj.label()}: tail metadata missing; run tail estimation first")
    ok = traj.tail.dominance.upper_ok if upper else traj.tail.dominance.lower_ok
    if not ok:
        want = "x(T) <= x(T-1)" if upper else "x(T) >= x(T-1)"
        raise TailAssumptionError(
            f"{traj.label()}: tail is {traj.tail.dominance.value}, "
            f"but the {'upper' if upper else 'lower'} truncated variant needs {want}")


def trunc_controlled_upper(traj: Trajectory, alpha: float, x) -> float:
    """Upper scan over indices [0, T-1]; requires a dominated (upper) tail."""
    return float(trunc_controlled_upper_many(traj, alpha,
                                             np.atleast_2d(as_state(x, dim=traj.dim)))[0])


def trunc_controlled_lower(traj: Trajectory, alpha: float, x) -> float:
    return float(trunc_controlled_lower_many(traj, alpha,
                                             np.atleast_2d(as_state(x, dim=traj.dim)))[0])


def trunc_controlled_upper_many(traj, alpha, queries) -> np.ndarray:
    if alpha <= 1:
        raise UsageError("alpha must exceed 1")
    if traj.horizon < 1:
        raise UsageError("truncated controlled variants need horizon >= 1")
    _require_tail(traj, upper=True)
    codes = _times(traj, zero_inflation(traj.horizon), queries, traj.horizon - 1, upper=True)
    return _values_from_codes(codes, alpha)


def trunc_controlled_lower_many(traj, alpha, queries) -> np.ndarray:
    if alpha <= 1:
        raise UsageError("alpha must exceed 1")
    if traj.horizon < 1:
        raise UsageError("truncated controlled variants need horizon >= 1")
    _require_tail(traj, upper=False)
    codes = _times(traj, zero_inflation(traj.horizon), queries, traj.horizon - 1, upper=False)
    return _values_from_codes(codes, alpha)


# --------------------------------------------------------------------------
# basis descriptor
# --------------------------------------------------------------------------

class BasisKind(Enum):
    ROBUST_UPPER = "robust_upper"
    ROBUST_LOWER = "robust_lower"
    CONTROLLED_UPPER = "controlled_upper"
    CONTROLLED_LOWER = "controlled_lower"

    @property
    def is_robust(self) -> bool:
        return self in (BasisKind.ROBUST_UPPER, BasisKind.ROBUST_LOWER)

    @property
    def is_upper(self) -> bool:
        return self in (BasisKind.ROBUST_UPPER, BasisKind.CONTROLLED_UPPER)


@dataclass(eq=False)
class DominanceBasis:
    """One trajectory bound to one dominance-function variant.

    Evaluable at any state; immutable after construction, so concurrent
    evaluation across partition cells is safe.
    """

    kind: BasisKind
    truncated: bool
    trajectory: Trajectory
    alpha: float = 2.0
    inflation: InflationSchedule | None = None
    epsilon_T: float | None = None
    policy: FeedbackPolicy | None = None

    def __post_init__(self):
        if self.alpha <= 1:
            raise UsageError("alpha must exceed 1")
        if self.kind.is_robust:
            if self.inflation is None:
                raise UsageError("robust variants need an inflation schedule")
            if self.truncated and self.epsilon_T is None:
                raise UsageError("truncated robust variants need a tail epsilon")
        else:
            if self.policy is None:
                raise UsageError("controlled variants need the generating policy")
            if self.truncated:
                _require_tail(self.trajectory, upper=self.kind.is_upper)

    def time(self, x) -> DominanceTime:
        """Dominance time at a single state (truncated variants included)."""
        traj = self.trajectory
        if self.kind.is_robust:
            extra = self.epsilon_T if self.truncated else 0.0
            offs = _offsets_for(traj, self.inflation, extra)
            t_hi = traj.horizon
        else:
            offs = zero_inflation(traj.horizon)
            t_hi = traj.horizon - 1 if self.truncated else traj.horizon
        return _single_time(traj, offs, x, t_hi, self.kind.is_upper)

    def value(self, x) -> float:
        return float(self.values(np.atleast_2d(as_state(x, dim=self.trajectory.dim)))[0])

    def values(self, queries: np.ndarray) -> np.ndarray:
        """Batched evaluation over an array of shape (Q, n)."""
        traj = self.trajectory
        if self.kind.is_robust:
            extra = self.epsilon_T if self.truncated else 0.0
            offs = _offsets_for(traj, self.inflation, extra)
            t_hi = traj.horizon
        else:
            offs = zero_inflation(traj.horizon)
            t_hi = traj.horizon - 1 if self.truncated else traj.horizon
        codes = _times(traj, offs, queries, t_hi, self.kind.is_upper)
        return _values_from_codes(codes, self.alpha)
