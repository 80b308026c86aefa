"""Discrete-time system models, simulation, and trajectory/tail analysis.

Built-in systems:

* ``make_lotka_volterra`` -- 5-species mutualistic population model,
  state-monotone for step sizes up to 2.2, disturbance-free.
* ``make_traffic`` -- two-segment road network with controlled inflow,
  state-and-input monotone for step sizes up to 0.01.
* ``make_contractive`` -- synthetic x' = 0.5 x + 0.1 w with exactly known
  Lipschitz data; exists so the disturbance-envelope logic can be tested
  against ground truth (neither example system has nonzero disturbances).

Transition maps are vectorized: they accept state arrays of shape
``(..., n)`` (and input arrays of shape ``(..., v)``) so Monte-Carlo
sweeps run batched.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import StateEscapeError, UsageError
from .order import Box, Region, as_state, box


class InputRole(Enum):
    NONE = "none"
    DISTURBANCE = "disturbance"
    CONTROL = "control"


class TailDominance(Enum):
    """Order relation between the last two trajectory states."""

    UPPER = "upper"      # x(T) <= x(T-1): the tail is dominated from above
    LOWER = "lower"      # x(T) >= x(T-1)
    BOTH = "both"        # constant last step; either use is permitted
    NEITHER = "neither"

    @property
    def upper_ok(self) -> bool:
        return self in (TailDominance.UPPER, TailDominance.BOTH)

    @property
    def lower_ok(self) -> bool:
        return self in (TailDominance.LOWER, TailDominance.BOTH)


@dataclass(frozen=True)
class TailInfo:
    epsilon: float | None
    dominance: TailDominance

    def __post_init__(self):
        if self.epsilon is not None and self.epsilon < 0:
            raise UsageError("tail epsilon must be >= 0")


@dataclass(frozen=True)
class LipschitzBounds:
    """Known bounds: state gain L_x, input gain L_w, input-set sup-norm diameter D_w."""

    L_x: float
    L_w: float
    D_w: float

    def __post_init__(self):
        if not (self.L_x > 0 and self.L_w > 0):
            raise UsageError("L_x and L_w must be positive")
        if self.D_w < 0:
            raise UsageError("D_w must be nonnegative")


class FeedbackPolicy:
    """State-feedback map into the input set, with a monotonicity assertion."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], monotone: bool,
                 name: str = "policy"):
        self._fn = fn
        self.monotone = bool(monotone)
        self.name = name
        self.constant_value: np.ndarray | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._fn(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    @classmethod
    def constant(cls, u, name: str = "const") -> "FeedbackPolicy":
        u = np.asarray(u, dtype=np.float64)

        def fn(x):
            x = np.asarray(x)
            if x.ndim == 1:
                return u.copy()
            return np.broadcast_to(u, x.shape[:-1] + u.shape).copy()

        pol = cls(fn, monotone=True, name=name)
        pol.constant_value = u
        return pol

    def __repr__(self):
        return f"FeedbackPolicy({self.name!r}, monotone={self.monotone})"


@dataclass(eq=False)
class SystemModel:
    name: str
    dim: int
    input_dim: int
    state_set: Box
    initial_set: Region
    unsafe_set: Region
    input_set: Box | None
    transition: Callable[[np.ndarray, np.ndarray | None], np.ndarray]
    input_role: InputRole

    def __post_init__(self):
        if self.state_set.dim != self.dim:
            raise UsageError("state set dimension mismatch")
        if self.initial_set.dim != self.dim or self.unsafe_set.dim != self.dim:
            raise UsageError("region dimension mismatch")
        if self.input_role is InputRole.NONE:
            if self.input_set is not None:
                raise UsageError("input-free system cannot carry an input set")
        else:
            if self.input_set is None or self.input_set.dim != self.input_dim:
                raise UsageError("input set missing or of wrong dimension")


@dataclass(eq=False)
class Trajectory:
    """States x(0..T) with optional synchronized inputs u(0..T-1)."""

    states: np.ndarray
    inputs: np.ndarray | None = None
    policy_id: str | None = None
    tail: TailInfo | None = None
    name: str | None = None

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        if self.states.ndim != 2 or self.states.shape[0] < 1:
            raise UsageError("trajectory states must form a nonempty (T+1, n) array")
        if self.inputs is not None:
            self.inputs = np.asarray(self.inputs, dtype=np.float64)
            if self.inputs.ndim != 2 or self.inputs.shape[0] != self.horizon:
                raise UsageError("inputs must have exactly one row per transition")

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def label(self) -> str:
        return self.name if self.name else f"trajectory(T={self.horizon})"


# --------------------------------------------------------------------------
# stepping and simulation
# --------------------------------------------------------------------------

class ConstantInput:
    def __init__(self, u):
        self.u = np.asarray(u, dtype=np.float64)


class PolicyInput:
    def __init__(self, policy: FeedbackPolicy):
        self.policy = policy


class SampledDisturbance:
    """Uniform i.i.d. disturbances over the system's input set."""


InputSource = ConstantInput | PolicyInput | SampledDisturbance | None


def step(sys: SystemModel, x, v=None, step_index: int = 0) -> np.ndarray:
    """One transition, with a state-set escape check.

    Escape means the supplied model violates its own invariance claim;
    the error carries the offending state so the model can be fixed.
    """
    x = as_state(x, dim=sys.dim)
    if sys.input_role is not InputRole.NONE:
        v = as_state(v, dim=sys.input_dim)
    nxt = np.asarray(sys.transition(x, v), dtype=np.float64)
    if not sys.state_set.contains_batch(nxt):
        raise StateEscapeError(nxt, step_index)
    return nxt


def sample_disturbance(bounds: Box, rng: np.random.Generator) -> np.ndarray:
    return bounds.sample(rng)


def simulate(sys: SystemModel, x0, source: InputSource, T: int,
             seed: int | None = None, rng: np.random.Generator | None = None,
             name: str | None = None) -> Trajectory:
    """Roll the system forward T steps; deterministic given the seed.

    Inputs are recorded on the trajectory only for control systems;
    disturbance realizations are treated as unobservable.
    """
    if T < 0:
        raise UsageError("horizon must be nonnegative")
    x0 = as_state(x0, dim=sys.dim)
    if not sys.state_set.contains(x0):
        raise UsageError(f"initial state {x0} outside the state set")
    if rng is None:
        rng = np.random.default_rng(seed)

    record_inputs = sys.input_role is InputRole.CONTROL
    states = np.empty((T + 1, sys.dim))
    states[0] = x0
    inputs = np.empty((T, sys.input_dim)) if (record_inputs and T > 0) else None

    policy_id = None
    if isinstance(source, PolicyInput):
        policy_id = source.policy.name

    for t in range(T):
        if sys.input_role is InputRole.NONE:
            v = None
        elif isinstance(source, ConstantInput):
            v = source.u
        elif isinstance(source, PolicyInput):
            v = source.policy(states[t])
        elif isinstance(source, SampledDisturbance):
            v = sample_disturbance(sys.input_set, rng)
        else:
            raise UsageError(f"system {sys.name} requires an input source")
        states[t + 1] = step(sys, states[t], v, step_index=t)
        if record_inputs:
            inputs[t] = v

    if record_inputs and T == 0:
        inputs = np.empty((0, sys.input_dim))
    return Trajectory(states=states, inputs=inputs, policy_id=policy_id, name=name)


# --------------------------------------------------------------------------
# empirical audits and tail analysis
# --------------------------------------------------------------------------

@dataclass
class AuditReport:
    n_pairs: int
    mode: str
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def audit_monotonicity(sys: SystemModel, n_pairs: int, mode: str = "SM",
                       seed: int | None = None) -> AuditReport:
    """Sample ordered pairs and check the transition preserves the order.

    mode "SM": x <= x' with a shared input; "SIM": additionally v <= v'.
    Violating pairs are findings, not errors.
    """
    if n_pairs < 1:
        raise UsageError("need at least one pair")
    if mode not in ("SM", "SIM"):
        raise UsageError("mode must be 'SM' or 'SIM'")
    rng = np.random.default_rng(seed)
    report = AuditReport(n_pairs=n_pairs, mode=mode)

    xs = sys.state_set.sample(rng, size=n_pairs)
    xs2 = xs + rng.random((n_pairs, sys.dim)) * (sys.state_set.upper - xs)
    if sys.input_role is InputRole.NONE:
        vs = vs2 = [None] * n_pairs
    else:
        vs = sys.input_set.sample(rng, size=n_pairs)
        if mode == "SIM":
            vs2 = vs + rng.random((n_pairs, sys.input_dim)) * (sys.input_set.upper - vs)
        else:
            vs2 = vs

    for i in range(n_pairs):
        fx = np.asarray(sys.transition(xs[i], None if vs[i] is None else vs[i]))
        fx2 = np.asarray(sys.transition(xs2[i], None if vs2[i] is None else vs2[i]))
        if not np.all(fx <= fx2):
            report.violations.append({
                "x": xs[i].tolist(), "x2": xs2[i].tolist(),
                "v": None if vs[i] is None else np.asarray(vs[i]).tolist(),
                "v2": None if vs2[i] is None else np.asarray(vs2[i]).tolist(),
                "fx": fx.tolist(), "fx2": fx2.tolist(),
            })
    return report


def detect_dominating_tail(traj: Trajectory) -> TailDominance:
    """Classify the order relation between the last two states."""
    if traj.horizon < 1:
        warnings.warn("trajectory has a single state; tail classified as neither")
        return TailDominance.NEITHER
    last, prev = traj.states[-1], traj.states[-2]
    up = bool(np.all(last <= prev))
    lo = bool(np.all(last >= prev))
    if up and lo:
        return TailDominance.BOTH
    if up:
        return TailDominance.UPPER
    if lo:
        return TailDominance.LOWER
    return TailDominance.NEITHER


def estimate_compact_tail(traj: Trajectory, tail_window: int) -> TailInfo:
    """Empirical tail envelope over the trailing window.

    epsilon = max over t in [T - window, T] of ||x(t) - x(T)||_inf. This is
    conservative only over the *observed* window; it says nothing about the
    unobserved tail beyond T (soundness caveat, see README).
    """
    T = traj.horizon
    if tail_window < 0 or tail_window > T:
        raise UsageError(f"tail window {tail_window} out of range for horizon {T}")
    seg = traj.states[T - tail_window:]
    eps = float(np.max(np.abs(seg - traj.states[-1]))) if seg.size else 0.0
    return TailInfo(epsilon=eps, dominance=detect_dominating_tail(traj))


# --------------------------------------------------------------------------
# built-in systems
# --------------------------------------------------------------------------

# 5-species mutualistic community: interaction matrix, intrinsic growth
# rates, and carrying capacities.
LV_A = np.array([
    [0.00, 0.02, 0.00, 0.00, 0.00],
    [0.01, 0.00, 0.00, 0.02, 0.02],
    [0.00, 0.00, 0.00, 0.01, 0.02],
    [0.00, 0.02, 0.02, 0.00, 0.00],
    [0.00, 0.01, 0.01, 0.00, 0.00],
])
LV_R = np.array([0.22, 0.29, 0.26, 0.25, 0.23])
LV_K = np.array([3.81, 2.47, 4.23, 2.93, 4.89])

LV_TAU_MAX = 2.2
TRAFFIC_TAU_MAX = 0.01


def lv_transition(tau: float):
    def f(x, _v=None):
        x = np.asarray(x, dtype=np.float64)
        growth = x @ LV_A.T + LV_R - (LV_R / LV_K) * x
        return x + tau * x * growth

    return f


def lv_equilibrium() -> np.ndarray:
    """Interior fixed point: solve (diag(r/K) - A) x = r."""
    return np.linalg.solve(np.diag(LV_R / LV_K) - LV_A, LV_R)


def make_lotka_volterra(tau: float) -> SystemModel:
    if not 0 < tau <= LV_TAU_MAX:
        raise UsageError(f"step size {tau} outside the monotone range (0, {LV_TAU_MAX}]")
    return SystemModel(
        name="lotka_volterra",
        dim=5,
        input_dim=0,
        state_set=box([0.1] * 5, [10.0] * 5),
        initial_set=Region.of(box([4.0] * 5, [6.0] * 5)),
        unsafe_set=Region.of(box([0.1] * 5, [2.0] * 5), box([8.0] * 5, [10.0] * 5)),
        input_set=None,
        transition=lv_transition(tau),
        input_role=InputRole.NONE,
    )


def traffic_transition(tau: float, x_max):
    x_max = np.asarray(x_max, dtype=np.float64)

    def outflow(xj, j):
        return x_max[j] * (1.0 - np.exp(-xj))

    def f(x, u):
        x = np.asarray(x, dtype=np.float64)
        u = np.asarray(u, dtype=np.float64)
        x1, x2 = x[..., 0], x[..., 1]
        u1, u2 = u[..., 0], u[..., 1]
        phi1 = outflow(x1, 0)
        ind = (x2 <= x_max[1]).astype(np.float64)
        f1 = x1 + tau * (u1 - phi1)
        f2 = x2 + tau * (u2 * ind * phi1 - outflow(x2, 1))
        return np.stack([f1, f2], axis=-1)

    return f


def make_traffic(tau: float, x_max=(10.0, 10.0)) -> SystemModel:
    """Two road segments with controlled inflow and saturating outflow.

    x_max sets the outflow saturation levels. The default (10, 10) keeps the
    congestion indicator inactive on the state set, which is what makes the
    map monotone there and keeps the graph of the system inside the state
    set under the reference policies.
    """
    if not 0 < tau <= TRAFFIC_TAU_MAX:
        raise UsageError(f"step size {tau} outside the monotone range (0, {TRAFFIC_TAU_MAX}]")
    x_max = as_state(x_max, dim=2)
    if not np.all(x_max > 0):
        raise UsageError("saturation levels must be positive")
    return SystemModel(
        name="traffic",
        dim=2,
        input_dim=2,
        state_set=box([0.0, 0.0], [10.0, 10.0]),
        initial_set=Region.of(box([4.0, 4.0], [6.0, 6.0])),
        unsafe_set=Region.of(
            box([0.0, 0.0], [1.0, 1.0]),
            box([0.0, 9.0], [10.0, 10.0]),
            box([9.0, 0.0], [10.0, 10.0]),
        ),
        input_set=box([0.0, 0.1], [10.0, 0.9]),
        transition=traffic_transition(tau, x_max),
        input_role=InputRole.CONTROL,
    )


def make_contractive(dim: int = 2) -> SystemModel:
    """x' = 0.5 x + 0.1 w on [-1, 1]^dim with w in [-1, 1]^dim.

    True Lipschitz data: L_x = 0.5, L_w = 0.1, D_w = 2.
    """
    if dim < 1:
        raise UsageError("dimension must be >= 1")

    def f(x, w):
        return 0.5 * np.asarray(x, dtype=np.float64) + 0.1 * np.asarray(w, dtype=np.float64)

    return SystemModel(
        name="contractive",
        dim=dim,
        input_dim=dim,
        state_set=box([-1.0] * dim, [1.0] * dim),
        initial_set=Region.of(box([-0.25] * dim, [0.25] * dim)),
        unsafe_set=Region.of(box([0.8] * dim, [1.0] * dim),
                             box([-1.0] * dim, [-0.8] * dim)),
        input_set=box([-1.0] * dim, [1.0] * dim),
        transition=f,
        input_role=InputRole.DISTURBANCE,
    )


CONTRACTIVE_LIPSCHITZ = LipschitzBounds(L_x=0.5, L_w=0.1, D_w=2.0)

BUILTIN_SYSTEMS = {
    "lotka_volterra": make_lotka_volterra,
    "traffic": make_traffic,
    "contractive": make_contractive,
}
