"""Simulation-based falsification of certificates and their supporting properties.

Everything here is a sanity layer *under* the deductive guarantee, not the
guarantee itself: checks are Monte Carlo, deterministic per seed, and each
has a negative control in the test suite so a vacuous pass cannot hide.

Transition maps are invoked directly (no state-set escape guard): the
inequalities being checked are order statements that remain meaningful if
a sampled corner point steps marginally outside the declared state box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .certify import CertificateTemplate, ControllerSet
from .dominance import (
    DominanceBasis,
    lambda_schedule,
    trunc_robust_lower_many,
    trunc_robust_upper_many,
)
from .errors import UsageError
from .partition import GridPartition
from .systems import InputRole, LipschitzBounds, SystemModel, Trajectory

_FRAGILE_MARGIN = 1e-8


def _stable_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


@dataclass
class SafetyReport:
    n_runs: int
    horizon: int
    seed: int
    invariance_violations: list[dict] = field(default_factory=list)
    unsafe_hits: list[dict] = field(default_factory=list)
    min_margin: float = np.inf

    @property
    def ok(self) -> bool:
        return not self.invariance_violations and not self.unsafe_hits

    @property
    def fragile(self) -> bool:
        """Certificate slack came numerically close to zero somewhere."""
        return self.min_margin < _FRAGILE_MARGIN

    def to_dict(self) -> dict:
        return {
            "check": "monte_carlo_safety",
            "n_runs": self.n_runs,
            "horizon": self.horizon,
            "seed": self.seed,
            "invariance_violations": self.invariance_violations,
            "unsafe_hits": self.unsafe_hits,
            "min_margin": self.min_margin,
            "ok": self.ok,
            "fragile": self.fragile,
        }

    def to_text(self) -> str:
        return _stable_json(self.to_dict())


def monte_carlo_safety(sys: SystemModel, tpl: CertificateTemplate, n_runs: int,
                       horizon: int, seed: int, controller: ControllerSet | None = None,
                       part: GridPartition | None = None, nominal=None,
                       max_recorded: int = 20, pos_tol: float = 1e-12) -> SafetyReport:
    """Simulate from uniform initial-set samples and watch the certificate.

    Records (i) any step where the certificate turns positive after having
    been nonpositive, (ii) any visit to the unsafe set, and (iii) the
    minimum certificate slack -B(x) observed anywhere. Controlled systems
    draw inputs from the controller set of the occupied cell (nominal
    clipped in, or the box center).

    pos_tol guards the sign test against summation-order dust: certificates
    tight at an initial-row boundary legitimately attain exactly zero on a
    set of positive measure (dominance values are step functions), and the
    slack re-computed along a run can differ from the assembled row by one
    ulp. Any real violation is larger by many orders of magnitude.
    """
    rng = np.random.default_rng(seed)
    report = SafetyReport(n_runs=n_runs, horizon=horizon, seed=seed)
    states = sys.initial_set.sample(rng, size=n_runs)

    if sys.input_role is InputRole.CONTROL:
        if controller is None or part is None:
            raise UsageError("controlled validation needs a controller set and partition")

    # a run starts inside the claimed sublevel set by definition, so a
    # positive value at step 0 already violates the initial condition
    was_nonpos = np.ones(n_runs, dtype=bool)
    for t in range(horizon + 1):
        vals = tpl.eval_many(states)
        slack = -vals
        report.min_margin = min(report.min_margin, float(slack.min()))
        flipped = np.flatnonzero(was_nonpos & (vals > pos_tol))
        for run in flipped[:max_recorded - len(report.invariance_violations)]:
            report.invariance_violations.append(
                {"run": int(run), "step": t, "value": float(vals[run]),
                 "state": states[run].tolist()})
        was_nonpos = was_nonpos & (vals <= pos_tol)

        hits = np.flatnonzero(sys.unsafe_set.contains_batch(states))
        for run in hits[:max_recorded - len(report.unsafe_hits)]:
            report.unsafe_hits.append(
                {"run": int(run), "step": t, "state": states[run].tolist()})

        if t == horizon:
            break
        if sys.input_role is InputRole.NONE:
            states = np.asarray(sys.transition(states, None), dtype=np.float64)
        elif sys.input_role is InputRole.DISTURBANCE:
            w = sys.input_set.sample(rng, size=n_runs)
            states = np.asarray(sys.transition(states, w), dtype=np.float64)
        else:
            cells = [tuple(ix) for ix in part.locate_batch(states)]
            uniq = sorted(set(cells))
            lo_arr, hi_arr = controller.box_bounds(uniq)
            if np.any(lo_arr > hi_arr):
                raise UsageError("controller set empty on a visited cell")
            lut = {c: i for i, c in enumerate(uniq)}
            rowix = np.array([lut[c] for c in cells])
            lo_u, hi_u = lo_arr[rowix], hi_arr[rowix]
            if nominal is None:
                u = 0.5 * (lo_u + hi_u)
            else:
                u = np.clip(np.asarray(nominal, dtype=np.float64), lo_u, hi_u)
            states = np.asarray(sys.transition(states, u), dtype=np.float64)
    return report


@dataclass
class CheckReport:
    check: str
    n_samples: int
    seed: int
    violations: list[dict] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"check": self.check, "n_samples": self.n_samples, "seed": self.seed,
                "violations": self.violations, "ok": self.ok, **self.extras}

    def to_text(self) -> str:
        return _stable_json(self.to_dict())


def _admissible_inputs(basis: DominanceBasis, sys: SystemModel,
                       xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample inputs under which the basis's dissipation statement quantifies."""
    n = xs.shape[0]
    if basis.kind.is_robust:
        if sys.input_role is InputRole.NONE:
            return None
        return sys.input_set.sample(rng, size=n)
    pol = basis.policy(xs)
    u = rng.random((n, sys.input_dim))
    lo = np.broadcast_to(sys.input_set.lower, pol.shape)
    hi = np.broadcast_to(sys.input_set.upper, pol.shape)
    if basis.kind.is_upper:
        # lower closure of the policy value, clipped to the input set
        top = np.minimum(pol, hi)
        return lo + u * (top - lo)
    bot = np.maximum(pol, lo)
    return bot + u * (hi - bot)


def check_dissipation(basis: DominanceBasis, sys: SystemModel, n_samples: int,
                      seed: int, max_recorded: int = 20) -> CheckReport:
    """Value never increases across one admissible transition."""
    rng = np.random.default_rng(seed)
    report = CheckReport(check=f"dissipation[{basis.kind.value}"
                               f"{'/truncated' if basis.truncated else ''}]",
                         n_samples=n_samples, seed=seed)
    xs = sys.state_set.sample(rng, size=n_samples)
    us = _admissible_inputs(basis, sys, xs, rng)
    nxt = np.asarray(sys.transition(xs, us), dtype=np.float64)
    before = basis.values(xs)
    after = basis.values(nxt)
    bad = np.flatnonzero(after > before)
    for i in bad[:max_recorded]:
        report.violations.append({"x": xs[i].tolist(),
                                  "u": None if us is None else us[i].tolist(),
                                  "before": float(before[i]), "after": float(after[i])})
    if bad.size > max_recorded:
        report.extras["suppressed"] = int(bad.size - max_recorded)
    return report


def check_monotonicity(basis: DominanceBasis, sys: SystemModel, n_pairs: int,
                       seed: int, max_recorded: int = 20) -> CheckReport:
    """Upper variants are order-preserving, lower variants order-reversing."""
    rng = np.random.default_rng(seed)
    report = CheckReport(check=f"monotonicity[{basis.kind.value}"
                               f"{'/truncated' if basis.truncated else ''}]",
                         n_samples=n_pairs, seed=seed)
    xs = sys.state_set.sample(rng, size=n_pairs)
    ys = xs + rng.random((n_pairs, sys.dim)) * (sys.state_set.upper - xs)
    vx = basis.values(xs)
    vy = basis.values(ys)
    bad = np.flatnonzero(vx > vy) if basis.kind.is_upper else np.flatnonzero(vx < vy)
    for i in bad[:max_recorded]:
        report.violations.append({"x": xs[i].tolist(), "y": ys[i].tolist(),
                                  "vx": float(vx[i]), "vy": float(vy[i])})
    return report


def check_trajectory_comparison(sys: SystemModel, lips: LipschitzBounds,
                                n_pairs: int, horizon: int, seed: int,
                                max_recorded: int = 20) -> CheckReport:
    """Two runs from a shared start under independent disturbances stay
    within the propagated envelope; also records how much of the first-step
    envelope is actually used (non-vacuity)."""
    if sys.input_role is not InputRole.DISTURBANCE:
        raise UsageError("trajectory comparison needs a disturbance-driven system")
    rng = np.random.default_rng(seed)
    report = CheckReport(check="trajectory_comparison", n_samples=n_pairs, seed=seed)
    infl = lambda_schedule(lips, horizon)
    x0 = sys.initial_set.sample(rng, size=n_pairs)
    a = x0.copy()
    b = x0.copy()
    max_ratio_t1 = 0.0
    for t in range(1, horizon + 1):
        wa = sys.input_set.sample(rng, size=n_pairs)
        wb = sys.input_set.sample(rng, size=n_pairs)
        a = np.asarray(sys.transition(a, wa), dtype=np.float64)
        b = np.asarray(sys.transition(b, wb), dtype=np.float64)
        gap = np.max(np.abs(a - b), axis=1)
        bound = infl.lam(t - 1)
        if t == 1 and bound > 0:
            max_ratio_t1 = float(np.max(gap) / bound)
        bad = np.flatnonzero(gap > bound)
        for i in bad[:max_recorded - len(report.violations)]:
            report.violations.append({"pair": int(i), "step": t,
                                      "gap": float(gap[i]), "bound": float(bound)})
    report.extras["max_ratio_at_t1"] = max_ratio_t1
    return report


def check_truncation_sandwich(traj: Trajectory, lips: LipschitzBounds, eps_T: float,
                              alpha: float, n_points: int, seed: int,
                              region=None, max_recorded: int = 20) -> CheckReport:
    """Truncated values bracket the stored-range plain values.

    Upper family:  P_T(x) - 1/(T+1) <= P(x) <= P_T(x + eps)
    Lower family:  Q_T(x) - 1/(T+1) <= Q(x) <= Q_T(x - eps)

    The lower family's outer shift points *down* so that it cancels the
    upward relaxation inside the truncated scan; shifting up (as a naive
    mirror of the upper family would) breaks the second inequality.
    """
    rng = np.random.default_rng(seed)
    report = CheckReport(check="truncation_sandwich", n_samples=n_points, seed=seed)
    T = traj.horizon
    infl = lambda_schedule(lips, T)
    if region is None:
        lo = traj.states.min(axis=0) - 2 * eps_T - 1.0
        hi = traj.states.max(axis=0) + 2 * eps_T + 1.0
    else:
        lo, hi = region
    xs = lo + rng.random((n_points, traj.dim)) * (hi - lo)

    full_u = trunc_robust_upper_many(traj, infl, 0.0, alpha, xs)
    full_l = trunc_robust_lower_many(traj, infl, 0.0, alpha, xs)
    tr_u = trunc_robust_upper_many(traj, infl, eps_T, alpha, xs)
    tr_l = trunc_robust_lower_many(traj, infl, eps_T, alpha, xs)
    tr_u_shift = trunc_robust_upper_many(traj, infl, eps_T, alpha, xs + eps_T)
    tr_l_shift = trunc_robust_lower_many(traj, infl, eps_T, alpha, xs - eps_T)

    corr = 1.0 / (T + 1)
    checks = [
        ("upper_low", tr_u - corr, full_u),
        ("upper_high", full_u, tr_u_shift),
        ("lower_low", tr_l - corr, full_l),
        ("lower_high", full_l, tr_l_shift),
    ]
    for name, lhs, rhs in checks:
        bad = np.flatnonzero(lhs > rhs)
        for i in bad[:max_recorded - len(report.violations)]:
            report.violations.append({"side": name, "x": xs[i].tolist(),
                                      "lhs": float(lhs[i]), "rhs": float(rhs[i])})
    return report


def check_value_range(basis: DominanceBasis, sys: SystemModel, n_samples: int,
                      seed: int, max_recorded: int = 20) -> CheckReport:
    """Every value is 0 (unreachable on stored data), in (0, 1], or alpha."""
    rng = np.random.default_rng(seed)
    report = CheckReport(check=f"value_range[{basis.kind.value}]",
                         n_samples=n_samples, seed=seed)
    xs = sys.state_set.sample(rng, size=n_samples)
    vals = basis.values(xs)
    ok = ((vals > 0) & (vals <= 1.0)) | (vals == basis.alpha) | (vals == 0.0)
    for i in np.flatnonzero(~ok)[:max_recorded]:
        report.violations.append({"x": xs[i].tolist(), "value": float(vals[i])})
    return report


def check_sublevel_invariance(basis: DominanceBasis, sys: SystemModel, levels,
                              n_points: int, horizon: int, seed: int,
                              max_recorded: int = 20) -> CheckReport:
    """Membership of a c-sublevel set is never lost along admissible runs.

    Robust bases evolve under sampled disturbances; controlled bases under
    the generating policy itself (which lies in both admissible closures).
    """
    rng = np.random.default_rng(seed)
    report = CheckReport(check=f"sublevel_invariance[{basis.kind.value}"
                               f"{'/truncated' if basis.truncated else ''}]",
                         n_samples=n_points, seed=seed)
    for c in levels:
        pool = sys.state_set.sample(rng, size=8 * n_points)
        inside = pool[basis.values(pool) <= c][:n_points]
        if inside.shape[0] == 0:
            continue
        states = inside
        for t in range(1, horizon + 1):
            if sys.input_role is InputRole.NONE:
                u = None
            elif sys.input_role is InputRole.DISTURBANCE:
                u = sys.input_set.sample(rng, size=states.shape[0])
            else:
                u = basis.policy(states)
            states = np.asarray(sys.transition(states, u), dtype=np.float64)
            vals = basis.values(states)
            bad = np.flatnonzero(vals > c)
            for i in bad[:max_recorded - len(report.violations)]:
                report.violations.append({"level": float(c), "step": t,
                                          "value": float(vals[i]),
                                          "state": states[i].tolist()})
            if bad.size:
                break
    return report
