"""Certificate templates, inclusion bounds, and constraint-system assembly.

A certificate is an affine combination of dominance bases with
nonnegative weights,

    B(p, x) = a + sum_k ( b_k * upper_k(x) + c_k * lower_k(x) ),

whose two-argument inclusion form bounds it over any box by evaluating
the upper bases at one corner and the lower bases at the other. Corner
constraints are therefore sufficient for set-wide sign conditions, which
is what turns the safety conditions into finitely many linear rows in
p = (a, b_1..b_N, c_1..c_N).

Corner-shift convention for the robust program's initial rows: upper
bases are queried at the upper corner shifted up by that trajectory's
tail envelope, lower bases at the lower corner shifted *down* by it.
The truncated lower scan already relaxes its query upward internally,
so the outer shift must point the other way to cancel it; on stored
data both shifted evaluations then coincide with the unshifted
non-truncated values at the raw corners, which is what makes the rows
bound the certificate over the whole cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dominance import (
    BasisKind,
    DominanceBasis,
    controlled_lower_time,
    controlled_upper_time,
    dominance_value,
    lambda_schedule,
)
from .errors import UsageError
from .order import Box, as_state
from .partition import CellIndex, CoverSets, GridPartition
from .systems import FeedbackPolicy, LipschitzBounds, Trajectory


class Mode(Enum):
    ROBUST = "robust"
    CONTROLLED = "controlled"


@dataclass(frozen=True)
class SupportPattern:
    """Index sets of coefficients required to be strictly positive."""

    kp: frozenset[int]
    kq: frozenset[int]

    @classmethod
    def of(cls, kp, kq) -> "SupportPattern":
        return cls(frozenset(int(k) for k in kp), frozenset(int(k) for k in kq))

    @property
    def size(self) -> int:
        return len(self.kp) + len(self.kq)

    def sort_key(self):
        return (self.size, tuple(sorted(self.kp)), tuple(sorted(self.kq)))

    def __str__(self):
        return f"Kp={sorted(self.kp)} Kq={sorted(self.kq)}"


@dataclass(eq=False)
class CertificateTemplate:
    """Affine combination of dominance bases.

    A slot whose coefficient is zero may carry ``None`` instead of a basis:
    patterns legitimately exclude variants whose tail requirement fails,
    and an excluded variant never gets evaluated.
    """

    a: float
    b: np.ndarray
    c: np.ndarray
    upper_bases: list[DominanceBasis | None]
    lower_bases: list[DominanceBasis | None]
    mode: Mode

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=np.float64)
        self.c = np.asarray(self.c, dtype=np.float64)
        n = len(self.upper_bases)
        if not (len(self.lower_bases) == n == self.b.size == self.c.size):
            raise UsageError("coefficient/basis count mismatch")
        if np.any(self.b < 0) or np.any(self.c < 0):
            raise UsageError("weights b_k, c_k must be nonnegative")
        robust = self.mode is Mode.ROBUST
        for k in range(n):
            for coef, basis, want_upper in ((self.b[k], self.upper_bases[k], True),
                                            (self.c[k], self.lower_bases[k], False)):
                if basis is None:
                    if coef != 0.0:
                        raise UsageError(f"nonzero weight at slot {k} without a basis")
                    continue
                if basis.kind.is_upper != want_upper:
                    raise UsageError("basis k must pair an upper with a lower variant")
                if basis.kind.is_robust != robust:
                    raise UsageError("basis kinds must match the certificate mode")

    @property
    def n_traj(self) -> int:
        return self.b.size

    def coefficients(self) -> np.ndarray:
        return np.concatenate(([self.a], self.b, self.c))

    def support(self, floor: float = 0.0) -> SupportPattern:
        return SupportPattern.of(
            (k for k in range(self.n_traj) if self.b[k] > floor),
            (k for k in range(self.n_traj) if self.c[k] > floor),
        )

    def eval(self, x) -> float:
        return float(self.eval_many(np.atleast_2d(as_state(x)))[0])

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        out = np.full(pts.shape[0], self.a)
        for k in range(self.n_traj):
            if self.b[k]:
                out += self.b[k] * self.upper_bases[k].values(pts)
            if self.c[k]:
                out += self.c[k] * self.lower_bases[k].values(pts)
        return out

    def eval_inclusion(self, x_for_upper, y_for_lower) -> float:
        """Bound over a box: upper bases at one point, lower bases at the other.

        With nonnegative weights, eval_inclusion(lo, hi) <= B(z) <=
        eval_inclusion(hi, lo) for every z in [lo, hi].
        """
        out = self.a
        xu = np.atleast_2d(as_state(x_for_upper))
        yl = np.atleast_2d(as_state(y_for_lower))
        for k in range(self.n_traj):
            if self.b[k]:
                out += self.b[k] * float(self.upper_bases[k].values(xu)[0])
            if self.c[k]:
                out += self.c[k] * float(self.lower_bases[k].values(yl)[0])
        return float(out)


def eval_certificate(tpl: CertificateTemplate, x) -> float:
    return tpl.eval(x)


def eval_inclusion(tpl: CertificateTemplate, x_for_upper, y_for_lower) -> float:
    return tpl.eval_inclusion(x_for_upper, y_for_lower)


# --------------------------------------------------------------------------
# constraint systems
# --------------------------------------------------------------------------

GE, LE = 1, -1


@dataclass(eq=False)
class ConstraintSystem:
    """Linear rows in p = (a, b_1..b_N, c_1..c_N); senses are >= or <=."""

    n_traj: int
    coeffs: np.ndarray          # (m, 2N+1)
    senses: np.ndarray          # (m,) entries GE/LE
    rhs: np.ndarray             # (m,)
    kinds: list[str]            # "initial" | "unsafe" | "sign"
    cells: list[CellIndex | None]
    mode: Mode
    alpha: float
    delta_u: float
    horizons: list[int]
    epsilons: list[float] | None = None
    pattern: SupportPattern | None = None
    fixed_zero: frozenset[int] = frozenset()

    @property
    def n_vars(self) -> int:
        return 2 * self.n_traj + 1

    @property
    def n_rows(self) -> int:
        return self.coeffs.shape[0]

    def residuals(self, p: np.ndarray) -> np.ndarray:
        """Signed slack per row; negative = violated by that amount."""
        lhs = self.coeffs @ np.asarray(p, dtype=np.float64)
        return np.where(self.senses == GE, lhs - self.rhs, self.rhs - lhs)

    def check(self, p: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Indices of rows violated beyond tol."""
        return np.flatnonzero(self.residuals(p) < -tol)

    def check_full(self, p: np.ndarray, tol: float = 1e-9,
                   gamma: float | None = None) -> list[str]:
        """Rows plus pattern side conditions; returns human-readable failures.

        Pattern-restricted systems additionally require pinned coefficients
        to vanish and (when an activation floor is given) in-pattern
        coefficients to sit on or above it, so the declared support is the
        real support.
        """
        p = np.asarray(p, dtype=np.float64)
        fails = [f"row {int(i)} ({self.kinds[int(i)]}, cell {self.cells[int(i)]})"
                 for i in self.check(p, tol=tol)]
        for j in sorted(self.fixed_zero):
            if abs(p[j]) > tol:
                fails.append(f"pinned coefficient {j} is {p[j]!r}, expected 0")
        if gamma is not None and self.pattern is not None:
            n = self.n_traj
            for k in sorted(self.pattern.kp):
                if p[1 + k] < gamma - tol:
                    fails.append(f"b[{k}] below activation floor: {p[1 + k]!r}")
            for k in sorted(self.pattern.kq):
                if p[1 + n + k] < gamma - tol:
                    fails.append(f"c[{k}] below activation floor: {p[1 + n + k]!r}")
        return fails

    def most_violated(self, p: np.ndarray, limit: int = 5) -> list[dict]:
        res = self.residuals(p)
        order = np.argsort(res)
        out = []
        for i in order[:limit]:
            if res[i] >= 0:
                break
            out.append({"row": int(i), "kind": self.kinds[i],
                        "cell": self.cells[i], "violation": float(-res[i])})
        return out


def _cell_corner_arrays(part: GridPartition, cells: list[CellIndex]):
    idx = np.asarray(cells, dtype=np.int64).reshape(len(cells), part.dim)
    lo = part.domain.lower + idx * part.widths
    hi = part.domain.lower + (idx + 1) * part.widths
    hi = np.where(idx + 1 == part.counts, part.domain.upper, hi)
    return lo, hi


def _eval_dedup(basis: DominanceBasis, pts: np.ndarray) -> np.ndarray:
    """Evaluate a basis on points with many repeats (shared cell corners)."""
    uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
    return basis.values(uniq)[inverse]


def make_robust_bases(trajs: list[Trajectory], lips: LipschitzBounds,
                      alpha: float) -> tuple[list[DominanceBasis], list[DominanceBasis]]:
    """Truncated robust upper/lower basis pair per trajectory.

    Every trajectory must carry tail metadata with an epsilon estimate.
    """
    uppers, lowers = [], []
    for traj in trajs:
        if traj.tail is None or traj.tail.epsilon is None:
            raise UsageError(f"{traj.label()}: missing tail epsilon; "
                             "estimate or override it before assembly")
        infl = lambda_schedule(lips, traj.horizon)
        eps = float(traj.tail.epsilon)
        uppers.append(DominanceBasis(kind=BasisKind.ROBUST_UPPER, truncated=True,
                                     trajectory=traj, alpha=alpha, inflation=infl,
                                     epsilon_T=eps))
        lowers.append(DominanceBasis(kind=BasisKind.ROBUST_LOWER, truncated=True,
                                     trajectory=traj, alpha=alpha, inflation=infl,
                                     epsilon_T=eps))
    return uppers, lowers


def assemble_robust_program(trajs: list[Trajectory], lips: LipschitzBounds,
                   part: GridPartition, covers: CoverSets,
                   alpha: float = 2.0, delta_u: float = 1e-6) -> ConstraintSystem:
    """Rows of the robust sampling program.

    Initial cells: inclusion upper bound at tail-shifted corners <= 0.
    Unsafe cells: inclusion lower bound at raw corners, minus the
    finite-horizon correction sum_k (b_k + c_k)/(T_k + 1), >= delta_u
    (strict positivity realized as a certified margin).
    Plus sign rows b_k, c_k >= 0. Basis values at fixed corners are
    constants, so every row is linear in p.
    """
    n = len(trajs)
    if n < 1:
        raise UsageError("need at least one trajectory")
    uppers, lowers = make_robust_bases(trajs, lips, alpha)
    eps = [b.epsilon_T for b in uppers]
    horizons = [t.horizon for t in trajs]

    init_cells = sorted(covers.initial)
    unsafe_cells = sorted(covers.unsafe)
    m0, mu = len(init_cells), len(unsafe_cells)
    d = 2 * n + 1
    coeffs = np.zeros((m0 + mu + 2 * n, d))
    senses = np.empty(m0 + mu + 2 * n, dtype=np.int8)
    rhs = np.zeros(m0 + mu + 2 * n)
    kinds: list[str] = []
    cells: list[CellIndex | None] = []

    if m0:
        lo, hi = _cell_corner_arrays(part, init_cells)
        coeffs[:m0, 0] = 1.0
        for k in range(n):
            coeffs[:m0, 1 + k] = _eval_dedup(uppers[k], hi + eps[k])
            coeffs[:m0, 1 + n + k] = _eval_dedup(lowers[k], lo - eps[k])
        senses[:m0] = LE
        rhs[:m0] = 0.0
        kinds += ["initial"] * m0
        cells += init_cells

    if mu:
        lo, hi = _cell_corner_arrays(part, unsafe_cells)
        sl = slice(m0, m0 + mu)
        coeffs[sl, 0] = 1.0
        for k in range(n):
            corr = 1.0 / (horizons[k] + 1)
            coeffs[sl, 1 + k] = _eval_dedup(uppers[k], lo) - corr
            coeffs[sl, 1 + n + k] = _eval_dedup(lowers[k], hi) - corr
        senses[sl] = GE
        rhs[sl] = delta_u
        kinds += ["unsafe"] * mu
        cells += unsafe_cells

    for k in range(2 * n):
        r = m0 + mu + k
        coeffs[r, 1 + k] = 1.0
        senses[r] = GE
        rhs[r] = 0.0
        kinds.append("sign")
        cells.append(None)

    return ConstraintSystem(n_traj=n, coeffs=coeffs, senses=senses, rhs=rhs,
                            kinds=kinds, cells=cells, mode=Mode.ROBUST,
                            alpha=alpha, delta_u=delta_u, horizons=horizons,
                            epsilons=eps)


# --------------------------------------------------------------------------
# controlled program
# --------------------------------------------------------------------------

@dataclass
class PairCompat:
    """Worst-case corner comparison for one (k_q, k_p) policy pair."""

    max_violation: np.ndarray      # componentwise max over cells
    fail_cells: int
    first_fail: CellIndex | None

    @property
    def ok(self) -> bool:
        return bool(np.all(self.max_violation <= 0.0))


@dataclass
class CompatTable:
    """Streamed pairwise policy comparisons over the whole partition.

    ``program[(q, p)]`` uses the program's corner convention
    (pi_q at the lower corner vs pi_p at the upper corner);
    ``controller[(q, p)]`` uses the controller-extraction convention
    (pi_q at the upper corner vs pi_p at the lower corner). The two can
    disagree only for non-constant policies; disagreement on a pattern's
    feasibility is surfaced as a warning in the report.
    """

    program: dict[tuple[int, int], PairCompat]
    controller: dict[tuple[int, int], PairCompat]
    n_cells: int


def policy_compat_table(policies: list[FeedbackPolicy], part: GridPartition,
                        chunk: int = 65536) -> CompatTable:
    n = len(policies)
    program: dict[tuple[int, int], PairCompat] = {}
    controller: dict[tuple[int, int], PairCompat] = {}
    for q in range(n):
        for p_ in range(n):
            program[(q, p_)] = PairCompat(np.full(0, -np.inf), 0, None)
            controller[(q, p_)] = PairCompat(np.full(0, -np.inf), 0, None)

    buf: list[CellIndex] = []
    n_cells = 0

    def flush():
        nonlocal buf
        if not buf:
            return
        lo, hi = _cell_corner_arrays(part, buf)
        pol_lo = [np.atleast_2d(pol(lo)) for pol in policies]
        pol_hi = [np.atleast_2d(pol(hi)) for pol in policies]
        for q in range(n):
            for p_ in range(n):
                for table, a, b in ((program, pol_lo[q], pol_hi[p_]),
                                    (controller, pol_hi[q], pol_lo[p_])):
                    diff = a - b
                    entry = table[(q, p_)]
                    chunk_max = diff.max(axis=0)
                    entry.max_violation = chunk_max if entry.max_violation.size == 0 \
                        else np.maximum(entry.max_violation, chunk_max)
                    bad = np.flatnonzero(np.any(diff > 0.0, axis=1))
                    if bad.size:
                        entry.fail_cells += int(bad.size)
                        if entry.first_fail is None:
                            entry.first_fail = buf[int(bad[0])]
        buf = []

    for cell in part.iter_cells():
        buf.append(cell)
        n_cells += 1
        if len(buf) >= chunk:
            flush()
    flush()
    return CompatTable(program=program, controller=controller, n_cells=n_cells)


@dataclass
class CompatReport:
    pattern: SupportPattern
    ok: bool
    fail_cells: int = 0
    first_fail: CellIndex | None = None
    first_fail_pair: tuple[int, int] | None = None
    corner_convention_warning: bool = False

    def describe(self) -> str:
        if self.ok:
            return f"pattern {self.pattern}: controller-compatible on all cells"
        return (f"pattern {self.pattern}: incompatible on {self.fail_cells} cells "
                f"(first: cell {self.first_fail}, pair {self.first_fail_pair})")


def _pattern_compat(pattern: SupportPattern, table: CompatTable) -> CompatReport:
    """max over Kq of pi_q(lower) <= min over Kp of pi_p(upper), every cell.

    The cellwise max/min comparison is equivalent to all (q, p) pairs
    comparing cleanly, which is what the table stores.
    """
    ok = True
    fails = 0
    first: CellIndex | None = None
    first_pair = None
    ctrl_ok = True
    for q in sorted(pattern.kq):
        for p_ in sorted(pattern.kp):
            entry = table.program[(q, p_)]
            if not entry.ok:
                ok = False
                fails += entry.fail_cells
                if first is None:
                    first, first_pair = entry.first_fail, (q, p_)
            if not table.controller[(q, p_)].ok:
                ctrl_ok = False
    return CompatReport(pattern=pattern, ok=ok, fail_cells=fails, first_fail=first,
                        first_fail_pair=first_pair,
                        corner_convention_warning=(ok != ctrl_ok))


def make_controlled_bases(trajs: list[Trajectory], policies: list[FeedbackPolicy],
                          alpha: float, pattern: SupportPattern
                          ) -> tuple[list[DominanceBasis | None], list[DominanceBasis | None]]:
    """Truncated controlled bases, built only for the in-pattern indices.

    Construction enforces the dominating-tail requirement per variant, so
    unsound bases cannot enter the program; out-of-pattern slots are None.
    """
    n = len(trajs)
    uppers: list[DominanceBasis | None] = [None] * n
    lowers: list[DominanceBasis | None] = [None] * n
    for k in sorted(pattern.kp):
        uppers[k] = DominanceBasis(kind=BasisKind.CONTROLLED_UPPER, truncated=True,
                                   trajectory=trajs[k], alpha=alpha, policy=policies[k])
    for k in sorted(pattern.kq):
        lowers[k] = DominanceBasis(kind=BasisKind.CONTROLLED_LOWER, truncated=True,
                                   trajectory=trajs[k], alpha=alpha, policy=policies[k])
    return uppers, lowers


def assemble_controlled_program(trajs: list[Trajectory], policies: list[FeedbackPolicy],
                   part: GridPartition, covers: CoverSets,
                   alpha: float = 2.0, delta_u: float = 1e-6,
                   pattern: SupportPattern | None = None,
                   compat: CompatTable | None = None
                   ) -> tuple[ConstraintSystem, CompatReport]:
    """Rows of the controlled sampling program, restricted to a support pattern.

    Out-of-pattern coefficients are pinned to zero (their columns carry no
    values and the solver fixes the variables); the controller-compatibility
    side condition is checked over *all* cells before any solve.
    """
    n = len(trajs)
    if len(policies) != n:
        raise UsageError("one policy per trajectory required")
    for pol in policies:
        if not pol.monotone:
            raise UsageError(f"policy {pol.name} is not declared monotone")
    if pattern is None:
        pattern = SupportPattern.of(range(n), range(n))
    uppers, lowers = make_controlled_bases(trajs, policies, alpha, pattern)

    if compat is None:
        compat = policy_compat_table(policies, part)
    report = _pattern_compat(pattern, compat)

    init_cells = sorted(covers.initial)
    unsafe_cells = sorted(covers.unsafe)
    m0, mu = len(init_cells), len(unsafe_cells)
    d = 2 * n + 1
    coeffs = np.zeros((m0 + mu + 2 * n, d))
    senses = np.empty(m0 + mu + 2 * n, dtype=np.int8)
    rhs = np.zeros(m0 + mu + 2 * n)
    kinds: list[str] = []
    cells: list[CellIndex | None] = []

    if m0:
        lo, hi = _cell_corner_arrays(part, init_cells)
        coeffs[:m0, 0] = 1.0
        for k, basis in enumerate(uppers):
            if basis is not None:
                coeffs[:m0, 1 + k] = _eval_dedup(basis, hi)
        for k, basis in enumerate(lowers):
            if basis is not None:
                coeffs[:m0, 1 + n + k] = _eval_dedup(basis, lo)
        senses[:m0] = LE
        kinds += ["initial"] * m0
        cells += init_cells

    if mu:
        lo, hi = _cell_corner_arrays(part, unsafe_cells)
        sl = slice(m0, m0 + mu)
        coeffs[sl, 0] = 1.0
        for k, basis in enumerate(uppers):
            if basis is not None:
                coeffs[sl, 1 + k] = _eval_dedup(basis, lo)
        for k, basis in enumerate(lowers):
            if basis is not None:
                coeffs[sl, 1 + n + k] = _eval_dedup(basis, hi)
        senses[sl] = GE
        rhs[sl] = delta_u
        kinds += ["unsafe"] * mu
        cells += unsafe_cells

    for k in range(2 * n):
        r = m0 + mu + k
        coeffs[r, 1 + k] = 1.0
        senses[r] = GE
        kinds.append("sign")
        cells.append(None)

    fixed = frozenset(
        [1 + k for k in range(n) if k not in pattern.kp] +
        [1 + n + k for k in range(n) if k not in pattern.kq])
    cs = ConstraintSystem(n_traj=n, coeffs=coeffs, senses=senses, rhs=rhs,
                          kinds=kinds, cells=cells, mode=Mode.CONTROLLED,
                          alpha=alpha, delta_u=delta_u,
                          horizons=[t.horizon for t in trajs],
                          pattern=pattern, fixed_zero=fixed)
    return cs, report


# --------------------------------------------------------------------------
# safe controller extraction
# --------------------------------------------------------------------------

@dataclass(eq=False)
class ControllerSet:
    """Per-cell admissible input box: intersection of policy closures with U.

    Lower bound: componentwise max over Kq policies at the cell's upper
    corner; upper bound: componentwise min over Kp policies at the lower
    corner. Empty patterns impose nothing, leaving the whole input set.
    """

    pattern: SupportPattern
    policies: list[FeedbackPolicy]
    part: GridPartition
    input_set: Box

    def box_bounds(self, cells: list[CellIndex]) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized (lower, upper) bounds for a list of cells; may be empty."""
        lo, hi = _cell_corner_arrays(self.part, cells)
        m = len(cells)
        u_lo = np.broadcast_to(self.input_set.lower, (m, self.input_set.dim)).copy()
        u_hi = np.broadcast_to(self.input_set.upper, (m, self.input_set.dim)).copy()
        for k in sorted(self.pattern.kq):
            u_lo = np.maximum(u_lo, np.atleast_2d(self.policies[k](hi)))
        for k in sorted(self.pattern.kp):
            u_hi = np.minimum(u_hi, np.atleast_2d(self.policies[k](lo)))
        return u_lo, u_hi

    def box_at(self, cell: CellIndex) -> Box | None:
        lo, hi = self.box_bounds([tuple(cell)])
        if np.any(lo[0] > hi[0]):
            return None
        return Box(lo[0], hi[0])

    def empty_cells(self) -> list[CellIndex]:
        out = []
        buf = []
        for cell in self.part.iter_cells():
            buf.append(cell)
            if len(buf) >= 65536:
                lo, hi = self.box_bounds(buf)
                bad = np.flatnonzero(np.any(lo > hi, axis=1))
                out.extend(buf[i] for i in bad)
                buf = []
        if buf:
            lo, hi = self.box_bounds(buf)
            bad = np.flatnonzero(np.any(lo > hi, axis=1))
            out.extend(buf[i] for i in bad)
        return out


def controller_set(pattern: SupportPattern, policies: list[FeedbackPolicy],
                   part: GridPartition, input_set: Box) -> ControllerSet:
    return ControllerSet(pattern=pattern, policies=policies, part=part,
                         input_set=input_set)


def select_control(cset: ControllerSet, cell: CellIndex, nominal=None) -> np.ndarray:
    """Pick an input from the cell's box: nominal clipped in, or the center.

    Componentwise clipping is the infinity-norm projection onto the box.
    """
    b = cset.box_at(cell)
    if b is None:
        raise UsageError(f"controller set empty at cell {tuple(cell)}")
    if nominal is None:
        return 0.5 * (b.lower + b.upper)
    nominal = as_state(nominal, dim=b.dim)
    return np.clip(nominal, b.lower, b.upper)


# --------------------------------------------------------------------------
# finite-sample diagnostic of the exact barrier characterization
# --------------------------------------------------------------------------

def bracketing_diagnostic(trajs: list[Trajectory], x, alpha: float = 2.0) -> float:
    """DIAGNOSTIC ONLY: min over the supplied trajectories of
    max(upper value, lower value) at x, minus one.

    The exact characterization quantifies over *all* system trajectories
    and a restricted unsafe-set geometry; a finite sample yields only a
    necessary-direction hint, never a certificate. Requires
    disturbance-free data (no envelope inflation).
    """
    if not trajs:
        raise UsageError("need at least one trajectory")
    best = np.inf
    for traj in trajs:
        pu = dominance_value(controlled_upper_time(traj, x), alpha)
        ql = dominance_value(controlled_lower_time(traj, x), alpha)
        best = min(best, max(pu, ql))
    return float(best - 1.0)
