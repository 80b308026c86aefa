"""Embedded LP machinery and the program solvers built on it.

The assembled programs have very few variables (2N + 1 for N stored
trajectories) but thousands of rows, so the simplex works on the dual:
``min c'x s.t. Gx >= h`` is solved as ``max h'y s.t. G'y = c, y >= 0``
by a revised two-phase simplex whose basis dimension equals the primal
variable count. Pricing streams across all rows; the basis stays tiny.

Status mapping used throughout: a dual optimum yields the primal optimum
(the negated simplex multipliers are the primal point, and phase-2
optimality *is* primal feasibility of that point); an unbounded dual
certifies primal infeasibility (the ray is a Farkas certificate whose
support names the conflicting rows); an infeasible dual leaves "primal
unbounded or infeasible", settled by a one-shot minimum-violation solve.

Pivot rules are deterministic: Dantzig pricing with first-minimum tie
breaks, switching to Bland's rule after a fixed number of iterations so
termination is guaranteed on degenerate instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .certify import GE, LE, CertificateTemplate, ConstraintSystem, SupportPattern
from .errors import SimplexStallError, UsageError

_PIVOT_TOL = 1e-10
_COST_TOL = 1e-9
_BLAND_AFTER = 2000
_MAX_ITER = 100_000


class Status(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(eq=False)
class LinearProgram:
    """min c'x subject to senses-tagged rows and optional variable bounds."""

    c: np.ndarray
    A: np.ndarray
    senses: np.ndarray           # GE / LE per row
    rhs: np.ndarray
    lb: np.ndarray | None = None  # -inf where absent
    ub: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64)
        self.A = np.atleast_2d(np.asarray(self.A, dtype=np.float64))
        self.senses = np.asarray(self.senses, dtype=np.int8)
        self.rhs = np.asarray(self.rhs, dtype=np.float64)
        m, n = self.A.shape
        if self.c.size != n or self.senses.size != m or self.rhs.size != m:
            raise UsageError("inconsistent LP dimensions")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A))
                and np.all(np.isfinite(self.rhs))):
            raise UsageError("LP data must be finite")


@dataclass(eq=False)
class SolveResult:
    status: Status
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0
    # original-row indices implicated in infeasibility (Farkas support or
    # the most-violated rows at the minimum-violation point)
    infeasible_rows: list[int] = field(default_factory=list)
    cap_active: bool = False


def _normalize(lp: LinearProgram):
    """Gx >= h with free x; returns (G, h, rowmap) where rowmap[i] is
    ("row", j) for an original row or ("lb"/"ub", var)."""
    rows = []
    h = []
    rowmap: list[tuple[str, int]] = []
    for i in range(lp.A.shape[0]):
        if lp.senses[i] == GE:
            rows.append(lp.A[i])
            h.append(lp.rhs[i])
        else:
            rows.append(-lp.A[i])
            h.append(-lp.rhs[i])
        rowmap.append(("row", i))
    n = lp.c.size
    eye = np.eye(n)
    if lp.lb is not None:
        for j in range(n):
            if np.isfinite(lp.lb[j]):
                rows.append(eye[j])
                h.append(lp.lb[j])
                rowmap.append(("lb", j))
    if lp.ub is not None:
        for j in range(n):
            if np.isfinite(lp.ub[j]):
                rows.append(-eye[j])
                h.append(-lp.ub[j])
                rowmap.append(("ub", j))
    return np.array(rows), np.array(h), rowmap


class _DualSimplex:
    """Revised simplex on max h'y s.t. G'y = c, y >= 0 (basis dim = #vars of G)."""

    def __init__(self, G: np.ndarray, h: np.ndarray, c: np.ndarray):
        self.G = G
        self.h = h
        self.AD = G.T.copy()          # (n, m) equality matrix
        self.bD = c.copy()            # (n,)
        self.m = G.shape[0]
        self.n = G.shape[1]
        self.kept = np.arange(self.n)  # primal variables still constrained
        self.iterations = 0

    def _columns(self, idx):
        """Gather columns; indices >= m are artificials sign_r * e_r."""
        cols = np.empty((self.AD.shape[0], len(idx)))
        for pos, j in enumerate(idx):
            if j < self.m:
                cols[:, pos] = self.AD[:, j]
            else:
                r = j - self.m
                cols[:, pos] = 0.0
                cols[r, pos] = self.art_sign[r]
        return cols

    def _iterate(self, cost, basis, x_basic):
        """Run simplex to optimality on the current row set.

        Only y columns are priced: artificials never re-enter once they
        leave. Returns ("optimal", basis, x_basic) or ("unbounded",
        entering_col, direction, basis, x_basic).
        """
        n_rows = self.AD.shape[0]
        bland = False
        stale = 0
        while True:
            self.iterations += 1
            if self.iterations > _MAX_ITER:
                raise SimplexStallError(
                    f"simplex exceeded {_MAX_ITER} iterations "
                    f"(m={self.m}, n={self.n}); basis condition may be poor")
            if self.iterations > _BLAND_AFTER:
                bland = True
            B = self._columns(basis)
            try:
                lam = np.linalg.solve(B.T, cost[basis])
            except np.linalg.LinAlgError:
                raise SimplexStallError("singular basis encountered")
            r = cost[: self.m] - lam @ self.AD
            in_basis = np.zeros(self.m + n_rows, dtype=bool)
            in_basis[basis] = True
            eligible = (r < -_COST_TOL) & ~in_basis[: self.m]
            if not np.any(eligible):
                return "optimal", basis, x_basic
            cand = np.flatnonzero(eligible)
            if bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmin(r[cand])])
            d = np.linalg.solve(B, self._columns([j])[:, 0])
            pos = d > _PIVOT_TOL
            if not np.any(pos):
                return "unbounded", j, d, basis, x_basic
            ratios = np.full(d.shape, np.inf)
            ratios[pos] = x_basic[pos] / d[pos]
            theta = ratios.min()
            ties = np.flatnonzero(ratios <= theta + 1e-12 * (1.0 + abs(theta)))
            if bland:
                leave = int(ties[np.argmin(np.asarray(basis)[ties])])
            else:
                leave = int(ties[0])
            x_basic = x_basic - theta * d
            x_basic[leave] = theta
            x_basic = np.maximum(x_basic, 0.0)
            basis = list(basis)
            basis[leave] = j
            stale += 1
            if stale >= 50:
                # refresh the basic solution to shed rounding drift
                B = self._columns(basis)
                x_basic = np.linalg.solve(B, self.bD)
                x_basic = np.maximum(x_basic, 0.0)
                stale = 0

    def solve(self):
        """Returns (status, info): status in {"optimal","infeasible","unbounded"}.

        optimal  -> info = (x_primal, y_support_basis)
        unbounded-> info = farkas support (indices of G rows)
        """
        n_rows = self.n
        self.art_sign = np.where(self.bD >= 0, 1.0, -1.0)
        basis = [self.m + r for r in range(n_rows)]
        x_basic = np.abs(self.bD).astype(np.float64)

        # phase 1: drive artificial mass to zero
        cost1 = np.zeros(self.m + n_rows)
        cost1[self.m:] = 1.0
        out = self._iterate(cost1, basis, x_basic)
        if out[0] != "optimal":
            raise SimplexStallError("phase-1 subproblem reported unbounded")
        _, basis, x_basic = out
        art_mass = sum(x_basic[i] for i, j in enumerate(basis) if j >= self.m)
        if art_mass > 1e-8 * max(1.0, float(np.max(np.abs(self.bD))) or 1.0):
            return "infeasible", None

        # drive remaining zero-level artificials out or drop dependent rows
        drop_rows: list[int] = []
        for pos in range(len(basis)):
            if basis[pos] < self.m:
                continue
            B = self._columns(basis)
            u = np.linalg.solve(B.T, np.eye(len(basis))[:, pos])
            row_vals = u @ self.AD
            in_basis = set(basis)
            pivot_j = -1
            for j in np.flatnonzero(np.abs(row_vals) > 1e-9):
                if int(j) not in in_basis:
                    pivot_j = int(j)
                    break
            if pivot_j >= 0:
                basis[pos] = pivot_j
                B = self._columns(basis)
                x_basic = np.maximum(np.linalg.solve(B, self.bD), 0.0)
            else:
                drop_rows.append(basis[pos] - self.m)

        if drop_rows:
            keep = np.array([r for r in range(self.AD.shape[0]) if r not in drop_rows])
            self.AD = self.AD[keep]
            self.bD = self.bD[keep]
            self.kept = self.kept[keep]
            self.art_sign = self.art_sign[keep]
            basis = [b for b in basis if b < self.m]
            if len(basis) != self.AD.shape[0]:
                raise SimplexStallError("basis bookkeeping failed after row drop")
            B = self._columns(basis)
            x_basic = np.maximum(np.linalg.solve(B, self.bD), 0.0)

        # phase 2
        cost2 = np.zeros(self.m + self.AD.shape[0])
        cost2[: self.m] = -self.h
        out = self._iterate(cost2, basis, x_basic)
        if out[0] == "unbounded":
            _, j, d, basis, _ = out
            support = {int(j)}
            for pos, var in enumerate(basis):
                if var < self.m and abs(d[pos]) > _PIVOT_TOL:
                    support.add(int(var))
            return "unbounded", sorted(support)

        _, basis, x_basic = out
        B = self._columns(basis)
        lam = np.linalg.solve(B.T, cost2[basis])
        x = np.zeros(self.n)
        x[self.kept] = -lam
        return "optimal", (x, basis)


def solve_lp(lp: LinearProgram, tol: float = 1e-9) -> SolveResult:
    """Two-phase simplex; deterministic pivot order; see module docstring."""
    G, h, rowmap = _normalize(lp)
    if G.shape[0] == 0:
        # no constraints at all: optimal iff c == 0
        if np.allclose(lp.c, 0.0):
            return SolveResult(Status.OPTIMAL, x=np.zeros(lp.c.size), objective=0.0)
        return SolveResult(Status.UNBOUNDED)
    core = _DualSimplex(G, h, lp.c)
    status, info = core.solve()
    if status == "optimal":
        x, _ = info
        return SolveResult(Status.OPTIMAL, x=x, objective=float(lp.c @ x),
                           iterations=core.iterations)
    if status == "unbounded":
        rows = sorted({rowmap[i][1] for i in info if rowmap[i][0] == "row"})
        return SolveResult(Status.INFEASIBLE, iterations=core.iterations,
                           infeasible_rows=rows)
    # dual infeasible: primal is unbounded or infeasible; settle by the
    # minimum-violation auxiliary problem min 1's s.t. Gx + s >= h, s >= 0
    m, n = G.shape
    aux_c = np.concatenate([np.zeros(n), np.ones(m)])
    aux_A = np.hstack([G, np.eye(m)])
    aux_lb = np.concatenate([np.full(n, -np.inf), np.zeros(m)])
    aux = LinearProgram(c=aux_c, A=aux_A, senses=np.full(m, GE, dtype=np.int8),
                        rhs=h, lb=aux_lb)
    res = solve_lp(aux, tol=tol)
    if res.status is not Status.OPTIMAL:
        raise SimplexStallError("auxiliary feasibility problem did not solve cleanly")
    total = core.iterations + res.iterations
    if res.objective > 1e-7 * max(1.0, float(np.max(np.abs(h)))):
        s = res.x[n:]
        worst = np.argsort(-s)
        rows = [rowmap[i][1] for i in worst[:10]
                if s[i] > tol and rowmap[i][0] == "row"]
        return SolveResult(Status.INFEASIBLE, iterations=total, infeasible_rows=rows)
    return SolveResult(Status.UNBOUNDED, iterations=total)


# --------------------------------------------------------------------------
# program solvers
# --------------------------------------------------------------------------

class Loss(Enum):
    ZERO = "zero"
    L1 = "l1"
    SUPPORT_SIZE = "support_size"


DEFAULT_COEFF_CAP = 1e3


@dataclass(eq=False)
class ProgramResult:
    status: Status
    p: np.ndarray | None = None           # (a, b.., c..)
    objective: float | None = None
    iterations: int = 0
    cap_active: bool = False
    diagnostics: list[dict] = field(default_factory=list)


def _build_program_lp(cs: ConstraintSystem, loss: Loss, coeff_cap: float,
                      floor: float = 0.0) -> tuple[LinearProgram, bool]:
    """LP over the template coefficients; returns (lp, a_split).

    For the L1 loss the free coefficient a splits into a difference of two
    nonnegative variables; b and c are already sign-constrained by rows.
    Fixed-zero coefficients get lb = ub = 0; in-pattern coefficients get
    the activation floor as a lower bound so declared supports are honest.
    """
    d = cs.n_vars
    n = cs.n_traj
    split = loss is Loss.L1
    nv = d + 1 if split else d
    A = np.zeros((cs.n_rows, nv))
    if split:
        A[:, 0] = cs.coeffs[:, 0]
        A[:, 1] = -cs.coeffs[:, 0]
        A[:, 2:] = cs.coeffs[:, 1:]
        c = np.ones(nv)
        lb = np.concatenate([[0.0, 0.0], np.full(d - 1, -np.inf)])
        ub = np.full(nv, coeff_cap)
    else:
        A = cs.coeffs.copy()
        c = np.zeros(nv)
        lb = np.concatenate([[-coeff_cap], np.full(d - 1, -np.inf)])
        ub = np.full(nv, coeff_cap)

    def col(j: int) -> int:
        return j + 1 if split else j

    for j in cs.fixed_zero:
        lb[col(j)] = 0.0
        ub[col(j)] = 0.0
    if floor > 0 and cs.pattern is not None:
        for k in cs.pattern.kp:
            lb[col(1 + k)] = floor
        for k in cs.pattern.kq:
            lb[col(1 + n + k)] = floor
    lp = LinearProgram(c=c, A=A, senses=cs.senses.copy(), rhs=cs.rhs.copy(),
                       lb=lb, ub=ub)
    return lp, split


def _extract_p(x: np.ndarray, d: int, split: bool) -> np.ndarray:
    if split:
        p = np.empty(d)
        p[0] = x[0] - x[1]
        p[1:] = x[2:]
    else:
        p = x.copy()
    # shave solver-level dust so sign invariants hold exactly downstream
    p[1:][np.abs(p[1:]) < 1e-12] = 0.0
    return p


def solve_robust_program(cs: ConstraintSystem, loss: Loss = Loss.L1,
                coeff_cap: float = DEFAULT_COEFF_CAP, tol: float = 1e-9) -> ProgramResult:
    """Solve the robust program; any Optimal answer is re-verified row by row."""
    lp, split = _build_program_lp(cs, loss if loss is not Loss.SUPPORT_SIZE else Loss.L1,
                                  coeff_cap)
    res = solve_lp(lp, tol=tol)
    if res.status is not Status.OPTIMAL:
        diags = [{"row": int(i), "kind": cs.kinds[i], "cell": cs.cells[i]}
                 for i in res.infeasible_rows if i < cs.n_rows]
        return ProgramResult(status=res.status, iterations=res.iterations,
                             diagnostics=diags)
    p = _extract_p(res.x, cs.n_vars, split)
    bad = cs.check(p, tol=tol)
    if bad.size:
        raise SimplexStallError(
            f"optimal point failed re-verification on rows {bad[:5].tolist()}")
    cap_active = bool(np.any(np.abs(p) >= coeff_cap * (1 - 1e-9)))
    return ProgramResult(status=Status.OPTIMAL, p=p, objective=res.objective,
                         iterations=res.iterations, cap_active=cap_active)


def enumerate_patterns(n: int) -> list[SupportPattern]:
    """All 2^(2n) support patterns, ordered by total size then index sets."""
    subsets = []
    for r in range(n + 1):
        subsets.extend(itertools.combinations(range(n), r))
    pats = [SupportPattern.of(kp, kq) for kp in subsets for kq in subsets]
    return sorted(pats, key=SupportPattern.sort_key)


@dataclass
class PatternOutcome:
    pattern: SupportPattern
    state: str                      # "optimal" | "infeasible" | "refused" | "incompatible" | "rejected"
    detail: str = ""
    result: ProgramResult | None = None


def solve_controlled_program(assembler, n_traj: int, loss: Loss = Loss.SUPPORT_SIZE,
                gamma: float = 1e-6, coeff_cap: float = DEFAULT_COEFF_CAP,
                max_enum: int = 10, accept=None, jobs: int = 1
                ) -> tuple[ProgramResult, SupportPattern | None, list[PatternOutcome]]:
    """Support-pattern search wrapped around pattern-restricted LPs.

    ``assembler(pattern)`` must return (ConstraintSystem, CompatReport); it
    may raise TailAssumptionError for patterns using unsound variants.
    Patterns are tried in order of increasing support size. Under the
    support-size loss the first feasible (and accepted) pattern wins;
    otherwise every feasible pattern is solved and the best objective wins,
    ties resolved by pattern order. ``accept(pattern, result)`` lets the
    caller reject a solved pattern (e.g. empty controller boxes).
    """
    from .errors import TailAssumptionError  # local to avoid cycle at import

    if n_traj > max_enum:
        raise UsageError(f"{n_traj} trajectories exceed the enumeration cap "
                         f"{max_enum}; use the branch-and-bound path")
    log: list[PatternOutcome] = []
    best: tuple[float, SupportPattern, ProgramResult] | None = None

    def run_pattern(pattern: SupportPattern) -> PatternOutcome:
        try:
            cs, report = assembler(pattern)
        except TailAssumptionError as e:
            return PatternOutcome(pattern, "refused", detail=str(e))
        if not report.ok:
            return PatternOutcome(pattern, "incompatible", detail=report.describe())
        lp, split = _build_program_lp(cs, Loss.L1 if loss is not Loss.ZERO else Loss.ZERO,
                                      coeff_cap, floor=gamma)
        res = solve_lp(lp)
        if res.status is not Status.OPTIMAL:
            return PatternOutcome(pattern, "infeasible", detail=res.status.value)
        p = _extract_p(res.x, cs.n_vars, split)
        fails = cs.check_full(p, tol=1e-9, gamma=gamma)
        if fails:
            raise SimplexStallError(
                f"pattern {pattern}: optimum failed re-verification: {fails[:3]}")
        pr = ProgramResult(status=Status.OPTIMAL, p=p, objective=res.objective,
                           iterations=res.iterations,
                           cap_active=bool(np.any(np.abs(p) >= coeff_cap * (1 - 1e-9))))
        return PatternOutcome(pattern, "optimal", result=pr)

    patterns = enumerate_patterns(n_traj)
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            outcomes = list(ex.map(run_pattern, patterns))
    else:
        outcomes = None

    for i, pattern in enumerate(patterns):
        out = outcomes[i] if outcomes is not None else run_pattern(pattern)
        if out.state == "optimal" and accept is not None:
            ok, why = accept(pattern, out.result)
            if not ok:
                out = PatternOutcome(pattern, "rejected", detail=why)
        log.append(out)
        if out.state != "optimal":
            continue
        if loss is Loss.SUPPORT_SIZE:
            return out.result, pattern, log
        key = out.result.objective
        if best is None or key < best[0] - 1e-12:
            best = (key, pattern, out.result)

    if best is not None:
        return best[2], best[1], log
    diags = [{"pattern": str(o.pattern), "state": o.state, "detail": o.detail}
             for o in log]
    return ProgramResult(status=Status.INFEASIBLE, diagnostics=diags), None, log


def solve_controlled_program_milp(assembler, n_traj: int, gamma: float = 1e-6,
                     coeff_cap: float = DEFAULT_COEFF_CAP
                     ) -> tuple[ProgramResult, SupportPattern | None, list[PatternOutcome]]:
    """Branch-and-bound over the pattern bits with big-M indicator rows.

    Minimizes the support size. Pairwise controller compatibility enters
    as pure conflict rows z_b[p] + z_c[q] <= 1 (a pattern constraint must
    hold on every cell, so only the worst cell matters and it is a
    constant). Big-M equals the coefficient cap. Intended for trajectory
    counts beyond the enumeration cap; results match enumeration.
    """
    from .errors import TailAssumptionError

    # variant availability and the base row system over the largest sound pattern
    kp_ok, kq_ok = [], []
    for k in range(n_traj):
        try:
            assembler(SupportPattern.of([k], []))
            kp_ok.append(k)
        except TailAssumptionError:
            pass
        try:
            assembler(SupportPattern.of([], [k]))
            kq_ok.append(k)
        except TailAssumptionError:
            pass
    base_pattern = SupportPattern.of(kp_ok, kq_ok)
    base_cs, _ = assembler(base_pattern)
    n = n_traj
    d = base_cs.n_vars

    conflicts = []
    for q in kq_ok:
        for p_ in kp_ok:
            _, rep = assembler(SupportPattern.of([p_], [q]))
            if not rep.ok:
                conflicts.append((p_, q))

    # variables: p (d) then zb (n) then zc (n)
    nv = d + 2 * n
    rows_A = [np.concatenate([row, np.zeros(2 * n)]) for row in base_cs.coeffs]
    senses = list(base_cs.senses)
    rhs = list(base_cs.rhs)
    for k in range(n):
        for (coef_col, z_col) in (((1 + k), d + k), ((1 + n + k), d + n + k)):
            link_hi = np.zeros(nv)
            link_hi[coef_col] = 1.0
            link_hi[z_col] = -coeff_cap
            rows_A.append(link_hi)
            senses.append(LE)
            rhs.append(0.0)
            link_lo = np.zeros(nv)
            link_lo[coef_col] = 1.0
            link_lo[z_col] = -gamma
            rows_A.append(link_lo)
            senses.append(GE)
            rhs.append(0.0)
    for (p_, q) in conflicts:
        row = np.zeros(nv)
        row[d + p_] = 1.0
        row[d + n + q] = 1.0
        rows_A.append(row)
        senses.append(LE)
        rhs.append(1.0)

    base_lb = np.concatenate([[-coeff_cap], np.zeros(d - 1), np.zeros(2 * n)])
    base_ub = np.concatenate([[coeff_cap], np.full(d - 1, coeff_cap), np.ones(2 * n)])
    for k in range(n):
        if k not in kp_ok:
            base_ub[d + k] = 0.0
            base_ub[1 + k] = 0.0
        if k not in kq_ok:
            base_ub[d + n + k] = 0.0
            base_ub[1 + n + k] = 0.0
    obj = np.concatenate([np.zeros(d), np.ones(2 * n)])
    A = np.array(rows_A)
    senses = np.array(senses, dtype=np.int8)
    rhs = np.array(rhs)

    log: list[PatternOutcome] = []
    incumbent: tuple[float, SupportPattern, ProgramResult] | None = None
    stack: list[dict[int, float]] = [{}]
    total_iter = 0

    while stack:
        fixed = stack.pop()
        lb = base_lb.copy()
        ub = base_ub.copy()
        for zc, val in fixed.items():
            lb[zc] = val
            ub[zc] = val
        res = solve_lp(LinearProgram(c=obj, A=A, senses=senses, rhs=rhs, lb=lb, ub=ub))
        total_iter += res.iterations
        if res.status is not Status.OPTIMAL:
            continue
        if incumbent is not None and res.objective >= incumbent[0] - 1e-9:
            continue
        z = res.x[d:]
        frac = np.abs(z - np.round(z))
        j = int(np.argmax(frac))
        if frac[j] > 1e-6:
            var = d + j
            # explore the sparse branch first
            stack.append({**fixed, var: 1.0})
            stack.append({**fixed, var: 0.0})
            continue

        def drill_down():
            # big-M leaves z arbitrarily small, so a "rounded-integral" node
            # whose exact pattern fails must be split on its largest free bit
            # rather than pruned
            free = [jj for jj in range(2 * n) if d + jj not in fixed]
            if not free:
                return False
            jj = max(free, key=lambda t: z[t])
            if z[jj] <= 1e-12:
                return False
            stack.append({**fixed, d + jj: 1.0})
            stack.append({**fixed, d + jj: 0.0})
            return True

        zi = np.round(z).astype(int)
        pattern = SupportPattern.of(np.flatnonzero(zi[:n]), np.flatnonzero(zi[n:]))
        try:
            cs, rep = assembler(pattern)
        except TailAssumptionError as e:
            log.append(PatternOutcome(pattern, "refused", detail=str(e)))
            drill_down()
            continue
        if not rep.ok:
            log.append(PatternOutcome(pattern, "incompatible", detail=rep.describe()))
            drill_down()
            continue
        lp, split = _build_program_lp(cs, Loss.L1, coeff_cap, floor=gamma)
        exact = solve_lp(lp)
        total_iter += exact.iterations
        if exact.status is not Status.OPTIMAL:
            log.append(PatternOutcome(pattern, "infeasible", detail=exact.status.value))
            drill_down()
            continue
        p = _extract_p(exact.x, cs.n_vars, split)
        if cs.check_full(p, tol=1e-9, gamma=gamma):
            raise SimplexStallError(f"pattern {pattern}: optimum failed re-verification")
        pr = ProgramResult(status=Status.OPTIMAL, p=p, objective=float(pattern.size),
                           iterations=total_iter)
        log.append(PatternOutcome(pattern, "optimal", result=pr))
        if incumbent is None or pattern.size < incumbent[0]:
            incumbent = (float(pattern.size), pattern, pr)

    if incumbent is not None:
        return incumbent[2], incumbent[1], log
    return (ProgramResult(status=Status.INFEASIBLE,
                          diagnostics=[{"pattern": str(o.pattern), "state": o.state}
                                       for o in log]),
            None, log)


def write_lp_text(lp: LinearProgram, path, var_names: list[str] | None = None) -> None:
    """Dump in the plain text LP interchange format for external cross-checks."""
    n = lp.c.size
    names = var_names or [f"x{j + 1}" for j in range(n)]

    def expr(coefs):
        terms = []
        for j, v in enumerate(coefs):
            if v == 0:
                continue
            sign = "+" if v >= 0 else "-"
            terms.append(f"{sign} {abs(float(v))!r} {names[j]}")
        if not terms:
            return "0 " + names[0]
        return " ".join(terms).lstrip("+ ")

    lines = ["Minimize", f" obj: {expr(lp.c)}", "Subject To"]
    for i in range(lp.A.shape[0]):
        op = ">=" if lp.senses[i] == GE else "<="
        lines.append(f" r{i + 1}: {expr(lp.A[i])} {op} {float(lp.rhs[i])!r}")
    lines.append("Bounds")
    for j in range(n):
        lo = lp.lb[j] if lp.lb is not None else -np.inf
        hi = lp.ub[j] if lp.ub is not None else np.inf
        lo_s = "-inf" if not np.isfinite(lo) else repr(float(lo))
        hi_s = "+inf" if not np.isfinite(hi) else repr(float(hi))
        lines.append(f" {lo_s} <= {names[j]} <= {hi_s}")
    lines.append("End")
    from pathlib import Path as _P
    _P(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def template_from_p(p: np.ndarray, upper_bases, lower_bases, mode) -> CertificateTemplate:
    n = len(upper_bases)
    b = np.maximum(p[1:1 + n], 0.0)
    c = np.maximum(p[1 + n:], 0.0)
    return CertificateTemplate(a=float(p[0]), b=b, c=c,
                               upper_bases=list(upper_bases),
                               lower_bases=list(lower_bases), mode=mode)
