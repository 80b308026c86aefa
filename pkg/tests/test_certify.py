import numpy as np
import pytest

from monocert.certify import (
    GE,
    LE,
    CertificateTemplate,
    Mode,
    SupportPattern,
    _pattern_compat,
    assemble_controlled_program,
    assemble_robust_program,
    controller_set,
    bracketing_diagnostic,
    eval_certificate,
    eval_inclusion,
    make_robust_bases,
    policy_compat_table,
    select_control,
)
from monocert.dominance import BasisKind, DominanceBasis, lambda_schedule
from monocert.errors import TailAssumptionError, UsageError
from monocert.order import Region, box
from monocert.partition import build_partition, cover_sets
from monocert.systems import (
    FeedbackPolicy,
    LipschitzBounds,
    TailDominance,
    TailInfo,
    Trajectory,
)

ZERO_LIPS = LipschitzBounds(L_x=1.0, L_w=1.0, D_w=0.0)


def _toy_1d():
    """Domain [0,5] split in half-unit cells; data (4,3,2,1), no tail slack."""
    traj = Trajectory(states=np.array([[4.0], [3.0], [2.0], [1.0]]), name="toy")
    traj.tail = TailInfo(epsilon=0.0, dominance=TailDominance.UPPER)
    part = build_partition(box([0.0], [5.0]), 0.5)
    covers = cover_sets(part, Region.of(box([0.0], [1.0])),
                        Region.of(box([4.5], [5.0])))
    return traj, part, covers


def _template(traj, b, c, alpha=2.0):
    infl = lambda_schedule(ZERO_LIPS, traj.horizon)
    up = DominanceBasis(BasisKind.ROBUST_UPPER, True, traj, alpha,
                        inflation=infl, epsilon_T=traj.tail.epsilon)
    lo = DominanceBasis(BasisKind.ROBUST_LOWER, True, traj, alpha,
                        inflation=infl, epsilon_T=traj.tail.epsilon)
    return CertificateTemplate(a=-0.5, b=np.array([b]), c=np.array([c]),
                               upper_bases=[up], lower_bases=[lo], mode=Mode.ROBUST)


def test_eval_certificate_constant_when_weights_vanish():
    traj, _, _ = _toy_1d()
    tpl = _template(traj, 0.0, 0.0)
    assert eval_certificate(tpl, [2.0]) == -0.5


def test_eval_inclusion_degenerate_interval_equals_eval():
    traj, _, _ = _toy_1d()
    tpl = _template(traj, 0.3, 0.7)
    for x in ([0.5], [2.5], [4.9]):
        assert eval_inclusion(tpl, x, x) == pytest.approx(tpl.eval(x), abs=1e-15)


def test_eval_inclusion_brackets_the_certificate():
    traj, part, _ = _toy_1d()
    rng = np.random.default_rng(4)
    tpl = _template(traj, 0.4, 1.3)
    for _ in range(300):
        cell = (int(rng.integers(0, 10)),)
        lo, hi = part.cell_corners(cell)
        z = lo + rng.random(1) * (hi - lo)
        low = eval_inclusion(tpl, lo, hi)
        high = eval_inclusion(tpl, hi, lo)
        assert low <= tpl.eval(z) + 1e-15
        assert tpl.eval(z) <= high + 1e-15


def test_eval_inclusion_monotone_in_first_antitone_in_second():
    traj, _, _ = _toy_1d()
    tpl = _template(traj, 0.8, 0.6)
    assert eval_inclusion(tpl, [1.0], [2.0]) <= eval_inclusion(tpl, [3.0], [2.0])
    assert eval_inclusion(tpl, [1.0], [3.0]) <= eval_inclusion(tpl, [1.0], [2.0])


def test_template_rejects_negative_weights():
    traj, _, _ = _toy_1d()
    with pytest.raises(UsageError):
        _template(traj, -0.1, 0.0)


def test_template_rejects_nonzero_weight_without_basis():
    with pytest.raises(UsageError):
        CertificateTemplate(a=0.0, b=np.array([1.0]), c=np.array([0.0]),
                            upper_bases=[None], lower_bases=[None], mode=Mode.ROBUST)


# --------------------------------------------------------------- robust rows

def test_robust_program_toy_row_values():
    traj, part, covers = _toy_1d()
    cs = assemble_robust_program([traj], ZERO_LIPS, part, covers, alpha=2.0, delta_u=1e-6)
    # 2 initial cells + 1 unsafe cell + 2 sign rows
    assert cs.n_rows == 5
    assert cs.kinds == ["initial", "initial", "unsafe", "sign", "sign"]
    # initial rows: P at the cell's upper corner, Q at the lower corner
    # (eps = 0): P(0.5)=P(1)=1/4, Q(0)=Q(0.5)=alpha
    for r in (0, 1):
        assert cs.senses[r] == LE
        assert cs.coeffs[r, 0] == 1.0
        assert cs.coeffs[r, 1] == pytest.approx(0.25)
        assert cs.coeffs[r, 2] == pytest.approx(2.0)
    # unsafe row: P(4.5) = alpha (empty), Q(5) = 1/4; both minus 1/(T+1)
    assert cs.senses[2] == GE and cs.rhs[2] == pytest.approx(1e-6)
    assert cs.coeffs[2, 1] == pytest.approx(2.0 - 0.25)
    assert cs.coeffs[2, 2] == pytest.approx(0.25 - 0.25)


def test_robust_program_shifts_cancel_for_converged_data():
    """With the tail shifts applied, row entries equal the unshifted
    non-truncated values at the raw corners."""
    traj = Trajectory(states=np.array([[4.0], [3.0], [2.0], [1.0]]), name="t")
    traj.tail = TailInfo(epsilon=0.35, dominance=TailDominance.UPPER)
    part = build_partition(box([0.0], [5.0]), 0.5)
    covers = cover_sets(part, Region.of(box([0.0], [1.0])),
                        Region.of(box([4.5], [5.0])))
    cs = assemble_robust_program([traj], ZERO_LIPS, part, covers, alpha=2.0)
    infl = lambda_schedule(ZERO_LIPS, traj.horizon)
    plain_up = DominanceBasis(BasisKind.ROBUST_UPPER, False, traj, 2.0, inflation=infl)
    plain_lo = DominanceBasis(BasisKind.ROBUST_LOWER, False, traj, 2.0, inflation=infl)
    for r, cell in enumerate(sorted(covers.initial)):
        lo, hi = part.cell_corners(cell)
        assert cs.coeffs[r, 1] == plain_up.value(hi)
        assert cs.coeffs[r, 2] == plain_lo.value(lo)


def test_robust_program_refuses_missing_tail_epsilon():
    traj = Trajectory(states=np.array([[1.0], [2.0]]), name="no-tail")
    part = build_partition(box([0.0], [5.0]), 1.0)
    covers = cover_sets(part, Region.of(box([0.0], [1.0])),
                        Region.of(box([4.0], [5.0])))
    with pytest.raises(UsageError, match="tail"):
        assemble_robust_program([traj], ZERO_LIPS, part, covers)


def test_robust_program_feasible_p_separates_sampled_points():
    """Any p satisfying the rows keeps the evaluated certificate <= 0 on the
    initial region and > 0 on the unsafe region."""
    traj, part, covers = _toy_1d()
    cs = assemble_robust_program([traj], ZERO_LIPS, part, covers, alpha=2.0, delta_u=1e-6)
    from monocert.solver import Loss, solve_robust_program
    res = solve_robust_program(cs, loss=Loss.L1)
    uppers, lowers = make_robust_bases([traj], ZERO_LIPS, 2.0)
    tpl = CertificateTemplate(a=res.p[0], b=res.p[1:2], c=res.p[2:],
                              upper_bases=uppers, lower_bases=lowers, mode=Mode.ROBUST)
    rng = np.random.default_rng(9)
    x0 = rng.uniform(0.0, 1.0, size=(1000, 1))
    xu = rng.uniform(4.5, 5.0, size=(1000, 1))
    assert np.all(tpl.eval_many(x0) <= 1e-12)
    assert np.all(tpl.eval_many(xu) > 0)


# ------------------------------------------------------------ controlled rows

def _both_tail_traj(states, name):
    t = Trajectory(states=np.asarray(states, dtype=float), name=name)
    t.tail = TailInfo(epsilon=0.0, dominance=TailDominance.BOTH)
    return t


def test_controlled_program_compat_constant_policies(traffic_bundle):
    sys2, trajs, policies = traffic_bundle
    part = build_partition(sys2.state_set, 1.0)
    covers = cover_sets(part, sys2.initial_set, sys2.unsafe_set)
    cs, rep = assemble_controlled_program(trajs, policies, part, covers,
                             pattern=SupportPattern.of([0], [1]))
    assert rep.ok and not rep.corner_convention_warning
    assert cs.pattern == SupportPattern.of([0], [1])
    # out-of-pattern coefficients pinned: b[1] is column 2, c[0] is column 3
    assert cs.fixed_zero == frozenset({2, 3})


def test_controlled_program_swapped_pattern_fails_compatibility():
    # constant-tail data so the tail precondition passes and the policy
    # comparison is what rejects the pattern: (9,0.6) is not <= (9,0.5)
    t1 = _both_tail_traj([[5.0, 5.0]] * 3, "c1")
    t2 = _both_tail_traj([[4.0, 4.0]] * 3, "c2")
    pi1 = FeedbackPolicy.constant([9.0, 0.6], name="pi1")
    pi2 = FeedbackPolicy.constant([9.0, 0.5], name="pi2")
    part = build_partition(box([0.0, 0.0], [10.0, 10.0]), 1.0)
    covers = cover_sets(part, Region.of(box([4.0, 4.0], [6.0, 6.0])),
                        Region.of(box([0.0, 0.0], [1.0, 1.0])))
    _, rep = assemble_controlled_program([t1, t2], [pi1, pi2], part, covers,
                            pattern=SupportPattern.of([1], [0]))
    assert not rep.ok
    assert rep.fail_cells == 100
    _, rep_ok = assemble_controlled_program([t1, t2], [pi1, pi2], part, covers,
                               pattern=SupportPattern.of([0], [1]))
    assert rep_ok.ok


def test_controlled_program_single_policy_pattern_trivially_compatible():
    t1 = _both_tail_traj([[5.0, 5.0]] * 3, "c1")
    pi1 = FeedbackPolicy.constant([9.0, 0.6], name="pi1")
    part = build_partition(box([0.0, 0.0], [10.0, 10.0]), 2.0)
    covers = cover_sets(part, Region.of(box([4.0, 4.0], [6.0, 6.0])),
                        Region.of(box([0.0, 0.0], [1.0, 1.0])))
    _, rep = assemble_controlled_program([t1], [pi1], part, covers,
                            pattern=SupportPattern.of([0], [0]))
    assert rep.ok


def test_controlled_program_tail_refusal_names_trajectory_and_variant(traffic_bundle):
    sys2, trajs, policies = traffic_bundle
    part = build_partition(sys2.state_set, 1.0)
    covers = cover_sets(part, sys2.initial_set, sys2.unsafe_set)
    with pytest.raises(TailAssumptionError, match="tr2.*upper"):
        assemble_controlled_program(trajs, policies, part, covers,
                       pattern=SupportPattern.of([1], [0]))


def test_controlled_program_rejects_undeclared_policies(traffic_bundle):
    sys2, trajs, _ = traffic_bundle
    shady = [FeedbackPolicy(lambda x: x, monotone=False, name="shady")] * 2
    part = build_partition(sys2.state_set, 1.0)
    covers = cover_sets(part, sys2.initial_set, sys2.unsafe_set)
    with pytest.raises(UsageError, match="monotone"):
        assemble_controlled_program(trajs, shady, part, covers)


def test_pattern_compat_table_pairwise(traffic_bundle):
    sys2, _, policies = traffic_bundle
    part = build_partition(sys2.state_set, 1.0)
    table = policy_compat_table(policies, part)
    ok = _pattern_compat(SupportPattern.of([0], [1]), table)
    assert ok.ok
    bad = _pattern_compat(SupportPattern.of([1], [0]), table)
    assert not bad.ok and bad.first_fail_pair == (0, 1)


# ------------------------------------------------------------- controller set

def test_controller_boxes_for_reference_policies(traffic_bundle):
    sys2, _, policies = traffic_bundle
    part = build_partition(sys2.state_set, 1.0)
    cset = controller_set(SupportPattern.of([0], [1]), policies, part,
                          sys2.input_set)
    for cell in [(0, 0), (3, 4), (9, 9)]:
        b = cset.box_at(cell)
        assert np.array_equal(b.lower, [9.0, 0.5])
        assert np.array_equal(b.upper, [9.0, 0.6])
    assert cset.empty_cells() == []


def test_controller_empty_pattern_gives_whole_input_set(traffic_bundle):
    sys2, _, policies = traffic_bundle
    part = build_partition(sys2.state_set, 1.0)
    cset = controller_set(SupportPattern.of([], []), policies, part, sys2.input_set)
    b = cset.box_at((5, 5))
    assert np.array_equal(b.lower, sys2.input_set.lower)
    assert np.array_equal(b.upper, sys2.input_set.upper)


def test_controller_singleton_when_policy_on_both_sides(traffic_bundle):
    sys2, _, policies = traffic_bundle
    part = build_partition(sys2.state_set, 1.0)
    cset = controller_set(SupportPattern.of([0], [0]), policies, part, sys2.input_set)
    b = cset.box_at((2, 2))
    assert np.array_equal(b.lower, b.upper)
    assert np.array_equal(b.lower, [9.0, 0.6])


def test_controller_boxes_shrink_as_the_pattern_grows(traffic_bundle):
    sys2, _, policies = traffic_bundle
    part = build_partition(sys2.state_set, 1.0)
    small = controller_set(SupportPattern.of([0], []), policies, part, sys2.input_set)
    large = controller_set(SupportPattern.of([0], [1]), policies, part, sys2.input_set)
    bs, bl = small.box_at((4, 4)), large.box_at((4, 4))
    assert np.all(bs.lower <= bl.lower) and np.all(bl.upper <= bs.upper)


def test_select_control_projection(traffic_bundle):
    sys2, _, policies = traffic_bundle
    part = build_partition(sys2.state_set, 1.0)
    cset = controller_set(SupportPattern.of([0], [1]), policies, part, sys2.input_set)
    assert np.array_equal(select_control(cset, (0, 0), [9.0, 0.55]), [9.0, 0.55])
    assert np.array_equal(select_control(cset, (0, 0), [9.0, 0.9]), [9.0, 0.6])
    assert np.array_equal(select_control(cset, (0, 0)), [9.0, 0.55])


def test_select_control_empty_cell_errors():
    part = build_partition(box([0.0, 0.0], [10.0, 10.0]), 5.0)
    hi = FeedbackPolicy.constant([8.0, 0.8], name="hi")
    lo = FeedbackPolicy.constant([2.0, 0.2], name="lo")
    # Kp uses lo as the upper bound, Kq uses hi as the lower bound: empty
    cset = controller_set(SupportPattern.of([1], [0]), [hi, lo], part,
                          box([0.0, 0.1], [10.0, 0.9]))
    assert cset.box_at((0, 0)) is None
    with pytest.raises(UsageError):
        select_control(cset, (0, 0))
    assert len(cset.empty_cells()) == 4


# ------------------------------------------------------- bracketing check

def test_bracketing_diagnostic_cases(decreasing_1d):
    other = Trajectory(states=np.array([[0.5], [0.6], [0.7]]), name="o")
    # a state on the stored trajectory: both times exist, value <= 0
    assert bracketing_diagnostic([decreasing_1d], [3.0], 2.0) <= 0.0
    # incomparable with everything: alpha - 1
    traj2d = Trajectory(states=np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert bracketing_diagnostic([traj2d], [-1.0, 5.0], 2.0) == pytest.approx(1.0)
    # hand enumeration: max(1/2, 1/4) - 1
    assert bracketing_diagnostic([decreasing_1d], [2.5], 2.0) == pytest.approx(-0.5)
    # the min over trajectories takes the smaller envelope
    assert bracketing_diagnostic([decreasing_1d, other], [2.5], 2.0) == pytest.approx(-0.5)
    with pytest.raises(UsageError):
        bracketing_diagnostic([], [1.0], 2.0)
