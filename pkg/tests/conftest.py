import numpy as np
import pytest

from monocert.dominance import lambda_schedule
from monocert.systems import (
    CONTRACTIVE_LIPSCHITZ,
    FeedbackPolicy,
    PolicyInput,
    SampledDisturbance,
    estimate_compact_tail,
    make_contractive,
    make_lotka_volterra,
    make_traffic,
    simulate,
)


@pytest.fixture(scope="session")
def lv_bundle():
    """Population system with the two reference trajectories (T=400)."""
    sys5 = make_lotka_volterra(0.2)
    t1 = simulate(sys5, [1.46, 0.84, 0.67, 1.59, 0.78], None, 400, name="lv1")
    t2 = simulate(sys5, [8.65, 9.74, 8.83, 9.17, 9.61], None, 400, name="lv2")
    t1.tail = estimate_compact_tail(t1, 50)
    t2.tail = estimate_compact_tail(t2, 50)
    return sys5, [t1, t2]


@pytest.fixture(scope="session")
def traffic_bundle():
    """Traffic system, constant policies, and the two controlled runs (T=1000)."""
    sys2 = make_traffic(0.01)
    pi1 = FeedbackPolicy.constant([9.0, 0.6], name="pi1")
    pi2 = FeedbackPolicy.constant([9.0, 0.5], name="pi2")
    t1 = simulate(sys2, [9.5, 9.9], PolicyInput(pi1), 1000, seed=1, name="tr1")
    t2 = simulate(sys2, [0.1, 0.3], PolicyInput(pi2), 1000, seed=2, name="tr2")
    t1.tail = estimate_compact_tail(t1, 50)
    t2.tail = estimate_compact_tail(t2, 50)
    return sys2, [t1, t2], [pi1, pi2]


@pytest.fixture(scope="session")
def contractive_bundle():
    """Known-Lipschitz test system with one disturbed trajectory (T=60)."""
    syn = make_contractive(2)
    traj = simulate(syn, [0.2, -0.1], SampledDisturbance(), 60, seed=5, name="syn")
    traj.tail = estimate_compact_tail(traj, 10)
    infl = lambda_schedule(CONTRACTIVE_LIPSCHITZ, 60)
    return syn, traj, infl


@pytest.fixture
def decreasing_1d():
    """The hand-enumeration trajectory (4, 3, 2, 1)."""
    from monocert.systems import Trajectory
    return Trajectory(states=np.array([[4.0], [3.0], [2.0], [1.0]]), name="dec")
