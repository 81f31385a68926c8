import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urnbandit.dynamics import BanditInstance, EnvState, Polynomial, step
from urnbandit.errors import ArgumentError
from urnbandit.harness import trial_rng
from urnbandit.policies import (
    AlnEtcConfig,
    AlnEtcState,
    Phase,
    PolicyDecision,
    UcbListState,
    alnetc_decide,
    baseline_explore_only_decide,
    baseline_none_decide,
    confidence_radius,
    make_policy,
    oracle_decide,
    ucb_eliminate,
    ucblist_decide,
)

FIG1 = BanditInstance((0.3, 0.5), (100.0, 1.0), Polynomial(1.5))
FIG2 = BanditInstance((0.2, 0.4, 0.6), (10.0, 10.0, 1.0), Polynomial(1.5))


def env(rewards, pulls=None, t=None):
    rewards = np.asarray(rewards, dtype=np.int64)
    pulls = rewards * 2 if pulls is None else np.asarray(pulls, dtype=np.int64)
    return EnvState(int(pulls.sum()) if t is None else t, pulls, rewards, int(rewards.sum()))


def threshold_config(n, T=10_000, b=1.0):
    # pick q so that ceil(q ln T) == n
    q = (n - 0.5) / np.log(T)
    cfg = AlnEtcConfig(T, b, q)
    assert cfg.threshold == n
    return cfg


# ---------------------------------------------------------------- decisions


def test_decision_payment_iff_incentive():
    PolicyDecision(0, 1.0, Phase.EXPLORATION)
    PolicyDecision.none()
    with pytest.raises(ArgumentError):
        PolicyDecision(0, 0.0, Phase.EXPLORATION)
    with pytest.raises(ArgumentError):
        PolicyDecision(None, 1.0, Phase.EXPLORATION)


@pytest.mark.parametrize("kw", [dict(horizon=1, payment=1, q=1), dict(horizon=10, payment=0, q=1), dict(horizon=10, payment=1, q=0)])
def test_config_validation(kw):
    with pytest.raises(ArgumentError):
        AlnEtcConfig(**kw)


def test_threshold_is_ceiling():
    assert AlnEtcConfig(10_000, 1.5, 15).threshold == 139  # 15 ln 1e4 = 138.16


# ---------------------------------------------------------------- ALnETC


def test_alnetc_explores_argmin(rng):
    d = alnetc_decide(AlnEtcState(), env([5, 3]), threshold_config(10), rng)
    assert d.incentivized_arm == 1 and d.phase is Phase.EXPLORATION and d.payment == 1.0


def test_alnetc_enters_exploitation(rng):
    st_ = AlnEtcState()
    # sample means 0.3 and 0.55
    e = env([12, 11], [40, 20])
    d = alnetc_decide(st_, e, threshold_config(10), rng)
    assert st_.phase is Phase.EXPLOITATION
    assert st_.identified_arm == 1
    assert st_.tau_n == e.t
    assert d.incentivized_arm == 1 and d.phase is Phase.EXPLOITATION


def test_alnetc_dominance_boundary(rng):
    st_ = AlnEtcState(Phase.EXPLOITATION, identified_arm=1, tau_n=5)
    d = alnetc_decide(st_, env([4, 4]), threshold_config(3), rng)
    assert st_.phase is Phase.SELF_SUSTAINING
    assert st_.tau_s == 16
    assert d.incentivized_arm is None and d.payment == 0


def test_alnetc_target_frozen(rng):
    st_ = AlnEtcState(Phase.EXPLOITATION, identified_arm=0, tau_n=5)
    # arm 1 now looks far better, but the target stays put
    d = alnetc_decide(st_, env([20, 50], [100, 60]), threshold_config(3), rng)
    assert d.incentivized_arm == 0


def test_alnetc_tie_break_uniform():
    cfg = threshold_config(10)
    picks = [alnetc_decide(AlnEtcState(), env([3, 3, 3]), cfg, np.random.default_rng(s)).incentivized_arm for s in range(3000)]
    freq = np.bincount(picks, minlength=3) / 3000
    np.testing.assert_allclose(freq, [1 / 3] * 3, atol=0.04)


def test_explore_only_matches_then_stops(rng):
    cfg = threshold_config(10)
    a = alnetc_decide(AlnEtcState(), env([5, 3]), cfg, np.random.default_rng(1))
    b = baseline_explore_only_decide(AlnEtcState(), env([5, 3]), cfg, np.random.default_rng(1))
    assert a == b
    st_ = AlnEtcState()
    d = baseline_explore_only_decide(st_, env([12, 11]), cfg, rng)
    assert d.incentivized_arm is None
    assert st_.phase is Phase.SELF_SUSTAINING and st_.tau_s == st_.tau_n


# ---------------------------------------------------------------- UCB-List


def test_elimination_removes_dominated():
    assert ucb_eliminate({0, 1}, [0.2, 0.6], [0.05, 0.05]) == {1}


def test_elimination_keeps_overlapping():
    assert ucb_eliminate({0, 1}, [0.45, 0.55], [0.2, 0.2]) == {0, 1}


def test_elimination_cascades():
    # arm 0 falls under arm 1 and arm 2, arm 1 falls under arm 2
    assert ucb_eliminate({0, 1, 2}, [0.1, 0.4, 0.9], [0.05, 0.05, 0.05]) == {2}


def test_elimination_ignores_inactive():
    assert ucb_eliminate({0, 1}, [0.2, 0.3, 0.99], [0.01, 0.01, 0.0]) == {1}


def test_ucblist_no_removal_incentivizes_least_pulled(rng):
    st_ = UcbListState(Phase.EXPLORATION, {0, 1})
    # radius for 5 pulls at T=e^2 ~ 0.447, so nothing is eliminated
    d = ucblist_decide(st_, env([2, 3], [7, 5]), int(np.exp(2)), 1.0, rng)
    assert st_.active == {0, 1}
    assert d.incentivized_arm == 1


def test_ucblist_identifies(rng):
    st_ = UcbListState(Phase.EXPLORATION, {0, 1})
    # means 0.3 and 0.625, but arm 1 holds less than half the reward
    e = env([300, 250], [1000, 400])
    d = ucblist_decide(st_, e, 100, 1.0, rng)
    assert st_.identified_arm == 1 and st_.tau_1 == 1400
    assert d.incentivized_arm == 1 and d.phase is Phase.EXPLOITATION


def test_ucblist_initialization(rng):
    d = ucblist_decide(UcbListState(), env([0, 2], [0, 3]), 100, 1.0, rng)
    assert d.incentivized_arm == 0 and d.phase is Phase.INITIALIZATION


def test_confidence_radius():
    assert confidence_radius(2, 100) == pytest.approx(np.sqrt(np.log(100) / 4))


# ---------------------------------------------------------------- baselines


def test_none_and_oracle():
    assert baseline_none_decide() == PolicyDecision.none()
    d = oracle_decide(FIG1)
    assert d.forced_arm == 1 and d.payment == 0 and d.incentivized_arm is None
    assert oracle_decide(FIG2).forced_arm == 2


def test_make_policy_unknown():
    with pytest.raises(ArgumentError):
        make_policy("thompson", FIG1, 100)


# ---------------------------------------------------------------- trajectory invariants


def trajectory(name, instance, T, seed, **kw):
    pol = make_policy(name, instance, T, **kw)
    rng = trial_rng(seed, 0)
    e = EnvState.fresh(instance.m)
    log = []
    for _ in range(T):
        d = pol.decide(e, rng)
        before = e.copy()
        step(e, instance, d, rng)
        log.append((before, d, getattr(pol, "phase", None), getattr(pol.state, "active", None) if hasattr(pol, "state") else None))
    return pol, log, e


PHASE_ORDER = [Phase.INITIALIZATION, Phase.EXPLORATION, Phase.EXPLOITATION, Phase.SELF_SUSTAINING]


def check_common(pol, log, final):
    ranks = [PHASE_ORDER.index(p) for _, _, p, _ in log]
    assert ranks == sorted(ranks), "phases must only advance"
    assert final.total_payment == pytest.approx(sum(d.payment for _, d, _, _ in log))
    if pol.tau_s is not None:
        a = pol.identified_arm
        S = log[pol.tau_s][0].rewards if pol.tau_s < len(log) else final.rewards
        assert S[a] >= S.sum() - S[a]
        assert all(d.payment == 0 for before, d, _, _ in log if before.t >= pol.tau_s)
        assert pol.tau_first <= pol.tau_s <= len(log)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), q=st.floats(0.5, 4.0))
def test_alnetc_trajectory_invariants(seed, q):
    T = 600
    pol, log, final = trajectory("alnetc", FIG2, T, seed, payment=1.2, q=q)
    n = pol.config.threshold
    check_common(pol, log, final)
    for before, d, _, _ in log:
        if pol.tau_first is None or before.t < pol.tau_first:
            assert before.rewards.min() < n
            assert d.phase is Phase.EXPLORATION
    if pol.tau_first is not None:
        S = log[pol.tau_first][0].rewards if pol.tau_first < T else final.rewards
        assert S.min() >= n
        assert pol.identified_arm is not None
    else:
        assert pol.phase is Phase.EXPLORATION


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_ucblist_trajectory_invariants(seed):
    T = 800
    pol, log, final = trajectory("ucb_list", FIG2, T, seed, payment=1.2)
    check_common(pol, log, final)
    prev = {0, 1, 2}
    for before, d, phase, active in log:
        if phase in (Phase.EXPLORATION, Phase.EXPLOITATION, Phase.SELF_SUSTAINING):
            assert active <= prev
            prev = active
            if d.incentivized_arm is not None:
                assert d.incentivized_arm in active
        if phase is not Phase.INITIALIZATION and phase is not Phase.EXPLORATION:
            assert len(active) == 1
    if pol.tau_first is not None:
        assert pol.state.active == {pol.identified_arm}


def test_explore_only_payment_accounting():
    pol, log, final = trajectory("explore_only", FIG1, 2000, 3, payment=1.5, q=15)
    assert pol.tau_first is not None
    assert final.total_payment == pytest.approx(1.5 * pol.tau_first)
    assert final.incentivized_steps == pol.tau_first


def test_identification_soundness():
    from urnbandit.harness import ExperimentConfig, PolicySpec, run_experiment

    cfg = ExperimentConfig(FIG1, PolicySpec("alnetc", 1.5, 15.0), 10_000, trials=200, seed=11)
    agg = run_experiment(cfg)
    assert agg.n_identified == 200
    assert agg.n_misidentified / 200 <= 0.05
