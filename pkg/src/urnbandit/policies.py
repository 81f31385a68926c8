"""Incentive policies.

Each policy looks at the environment counters before a step and decides
whether to offer the payment, and on which arm.  The decide functions mutate
their policy state in place (phase transitions, recorded times) and return a
:class:`PolicyDecision`.

Randomness is only consumed to break ties: with ``k > 1`` tied candidates one
uniform ``u`` is drawn and candidate ``floor(u * k)`` (in index order) is
taken.  The compiled kernel follows the same rule.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import BanditInstance, EnvState
from .errors import ArgumentError

__all__ = [
    "Phase",
    "PolicyDecision",
    "AlnEtcConfig",
    "AlnEtcState",
    "UcbListState",
    "alnetc_decide",
    "ucblist_decide",
    "ucb_eliminate",
    "confidence_radius",
    "baseline_none_decide",
    "baseline_explore_only_decide",
    "oracle_decide",
    "Policy",
    "make_policy",
    "POLICY_NAMES",
]


class Phase(enum.Enum):
    INITIALIZATION = "initialization"
    EXPLORATION = "exploration"
    EXPLOITATION = "exploitation"
    SELF_SUSTAINING = "self_sustaining"


@dataclass(frozen=True)
class PolicyDecision:
    incentivized_arm: int | None
    payment: float
    phase: Phase
    forced_arm: int | None = None

    def __post_init__(self):
        if (self.payment > 0) != (self.incentivized_arm is not None):
            raise ArgumentError("payment must be positive exactly when an arm is incentivized")

    @classmethod
    def none(cls, phase: Phase = Phase.SELF_SUSTAINING) -> "PolicyDecision":
        return cls(None, 0.0, phase)


@dataclass(frozen=True)
class AlnEtcConfig:
    horizon: int
    payment: float
    q: float

    def __post_init__(self):
        if self.horizon < 2:
            raise ArgumentError("horizon must be at least 2")
        if not self.payment > 0:
            raise ArgumentError("payment must be positive")
        if not self.q > 0:
            raise ArgumentError("q must be positive")

    @property
    def threshold(self) -> int:
        """Per-arm reward target ``n = ceil(q ln T)``."""
        return math.ceil(self.q * math.log(self.horizon))


@dataclass
class AlnEtcState:
    phase: Phase = Phase.EXPLORATION
    identified_arm: int | None = None
    tau_n: int | None = None
    tau_s: int | None = None


@dataclass
class UcbListState:
    phase: Phase = Phase.INITIALIZATION
    active: set[int] = field(default_factory=set)
    identified_arm: int | None = None
    tau_1: int | None = None
    tau_s: int | None = None


def _pick(candidates: list[int], rng: np.random.Generator) -> int:
    if len(candidates) == 1:
        return candidates[0]
    return candidates[int(rng.random() * len(candidates))]


def _argmin(values, arms, rng) -> int:
    best = min(values[a] for a in arms)
    return _pick([a for a in arms if values[a] == best], rng)


def _argmax(values, arms, rng) -> int:
    best = max(values[a] for a in arms)
    return _pick([a for a in arms if values[a] == best], rng)


def _dominates(rewards: np.ndarray, arm: int) -> bool:
    own = int(rewards[arm])
    return own >= int(rewards.sum()) - own


def _sample_means(env: EnvState) -> list[float]:
    return [s / n if n > 0 else 0.0 for s, n in zip(env.rewards.tolist(), env.pulls.tolist())]


# ---------------------------------------------------------------------------
# At-least-n explore-then-commit


def alnetc_decide(
    policy_state: AlnEtcState,
    env_state: EnvState,
    config: AlnEtcConfig,
    rng: np.random.Generator,
    *,
    exploit: bool = True,
) -> PolicyDecision:
    """One decision of the at-least-n explore-then-commit policy.

    Exploration pays for the arm with the least accumulated reward until every
    arm holds at least ``n`` rewards.  The empirical best arm is then frozen and
    paid for until it holds half the total reward, after which payments stop.
    With ``exploit=False`` the dominance-building phase is skipped, which gives
    the exploration-only baseline.
    """
    m = len(env_state.rewards)
    t = env_state.t
    rewards = env_state.rewards.tolist()
    if policy_state.phase is Phase.EXPLORATION:
        if min(rewards) >= config.threshold:
            policy_state.tau_n = t
            policy_state.identified_arm = _argmax(_sample_means(env_state), range(m), rng)
            if exploit:
                policy_state.phase = Phase.EXPLOITATION
            else:
                policy_state.phase = Phase.SELF_SUSTAINING
                policy_state.tau_s = t
        else:
            arm = _argmin(rewards, range(m), rng)
            return PolicyDecision(arm, config.payment, Phase.EXPLORATION)
    if policy_state.phase is Phase.EXPLOITATION:
        arm = policy_state.identified_arm
        if _dominates(env_state.rewards, arm):
            policy_state.phase = Phase.SELF_SUSTAINING
            policy_state.tau_s = t
        else:
            return PolicyDecision(arm, config.payment, Phase.EXPLOITATION)
    return PolicyDecision.none()


def baseline_explore_only_decide(policy_state, env_state, config, rng) -> PolicyDecision:
    """Same exploration as at-least-n ETC, then no incentive at all."""
    return alnetc_decide(policy_state, env_state, config, rng, exploit=False)


# ---------------------------------------------------------------------------
# UCB-List


def confidence_radius(pulls: int, horizon: int) -> float:
    return math.sqrt(math.log(horizon) / (2 * pulls))


def ucb_eliminate(active: set[int], means, radii) -> set[int]:
    """Drop arms whose upper bound sits below another active arm's lower bound.

    Removal repeats until no active arm qualifies; arms are tested in index
    order and the scan restarts after every removal.
    """
    active = set(active)
    removed = True
    while removed and len(active) > 1:
        removed = False
        for a in sorted(active):
            rival = max(means[i] - radii[i] for i in active if i != a)
            if means[a] + radii[a] <= rival:
                active.discard(a)
                removed = True
                break
    return active


def ucblist_decide(
    policy_state: UcbListState,
    env_state: EnvState,
    horizon: int,
    payment: float,
    rng: np.random.Generator,
) -> PolicyDecision:
    m = len(env_state.pulls)
    t = env_state.t
    pulls = env_state.pulls.tolist()
    if policy_state.phase is Phase.INITIALIZATION:
        unpulled = [a for a in range(m) if pulls[a] == 0]
        if unpulled:
            return PolicyDecision(_pick(unpulled, rng), payment, Phase.INITIALIZATION)
        policy_state.phase = Phase.EXPLORATION
        policy_state.active = set(range(m))
    if policy_state.phase is Phase.EXPLORATION:
        means = _sample_means(env_state)
        radii = [confidence_radius(n, horizon) for n in pulls]
        policy_state.active = ucb_eliminate(policy_state.active, means, radii)
        if len(policy_state.active) == 1:
            (arm,) = policy_state.active
            policy_state.identified_arm = arm
            policy_state.tau_1 = t
            policy_state.phase = Phase.EXPLOITATION
        else:
            arm = _argmin(pulls, sorted(policy_state.active), rng)
            return PolicyDecision(arm, payment, Phase.EXPLORATION)
    if policy_state.phase is Phase.EXPLOITATION:
        arm = policy_state.identified_arm
        if _dominates(env_state.rewards, arm):
            policy_state.phase = Phase.SELF_SUSTAINING
            policy_state.tau_s = t
        else:
            return PolicyDecision(arm, payment, Phase.EXPLOITATION)
    return PolicyDecision.none()


# ---------------------------------------------------------------------------
# Baselines


def baseline_none_decide(*_args, **_kwargs) -> PolicyDecision:
    return PolicyDecision.none()


def oracle_decide(instance: BanditInstance, *_args, **_kwargs) -> PolicyDecision:
    """Force the best arm (infinite payment in the limit); nothing is charged."""
    return PolicyDecision(None, 0.0, Phase.SELF_SUSTAINING, forced_arm=instance.best_arm)


# ---------------------------------------------------------------------------
# Stateful wrappers used by the harness

POLICY_NAMES = ("alnetc", "ucb_list", "none", "explore_only", "oracle")


class Policy:
    """A policy bound to one instance and horizon, carrying its own state."""

    name: str

    def decide(self, env_state: EnvState, rng: np.random.Generator) -> PolicyDecision:
        raise NotImplementedError

    # recorded quantities; ``None`` when the policy has no such notion
    tau_first: int | None = None
    tau_s: int | None = None
    identified_arm: int | None = None
    has_dominance_phase = False

    @property
    def censored(self) -> bool:
        return self.has_dominance_phase and self.tau_s is None


class AlnEtcPolicy(Policy):
    name = "alnetc"
    has_dominance_phase = True
    _exploit = True

    def __init__(self, horizon: int, payment: float, q: float):
        self.config = AlnEtcConfig(horizon, payment, q)
        self.state = AlnEtcState()

    def decide(self, env_state, rng):
        return alnetc_decide(self.state, env_state, self.config, rng, exploit=self._exploit)

    @property
    def phase(self):
        return self.state.phase

    @property
    def tau_first(self):
        return self.state.tau_n

    @property
    def tau_s(self):
        return self.state.tau_s

    @property
    def identified_arm(self):
        return self.state.identified_arm


class ExploreOnlyPolicy(AlnEtcPolicy):
    name = "explore_only"
    _exploit = False


class UcbListPolicy(Policy):
    name = "ucb_list"
    has_dominance_phase = True

    def __init__(self, horizon: int, payment: float):
        if horizon < 2 or not payment > 0:
            raise ArgumentError("UCB-List needs horizon >= 2 and a positive payment")
        self.horizon = horizon
        self.payment = payment
        self.state = UcbListState()

    def decide(self, env_state, rng):
        return ucblist_decide(self.state, env_state, self.horizon, self.payment, rng)

    @property
    def phase(self):
        return self.state.phase

    @property
    def tau_first(self):
        return self.state.tau_1

    @property
    def tau_s(self):
        return self.state.tau_s

    @property
    def identified_arm(self):
        return self.state.identified_arm


class NoIncentivePolicy(Policy):
    name = "none"
    phase = Phase.SELF_SUSTAINING

    def decide(self, env_state, rng):
        return baseline_none_decide()


class OraclePolicy(Policy):
    name = "oracle"
    phase = Phase.SELF_SUSTAINING

    def __init__(self, instance: BanditInstance):
        self.instance = instance

    def decide(self, env_state, rng):
        return oracle_decide(self.instance)


def make_policy(name: str, instance: BanditInstance, horizon: int, payment: float = 1.0, q: float = 15.0) -> Policy:
    if name == "alnetc":
        return AlnEtcPolicy(horizon, payment, q)
    if name == "explore_only":
        return ExploreOnlyPolicy(horizon, payment, q)
    if name == "ucb_list":
        return UcbListPolicy(horizon, payment)
    if name == "none":
        return NoIncentivePolicy()
    if name == "oracle":
        return OraclePolicy(instance)
    raise ArgumentError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")
