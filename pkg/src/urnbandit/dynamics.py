"""Environment: arms, feedback and incentive functions, and the stochastic step.

Users pick arm ``a`` with probability proportional to ``F(S_a + theta_a)``,
where ``S_a`` is the reward the arm has produced so far and ``theta_a`` its
initial bias.  An incentive of impact ``g`` on arm ``a`` moves the preference
vector to ``(lambda_a + g) / (1 + g)`` on the target and ``lambda_i / (1 + g)``
elsewhere.

Feedback values are computed one arm at a time with :func:`math.pow` so that
the compiled trial kernel in :mod:`urnbandit._kernel` reproduces them bit for
bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Sequence, Union

import numpy as np

from .errors import ArgumentError, EvaluationError

if TYPE_CHECKING:
    from .policies import PolicyDecision

__all__ = [
    "Polynomial",
    "UserFeedback",
    "ConstantImpact",
    "PaymentLinearImpact",
    "UserImpact",
    "BanditInstance",
    "EnvState",
    "StepOutcome",
    "preference_rates",
    "apply_incentive",
    "step",
    "pseudo_regret",
]

_MONOTONE_GRID = np.arange(1, 1001, dtype=float)
_PAYMENT_GRID = np.linspace(0.0, 10.0, 41)


# ---------------------------------------------------------------------------
# Feedback functions


@dataclass(frozen=True)
class Polynomial:
    """``F(x) = coefficient * x ** alpha``."""

    alpha: float = 1.5
    coefficient: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ArgumentError(f"alpha must be a positive finite number, got {self.alpha!r}")
        if not (self.coefficient > 0 and math.isfinite(self.coefficient)):
            raise ArgumentError(f"coefficient must be positive, got {self.coefficient!r}")

    def __call__(self, x):
        if np.ndim(x) == 0:
            return self.coefficient * math.pow(float(x), self.alpha)
        return self.coefficient * np.power(np.asarray(x, dtype=float), self.alpha)


@dataclass(frozen=True)
class UserFeedback:
    """Wraps an arbitrary positive, increasing callable.

    Monotonicity can't be checked symbolically, so construction samples the
    function on ``x = 1..1000`` and rejects it if any value is non-positive,
    non-finite or smaller than its predecessor.
    """

    func: Callable[[float], float]
    name: str = "user"

    def __post_init__(self):
        values = np.array([float(self.func(float(x))) for x in _MONOTONE_GRID])
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ArgumentError("feedback function must be finite and strictly positive on x = 1..1000")
        if np.any(np.diff(values) < 0):
            raise ArgumentError("feedback function must be nondecreasing on x = 1..1000")

    def __call__(self, x):
        if np.ndim(x) == 0:
            return float(self.func(float(x)))
        arr = np.asarray(x, dtype=float)
        return np.array([float(self.func(v)) for v in arr.ravel()]).reshape(arr.shape)


FeedbackFunction = Union[Polynomial, UserFeedback]


# ---------------------------------------------------------------------------
# Incentive impact functions


@dataclass(frozen=True)
class ConstantImpact:
    """Impact ``g`` whenever a positive payment is offered, zero otherwise."""

    value: float

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ArgumentError(f"impact value must be finite and >= 0, got {self.value!r}")

    def __call__(self, payment: float, t: int) -> float:
        return float(self.value) if payment > 0 else 0.0


@dataclass(frozen=True)
class PaymentLinearImpact:
    """Impact equal to the payment itself, ``G(b, t) = b``."""

    def __call__(self, payment: float, t: int) -> float:
        return float(payment)


@dataclass(frozen=True)
class UserImpact:
    """Arbitrary ``(payment, step) -> impact`` map, checked on a payment grid."""

    func: Callable[[float, int], float]
    name: str = "user"

    def __post_init__(self):
        for t in (1, 10, 1000):
            if self.func(0.0, t) != 0:
                raise ArgumentError("impact function must vanish at zero payment")
            values = np.array([float(self.func(float(b), t)) for b in _PAYMENT_GRID])
            if np.any(values < 0) or np.any(np.diff(values) < 0):
                raise ArgumentError("impact function must be nonnegative and nondecreasing in payment")

    def __call__(self, payment: float, t: int) -> float:
        return float(self.func(float(payment), int(t)))


ImpactFunction = Union[ConstantImpact, PaymentLinearImpact, UserImpact]


# ---------------------------------------------------------------------------
# Instance and state


@dataclass(frozen=True)
class BanditInstance:
    """Arm means and biases plus the feedback and impact functions.

    Immutable, so one instance can be shared by any number of trials.  The best
    arm must be unique unless ``allow_ties`` is set; tied instances are only
    meaningful for studying the urn itself (see :mod:`urnbandit.embedding`) and
    are refused by the harness and the bound evaluators.
    """

    means: tuple[float, ...]
    biases: tuple[float, ...]
    feedback: FeedbackFunction = field(default_factory=Polynomial)
    impact: ImpactFunction = field(default_factory=PaymentLinearImpact)
    allow_ties: bool = False

    def __post_init__(self):
        means = tuple(float(v) for v in self.means)
        biases = tuple(float(v) for v in self.biases)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "biases", biases)
        if len(means) < 2:
            raise ArgumentError("need at least two arms")
        if len(means) != len(biases):
            raise ArgumentError(f"{len(means)} means but {len(biases)} biases")
        for a, mu in enumerate(means):
            if not (0 < mu <= 1):
                raise ArgumentError(f"mean of arm {a} must lie in (0, 1], got {mu}")
        for a, theta in enumerate(biases):
            if not (theta > 0 and math.isfinite(theta)):
                raise ArgumentError(f"bias of arm {a} must be positive, got {theta}")
        if not self.allow_ties and not self.has_unique_best:
            raise ArgumentError("the best arm must be unique")

    @property
    def has_unique_best(self) -> bool:
        top = max(self.means)
        return sum(1 for mu in self.means if mu == top) == 1

    @property
    def m(self) -> int:
        return len(self.means)

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.means))

    @property
    def best_mean(self) -> float:
        return max(self.means)

    @property
    def gaps(self) -> np.ndarray:
        """``mu* - mu_a`` for every arm (zero at the best arm)."""
        return self.best_mean - np.asarray(self.means)

    @property
    def gap_min(self) -> float:
        return float(min(g for a, g in enumerate(self.gaps) if a != self.best_arm))

    @property
    def gap_max(self) -> float:
        return float(max(self.gaps))

    @property
    def mean_min(self) -> float:
        return min(self.means)


@dataclass
class EnvState:
    t: int
    pulls: np.ndarray
    rewards: np.ndarray
    total_reward: int = 0
    total_payment: float = 0.0
    incentivized_steps: int = 0

    @classmethod
    def fresh(cls, m: int) -> "EnvState":
        return cls(t=0, pulls=np.zeros(m, dtype=np.int64), rewards=np.zeros(m, dtype=np.int64))

    def sample_means(self) -> np.ndarray:
        """Empirical means ``S_a / T_a``; ``nan`` for arms never pulled."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.pulls > 0, self.rewards / np.maximum(self.pulls, 1), np.nan)

    def copy(self) -> "EnvState":
        return EnvState(
            self.t,
            self.pulls.copy(),
            self.rewards.copy(),
            self.total_reward,
            self.total_payment,
            self.incentivized_steps,
        )


@dataclass(frozen=True)
class StepOutcome:
    pulled_arm: int
    reward: int
    incentivized_arm: int | None
    payment_charged: float


# ---------------------------------------------------------------------------
# Operations


def preference_rates(state: EnvState, instance: BanditInstance) -> np.ndarray:
    """Probability that the next user pulls each arm, before any incentive."""
    if len(state.rewards) != instance.m:
        raise ArgumentError(f"state has {len(state.rewards)} arms, instance has {instance.m}")
    F = instance.feedback
    weights = []
    total = 0.0
    for a, (s, theta) in enumerate(zip(state.rewards.tolist(), instance.biases)):
        try:
            w = F(s + theta)
        except (OverflowError, ValueError):
            w = math.inf
        if not (math.isfinite(w) and w > 0):
            raise EvaluationError(f"feedback evaluated to {w!r} for arm {a}", arm=a)
        weights.append(w)
        total += w
    if not math.isfinite(total):
        raise EvaluationError("sum of feedback values overflowed", arm=int(np.argmax(weights)))
    return np.array([w / total for w in weights])


def apply_incentive(rates: Sequence[float], target: int, g: float) -> np.ndarray:
    """Tilt ``rates`` toward ``target`` with impact ``g``."""
    rates = np.asarray(rates, dtype=float)
    if g < 0:
        raise ArgumentError(f"impact must be nonnegative, got {g}")
    if not 0 <= target < len(rates):
        raise ArgumentError(f"target arm {target} out of range for {len(rates)} arms")
    if abs(rates.sum() - 1.0) > 1e-9:
        raise ArgumentError("rates must sum to one")
    out = rates / (1.0 + g)
    out[target] = (rates[target] + g) / (1.0 + g)
    return out


def _categorical(rates: Sequence[float], u: float) -> int:
    acc = 0.0
    for i, r in enumerate(rates):
        acc += r
        if u < acc:
            return i
    return len(rates) - 1


def step(
    state: EnvState,
    instance: BanditInstance,
    decision: "PolicyDecision",
    rng: np.random.Generator,
) -> StepOutcome:
    """Advance ``state`` by one user arrival, in place.

    Draw order on ``rng`` is fixed: one uniform for the arm choice (skipped
    when the decision forces an arm), then one for the Bernoulli reward.
    """
    m = instance.m
    target = decision.incentivized_arm
    forced = getattr(decision, "forced_arm", None)
    charged = 0.0
    if forced is not None:
        if not 0 <= forced < m:
            raise ArgumentError(f"forced arm {forced} out of range")
        pulled = int(forced)
        target = None
    else:
        rates = preference_rates(state, instance)
        if target is not None:
            if not 0 <= target < m:
                raise ArgumentError(f"incentivized arm {target} out of range")
            g = instance.impact(decision.payment, state.t + 1)
            rates = apply_incentive(rates, target, g)
            charged = float(decision.payment)
        pulled = _categorical(rates.tolist(), rng.random())
    reward = 1 if rng.random() < instance.means[pulled] else 0

    state.t += 1
    state.pulls[pulled] += 1
    state.rewards[pulled] += reward
    state.total_reward += reward
    if target is not None:
        state.total_payment += charged
        state.incentivized_steps += 1
    return StepOutcome(pulled, reward, target, charged)


def pseudo_regret(state: EnvState, instance: BanditInstance) -> float:
    """``mu* t - Gamma_t`` for one trajectory.

    Can be negative on a lucky run; it is reported as is so that averages over
    trials stay unbiased.
    """
    return instance.best_mean * state.t - state.total_reward
