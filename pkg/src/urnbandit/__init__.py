"""Incentivized multi-armed bandits with self-reinforcing user preferences."""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    BanditInstance,
    ConstantImpact,
    EnvState,
    PaymentLinearImpact,
    Polynomial,
    UserFeedback,
    UserImpact,
    apply_incentive,
    preference_rates,
    pseudo_regret,
    step,
)
from .errors import ArgumentError, ConfigError, DomainError, EvaluationError  # noqa: E402
from .harness import ExperimentConfig, PolicySpec, merge, run_experiment, run_trial  # noqa: E402
from .policies import Phase, PolicyDecision  # noqa: E402
