"""Seeded Monte Carlo runner.

Trial ``i`` of an experiment with base seed ``s`` draws from
``PCG64(SeedSequence(s, spawn_key=(i,)))``, so every trial is a pure function
of ``(config, i)`` and trials can run in any order on any number of workers.
Streams are reproducible within this package and numpy's PCG64; they are not
meant to match other implementations.

Aggregation is exact: per-checkpoint sums and sums of squares are kept as
integers scaled by ``2**1074`` (every finite double is an integer multiple of
``2**-1074``), so pooled means and standard deviations do not depend on how
the trials were partitioned or in which order partial results are merged.
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernel
from .dynamics import BanditInstance, ConstantImpact, EnvState, PaymentLinearImpact, Polynomial, step
from .errors import ArgumentError, EvaluationError
from .policies import POLICY_NAMES, make_policy

__all__ = [
    "PolicySpec",
    "ExperimentConfig",
    "TrialRecord",
    "AggregateResult",
    "default_checkpoints",
    "trial_rng",
    "run_trial",
    "run_experiment",
    "merge",
]

_SCALE = 1074


def default_checkpoints(horizon: int, count: int = 50) -> tuple[int, ...]:
    """Up to ``count`` log-spaced steps in ``[1, horizon]``, always ending at ``horizon``."""
    pts = np.unique(np.round(np.logspace(0, math.log10(horizon), count)).astype(np.int64))
    pts = pts[(pts >= 1) & (pts <= horizon)]
    if pts[-1] != horizon:
        pts = np.append(pts, horizon)
    return tuple(int(p) for p in pts)


@dataclass(frozen=True)
class PolicySpec:
    name: str
    payment: float = 1.0
    q: float = 15.0
    label: str | None = None

    def __post_init__(self):
        if self.name not in POLICY_NAMES:
            raise ArgumentError(f"unknown policy {self.name!r}; expected one of {', '.join(POLICY_NAMES)}")

    @property
    def display(self) -> str:
        return self.label or self.name


@dataclass(frozen=True)
class ExperimentConfig:
    instance: BanditInstance
    policy: PolicySpec
    horizon: int
    trials: int = 200
    checkpoints: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 2:
            raise ArgumentError("horizon must be at least 2")
        if self.trials < 1:
            raise ArgumentError("need at least one trial")
        if not self.instance.has_unique_best:
            raise ArgumentError("experiments need a unique best arm")
        if not 0 <= self.seed < 2**64:
            raise ArgumentError("seed must be an unsigned 64-bit integer")
        cps = default_checkpoints(self.horizon) if self.checkpoints is None else tuple(int(c) for c in self.checkpoints)
        if not cps or any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 1:
            raise ArgumentError("checkpoints must be strictly increasing positive steps")
        if cps[-1] != self.horizon:
            raise ArgumentError("the last checkpoint must equal the horizon")
        object.__setattr__(self, "checkpoints", cps)


@dataclass(frozen=True)
class TrialRecord:
    checkpoints: tuple[int, ...]
    regret: tuple[float, ...]
    payment: tuple[float, ...]
    tau_first: int | None
    """Exploration end: ``tau_n`` for the ETC policies, ``tau_1`` for UCB-List."""
    tau_s: int | None
    censored: bool
    identified_arm: int | None
    correct_identification: bool
    incentivized_steps: int


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial_index,))))


def _fast_path_supported(instance: BanditInstance) -> bool:
    return isinstance(instance.feedback, Polynomial) and isinstance(
        instance.impact, (ConstantImpact, PaymentLinearImpact)
    )


def _threshold(config: ExperimentConfig) -> int:
    return math.ceil(config.policy.q * math.log(config.horizon))


def _run_fast(config: ExperimentConfig, rng: np.random.Generator) -> TrialRecord:
    inst = config.instance
    spec = config.policy
    g = inst.impact(spec.payment, 1)
    status, arm, regret, paid, tau_first, tau_s, ident, inc = _kernel.simulate(
        _kernel.POLICY_CODES[spec.name],
        np.asarray(inst.means, dtype=float),
        np.asarray(inst.biases, dtype=float),
        float(inst.feedback.coefficient),
        float(inst.feedback.alpha),
        float(g),
        float(spec.payment),
        int(config.horizon),
        _threshold(config) if spec.name in ("alnetc", "explore_only") else 0,
        np.asarray(config.checkpoints, dtype=np.int64),
        rng,
    )
    if status != _kernel.OK:
        raise EvaluationError(f"feedback evaluation failed for arm {arm}", arm=arm)
    has_dom = spec.name in ("alnetc", "explore_only", "ucb_list")
    ident = None if ident < 0 else int(ident)
    return TrialRecord(
        checkpoints=config.checkpoints,
        regret=tuple(regret.tolist()),
        payment=tuple(paid.tolist()),
        tau_first=None if tau_first < 0 else int(tau_first),
        tau_s=None if tau_s < 0 else int(tau_s),
        censored=has_dom and tau_s < 0,
        identified_arm=ident,
        correct_identification=ident == inst.best_arm,
        incentivized_steps=int(inc),
    )


def _run_reference(config: ExperimentConfig, rng: np.random.Generator) -> TrialRecord:
    inst = config.instance
    spec = config.policy
    policy = make_policy(spec.name, inst, config.horizon, spec.payment, spec.q)
    state = EnvState.fresh(inst.m)
    regret, paid = [], []
    cps = config.checkpoints
    ci = 0
    for _ in range(config.horizon):
        step(state, inst, policy.decide(state, rng), rng)
        if ci < len(cps) and state.t == cps[ci]:
            regret.append(inst.best_mean * state.t - state.total_reward)
            paid.append(state.total_payment)
            ci += 1
    ident = policy.identified_arm
    return TrialRecord(
        checkpoints=cps,
        regret=tuple(float(r) for r in regret),
        payment=tuple(float(p) for p in paid),
        tau_first=policy.tau_first,
        tau_s=policy.tau_s,
        censored=policy.censored,
        identified_arm=ident,
        correct_identification=ident == inst.best_arm,
        incentivized_steps=state.incentivized_steps,
    )


def run_trial(config: ExperimentConfig, trial_index: int, engine: str = "auto") -> TrialRecord:
    """Run one trial from ``t = 0`` to the horizon.

    ``engine`` is ``"fast"`` (compiled kernel), ``"reference"`` (the pure
    Python step loop) or ``"auto"``, which uses the kernel whenever the
    feedback is polynomial and the impact is time-invariant.  Both engines give
    identical records.
    """
    if not 0 <= trial_index < config.trials:
        raise ArgumentError(f"trial index {trial_index} outside [0, {config.trials})")
    rng = trial_rng(config.seed, trial_index)
    if engine == "auto":
        engine = "fast" if _fast_path_supported(config.instance) else "reference"
    if engine == "fast":
        if not _fast_path_supported(config.instance):
            raise ArgumentError("the compiled engine needs polynomial feedback and constant or linear impact")
        return _run_fast(config, rng)
    if engine == "reference":
        return _run_reference(config, rng)
    raise ArgumentError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------------------
# Aggregation


def _scaled(x: float) -> int:
    num, den = float(x).as_integer_ratio()
    return num * ((1 << _SCALE) // den)


@dataclass(frozen=True)
class AggregateResult:
    """Per-checkpoint statistics over a set of trials.

    Carries the exact running sums it was built from, so partial results can
    be combined with :func:`merge`.
    """

    checkpoints: tuple[int, ...]
    n_trials: int
    regret_sum: tuple[int, ...]
    regret_sumsq: tuple[int, ...]
    payment_sum: tuple[int, ...]
    payment_sumsq: tuple[int, ...]
    n_identified: int = 0
    n_misidentified: int = 0
    n_censored: int = 0
    tau_s_values: tuple[int, ...] = field(default=())

    @classmethod
    def from_records(cls, records: Iterable[TrialRecord]) -> "AggregateResult":
        records = list(records)
        if not records:
            raise ArgumentError("no trial records to aggregate")
        cps = records[0].checkpoints
        k = len(cps)
        rs, rq, ps, pq = [0] * k, [0] * k, [0] * k, [0] * k
        for rec in records:
            if rec.checkpoints != cps:
                raise ArgumentError("trial records use different checkpoint schedules")
            for j in range(k):
                r = _scaled(rec.regret[j])
                p = _scaled(rec.payment[j])
                rs[j] += r
                rq[j] += r * r
                ps[j] += p
                pq[j] += p * p
        identified = [r for r in records if r.identified_arm is not None]
        return cls(
            checkpoints=cps,
            n_trials=len(records),
            regret_sum=tuple(rs),
            regret_sumsq=tuple(rq),
            payment_sum=tuple(ps),
            payment_sumsq=tuple(pq),
            n_identified=len(identified),
            n_misidentified=sum(1 for r in identified if not r.correct_identification),
            n_censored=sum(1 for r in records if r.censored),
            tau_s_values=tuple(sorted(r.tau_s for r in records if r.tau_s is not None)),
        )

    def _mean(self, sums) -> np.ndarray:
        return np.array([float(Fraction(s, self.n_trials << _SCALE)) for s in sums])

    def _std(self, sums, sumsqs) -> np.ndarray:
        n = self.n_trials
        if n < 2:
            return np.zeros(len(sums))
        out = []
        for s, q in zip(sums, sumsqs):
            var = Fraction(n * q - s * s, n * (n - 1) << (2 * _SCALE))
            out.append(math.sqrt(float(var)))
        return np.array(out)

    @property
    def mean_regret(self) -> np.ndarray:
        return self._mean(self.regret_sum)

    @property
    def std_regret(self) -> np.ndarray:
        """Sample standard deviation (``n - 1`` denominator); zero for one trial."""
        return self._std(self.regret_sum, self.regret_sumsq)

    @property
    def mean_payment(self) -> np.ndarray:
        return self._mean(self.payment_sum)

    @property
    def std_payment(self) -> np.ndarray:
        return self._std(self.payment_sum, self.payment_sumsq)

    @property
    def misidentification_rate(self) -> float | None:
        """Share of identified arms that were not the best arm; ``None`` if nothing was identified."""
        if self.n_identified == 0:
            return None
        return self.n_misidentified / self.n_identified

    @property
    def censored_fraction(self) -> float:
        return self.n_censored / self.n_trials

    @property
    def mean_tau_s(self) -> float | None:
        return math.fsum(self.tau_s_values) / len(self.tau_s_values) if self.tau_s_values else None

    @property
    def median_tau_s(self) -> float | None:
        return float(statistics.median(self.tau_s_values)) if self.tau_s_values else None

    def at(self, t: int) -> dict:
        """Statistics at checkpoint ``t``."""
        j = self.checkpoints.index(t)
        return {
            "mean_regret": float(self.mean_regret[j]),
            "std_regret": float(self.std_regret[j]),
            "mean_payment": float(self.mean_payment[j]),
            "std_payment": float(self.std_payment[j]),
        }

    def summary(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "misidentification_rate": self.misidentification_rate,
            "censored_fraction": self.censored_fraction,
            "mean_tau_s": self.mean_tau_s,
            "median_tau_s": self.median_tau_s,
        }


def merge(partials: Sequence[AggregateResult]) -> AggregateResult:
    """Pool partial aggregates; exact, so associative and commutative."""
    if not partials:
        raise ArgumentError("nothing to merge")
    cps = partials[0].checkpoints
    for p in partials:
        if p.checkpoints != cps:
            raise ArgumentError("cannot merge results with different checkpoint schedules")

    def add(attr):
        return tuple(sum(col) for col in zip(*(getattr(p, attr) for p in partials)))

    return AggregateResult(
        checkpoints=cps,
        n_trials=sum(p.n_trials for p in partials),
        regret_sum=add("regret_sum"),
        regret_sumsq=add("regret_sumsq"),
        payment_sum=add("payment_sum"),
        payment_sumsq=add("payment_sumsq"),
        n_identified=sum(p.n_identified for p in partials),
        n_misidentified=sum(p.n_misidentified for p in partials),
        n_censored=sum(p.n_censored for p in partials),
        tau_s_values=tuple(sorted(v for p in partials for v in p.tau_s_values)),
    )


def run_trials(config: ExperimentConfig, indices: Iterable[int], engine: str = "auto") -> list[TrialRecord]:
    return [run_trial(config, i, engine) for i in indices]


def run_experiment(config: ExperimentConfig, workers: int = 1, engine: str = "auto") -> AggregateResult:
    """Run every trial of ``config`` and aggregate.

    Trials are split into ``workers`` interleaved chunks run on threads (the
    compiled kernel releases the GIL); the result does not depend on
    ``workers``.
    """
    if workers < 1:
        raise ArgumentError("workers must be >= 1")
    if workers == 1 or config.trials == 1:
        return AggregateResult.from_records(run_trials(config, range(config.trials), engine))
    chunks = [range(w, config.trials, workers) for w in range(workers)]
    chunks = [c for c in chunks if len(c)]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        partials = list(pool.map(lambda c: AggregateResult.from_records(run_trials(config, c, engine)), chunks))
    return merge(partials)
