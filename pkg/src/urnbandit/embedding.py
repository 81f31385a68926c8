"""Continuous-time exponential embedding of the reward-generation order.

Without incentives, the order in which arms produce unit rewards can be
generated without simulating empty pulls: give arm ``i`` an exponential clock
with rate ``mu_i F(n + theta_i)`` where ``n`` is its current reward count,
fire the earliest clock, advance that arm's clock by a fresh exponential, and
repeat.  The resulting arm sequence has the same law as the one obtained by
stepping the discrete environment and keeping only steps that paid a reward.

This module provides both generators, the exact probability of any finite
prefix (a product of ``mu_i F(N_i + theta_i) / sum_j mu_j F(N_j + theta_j)``
factors), vectorised samplers for distribution checks, and a finite-sample
proxy for the onset of monopoly.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import BanditInstance, EnvState, step
from .errors import ArgumentError
from .policies import PolicyDecision

__all__ = [
    "Regime",
    "EmbeddedSequence",
    "AttractionOutcome",
    "classify_regime",
    "embedded_sequence",
    "direct_reward_sequence",
    "exact_sequence_probability",
    "exact_prefix_distribution",
    "sample_embedded_prefixes",
    "sample_direct_prefixes",
    "prefix_distribution",
    "total_variation",
    "estimate_attraction",
    "attraction_study",
    "MAX_EXACT_PREFIX",
]

MAX_EXACT_PREFIX = 20


class Regime(enum.Enum):
    MONOPOLY = "monopoly"
    POLYA_MIXING = "polya_mixing"
    DETERMINISTIC_SHARES = "deterministic_shares"


def classify_regime(alpha: float) -> Regime:
    """Long-run behaviour of the urn under ``F(x) = C x**alpha``.

    Superlinear feedback ends in a single arm taking everything, linear
    feedback behaves like a classical Polya urn with random limiting shares,
    and sublinear feedback settles on deterministic positive shares.
    """
    if not alpha > 0:
        raise ArgumentError(f"alpha must be positive, got {alpha}")
    if alpha > 1:
        return Regime.MONOPOLY
    if alpha == 1:
        return Regime.POLYA_MIXING
    return Regime.DETERMINISTIC_SHARES


@dataclass(frozen=True)
class EmbeddedSequence:
    indices: tuple[int, ...]
    event_times: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.event_times is not None:
            if len(self.event_times) != len(self.indices):
                raise ArgumentError("indices and event_times differ in length")
            if any(b <= a for a, b in zip(self.event_times, self.event_times[1:])):
                raise ArgumentError("event times must be strictly increasing")

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class AttractionOutcome:
    winner: int | None
    events_to_attraction: int | None
    """1-based index of the first event of the winning streak; ``None`` if censored."""

    @property
    def censored(self) -> bool:
        return self.events_to_attraction is None


def _rates(instance: BanditInstance, counts) -> np.ndarray:
    mu = np.asarray(instance.means)
    theta = np.asarray(instance.biases)
    return mu * instance.feedback(np.asarray(counts, dtype=float) + theta)


def _exp(rng: np.random.Generator, rate, size=None):
    # inverse CDF so the draw count per event is fixed
    return -np.log1p(-rng.random(size)) / rate


class _Clocks:
    """Lazy per-arm next-event clocks, one heap entry per arm."""

    def __init__(self, instance: BanditInstance, rng: np.random.Generator):
        self.instance = instance
        self.rng = rng
        self.counts = [0] * instance.m
        self.heap = []
        for i in range(instance.m):
            rate = instance.means[i] * instance.feedback(instance.biases[i])
            heapq.heappush(self.heap, (float(_exp(rng, rate)), i))

    def next(self) -> tuple[int, float]:
        when, i = heapq.heappop(self.heap)
        self.counts[i] += 1
        inst = self.instance
        rate = inst.means[i] * inst.feedback(self.counts[i] + inst.biases[i])
        heapq.heappush(self.heap, (when + float(_exp(self.rng, rate)), i))
        return i, when


def embedded_sequence(instance: BanditInstance, k: int, rng: np.random.Generator) -> EmbeddedSequence:
    """First ``k`` reward events of the embedding, with their clock times."""
    if k < 1:
        raise ArgumentError("k must be at least 1")
    clocks = _Clocks(instance, rng)
    idx, times = [], []
    for _ in range(k):
        i, when = clocks.next()
        idx.append(i)
        times.append(when)
    return EmbeddedSequence(tuple(idx), tuple(times))


def direct_reward_sequence(instance: BanditInstance, k: int, rng: np.random.Generator) -> EmbeddedSequence:
    """First ``k`` reward-producing arms from stepping the environment without incentives."""
    if k < 1:
        raise ArgumentError("k must be at least 1")
    state = EnvState.fresh(instance.m)
    idle = PolicyDecision.none()
    out = []
    while len(out) < k:
        res = step(state, instance, idle, rng)
        if res.reward:
            out.append(res.pulled_arm)
    return EmbeddedSequence(tuple(out))


def exact_sequence_probability(instance: BanditInstance, prefix: Sequence[int]) -> float:
    if len(prefix) > MAX_EXACT_PREFIX:
        raise ArgumentError(f"prefix longer than {MAX_EXACT_PREFIX} events")
    counts = np.zeros(instance.m)
    p = 1.0
    for arm in prefix:
        if not 0 <= arm < instance.m:
            raise ArgumentError(f"arm {arm} out of range")
        r = _rates(instance, counts)
        p *= r[arm] / r.sum()
        counts[arm] += 1
    return float(p)


def exact_prefix_distribution(instance: BanditInstance, k: int) -> np.ndarray:
    """Probabilities of all ``m**k`` prefixes, indexed by base-``m`` code (first arm most significant)."""
    if k > MAX_EXACT_PREFIX:
        raise ArgumentError(f"prefix longer than {MAX_EXACT_PREFIX} events")
    return np.array(
        [exact_sequence_probability(instance, pre) for pre in itertools.product(range(instance.m), repeat=k)]
    )


def sample_embedded_prefixes(instance: BanditInstance, k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent length-``k`` prefixes from the embedding, shape ``(n, k)``."""
    m = instance.m
    counts = np.zeros((n, m))
    clocks = _exp(rng, _rates(instance, counts), size=(n, m))
    out = np.empty((n, k), dtype=np.int64)
    rows = np.arange(n)
    for j in range(k):
        arm = np.argmin(clocks, axis=1)
        out[:, j] = arm
        counts[rows, arm] += 1
        rate = _rates(instance, counts)[rows, arm]
        clocks[rows, arm] += _exp(rng, rate, size=n)
    return out


def sample_direct_prefixes(instance: BanditInstance, k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent length-``k`` reward orders from the discrete process, shape ``(n, k)``.

    Vectorised over samples; same law as :func:`direct_reward_sequence`.
    """
    m = instance.m
    mu = np.asarray(instance.means)
    theta = np.asarray(instance.biases)
    rewards = np.zeros((n, m))
    filled = np.zeros(n, dtype=np.int64)
    out = np.empty((n, k), dtype=np.int64)
    live = np.arange(n)
    while live.size:
        w = instance.feedback(rewards[live] + theta)
        cdf = np.cumsum(w / w.sum(axis=1, keepdims=True), axis=1)
        u = rng.random(live.size)
        arm = np.minimum((u[:, None] >= cdf).sum(axis=1), m - 1)
        hit = rng.random(live.size) < mu[arm]
        rows, arms = live[hit], arm[hit]
        out[rows, filled[rows]] = arms
        rewards[rows, arms] += 1
        filled[rows] += 1
        live = live[filled[live] < k]
    return out


def prefix_distribution(samples: np.ndarray, m: int) -> np.ndarray:
    """Empirical distribution over the ``m**k`` prefixes, same indexing as :func:`exact_prefix_distribution`."""
    samples = np.asarray(samples)
    k = samples.shape[1]
    codes = samples @ (m ** np.arange(k - 1, -1, -1))
    return np.bincount(codes, minlength=m**k) / len(samples)


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def estimate_attraction(
    instance: BanditInstance, streak: int, event_cap: int, rng: np.random.Generator
) -> AttractionOutcome:
    """Run the embedding until one arm produces ``streak`` consecutive reward events.

    A finite stand-in for the (unobservable) time after which one arm takes
    every reward.  Gives up after ``event_cap`` events and reports a censored
    outcome.
    """
    if streak < 1 or event_cap < streak:
        raise ArgumentError("need 1 <= streak <= event_cap")
    clocks = _Clocks(instance, rng)
    run_arm, run_len, run_start = -1, 0, 0
    for j in range(1, event_cap + 1):
        i, _ = clocks.next()
        if i == run_arm:
            run_len += 1
        else:
            run_arm, run_len, run_start = i, 1, j
        if run_len >= streak:
            return AttractionOutcome(run_arm, run_start)
    return AttractionOutcome(None, None)


def attraction_study(
    instance: BanditInstance, streak: int, event_cap: int, runs: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`estimate_attraction` over ``runs`` independent runs.

    Returns ``(winners, start_events)``; censored runs carry ``-1`` in both.
    """
    if streak < 1 or event_cap < streak:
        raise ArgumentError("need 1 <= streak <= event_cap")
    m = instance.m
    counts = np.zeros((runs, m))
    clocks = _exp(rng, _rates(instance, counts), size=(runs, m))
    run_arm = np.full(runs, -1)
    run_len = np.zeros(runs, dtype=np.int64)
    run_start = np.zeros(runs, dtype=np.int64)
    winners = np.full(runs, -1)
    starts = np.full(runs, -1)
    live = np.arange(runs)
    for j in range(1, event_cap + 1):
        if not live.size:
            break
        arm = np.argmin(clocks[live], axis=1)
        same = arm == run_arm[live]
        run_len[live] = np.where(same, run_len[live] + 1, 1)
        run_start[live] = np.where(same, run_start[live], j)
        run_arm[live] = arm
        counts[live, arm] += 1
        rate = _rates(instance, counts[live])[np.arange(live.size), arm]
        clocks[live, arm] += _exp(rng, rate, size=live.size)
        done = run_len[live] >= streak
        winners[live[done]] = arm[done]
        starts[live[done]] = run_start[live[done]]
        live = live[~done]
    return winners, starts

