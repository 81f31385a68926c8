"""Closed-form upper bounds on regret, payment and phase lengths.

All evaluators take a constant incentive impact ``G > 1``; the asymptotically
vanishing remainder of the ETC regret bound is not included, so
:func:`alnetc_regret_bound` is the leading term only.

The ETC regret term is evaluated as (other published forms place ``mu_a``
and ``Delta_max`` differently; this one is used throughout):

    sum_a 2 (G - L) Delta_max / ((G - 1) mu_a) * q ln T,
    L = F(n + theta_best) / sum_i F(mu* T + theta_i),  n = ceil(q ln T).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .dynamics import BanditInstance, ConstantImpact, PaymentLinearImpact
from .errors import DomainError

__all__ = [
    "BoundInputs",
    "ExplorationConditionWarning",
    "min_exploration_q",
    "alnetc_regret_bound",
    "alnetc_payment_bound",
    "ucblist_regret_bound",
    "ucblist_payment_bound",
    "tau_bounds",
    "thm1_regret_main",
    "thm1_payment",
    "thm2_regret",
    "thm2_payment",
]


class ExplorationConditionWarning(UserWarning):
    """``q`` is below ``2 max_{a != a*} mu_a / Delta_min**2``; the ETC bound is not guaranteed."""


@dataclass(frozen=True)
class BoundInputs:
    instance: BanditInstance
    horizon: float
    payment: float
    impact: float
    q: float | None = None

    def __post_init__(self):
        if not self.impact > 1:
            raise DomainError(f"bounds require incentive impact G > 1, got G = {self.impact}")
        if not self.horizon >= 2:
            raise DomainError("horizon must be at least 2")
        if not self.payment > 0:
            raise DomainError("payment must be positive")
        if self.q is not None and not self.q > 0:
            raise DomainError("q must be positive")
        if not self.instance.has_unique_best:
            raise DomainError("bounds need a unique best arm")

    @classmethod
    def from_instance(cls, instance: BanditInstance, horizon: float, payment: float, q: float | None = None):
        """Read ``G`` off the instance's impact function (must be time-invariant)."""
        imp = instance.impact
        if isinstance(imp, PaymentLinearImpact):
            g = float(payment)
        elif isinstance(imp, ConstantImpact):
            g = imp.value
        else:
            raise DomainError("bounds are only defined for a constant incentive impact")
        return cls(instance, horizon, payment, g, q)

    @property
    def log_t(self) -> float:
        return math.log(self.horizon)

    def _need_q(self) -> float:
        if self.q is None:
            raise DomainError("this bound needs the exploration multiplier q")
        return self.q


def min_exploration_q(instance: BanditInstance) -> float:
    """Smallest ``q`` for which the ETC guarantees apply."""
    best = instance.best_arm
    top_other = max(mu for a, mu in enumerate(instance.means) if a != best)
    return 2 * top_other / instance.gap_min**2


def _l_best(inp: BoundInputs) -> float:
    inst = inp.instance
    n = math.ceil(inp._need_q() * inp.log_t)
    F = inst.feedback
    denom = math.fsum(F(inst.best_mean * inp.horizon + th) for th in inst.biases)
    return F(n + inst.biases[inst.best_arm]) / denom


def alnetc_regret_bound(inp: BoundInputs, *, l_best: float | None = None) -> float:
    """Leading term of the expected-regret bound for at-least-n ETC.

    Warns with :class:`ExplorationConditionWarning` when ``q`` is too small for
    the bound to hold.  ``l_best`` overrides the computed ``L`` term.
    """
    inst = inp.instance
    q = inp._need_q()
    # relative slack so that q = 2 * 0.4 / 0.2**2 counts as meeting the condition
    if q < min_exploration_q(inst) * (1 - 1e-12):
        warnings.warn(
            f"q = {q} < {min_exploration_q(inst):.6g}; exploration may not identify the best arm",
            ExplorationConditionWarning,
            stacklevel=2,
        )
    G = inp.impact
    L = _l_best(inp) if l_best is None else l_best
    coef = 2 * (G - L) * inst.gap_max / (G - 1)
    return math.fsum(coef / mu for mu in inst.means) * q * inp.log_t


def alnetc_payment_bound(inp: BoundInputs) -> float:
    inst = inp.instance
    G, b = inp.impact, inp.payment
    s = math.fsum(1 / mu for a, mu in enumerate(inst.means) if a != inst.best_arm)
    return 2 * b * (G + 1) / (G - 1) * s * inp._need_q() * inp.log_t


def ucblist_regret_bound(inp: BoundInputs) -> float:
    inst = inp.instance
    G = inp.impact
    dmax = inst.gap_max
    terms = []
    for a, d in enumerate(inst.gaps):
        if a == inst.best_arm:
            continue
        terms.append((8 * d * (G - 1) + 8 * dmax) / ((G - 1) * d * d) * inp.log_t + 4 * d + 4 * dmax / (G - 1))
    return math.fsum(terms)


def ucblist_payment_bound(inp: BoundInputs) -> float:
    inst = inp.instance
    G, b, lt = inp.impact, inp.payment, inp.log_t
    inner = 8 * b * lt / inst.gap_min**2
    inner += math.fsum(8 * b * lt / d**2 + 4 * b for a, d in enumerate(inst.gaps) if a != inst.best_arm)
    return (2 * G + 1) / (G - 1) * inner


def tau_bounds(inp: BoundInputs) -> tuple[float, float]:
    """Bounds on the expected exploration length and on the dominance gap.

    Returns ``(n * sum_i (1 + G) / (G mu_i),  (tau_n_bound - 2 n / mu*) (G + 1) / (G - 1))``
    with ``n = ceil(q ln T)``.
    """
    inst = inp.instance
    G = inp.impact
    n = math.ceil(inp._need_q() * inp.log_t)
    tau_n = n * math.fsum((1 + G) / (G * mu) for mu in inst.means)
    gap = (tau_n - 2 * n / inst.best_mean) * (G + 1) / (G - 1)
    return tau_n, gap


# aliases matching the CLI output column names
thm1_regret_main = alnetc_regret_bound
thm1_payment = alnetc_payment_bound
thm2_regret = ucblist_regret_bound
thm2_payment = ucblist_payment_bound
