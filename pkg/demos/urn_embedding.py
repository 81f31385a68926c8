"""
The reward order as a race of exponential clocks
================================================

Without incentives, the order in which arms produce rewards has the same law
as a race of per-arm exponential clocks whose rates are ``mu_i F(n + theta_i)``.
We compare three views of the first three rewards: the clock race, the
discrete user process, and the exact product formula.

Then we watch the urn for monopoly: with ``F(x) = x**2`` one arm soon takes
every reward, while with ``F(x) = x**0.5`` the shares stay mixed.
"""

import numpy as np

from urnbandit.dynamics import BanditInstance, Polynomial
from urnbandit.embedding import (
    attraction_study,
    classify_regime,
    exact_prefix_distribution,
    prefix_distribution,
    sample_direct_prefixes,
    sample_embedded_prefixes,
    total_variation,
)

rng = np.random.default_rng(0)
inst = BanditInstance((0.5, 0.5), (1.0, 2.0), Polynomial(2.0), allow_ties=True)

exact = exact_prefix_distribution(inst, 3)
race = prefix_distribution(sample_embedded_prefixes(inst, 3, 100_000, rng), 2)
direct = prefix_distribution(sample_direct_prefixes(inst, 3, 100_000, rng), 2)

print("prefix   exact    clocks   direct")
for code in range(8):
    label = format(code, "03b")
    print(f"{label}    {exact[code]:.4f}   {race[code]:.4f}   {direct[code]:.4f}")
print(f"TV clocks/exact {total_variation(race, exact):.4f}, direct/exact {total_variation(direct, exact):.4f}")

# %%
# A run of 50 rewards in a row from one arm is our finite stand-in for
# monopoly.  Runs that never see one within 10^4 rewards are censored.

for alpha in (2.0, 1.0, 0.5):
    sym = BanditInstance((0.5, 0.5), (1.0, 1.0), Polynomial(alpha), allow_ties=True)
    winners, starts = attraction_study(sym, 50, 10_000, 1000, rng)
    done = winners >= 0
    share = np.mean(winners[done] == 0) if done.any() else float("nan")
    median = np.median(starts[done]) if done.any() else float("nan")
    print(
        f"alpha {alpha}: {classify_regime(alpha).value:<21} censored {np.mean(~done):.3f}  "
        f"arm-0 wins {share:.3f}  median start {median}"
    )
