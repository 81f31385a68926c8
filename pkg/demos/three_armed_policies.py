"""
ETC versus UCB-List on three arms
=================================

Means 0.2, 0.4 and 0.6 with biases 10, 10 and 1.  Both policies pay for
exploration and then for dominance of the arm they pick; UCB-List stops
exploring an arm as soon as its confidence interval falls below another's.

The fig3 to fig5 presets vary one setting each: a steeper feedback
exponent, heavier biases on the bad arms, and a larger payment.
"""

from urnbandit.config import preset_documents, resolve
from urnbandit.harness import ExperimentConfig, run_experiment

TRIALS = 100
VARIANTS = {
    "fig2": "baseline",
    "fig3": "alpha = 2",
    "fig4": "biases 50, 50, 1",
    "fig5": "payment 1.8",
}

print(f"{'setting':<20}{'policy':<10}{'regret':>10}{'payment':>10}{'tau_s':>8}")
for name, title in VARIANTS.items():
    res = resolve(preset_documents(name)[0], trials_override=TRIALS)
    for spec in res.policies:
        cfg = ExperimentConfig(res.instance, spec, res.horizon, TRIALS, None, res.seed)
        agg = run_experiment(cfg, workers=4)
        print(
            f"{title:<20}{spec.name:<10}{agg.mean_regret[-1]:10.1f}{agg.mean_payment[-1]:10.1f}"
            f"{agg.mean_tau_s or float('nan'):8.0f}"
        )
