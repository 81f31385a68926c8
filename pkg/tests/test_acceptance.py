"""Acceptance criteria, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict with the measured numbers;
``conftest.py`` prints the collected lines at the end of the session.
"""

import json
import math
import time

import numpy as np
import pytest

from urnbandit.bounds import BoundInputs, thm1_payment, thm1_regret_main, thm2_payment, thm2_regret
from urnbandit.cli import main as cli_main
from urnbandit.config import preset_documents, resolve
from urnbandit.dynamics import BanditInstance, EnvState, Polynomial, apply_incentive, preference_rates, step
from urnbandit.embedding import (
    attraction_study,
    exact_prefix_distribution,
    prefix_distribution,
    sample_direct_prefixes,
    sample_embedded_prefixes,
    total_variation,
)
from urnbandit.harness import ExperimentConfig, PolicySpec, default_checkpoints, run_experiment, trial_rng
from urnbandit.policies import Phase, PolicyDecision, make_policy

VERDICTS: list[str] = []
TRIALS = 200
SEED = 0


def verdict(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    VERDICTS.append(line)
    print(line)
    assert ok, line


def checkpoints_with(T: int, *extra: int) -> tuple[int, ...]:
    return tuple(sorted(set(default_checkpoints(T)) | set(extra)))


def run_preset(doc: dict, T: int, trials: int, policies=None, extra_cps=(1000,)):
    res = resolve(doc, seed_override=SEED, trials_override=trials)
    cps = checkpoints_with(T, *[c for c in extra_cps if c < T])
    out = {}
    for spec in res.policies:
        if policies is None or spec.name in policies:
            cfg = ExperimentConfig(res.instance, spec, T, trials, cps, SEED)
            out[spec.name] = run_experiment(cfg, workers=4)
    return res, out


# ---------------------------------------------------------------- 1


def test_criterion_1_invariant_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    counts = dict(rates=0, incentive=0, steps=0, ucb_steps=0, post_tau_s=0, dominance=0)

    # preference rates and incentive transform
    for _ in range(10_000):
        m = int(rng.integers(2, 9))
        inst = BanditInstance(
            tuple(np.sort(rng.uniform(0.01, 1, m))), tuple(rng.uniform(0.1, 200, m)), Polynomial(float(rng.uniform(0.1, 3)))
        )
        rewards = rng.integers(0, 10_000, m)
        lam = preference_rates(EnvState(int(rewards.sum()), rewards.copy(), rewards, int(rewards.sum())), inst)
        assert abs(lam.sum() - 1) <= 1e-12 and np.all(lam > 0)
        counts["rates"] += 1
        target = int(rng.integers(m))
        out = apply_incentive(lam, target, float(rng.exponential(5)))
        assert abs(out.sum() - 1) <= 1e-12
        others = [i for i in range(m) if i != target]
        assert np.argmax(out[others]) == np.argmax(lam[others])
        counts["incentive"] += 1

    # trajectories: counting, UCB-List set dynamics, dominance and zero payment after tau_s
    for run in range(80):
        m = int(rng.integers(2, 4))
        means = tuple(np.sort(rng.choice(np.linspace(0.05, 0.95, 19), m, replace=False)))
        inst = BanditInstance(means, tuple(rng.uniform(1, 20, m)), Polynomial(float(rng.uniform(0.5, 2.5))))
        name = "ucb_list" if run % 2 else "alnetc"
        T = 250
        pol = make_policy(name, inst, T, payment=1.0, q=0.5)
        env = EnvState.fresh(m)
        g = trial_rng(run, 0)
        prev_active = set(range(m))
        paid_at_tau_s = None
        for _ in range(T):
            d = pol.decide(env, g)
            if name == "ucb_list" and pol.phase is not Phase.INITIALIZATION:
                active = pol.state.active
                assert active <= prev_active
                assert d.incentivized_arm is None or d.incentivized_arm in active
                prev_active = set(active)
                counts["ucb_steps"] += 1
            if pol.tau_s is not None:
                if paid_at_tau_s is None:
                    a = pol.identified_arm
                    assert env.t == pol.tau_s
                    assert env.rewards[a] >= env.rewards.sum() - env.rewards[a]
                    paid_at_tau_s = env.total_payment
                    counts["dominance"] += 1
                assert d.payment == 0
            step(env, inst, d, g)
            if paid_at_tau_s is not None:
                assert env.total_payment == paid_at_tau_s
                counts["post_tau_s"] += 1
            assert env.t == env.pulls.sum() and env.total_reward == env.rewards.sum()
            assert np.all(env.rewards <= env.pulls)
            counts["steps"] += 1
    elapsed = time.perf_counter() - t0
    ok = counts["rates"] >= 10_000 and counts["incentive"] >= 10_000 and counts["steps"] >= 10_000
    ok = ok and counts["dominance"] > 0 and elapsed < 10
    verdict(1, "invariant suite", ok, f"cases {counts}, {elapsed:.1f}s (limit 10s)")


# ---------------------------------------------------------------- 2


def test_criterion_2_embedding_equivalence():
    t0 = time.perf_counter()
    inst = BanditInstance((0.5, 0.5), (1.0, 2.0), Polynomial(2.0), allow_ties=True)
    rng = np.random.default_rng(SEED)
    exact = exact_prefix_distribution(inst, 3)
    emb = prefix_distribution(sample_embedded_prefixes(inst, 3, 100_000, rng), 2)
    dire = prefix_distribution(sample_direct_prefixes(inst, 3, 100_000, rng), 2)
    tv_e, tv_d = total_variation(emb, exact), total_variation(dire, exact)
    p0 = exact.reshape(2, -1).sum(axis=1)[0]
    elapsed = time.perf_counter() - t0
    ok = tv_e <= 0.02 and tv_d <= 0.02 and abs(p0 - 0.2) < 1e-12 and elapsed < 30
    verdict(2, "embedding equivalence", ok, f"TV embedded {tv_e:.4f}, direct {tv_d:.4f}, exact P(first=0) {p0:.6f}, {elapsed:.1f}s")


# ---------------------------------------------------------------- 3


def test_criterion_3_monopoly_regime():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    sym = lambda a: BanditInstance((0.5, 0.5), (1.0, 1.0), Polynomial(a), allow_ties=True)  # noqa: E731
    w2, _ = attraction_study(sym(2.0), 50, 10_000, 1000, rng)
    w05, _ = attraction_study(sym(0.5), 50, 10_000, 1000, rng)
    cens2, cens05 = np.mean(w2 < 0), np.mean(w05 < 0)
    split = np.mean(w2[w2 >= 0] == 0)
    elapsed = time.perf_counter() - t0
    ok = cens2 <= 0.01 and abs(split - 0.5) <= 0.04 and cens05 >= 0.5 and elapsed < 60
    verdict(
        3, "monopoly regime", ok,
        f"alpha=2 censored {cens2:.3f}, arm-0 share {split:.3f}; alpha=0.5 censored {cens05:.3f}; {elapsed:.1f}s",
    )


# ---------------------------------------------------------------- 4, 5


@pytest.fixture(scope="module")
def fig1_runs():
    t0 = time.perf_counter()
    res, aggs = run_preset(preset_documents("fig1")[0], 10_000, TRIALS)
    return res, aggs, time.perf_counter() - t0


def test_criterion_4_fig1_shape(fig1_runs):
    _, aggs, elapsed = fig1_runs
    none = aggs["none"].at(10_000)
    se_none = none["std_regret"] / math.sqrt(TRIALS)
    etc = aggs["alnetc"]
    r3, r4 = etc.at(1000)["mean_regret"], etc.at(10_000)["mean_regret"]
    ratio = r4 / r3
    ok_none = none["mean_regret"] + 3 * se_none >= 0.10 * 10_000
    ok = ok_none and ratio <= 3 and elapsed < 60
    verdict(
        4, "fig1 shape", ok,
        f"none regret(1e4) {none['mean_regret']:.1f} (need >= 1000, se {se_none:.1f}); "
        f"alnetc regret(1e3) {r3:.1f}, regret(1e4) {r4:.1f}, ratio {ratio:.2f} (need <= 3); {elapsed:.1f}s",
    )


def test_criterion_5_identification(fig1_runs):
    _, aggs, _ = fig1_runs
    etc = aggs["alnetc"]
    correct = etc.n_identified - etc.n_misidentified
    ok = correct >= 0.95 * TRIALS
    verdict(5, "identification", ok, f"correct {correct}/{TRIALS} (identified {etc.n_identified})")


# ---------------------------------------------------------------- 6


def test_criterion_6_dominance_scaling():
    t0 = time.perf_counter()
    doc = preset_documents("fig1")[0]
    res = resolve(doc, seed_override=SEED)
    spec = next(p for p in res.policies if p.name == "alnetc")
    taus, cens = {}, {}
    for T in (1000, 10_000, 100_000):
        agg = run_experiment(ExperimentConfig(res.instance, spec, T, 100, None, SEED), workers=4)
        taus[T], cens[T] = agg.mean_tau_s, agg.censored_fraction
    ratio = taus[100_000] / taus[1000]
    elapsed = time.perf_counter() - t0
    ok = ratio <= 2.5 and all(c <= 0.05 for c in cens.values()) and elapsed < 300
    verdict(
        6, "dominance-time scaling", ok,
        f"mean tau_s {', '.join(f'T={T}: {v:.1f}' for T, v in taus.items())}; ratio {ratio:.2f} (need <= 2.5); "
        f"censored {list(cens.values())}; {elapsed:.1f}s",
    )


# ---------------------------------------------------------------- 7


def test_criterion_7_bound_consistency(fig1_runs):
    E = math.e
    two = BanditInstance((0.3, 0.5), (1.0, 1.0))
    hand = [
        (thm1_payment(BoundInputs(two, E, 1.0, 3.0, 15.0)), 200.0),
        (thm2_payment(BoundInputs(two, E, 1.0, 2.0)), 2020.0),
        (thm2_regret(BoundInputs(two, E, 1.0, 2.0)), 81.6),
    ]
    hand_ok = all(math.isclose(got, want, rel_tol=1e-12) for got, want in hand)

    checks = []
    res1, aggs1, _ = fig1_runs
    _, aggs2 = run_preset(preset_documents("fig2")[0], 10_000, TRIALS, policies={"alnetc", "ucb_list"})
    for preset, res, aggs in (("fig1", res1, aggs1), ("fig2", None, aggs2)):
        if res is None:
            res = resolve(preset_documents(preset)[0], seed_override=SEED)
        for spec in res.policies:
            if spec.name not in ("alnetc", "ucb_list"):
                continue
            inp = BoundInputs.from_instance(res.instance, 10_000, spec.payment, spec.q)
            if spec.name == "alnetc":
                bounds = {"regret": thm1_regret_main(inp), "payment": thm1_payment(inp)}
            else:
                bounds = {"regret": thm2_regret(inp), "payment": thm2_payment(inp)}
            stats = aggs[spec.name].at(10_000)
            for kind, bound in bounds.items():
                mean, se = stats[f"mean_{kind}"], stats[f"std_{kind}"] / math.sqrt(TRIALS)
                checks.append((f"{preset}/{spec.name}/{kind}", mean, se, bound, mean - 3 * se <= bound))
    ok = hand_ok and all(c[-1] for c in checks)
    detail = "; ".join(f"{n} {m:.1f}+-{s:.1f} vs {b:.1f}{'' if good else ' EXCEEDED'}" for n, m, s, b, good in checks)
    verdict(7, "bound consistency", ok, f"hand values {'ok' if hand_ok else 'WRONG'}; {detail}")


# ---------------------------------------------------------------- 8


def test_criterion_8_imperfect_conditions():
    doc = next(
        d for d in preset_documents("imperfect") if d["feedback"]["alpha"] == 0.2 and d["impact"]["value"] == 0.2
    )
    _, aggs = run_preset(doc, 10_000, TRIALS, policies={"alnetc"})
    etc = aggs["alnetc"]
    r3, r4 = etc.at(1000)["mean_regret"], etc.at(10_000)["mean_regret"]
    ratio = r4 / r3
    verdict(8, "imperfect conditions", ratio >= 5, f"alnetc regret(1e3) {r3:.1f}, regret(1e4) {r4:.1f}, ratio {ratio:.2f} (need >= 5)")


# ---------------------------------------------------------------- 9


def test_criterion_9_determinism(tmp_path, monkeypatch):
    monkeypatch.delenv("URNBANDIT_SEED", raising=False)
    doc = preset_documents("fig2")[0]
    doc["run"].update(T=3000, trials=24, seed=12345)
    cfg = tmp_path / "fig2.json"
    cfg.write_text(json.dumps(doc))
    outputs = []
    for i, workers in enumerate((1, 1, 2, 5)):
        out = tmp_path / f"run{i}.csv"
        assert cli_main(["simulate", str(cfg), "-o", str(out), "--workers", str(workers)]) == 0
        outputs.append(out.read_bytes())
    same = all(o == outputs[0] for o in outputs)
    verdict(9, "determinism and merge", same, f"{len(outputs)} runs (workers 1, 1, 2, 5) byte-identical: {same}")
