"""Command-line front end.

Subcommands::

    urnbandit simulate CONFIG --output results.csv
    urnbandit preset {fig1,fig2,fig3,fig4,fig5,imperfect} --output fig1.csv
    urnbandit bounds CONFIG --output bounds.csv
    urnbandit embed CONFIG --output embed.json

Every run also writes ``<output stem>.meta.json`` echoing the fully resolved
configuration.  The seed is taken from ``--seed`` if given, else from the
``URNBANDIT_SEED`` environment variable, else from ``run.seed`` in the
config.

Exit status: 0 on success, 2 for configuration errors, 3 for runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import BoundInputs, min_exploration_q, tau_bounds, thm1_payment, thm1_regret_main, thm2_payment, thm2_regret
from .config import DEFAULT_EMBED, DEFAULT_T_GRID, Resolved, load, preset_documents, resolve
from .embedding import (
    MAX_EXACT_PREFIX,
    attraction_study,
    classify_regime,
    exact_prefix_distribution,
    prefix_distribution,
    sample_direct_prefixes,
    sample_embedded_prefixes,
    total_variation,
)
from .errors import ConfigError, DomainError, EvaluationError
from .harness import run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

SIMULATE_COLUMNS = ["t", "policy", "mean_regret", "std_regret", "mean_payment", "std_payment", "n_trials"]
BOUNDS_COLUMNS = ["T", "thm1_regret_main", "thm1_payment", "thm2_regret", "thm2_payment", "tau_n_bound", "tau_gap_bound"]


def _num(x) -> str:
    # repr is locale-independent and round-trips
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    path.write_text(buf.getvalue(), newline="")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def sidecar_path(output: Path) -> Path:
    return output.with_name(output.stem + ".meta.json")


def _seed_override(args) -> tuple[int | None, str]:
    if args.seed is not None:
        return args.seed, "flag"
    env = os.environ.get("URNBANDIT_SEED")
    if env is not None and env.strip():
        try:
            return int(env), "env"
        except ValueError as exc:
            raise ConfigError("URNBANDIT_SEED", f"not an integer: {env!r}") from exc
    return None, "config"


def _run_documents(docs: list[dict], args, command: str, preset: str | None) -> int:
    seed, seed_source = _seed_override(args)
    resolved: list[Resolved] = [resolve(d, seed, args.trials, getattr(args, "horizon", None)) for d in docs]
    rows, runs = [], []
    for res in resolved:
        results = {}
        for cfg in res.experiments():
            agg = run_experiment(cfg, workers=args.workers)
            label = cfg.policy.display
            mr, sr, mp, sp = agg.mean_regret, agg.std_regret, agg.mean_payment, agg.std_payment
            for j, t in enumerate(agg.checkpoints):
                rows.append([t, label, mr[j], sr[j], mp[j], sp[j], agg.n_trials])
            results[label] = agg.summary()
        runs.append({"config": res.doc, "results": results})
    out = Path(args.output)
    if args.format == "json":
        _write_json(out, [dict(zip(SIMULATE_COLUMNS, r)) for r in rows])
    else:
        _write_csv(out, SIMULATE_COLUMNS, rows)
    _write_json(
        sidecar_path(out),
        {"command": command, "preset": preset, "seed_source": seed_source, "version": __version__, "runs": runs},
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    return _run_documents([load(args.config)], args, "simulate", None)


def cmd_preset(args) -> int:
    return _run_documents(preset_documents(args.name), args, "preset", args.name)


def cmd_bounds(args) -> int:
    doc = load(args.config)
    seed, _ = _seed_override(args)
    res = resolve(doc, seed, args.trials)
    spec = res.policies[0]
    q = next((p.q for p in res.policies if p.name in ("alnetc", "explore_only")), None)
    if q is None:
        q = min_exploration_q(res.instance)
    grid = res.doc.get("bounds", {}).get("T_grid", DEFAULT_T_GRID)
    if not isinstance(grid, list) or not grid or not all(isinstance(t, (int, float)) and t >= 2 for t in grid):
        raise ConfigError("bounds.T_grid", "must be a non-empty list of horizons >= 2")
    rows = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for T in grid:
            try:
                inp = BoundInputs.from_instance(res.instance, T, spec.payment, q)
            except DomainError as exc:
                raise ConfigError("impact", f"{exc} (condition G > 1 violated)") from exc
            rows.append([T, thm1_regret_main(inp), thm1_payment(inp), thm2_regret(inp), thm2_payment(inp), *tau_bounds(inp)])
    for w in {str(c.message) for c in caught}:
        print(f"warning: {w}", file=sys.stderr)
    out = Path(args.output)
    if args.format == "json":
        _write_json(out, [dict(zip(BOUNDS_COLUMNS, r)) for r in rows])
    else:
        _write_csv(out, BOUNDS_COLUMNS, rows)
    res.doc["bounds"] = {"T_grid": grid, "q": q, "G": inp.impact, "b": spec.payment}
    _write_json(sidecar_path(out), {"command": "bounds", "config": res.doc, "version": __version__})
    return EXIT_OK


def _embed_settings(doc: dict) -> dict:
    raw = doc.get("embed", {})
    if not isinstance(raw, dict):
        raise ConfigError("embed", "must be an object")
    out = dict(DEFAULT_EMBED)
    for key in DEFAULT_EMBED:
        if key in raw:
            val = raw[key]
            if isinstance(val, bool) or not isinstance(val, int) or val < 1:
                raise ConfigError(f"embed.{key}", f"expected a positive integer, got {val!r}")
            out[key] = val
    if out["prefix_length"] > MAX_EXACT_PREFIX:
        raise ConfigError("embed.prefix_length", f"exact probabilities are limited to {MAX_EXACT_PREFIX} events")
    if out["event_cap"] < out["streak"]:
        raise ConfigError("embed.event_cap", "must be at least embed.streak")
    return out


def cmd_embed(args) -> int:
    doc = load(args.config)
    seed, seed_source = _seed_override(args)
    res = resolve(doc, seed, allow_ties=True, need_policy=False)
    settings = _embed_settings(doc)
    if args.trials is not None:
        settings["runs"] = args.trials
    echo = {key: res.doc[key] for key in ("arms", "feedback", "impact")}
    echo["run"] = {"seed": res.seed}
    echo["embed"] = settings
    inst = res.instance
    k, n = settings["prefix_length"], settings["samples"]
    s_emb, s_dir, s_att = np.random.SeedSequence(res.seed).spawn(3)
    exact = exact_prefix_distribution(inst, k)
    emb = prefix_distribution(sample_embedded_prefixes(inst, k, n, np.random.default_rng(s_emb)), inst.m)
    dire = prefix_distribution(sample_direct_prefixes(inst, k, n, np.random.default_rng(s_dir)), inst.m)
    winners, starts = attraction_study(
        inst, settings["streak"], settings["event_cap"], settings["runs"], np.random.default_rng(s_att)
    )
    decided = winners[winners >= 0]
    first = lambda p: p.reshape(inst.m, -1).sum(axis=1).tolist()  # noqa: E731
    alpha = res.doc["feedback"]["alpha"]
    report = {
        "config": echo,
        "seed_source": seed_source,
        "regime": classify_regime(alpha).value,
        "tv": {
            "embedded_vs_exact": total_variation(emb, exact),
            "direct_vs_exact": total_variation(dire, exact),
            "embedded_vs_direct": total_variation(emb, dire),
        },
        "first_arm_frequency": {"embedded": first(emb), "direct": first(dire), "exact": first(exact)},
        "attraction": {
            "proxy": "first run of `streak` consecutive reward events from one arm",
            "streak": settings["streak"],
            "event_cap": settings["event_cap"],
            "runs": settings["runs"],
            "censored_fraction": float(np.mean(winners < 0)),
            "winner_frequency": (np.bincount(decided, minlength=inst.m) / max(len(decided), 1)).tolist(),
            "median_start_event": float(np.median(starts[winners >= 0])) if len(decided) else None,
        },
    }
    out = Path(args.output)
    _write_json(out, report)
    _write_json(sidecar_path(out), {"command": "embed", "config": echo, "version": __version__})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", required=True, help="output file (CSV or JSON)")
    common.add_argument("--trials", type=int, help="override the number of trials (runs, for embed)")
    common.add_argument("--seed", type=int, help="override the base seed (takes precedence over URNBANDIT_SEED)")
    common.add_argument("--workers", type=int, default=1, help="parallel worker threads (results do not depend on it)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="urnbandit", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common], help="run the policies of a config file")
    s.add_argument("config")
    s.set_defaults(func=cmd_simulate)
    s = sub.add_parser("preset", parents=[common], help="run a built-in replication preset")
    s.add_argument("name")
    s.add_argument("--horizon", "-T", type=int, help="override the horizon T")
    s.set_defaults(func=cmd_preset)
    s = sub.add_parser("bounds", parents=[common], help="evaluate the regret and payment bounds on a T grid")
    s.add_argument("config")
    s.set_defaults(func=cmd_bounds)
    s = sub.add_parser("embed", parents=[common], help="embedding equivalence and attraction study")
    s.add_argument("config")
    s.set_defaults(func=cmd_embed)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    for flag in ("trials", "workers"):
        val = getattr(args, flag)
        if val is not None and val < 1:
            print(f"error: --{flag} must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EvaluationError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
