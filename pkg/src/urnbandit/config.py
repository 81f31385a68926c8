"""JSON experiment documents and the built-in replication presets.

A document looks like::

    {
      "arms": [{"mean": 0.3, "bias": 100}, {"mean": 0.5, "bias": 1}],
      "feedback": {"kind": "polynomial", "alpha": 1.5, "coefficient": 1.0},
      "impact": {"kind": "payment_linear"},
      "policy": {"name": "alnetc", "b": 1.5, "q": 15},
      "run": {"T": 10000, "trials": 200, "seed": 0, "checkpoints": null}
    }

``policy`` may also be a list of policy objects.  ``impact.kind`` is
``payment_linear`` (impact equals the payment) or ``constant`` (with
``value``).  ``run.checkpoints`` defaults to 50 log-spaced steps ending at
``T``.  Optional ``bounds`` (``T_grid``) and ``embed`` (``prefix_length``,
``samples``, ``streak``, ``event_cap``, ``runs``) sections feed the
corresponding CLI subcommands.

:func:`resolve` fills in every default, so the returned ``doc`` reproduces
the run exactly when written back to disk.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .dynamics import BanditInstance, ConstantImpact, PaymentLinearImpact, Polynomial
from .errors import ArgumentError, ConfigError
from .harness import ExperimentConfig, PolicySpec, default_checkpoints
from .policies import POLICY_NAMES

__all__ = ["Resolved", "load", "resolve", "PRESETS", "preset_documents"]

DEFAULT_TRIALS = 200
DEFAULT_HORIZON = 10_000
DEFAULT_T_GRID = [100, 1000, 10_000, 100_000, 1_000_000]
DEFAULT_EMBED = {"prefix_length": 3, "samples": 100_000, "streak": 50, "event_cap": 10_000, "runs": 1000}


@dataclass(frozen=True)
class Resolved:
    doc: dict
    instance: BanditInstance
    policies: tuple[PolicySpec, ...]
    horizon: int
    trials: int
    seed: int
    checkpoints: tuple[int, ...]

    def experiments(self) -> list[ExperimentConfig]:
        return [
            ExperimentConfig(self.instance, p, self.horizon, self.trials, self.checkpoints, self.seed)
            for p in self.policies
        ]


def load(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("", "top level must be a JSON object")
    return doc


def _section(doc: dict, key: str, required: bool = True) -> dict:
    if key not in doc:
        if required:
            raise ConfigError(key, "missing required section")
        return {}
    val = doc[key]
    if not isinstance(val, dict):
        raise ConfigError(key, "must be an object")
    return val


def _number(obj: dict, key: str, path: str, default: Any = None, *, integer: bool = False):
    if key not in obj or obj[key] is None:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {val!r}")
    if integer:
        if float(val) != int(val):
            raise ConfigError(f"{path}.{key}", f"expected an integer, got {val!r}")
        return int(val)
    if not math.isfinite(val):
        raise ConfigError(f"{path}.{key}", "must be finite")
    return float(val)


def _instance(doc: dict, allow_ties: bool) -> tuple[BanditInstance, dict]:
    if "arms" not in doc:
        raise ConfigError("arms", "missing required section")
    arms = doc["arms"]
    if not isinstance(arms, list) or len(arms) < 2:
        raise ConfigError("arms", "must be a list of at least two {mean, bias} objects")
    means, biases = [], []
    for i, arm in enumerate(arms):
        if not isinstance(arm, dict):
            raise ConfigError(f"arms[{i}]", "must be an object")
        means.append(_number(arm, "mean", f"arms[{i}]"))
        biases.append(_number(arm, "bias", f"arms[{i}]"))
    fb = _section(doc, "feedback", required=False)
    kind = fb.get("kind", "polynomial")
    if kind != "polynomial":
        raise ConfigError("feedback.kind", f"unsupported kind {kind!r}; only 'polynomial' can be configured from a file")
    alpha = _number(fb, "alpha", "feedback", 1.5)
    coef = _number(fb, "coefficient", "feedback", 1.0)
    imp = _section(doc, "impact", required=False)
    ikind = imp.get("kind", "payment_linear")
    try:
        feedback = Polynomial(alpha, coef)
    except ArgumentError as exc:
        raise ConfigError("feedback", str(exc)) from exc
    if ikind == "payment_linear":
        impact = PaymentLinearImpact()
        imp_doc = {"kind": "payment_linear"}
    elif ikind == "constant":
        value = _number(imp, "value", "impact")
        try:
            impact = ConstantImpact(value)
        except ArgumentError as exc:
            raise ConfigError("impact.value", str(exc)) from exc
        imp_doc = {"kind": "constant", "value": value}
    else:
        raise ConfigError("impact.kind", f"unknown kind {ikind!r}; expected 'payment_linear' or 'constant'")
    try:
        inst = BanditInstance(tuple(means), tuple(biases), feedback, impact, allow_ties=allow_ties)
    except ArgumentError as exc:
        raise ConfigError("arms", str(exc)) from exc
    resolved = {
        "arms": [{"mean": m, "bias": b} for m, b in zip(means, biases)],
        "feedback": {"kind": "polynomial", "alpha": alpha, "coefficient": coef},
        "impact": imp_doc,
    }
    return inst, resolved


def _policies(doc: dict) -> tuple[tuple[PolicySpec, ...], list[dict]]:
    if "policy" not in doc:
        raise ConfigError("policy", "missing required section")
    raw = doc["policy"]
    items = raw if isinstance(raw, list) else [raw]
    specs, out = [], []
    for i, p in enumerate(items):
        path = f"policy[{i}]" if isinstance(raw, list) else "policy"
        if not isinstance(p, dict):
            raise ConfigError(path, "must be an object")
        name = p.get("name")
        if name not in POLICY_NAMES:
            raise ConfigError(f"{path}.name", f"expected one of {', '.join(POLICY_NAMES)}, got {name!r}")
        b = _number(p, "b", path, 1.0)
        q = _number(p, "q", path, 15.0)
        if b <= 0:
            raise ConfigError(f"{path}.b", "payment must be positive")
        if q <= 0:
            raise ConfigError(f"{path}.q", "q must be positive")
        label = p.get("label")
        specs.append(PolicySpec(name, b, q, label))
        entry = {"name": name, "b": b, "q": q}
        if label is not None:
            entry["label"] = label
        out.append(entry)
    return tuple(specs), out


def resolve(doc: dict, seed_override: int | None = None, trials_override: int | None = None,
            horizon_override: int | None = None, *, allow_ties: bool = False,
            need_policy: bool = True) -> Resolved:
    """Validate ``doc`` and fill in defaults; raises :class:`ConfigError` with a field path."""
    doc = copy.deepcopy(doc)
    inst, out = _instance(doc, allow_ties)
    specs, pol_doc = _policies(doc) if ("policy" in doc or need_policy) else ((), [])
    run = _section(doc, "run", required=False)
    horizon = horizon_override or _number(run, "T", "run", DEFAULT_HORIZON, integer=True)
    trials = trials_override or _number(run, "trials", "run", DEFAULT_TRIALS, integer=True)
    seed = _number(run, "seed", "run", 0, integer=True) if seed_override is None else seed_override
    if horizon < 2:
        raise ConfigError("run.T", "horizon must be at least 2")
    if trials < 1:
        raise ConfigError("run.trials", "need at least one trial")
    if not 0 <= seed < 2**64:
        raise ConfigError("run.seed", "must be an unsigned 64-bit integer")
    cps = run.get("checkpoints")
    if cps is None or horizon_override:
        cps = default_checkpoints(horizon)
    else:
        if not isinstance(cps, list) or not all(isinstance(c, int) and not isinstance(c, bool) for c in cps):
            raise ConfigError("run.checkpoints", "must be a list of integers")
        cps = tuple(cps)
        if not cps or cps[-1] != horizon or any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 1:
            raise ConfigError("run.checkpoints", "must be strictly increasing positive steps ending at run.T")
    out["policy"] = pol_doc
    out["run"] = {"T": horizon, "trials": trials, "seed": seed, "checkpoints": list(cps)}
    for key in ("bounds", "embed"):
        if key in doc:
            out[key] = _section(doc, key)
    return Resolved(out, inst, specs, horizon, trials, seed, tuple(cps))


# ---------------------------------------------------------------------------
# Presets

_FIG1 = {
    "arms": [{"mean": 0.3, "bias": 100.0}, {"mean": 0.5, "bias": 1.0}],
    "feedback": {"kind": "polynomial", "alpha": 1.5, "coefficient": 1.0},
    "impact": {"kind": "payment_linear"},
    "policy": [
        {"name": "alnetc", "b": 1.5, "q": 15.0},
        {"name": "none", "b": 1.5, "q": 15.0},
        {"name": "explore_only", "b": 1.5, "q": 15.0},
    ],
    "run": {"T": DEFAULT_HORIZON, "trials": 1000, "seed": 0},
}

_FIG2 = {
    "arms": [{"mean": 0.2, "bias": 10.0}, {"mean": 0.4, "bias": 10.0}, {"mean": 0.6, "bias": 1.0}],
    "feedback": {"kind": "polynomial", "alpha": 1.5, "coefficient": 1.0},
    "impact": {"kind": "payment_linear"},
    "policy": [{"name": "alnetc", "b": 1.2, "q": 20.0}, {"name": "ucb_list", "b": 1.2, "q": 20.0}],
    "run": {"T": DEFAULT_HORIZON, "trials": 1000, "seed": 0},
}


def _variant(base: dict, **changes) -> dict:
    doc = copy.deepcopy(base)
    if "alpha" in changes:
        doc["feedback"]["alpha"] = changes["alpha"]
    if "biases" in changes:
        for arm, b in zip(doc["arms"], changes["biases"]):
            arm["bias"] = b
    if "b" in changes:
        for p in doc["policy"]:
            p["b"] = changes["b"]
    if "impact" in changes:
        doc["impact"] = {"kind": "constant", "value": changes["impact"]}
    return doc


def _imperfect() -> list[dict]:
    docs = []
    for alpha in (1.0, 0.2):
        for g in (0.5, 0.2):
            doc = _variant(_FIG1, alpha=alpha, impact=g)
            tag = f"G={g},alpha={alpha}"
            doc["policy"] = [
                {"name": "alnetc", "b": 1.5, "q": 15.0, "label": f"alnetc[{tag}]"},
                {"name": "ucb_list", "b": 1.5, "q": 15.0, "label": f"ucb_list[{tag}]"},
            ]
            docs.append(doc)
    return docs


PRESETS = {
    "fig1": lambda: [copy.deepcopy(_FIG1)],
    "fig2": lambda: [copy.deepcopy(_FIG2)],
    "fig3": lambda: [_variant(_FIG2, alpha=2.0)],
    "fig4": lambda: [_variant(_FIG2, biases=[50.0, 50.0, 1.0])],
    "fig5": lambda: [_variant(_FIG2, b=1.8)],
    "imperfect": _imperfect,
}


def preset_documents(name: str) -> list[dict]:
    """Unresolved documents for preset ``name`` (one per parameter setting)."""
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    return PRESETS[name]()
