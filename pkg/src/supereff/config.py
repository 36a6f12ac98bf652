"""JSON configuration: parsing, validation with key paths, canonical digests."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .distributions import _PARAM_NAMES, EffectDistribution, PopulationSpec
from .errors import SchemaError, ValidationError
from .estimators import EstimatorKind
from .simulation import SimulationConfig

_TOP_REQUIRED = {"population", "estimator", "n_grid", "replications", "master_seed"}
_TOP_OPTIONAL = {"record_replications", "negative_control"}
_DEFAULT_BASELINE = {"kind": "degenerate", "value": 0.0}


def _keys(obj, path, required, optional=frozenset()):
    if not isinstance(obj, dict):
        raise SchemaError(path, f"expected an object, got {type(obj).__name__}")
    missing = sorted(set(required) - obj.keys())
    if missing:
        raise SchemaError(f"{path}.{missing[0]}" if path else missing[0], "missing required key")
    unknown = sorted(obj.keys() - set(required) - set(optional))
    if unknown:
        raise SchemaError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")


def _number(obj, key, path):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{path}.{key}", f"expected a number, got {v!r}")
    return float(v)


def _integer(obj, key, path):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{path}.{key}" if path else key, f"expected an integer, got {v!r}")
    return v


def parse_distribution(obj, path="dist") -> EffectDistribution:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError(f"{path}.kind", "missing required key")
    kind = obj["kind"]
    if kind not in _PARAM_NAMES:
        raise SchemaError(f"{path}.kind", f"unknown kind {kind!r}")
    names = _PARAM_NAMES[kind]
    _keys(obj, path, {"kind", *names})
    try:
        return EffectDistribution(kind, tuple(_number(obj, k, path) for k in names))
    except ValueError as exc:
        raise ValidationError(path, str(exc)) from None


def parse_distribution_spec(text: str) -> EffectDistribution:
    """Accept JSON (``{"kind": "uniform", "lo": 0, "hi": 1}``) or ``uniform:lo=0,hi=1``."""
    text = text.strip()
    if text.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError("dist", f"invalid JSON: {exc}") from None
        return parse_distribution(obj)
    kind, _, rest = text.partition(":")
    obj = {"kind": kind.strip()}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise SchemaError("dist", f"expected key=value, got {item!r}")
        try:
            obj[key.strip()] = float(val)
        except ValueError:
            raise SchemaError(f"dist.{key.strip()}", f"not a number: {val!r}") from None
    return parse_distribution(obj)


def config_from_dict(doc: dict, seed_override: int | None = None) -> SimulationConfig:
    _keys(doc, "", _TOP_REQUIRED, _TOP_OPTIONAL)

    pop = doc["population"]
    _keys(pop, "population", {"effect"}, {"baseline", "assignment_prob"})
    effect = parse_distribution(pop["effect"], "population.effect")
    baseline = parse_distribution(pop.get("baseline", _DEFAULT_BASELINE), "population.baseline")
    p = _number(pop, "assignment_prob", "population") if "assignment_prob" in pop else 0.5
    if not 0.0 < p < 1.0:
        raise ValidationError("population.assignment_prob", "must lie strictly between 0 and 1")

    est = doc["estimator"]
    _keys(est, "estimator", {"tag"}, {"synthetic_sigma"})
    sigma = _number(est, "synthetic_sigma", "estimator") if "synthetic_sigma" in est else None
    try:
        estimator = EstimatorKind(est["tag"], sigma)
    except ValueError as exc:
        raise ValidationError("estimator", str(exc)) from None

    grid = doc["n_grid"]
    if not isinstance(grid, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in grid):
        raise SchemaError("n_grid", "expected a list of integers")
    reps = _integer(doc, "replications", "")
    seed = _integer(doc, "master_seed", "") if seed_override is None else seed_override
    flags = {}
    for key in _TOP_OPTIONAL:
        if key in doc:
            if not isinstance(doc[key], bool):
                raise SchemaError(key, "expected true or false")
            flags[key] = doc[key]

    try:
        return SimulationConfig(
            population=PopulationSpec(baseline, effect, p),
            estimator=estimator,
            n_grid=tuple(grid),
            replications=reps,
            master_seed=seed,
            **flags,
        )
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError("", str(exc)) from None


def parse_config(path, seed_override: int | None = None) -> SimulationConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError("", f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON in {path}: {exc}") from None
    return config_from_dict(doc, seed_override)


def config_to_dict(config: SimulationConfig) -> dict:
    """Fully resolved configuration document (defaults filled in)."""
    pop = config.population
    return {
        "population": {
            "baseline": pop.baseline.as_dict(),
            "effect": pop.effect.as_dict(),
            "assignment_prob": pop.assignment_prob,
        },
        "estimator": config.estimator.as_dict(),
        "n_grid": list(config.n_grid),
        "replications": config.replications,
        "master_seed": config.master_seed,
        "record_replications": config.record_replications,
        "negative_control": config.negative_control,
    }


def config_digest(config: SimulationConfig) -> str:
    canon = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
