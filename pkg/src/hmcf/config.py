"""Scenario configuration: flat TOML validated against ``schema.toml``."""

import hashlib
import json
import sys
from dataclasses import dataclass, field
from importlib import resources

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .graph_system import CONVEXITY_BOUND

KINDS = ("sphere", "curve", "graph1d", "graph2d", "riemann", "eigen", "convergence")


def load_schema():
    text = resources.files("hmcf").joinpath("schema.toml").read_text()
    return tomllib.loads(text)


_SCHEMA = load_schema()


@dataclass
class Scenario:
    kind: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = "hmcf-out"
    seed: int = 0

    def canonical(self):
        """Stable JSON text of the validated scenario (the output directory excluded)."""
        return json.dumps({"kind": self.kind, "parameters": self.parameters, "seed": self.seed},
                          sort_keys=True, separators=(",", ":"))

    def config_hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def _check_value(key, entry, value, errors):
    kind = entry["type"]
    if kind == "int":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind == "float":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if ok:
            value = float(value)
    elif kind == "bool":
        ok = isinstance(value, bool)
    elif kind == "str":
        ok = isinstance(value, str)
    elif kind == "int_list":
        ok = (isinstance(value, list) and len(value) > 0
              and all(isinstance(v, int) and not isinstance(v, bool) for v in value))
    else:
        raise ValueError(f"bad schema type {kind!r}")
    if not ok:
        errors.append(f"{key}: expected {kind}, got {value!r}")
        return None
    vals = value if kind == "int_list" else [value]
    for v in vals:
        if "min" in entry and v < entry["min"]:
            errors.append(f"{key}: {v!r} is below the minimum {entry['min']}")
        if "max" in entry and v > entry["max"]:
            errors.append(f"{key}: {v!r} exceeds the maximum {entry['max']}")
        if "gt" in entry and not v > entry["gt"]:
            errors.append(f"{key}: {v!r} must be > {entry['gt']}")
        if "lt" in entry and not v < entry["lt"]:
            errors.append(f"{key}: {v!r} must be < {entry['lt']}")
        if "choices" in entry and v not in entry["choices"]:
            errors.append(f"{key}: {v!r} is not one of {entry['choices']}")
    return value


def _guard_error(name, b2, eps):
    return (f"{name}: initial |b|^2 = {b2:.6g} violates the convexity bound |b|^2 < "
            f"{CONVEXITY_BOUND} (guard {CONVEXITY_BOUND} - hyperbolicity_eps = "
            f"{CONVEXITY_BOUND - eps:.6g})")


def _cross_checks(kind, p, errors):
    eps = p.get("hyperbolicity_eps")
    if eps is None:
        return
    limit = CONVEXITY_BOUND - eps

    def guard(name, b2):
        if b2 is not None and b2 >= limit:
            errors.append(_guard_error(name, b2, eps))

    if kind in ("graph1d", "convergence") and isinstance(p.get("b_amplitude"), float):
        guard("b_amplitude", p["b_amplitude"] ** 2)
    if kind == "graph2d":
        b1, b2 = p.get("b1_amplitude"), p.get("b2_amplitude")
        if isinstance(b1, float) and isinstance(b2, float):
            guard("b1_amplitude, b2_amplitude", b1 * b1 + b2 * b2)
    if kind == "riemann":
        for side in ("b_left", "b_right"):
            if isinstance(p.get(side), float):
                guard(side, p[side] ** 2)
    if kind == "convergence" and isinstance(p.get("grids"), list) and isinstance(p.get("reference_cells"), int):
        ref = p["reference_cells"]
        for g in p["grids"]:
            if g >= ref or ref % g:
                errors.append(f"grids: {g} must be smaller than and divide reference_cells = {ref}")
        if len(p["grids"]) < 2:
            errors.append("grids: need at least two grids to fit a rate")


def scenario_from_mapping(data, kind=None):
    """Validate a flat mapping into a :class:`Scenario`.

    Raises
    ------
    ConfigError
        Listing every validation problem found.
    """
    data = dict(data)
    errors = []
    kind = data.pop("kind", kind)
    if kind not in KINDS:
        raise ConfigError([f"kind: unknown scenario kind {kind!r}; expected one of {list(KINDS)}"])
    table = _SCHEMA[kind]
    common = _SCHEMA["common"]
    values = {}
    for key, value in data.items():
        if key in common:
            values[key] = _check_value(key, common[key], value, errors)
        elif key in table:
            values[key] = _check_value(key, table[key], value, errors)
        else:
            errors.append(f"{key}: unknown key for kind {kind!r}")
    params = {}
    for key, s in table.items():
        if key in values:
            params[key] = values[key]
        elif "default" in s:
            params[key] = float(s["default"]) if s["type"] == "float" else s["default"]
        else:
            errors.append(f"{key}: required for kind {kind!r}")
    _cross_checks(kind, params, errors)
    if errors:
        raise ConfigError(errors)
    return Scenario(
        kind=kind,
        parameters=params,
        output_dir=values.get("output_dir") or common["output_dir"]["default"],
        seed=values.get("seed", common["seed"]["default"]),
    )


def load_flat(text):
    """Flat TOML text to a dict; tables are rejected."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"malformed config: {exc}"]) from exc
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError([f"{k}: tables are not allowed in a flat config" for k in nested])
    return data


def parse_config(text, kind=None):
    """Parse flat TOML text and validate it into a :class:`Scenario`."""
    return scenario_from_mapping(load_flat(text), kind)


def schema_for(kind):
    return dict(_SCHEMA[kind])
