"""Experiment configuration: JSON schema, defaults and object construction."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .discretization import SphereGrid, UGrid, make_sphere_grid
from .errors import ConfigError
from .geometry import ConstantCut, CutFunction, cut_from_dict
from .holography import BulkSource, ConformalFactor, auto_ugrid, conformal_factor_from_dict

SCHEMA_VERSION = "scri-holo/1"

_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_POS = {"type": "number", "exclusiveMinimum": 0}

_PROFILE_T = {
    "type": "object",
    "required": ["kind", "center", "width"],
    "properties": {"kind": {"enum": ["gaussian", "bump"]}, "center": {"type": "number"}, "width": _POS},
    "additionalProperties": False,
}
_PROFILE_X = {
    "type": "object",
    "required": ["kind", "center", "width"],
    "properties": {"kind": {"enum": ["gaussian", "bump"]}, "center": _VEC3, "width": _POS},
    "additionalProperties": False,
}
_CUT = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["constant", "apex", "harmonic", "tabulated"]},
        "c": {"type": "number"},
        "t": {"type": "number"},
        "x": _VEC3,
        "coefficients": {"type": "array", "items": {"type": "array", "minItems": 3, "maxItems": 3}},
        "n_theta": {"type": "integer"},
        "n_phi": {"type": "integer"},
        "values": {"type": "array", "items": {"type": "number"}},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "grid"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "grid": {
            "type": "object",
            "required": ["n_theta", "n_phi", "n_u"],
            "properties": {
                "n_theta": {"type": "integer", "minimum": 4},
                "n_phi": {"type": "integer", "minimum": 8},
                "n_u": {"type": "integer", "minimum": 16},
                "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "margin": _POS,
            },
            "additionalProperties": False,
        },
        "source": {
            "type": "object",
            "properties": {
                "terms": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["temporal", "spatial"],
                        "properties": {"amplitude": {"type": "number"}, "temporal": _PROFILE_T,
                                       "spatial": _PROFILE_X},
                        "additionalProperties": False,
                    },
                }
            },
            "additionalProperties": False,
        },
        "conformal_factor": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"enum": ["one", "exp_time", "rational_time"]},
                           "rate": {"type": "number"}, "a": {"type": "number", "minimum": 0}},
            "additionalProperties": False,
        },
        "cut": _CUT,
        "cuts": {"type": "array", "items": _CUT, "minItems": 2, "maxItems": 2},
        "deformation": {
            "type": "object",
            "properties": {
                "direction": _CUT,
                "t_min": {"type": "number"},
                "t_max": {"type": "number"},
                "steps": {"type": "integer", "minimum": 1},
                "fd_step": _POS,
            },
            "additionalProperties": False,
        },
        "flow": {
            "type": "object",
            "properties": {"s": {"type": "array", "items": {"type": "number"}}},
            "additionalProperties": False,
        },
        "stress": {
            "type": "object",
            "properties": {"v": _POS, "n_theta": {"type": "integer", "minimum": 4},
                           "n_phi": {"type": "integer", "minimum": 8},
                           "n_u": {"type": "integer", "minimum": 16}, "margin": _POS},
            "additionalProperties": False,
        },
        "coords": {
            "type": "object",
            "properties": {"events": {"type": "array", "items": {"type": "array", "items": {"type": "number"},
                                                                  "minItems": 4, "maxItems": 4}}},
            "additionalProperties": False,
        },
        "tolerances": {
            "type": "object",
            "properties": {"norm_identity": _POS, "superadditivity": _POS, "anec_routes": _POS},
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}

DEFAULTS = {
    "source": {"terms": []},
    "conformal_factor": {"kind": "one"},
    "cut": {"kind": "constant", "c": 0.0},
    "deformation": {"direction": {"kind": "constant", "c": 1.0}, "t_min": -1.0, "t_max": 1.0,
                    "steps": 21, "fd_step": 0.02},
    "flow": {"s": [0.05]},
    "stress": {"v": 200.0, "n_theta": 4, "n_phi": 8, "n_u": 192, "margin": 7.0},
    "coords": {"events": []},
    "tolerances": {"norm_identity": 1e-4, "superadditivity": 1e-10, "anec_routes": 1e-6},
    "seed": 0,
}
GRID_DEFAULTS = {"margin": 8.0}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("cut", "direction"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _locate(text: str, path) -> str:
    """Best-effort line number of the innermost key named in ``path``."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys or text is None:
        return ""
    needle = f'"{keys[-1]}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return f" (line {lineno})"
    return ""


def validate(raw: dict, text: str | None = None) -> dict:
    """Validate against the schema and fill in defaults."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for err in errors:
            where = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
            msgs.append(f"{where}{_locate(text, list(err.absolute_path))}: {err.message}")
        raise ConfigError("invalid config:\n  " + "\n  ".join(msgs))
    cfg = _merge(DEFAULTS, raw)
    cfg["grid"] = _merge(GRID_DEFAULTS, raw["grid"])
    d = cfg["deformation"]
    if not d["t_max"] >= d["t_min"]:
        raise ConfigError("$.deformation: t_max must not be below t_min")
    return cfg


def load_config(path) -> tuple[dict, str]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return validate(raw, text), text


@dataclass
class Experiment:
    """Objects built from a validated config."""

    config: dict
    source: BulkSource
    chi: ConformalFactor
    sphere: SphereGrid
    ugrid: UGrid
    cut: CutFunction

    @classmethod
    def from_config(cls, cfg: dict) -> "Experiment":
        g = cfg["grid"]
        source = BulkSource.from_dict(cfg["source"])
        chi = conformal_factor_from_dict(cfg["conformal_factor"])
        sphere = make_sphere_grid(g["n_theta"], g["n_phi"])
        if "window" in g:
            lo, hi = g["window"]
            ugrid = UGrid(float(lo), float(hi), g["n_u"])
        else:
            ugrid = auto_ugrid(source, g["n_u"], g["margin"], chi)
        cut = cut_from_dict(cfg["cut"], sphere) if cfg.get("cut") else ConstantCut(0.0)
        return cls(cfg, source, chi, sphere, ugrid, cut)

    def cut_from(self, entry: dict) -> CutFunction:
        return cut_from_dict(entry, self.sphere)
