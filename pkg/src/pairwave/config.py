"""Run configuration: JSON schema, defaults and content hashes."""
from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import jsonschema

from .errors import InvalidConfiguration

_num = {"type": "number"}
_pos_int = {"type": "integer", "minimum": 1}
_flag = {"type": "boolean"}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["riccati"],
    "properties": {
        "basis": {
            "type": "object", "additionalProperties": False,
            "properties": {"M": {"type": "integer", "minimum": 2, "maximum": 256},
                           "Q": {"type": ["integer", "null"], "minimum": 2}},
        },
        "model": {
            "type": "object", "additionalProperties": False,
            "properties": {"omega": {"type": "number", "exclusiveMinimum": 0},
                           "g": {"type": "number", "minimum": 0},
                           "sigma": {"type": "number", "exclusiveMinimum": 0},
                           "N": _pos_int},
        },
        "hartree": {
            "type": "object", "additionalProperties": False,
            "properties": {"tol": {"type": "number", "exclusiveMinimum": 0},
                           "max_iter": _pos_int,
                           "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
        },
        "riccati": {
            "type": "object", "additionalProperties": False,
            "required": ["seed"],
            "properties": {"solver": {"enum": ["variational", "greedy", "bdg", "all"]},
                           "tol": {"type": "number", "exclusiveMinimum": 0},
                           "max_iter": _pos_int,
                           "restarts": _pos_int,
                           "seed": {"type": "integer", "minimum": 0},
                           "flip": {"type": "array", "items": _pos_int}},
        },
        "fock": {
            "type": "object", "additionalProperties": False,
            "properties": {"m": {"type": "integer", "minimum": 2, "maximum": 8},
                           "N": _pos_int,
                           "scaling_N": {"type": "array", "items": _pos_int, "minItems": 2},
                           "N_cap": _pos_int,
                           "theorem2": _flag, "construct": _flag, "projectors": _flag,
                           "scaling": _flag, "bogoliubov": _flag},
        },
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {"directory": {"type": "string", "minLength": 1},
                           "formats": {"type": "array", "uniqueItems": True,
                                       "items": {"enum": ["json", "csv"]}}},
        },
    },
}

DEFAULTS = {
    "basis": {"M": 32, "Q": None},
    "model": {"omega": 1.0, "g": 0.01, "sigma": 0.5, "N": 100},
    "hartree": {"tol": 1e-12, "max_iter": 500, "alpha": 0.5},
    "riccati": {"solver": "all", "tol": 1e-11, "max_iter": 500, "restarts": 16, "flip": []},
    "fock": {"m": 3, "N": 2, "scaling_N": [4, 8, 16], "N_cap": 8,
             "theorem2": True, "construct": True, "projectors": True,
             "scaling": True, "bogoliubov": True},
    "output": {"directory": "out", "formats": ["json", "csv"]},
}

# which sections each stage depends on (in addition to its upstream stages)
STAGE_SECTIONS = {
    "hartree": ("basis", "model", "hartree"),
    "riccati": ("basis", "model", "hartree", "riccati"),
    "spectrum": ("basis", "model", "hartree", "riccati"),
    "fock": ("basis", "model", "hartree", "riccati", "fock"),
}


def validate(raw: dict) -> dict:
    """Validate ``raw`` against the schema and fill in defaults."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidConfiguration(f"{where}: {exc.message}") from None
    cfg = copy.deepcopy(DEFAULTS)
    for sec, body in raw.items():
        cfg.setdefault(sec, {}).update(copy.deepcopy(body))
    M, Q = cfg["basis"]["M"], cfg["basis"]["Q"]
    if Q is not None and Q < 2 * M:
        raise InvalidConfiguration(f"basis/Q: need Q >= 2M, got Q={Q}, M={M}")
    f = cfg["fock"]
    if f["m"] - 1 > M - 1:
        raise InvalidConfiguration("fock/m exceeds the number of excitation modes")
    if list(f["scaling_N"]) != sorted(set(f["scaling_N"])):
        raise InvalidConfiguration("fock/scaling_N must be strictly increasing")
    return cfg


def load(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfiguration(f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfiguration(f"malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InvalidConfiguration("top level must be an object")
    return validate(raw)


def stage_hash(cfg: dict, stage: str) -> str:
    """Content hash of everything that determines the result of ``stage``."""
    part = {s: cfg[s] for s in STAGE_SECTIONS[stage]}
    blob = json.dumps(part, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(f"{stage}:{blob}".encode()).hexdigest()[:16]
