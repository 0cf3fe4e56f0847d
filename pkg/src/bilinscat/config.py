"""Run configuration: JSON schema, validation and conversion to library objects."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import jsonschema
import numpy as np

from .errors import BilinscatError
from .potential import PhysicalParams, PotentialSpec, as_elements


class ConfigError(BilinscatError, ValueError):
    pass


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_complex = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}]}
_matrix = {"oneOf": [_num, {"type": "array", "minItems": 1,
                            "items": {"type": "array", "minItems": 1, "items": _complex}}]}
_expr_matrix = {"oneOf": [{"type": "string"},
                          {"type": "array", "minItems": 1,
                           "items": {"type": "array", "minItems": 1,
                                     "items": {"type": "string"}}}]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_packet = _obj({
    "center": _num, "width": _pos, "momentum": _num,
    "channel": {"type": "integer", "minimum": 0}, "amplitude": _complex,
}, ["center", "width", "momentum"])

CONFIG_SCHEMA = _obj({
    "units": _obj({"hbar": _pos, "mass": _pos}),
    "channels": {"type": "integer", "minimum": 1},
    "window": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
    "potential": {"type": "array", "items": {"oneOf": [
        _obj({"type": {"const": "delta"}, "position": _num, "strength": _matrix},
             ["type", "position", "strength"]),
        _obj({"type": {"const": "constant"}, "from": _num, "to": _num, "value": _matrix},
             ["type", "from", "to", "value"]),
        _obj({"type": {"const": "analytic"}, "from": _num, "to": _num, "expr": _expr_matrix},
             ["type", "from", "to", "expr"]),
    ]}},
    "energies": {"oneOf": [
        _obj({"list": {"type": "array", "items": _pos, "minItems": 1}}, ["list"]),
        _obj({"linspace": _obj({"start": _pos, "stop": _pos,
                                "count": {"type": "integer", "minimum": 1}},
                               ["start", "stop", "count"])}, ["linspace"]),
    ]},
    "evolve": _obj({
        "length": _pos, "points": {"type": "integer", "minimum": 3}, "dt": _pos,
        "steps": {"type": "integer", "minimum": 0},
        "sector": {"enum": ["retarded", "advanced"]},
        "right": _packet, "left": _packet,
    }, ["length", "points", "dt", "steps", "right", "left"]),
    "output": _obj({"format": {"enum": ["csv", "json"]}, "path": {"type": "string"}}),
    "tolerances": _obj({"invert": _pos, "duality": _pos, "singularity": _pos}),
}, ["window"])


@dataclass(frozen=True)
class PacketSpec:
    center: float
    width: float
    momentum: float
    channel: int = 0
    amplitude: complex = 1.0


@dataclass(frozen=True)
class EvolveSpec:
    length: float
    points: int
    dt: float
    steps: int
    right: PacketSpec
    left: PacketSpec
    sector: str = "retarded"


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    potential: PotentialSpec
    energies: tuple | None = None
    evolve: EvolveSpec | None = None
    output_format: str = "csv"
    output_path: str | None = None
    tolerances: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.potential.n


def _complex_value(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def _packet(d) -> PacketSpec:
    return PacketSpec(float(d["center"]), float(d["width"]), float(d["momentum"]),
                      int(d.get("channel", 0)), _complex_value(d.get("amplitude", 1.0)))


def parse_config(doc: Any) -> RunConfig:
    """Validate ``doc`` against :data:`CONFIG_SCHEMA` and build a :class:`RunConfig`."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    units = doc.get("units", {})
    try:
        params = PhysicalParams(units.get("hbar", 1.0), units.get("mass", 0.5))
        n = doc.get("channels", 1)
        potential = PotentialSpec(n, as_elements(doc.get("potential", []), n),
                                  tuple(doc["window"]))
    except (BilinscatError, ValueError) as exc:
        raise ConfigError(f"invalid potential: {exc}") from None

    energies = None
    spec = doc.get("energies")
    if spec is not None:
        if "list" in spec:
            energies = tuple(float(E) for E in spec["list"])
        else:
            ls = spec["linspace"]
            energies = tuple(float(E) for E in np.linspace(ls["start"], ls["stop"], ls["count"]))
        if any(b <= a for a, b in zip(energies, energies[1:])):
            raise ConfigError("energies must be strictly increasing")

    evolve = None
    if "evolve" in doc:
        ev = doc["evolve"]
        evolve = EvolveSpec(float(ev["length"]), int(ev["points"]), float(ev["dt"]),
                            int(ev["steps"]), _packet(ev["right"]), _packet(ev["left"]),
                            ev.get("sector", "retarded"))
        for pk in (evolve.right, evolve.left):
            if pk.channel >= n:
                raise ConfigError(f"packet channel {pk.channel} out of range for {n} channels")

    out = doc.get("output", {})
    return RunConfig(params, potential, energies, evolve, out.get("format", "csv"),
                     out.get("path"), dict(doc.get("tolerances", {})))


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from None
    return parse_config(doc)
