"""Run configuration: YAML in, validated and normalised, YAML out.

Every section is reduced to plain, canonical data on load (floats as
floats, real numbers as their canonical text), so that
``load_text(dump_text(cfg)) == cfg`` and the config hash is stable.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .diophantine import parse_real, to_text
from .errors import ConfigError, GhlabError
from .families import CoefficientFamily, FrequencyRule, ModeFamily, ScalingRule
from .operator_model import GENERATOR_KINDS, GeneratorSpec, OperatorSpec, RhsSpec, eigen_generate, explicit_eigen
from .trig import TrigPoly

DEFAULT_JMAX = 256
DEFAULT_GRID = 256

_GENERATOR_PARAMS = {
    "torus_frequencies": set(),
    "power": {"s"},
    "log_power": {"rho"},
    "rational_decay": {"c", "tau"},
    "constant": {"mu", "nu", "exact"},
    "explicit": {"mu", "nu", "lam", "mult"},
}
_COMMON_GENERATOR = {"kind", "mu_mode", "n", "m"}

_TOP_KEYS = {"operator", "family", "jmax", "grid_points", "seed", "tolerances",
             "solve", "witness", "diophantine", "conjugate"}
_OPERATOR_KEYS = {"a", "b", "eigen", "a0", "rhs"}
_TOLERANCE_DEFAULTS = {"residual": 1e-8, "resonance": 1e-8}
_SECTION_DEFAULTS = {
    "solve": {"j_min": 1, "j_max": None},
    "witness": {"kind": "auto", "depth": 3, "budget": 1_000_000},
    "diophantine": {"a0": None, "mu": "j", "jrange": 4096, "witness_depth": None, "budget": 1_000_000},
    "conjugate": {"u": "random", "grid_points": 512},
}


# -------------------------------------------------------------- validation

def _check_keys(obj: Any, allowed: set, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"expected a mapping, got {type(obj).__name__}", where)
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown}; allowed: {sorted(allowed)}", where)
    return obj


def _num(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"expected a number, got {x!r}", where)
    return float(x)


def _int(x: Any, where: str, minimum: Optional[int] = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"expected an integer, got {x!r}", where)
    if minimum is not None and x < minimum:
        raise ConfigError(f"must be at least {minimum}", where)
    return int(x)


def _real_text(x: Any, where: str) -> str:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        x = f"float:{float(x)!r}" if isinstance(x, float) else f"rational:{x}"
    if not isinstance(x, str):
        raise ConfigError(f"expected a real-number string, got {x!r}", where)
    try:
        return to_text(parse_real(x))
    except (GhlabError, ValueError) as exc:
        raise ConfigError(str(exc), where) from None


def _trig(obj: Any, where: str) -> dict:
    """Numbers are constants; lists are cosine coefficients; mappings give both."""
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return {"cos": [float(obj)], "sin": []}
    if isinstance(obj, list):
        return {"cos": [_num(v, f"{where}[{i}]") for i, v in enumerate(obj)] or [0.0], "sin": []}
    _check_keys(obj, {"cos", "sin"}, where)
    cos = [_num(v, f"{where}.cos[{i}]") for i, v in enumerate(obj.get("cos", [0.0]) or [0.0])]
    sin = [_num(v, f"{where}.sin[{i}]") for i, v in enumerate(obj.get("sin", []) or [])]
    return {"cos": cos, "sin": sin}


def _eigen(obj: Any, where: str) -> dict:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("eigen section needs a 'kind'", where)
    kind = obj["kind"]
    if kind not in GENERATOR_KINDS:
        raise ConfigError(f"unknown generator kind {kind!r}; expected one of {list(GENERATOR_KINDS)}", f"{where}.kind")
    _check_keys(obj, _COMMON_GENERATOR | _GENERATOR_PARAMS[kind], where)
    out = {"kind": kind}
    for key, val in sorted(obj.items()):
        loc = f"{where}.{key}"
        if key == "kind":
            continue
        if key == "mu_mode":
            if val not in ("default", "zero"):
                raise ConfigError("mu_mode must be 'default' or 'zero'", loc)
            out[key] = val
        elif key == "exact":
            if not isinstance(val, bool):
                raise ConfigError("expected true or false", loc)
            out[key] = val
        elif key in ("c", "tau", "n", "mult") and kind != "explicit":
            out[key] = _int(val, loc, 0 if key != "n" else 1)
        elif kind == "explicit" and key in ("mu", "nu", "lam", "mult"):
            if not isinstance(val, list) or not val:
                raise ConfigError("expected a nonempty list", loc)
            conv = (lambda v, i: _int(v, f"{loc}[{i}]", 1)) if key == "mult" else (lambda v, i: _num(v, f"{loc}[{i}]"))
            out[key] = [conv(v, i) for i, v in enumerate(val)]
        else:
            out[key] = _num(val, loc)
    if kind == "explicit":
        if "mu" not in out or "nu" not in out:
            raise ConfigError("explicit eigen data needs 'mu' and 'nu'", where)
        if len(out["mu"]) != len(out["nu"]):
            raise ConfigError("'mu' and 'nu' differ in length", where)
    return out


def _rhs(obj: Any, where: str) -> dict:
    _check_keys(obj, {"kind", "freq", "shape", "decay"}, where)
    kind = obj.get("kind", "exp")
    if kind not in ("exp", "trig"):
        raise ConfigError("rhs kind must be 'exp' or 'trig'", f"{where}.kind")
    return {"kind": kind, "freq": _int(obj.get("freq", 1), f"{where}.freq"),
            "shape": _trig(obj.get("shape", 1.0), f"{where}.shape"),
            "decay": _num(obj.get("decay", 0.0), f"{where}.decay")}


def _scaling(obj: Any, where: str, default_coef: float) -> dict:
    if obj is None:
        return {"coef": default_coef, "power": 0.0, "log_power": 0.0}
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return {"coef": float(obj), "power": 0.0, "log_power": 0.0}
    _check_keys(obj, {"coef", "power", "log_power"}, where)
    return {"coef": _num(obj.get("coef", 1.0), f"{where}.coef"),
            "power": _num(obj.get("power", 0.0), f"{where}.power"),
            "log_power": _num(obj.get("log_power", 0.0), f"{where}.log_power")}


def _coefficient_family(obj: Any, where: str) -> dict:
    _check_keys(obj, {"mean", "amp", "shape", "freq"}, where)
    mean = obj.get("mean", 0.0)
    if isinstance(mean, str):
        mean_out: Any = _real_text(mean, f"{where}.mean")
    else:
        mean_out = _scaling(mean, f"{where}.mean", 0.0)
    shape = _trig(obj.get("shape", 0.0), f"{where}.shape")
    if shape["cos"][0] != 0.0:
        raise ConfigError("family shapes must have zero mean; put the mean in 'mean'", f"{where}.shape")
    has_shape = any(shape["cos"][1:]) or any(shape["sin"])
    freq = obj.get("freq", {"mult": 1, "offset": 0})
    if isinstance(freq, int) and not isinstance(freq, bool):
        freq = {"mult": 0, "offset": freq}
    _check_keys(freq, {"mult", "offset"}, f"{where}.freq")
    return {"mean": mean_out, "amp": _scaling(obj.get("amp"), f"{where}.amp", 1.0 if has_shape else 0.0),
            "shape": shape,
            "freq": {"mult": _int(freq.get("mult", 0), f"{where}.freq.mult"),
                     "offset": _int(freq.get("offset", 0), f"{where}.freq.offset")}}


# ------------------------------------------------------------------ config

@dataclass(frozen=True)
class RunConfig:
    operator: Optional[dict] = None
    family: Optional[dict] = None
    jmax: int = DEFAULT_JMAX
    grid_points: int = DEFAULT_GRID
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(_TOLERANCE_DEFAULTS))
    solve: dict = field(default_factory=lambda: dict(_SECTION_DEFAULTS["solve"]))
    witness: dict = field(default_factory=lambda: dict(_SECTION_DEFAULTS["witness"]))
    diophantine: dict = field(default_factory=lambda: dict(_SECTION_DEFAULTS["diophantine"]))
    conjugate: dict = field(default_factory=lambda: dict(_SECTION_DEFAULTS["conjugate"]))

    # ---- conversion

    @classmethod
    def from_dict(cls, raw: Any) -> "RunConfig":
        if raw is None:
            raw = {}
        _check_keys(raw, _TOP_KEYS, "<root>")
        kw: dict = {}
        if "operator" in raw:
            op = _check_keys(raw["operator"], _OPERATOR_KEYS, "operator")
            for req in ("b", "eigen"):
                if req not in op:
                    raise ConfigError(f"missing required key {req!r}", "operator")
            kw["operator"] = {
                "a": _trig(op.get("a", 0.0), "operator.a"),
                "b": _trig(op["b"], "operator.b"),
                "eigen": _eigen(op["eigen"], "operator.eigen"),
                "a0": _real_text(op["a0"], "operator.a0") if op.get("a0") is not None else None,
                "rhs": _rhs(op["rhs"], "operator.rhs") if op.get("rhs") is not None else None,
            }
        if "family" in raw:
            fam = _check_keys(raw["family"], {"a", "b"}, "family")
            kw["family"] = {k: _coefficient_family(fam.get(k, {}), f"family.{k}") for k in ("a", "b")}
        for key, minimum in (("jmax", 1), ("grid_points", 8), ("seed", 0)):
            if key in raw:
                kw[key] = _int(raw[key], key, minimum)
        if "tolerances" in raw:
            tol = _check_keys(raw["tolerances"], set(_TOLERANCE_DEFAULTS), "tolerances")
            kw["tolerances"] = {k: _num(tol.get(k, v), f"tolerances.{k}") for k, v in _TOLERANCE_DEFAULTS.items()}
        for section, defaults in _SECTION_DEFAULTS.items():
            if section in raw:
                kw[section] = _section(section, raw[section] or {}, defaults)
        return cls(**kw)

    def to_dict(self) -> dict:
        out = {"jmax": self.jmax, "grid_points": self.grid_points, "seed": self.seed,
               "tolerances": copy.deepcopy(self.tolerances)}
        if self.operator is not None:
            out["operator"] = {k: copy.deepcopy(v) for k, v in self.operator.items() if v is not None}
        if self.family is not None:
            out["family"] = copy.deepcopy(self.family)
        for section in _SECTION_DEFAULTS:
            out[section] = {k: v for k, v in getattr(self, section).items() if v is not None}
        return out

    def hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def with_overrides(self, jmax: Optional[int] = None, grid_points: Optional[int] = None,
                       seed: Optional[int] = None) -> "RunConfig":
        d = self.to_dict()
        if jmax is not None:
            d["jmax"] = jmax
        if grid_points is not None:
            d["grid_points"] = grid_points
        if seed is not None:
            d["seed"] = seed
        return RunConfig.from_dict(d)

    # ---- domain objects

    def operator_spec(self) -> OperatorSpec:
        if self.operator is None:
            raise ConfigError("this command needs an 'operator' section", "operator")
        op = self.operator
        eig = dict(op["eigen"])
        kind = eig.pop("kind")
        if kind == "explicit":
            eigen = explicit_eigen(eig["mu"], eig["nu"], eig.get("lam"), eig.get("mult"))
        else:
            eigen = eigen_generate(GeneratorSpec.make(kind, **eig), self.jmax)
        rhs = None
        if op.get("rhs") is not None:
            r = op["rhs"]
            rhs = RhsSpec(r["kind"], r["freq"], _trigpoly(r["shape"]), r["decay"])
        return OperatorSpec(_trigpoly(op["a"]), _trigpoly(op["b"]), eigen, rhs)

    def a0_spec(self):
        if self.operator is None or self.operator.get("a0") is None:
            return None
        return parse_real(self.operator["a0"])

    def mode_family(self) -> ModeFamily:
        if self.family is None:
            raise ConfigError("this command needs a 'family' section", "family")
        return ModeFamily(*(_family(self.family[k]) for k in ("a", "b")))


def _section(name: str, obj: Any, defaults: dict) -> dict:
    _check_keys(obj, set(defaults), name)
    out = dict(defaults)
    for key, val in obj.items():
        loc = f"{name}.{key}"
        if val is None:
            out[key] = None
        elif key in ("j_min", "j_max", "depth", "budget", "jrange", "witness_depth", "grid_points"):
            out[key] = _int(val, loc, 1)
        elif key == "a0":
            out[key] = _real_text(val, loc)
        elif key == "mu":
            if val != "j" and val != "eigen":
                raise ConfigError("mu must be 'j' or 'eigen'", loc)
            out[key] = val
        elif key == "kind":
            allowed = ("auto", "sign-change", "resonant", "liouville", "cspil")
            if val not in allowed:
                raise ConfigError(f"kind must be one of {list(allowed)}", loc)
            out[key] = val
        elif key == "u":
            if val not in ("random", "ones"):
                raise ConfigError("u must be 'random' or 'ones'", loc)
            out[key] = val
        else:
            out[key] = val
    return out


def _trigpoly(d: dict) -> TrigPoly:
    return TrigPoly(tuple(d["cos"]), tuple(d["sin"]))


def _family(d: dict) -> CoefficientFamily:
    mean = d["mean"]
    exact = None
    if isinstance(mean, str):
        exact = parse_real(mean)
        rule = ScalingRule.constant(float(exact))
    else:
        rule = ScalingRule(mean["coef"], mean["power"], mean["log_power"])
    amp = ScalingRule(d["amp"]["coef"], d["amp"]["power"], d["amp"]["log_power"])
    return CoefficientFamily(rule, amp, _trigpoly(d["shape"]), FrequencyRule(d["freq"]["mult"], d["freq"]["offset"]),
                             exact)


# --------------------------------------------------------------------- I/O

def load_text(text: str) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ""
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", where) from None
    return RunConfig.from_dict(raw)


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(p)) from None
    return load_text(text)


def dump_text(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)
