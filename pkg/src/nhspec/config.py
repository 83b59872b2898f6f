"""Run configuration: a YAML file validated against a fixed schema.

Example::

    units: rad/us
    seed: 0
    model: {kind: mrm, params: {J1: 0.315, J2: 0.098, J3: 0.122, mz: 0.035, gamma: 0.092}}
    probe: {omega: 0.019, t: 200.0, n0: 1.0}
    deltas: {start: -0.6, stop: 0.6, num: 61}
    k_grid: {num: 41}
    noise: {shots: 1000, reps: 20, gamma_fluct: 0.2, dephasing_t2: null}
    topology: {eb: null, grid_refine: 1}
    output: {dir: out}

``units`` is mandatory and must be ``rad/us``: every energy and rate is an
angular frequency in rad/us and every time is in us. The k grid is uniform
on [0, 2 pi] with both end points included. ``noise: null`` gives noiseless
spectra. The optional ``validate`` block configures the six-level checks.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .models import GAMMA_E_YB, LkParams, MrmParams, ProbeConfig, TwoBandParams
from .spectroscopy import NoiseModel

UNITS = "rad/us"
MODEL_PARAMS = {
    "mrm": ("J1", "J2", "J3", "mz", "gamma"),
    "lk": ("mx", "g1", "g2", "g3", "gamma0"),
    "generic": ("c", "d_re", "d_im"),
}
TOP_KEYS = ("units", "seed", "model", "probe", "deltas", "k_grid", "noise",
            "topology", "validate", "output")
REQUIRED = ("units", "model", "probe")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict

    def build(self):
        p = self.params
        if self.kind == "mrm":
            return MrmParams(**p)
        if self.kind == "lk":
            return LkParams(**p)
        return TwoBandParams(c=p["c"], d=complex(p["d_re"], p["d_im"]))


@dataclass(frozen=True)
class ProbeSpec:
    omega: float = 0.019
    t: float = 200.0
    n0: float = 1.0

    def build(self) -> ProbeConfig:
        return ProbeConfig(omega=self.omega, t=self.t, n0=self.n0)


@dataclass(frozen=True)
class GridSpec:
    start: float = -0.6
    stop: float = 0.6
    num: int = 61

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


@dataclass(frozen=True)
class KGridSpec:
    num: int = 41

    def values(self, refine: int = 1) -> np.ndarray:
        return np.linspace(0.0, 2.0 * np.pi, (self.num - 1) * refine + 1)


@dataclass(frozen=True)
class NoiseSpec:
    shots: int = 1000
    reps: int = 20
    gamma_fluct: float = 0.2
    dephasing_t2: float | None = None

    def build(self, seed: int) -> NoiseModel:
        return NoiseModel(shots=self.shots, reps=self.reps, gamma_fluct=self.gamma_fluct,
                          dephasing_t2=self.dephasing_t2, seed=seed)


@dataclass(frozen=True)
class TopologySpec:
    eb: tuple | None = None
    grid_refine: int = 1


@dataclass(frozen=True)
class ValidateSpec:
    k: float = 2.0 * math.pi / 5.0
    jl: float = 4.76
    gamma_e: float = GAMMA_E_YB
    dt: float = 1e-3
    threshold: float = 0.01
    gamma_e_scan: tuple = (61.5, 123.0, 246.0, 492.0)
    dephasing_t2: tuple = (200.0, 400.0, 800.0)
    gamma_fluct_reps: int = 20


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "out"


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    probe: ProbeSpec = field(default_factory=ProbeSpec)
    units: str = UNITS
    seed: int = 0
    deltas: GridSpec = field(default_factory=GridSpec)
    k_grid: KGridSpec = field(default_factory=KGridSpec)
    noise: NoiseSpec | None = field(default_factory=NoiseSpec)
    topology: TopologySpec = field(default_factory=TopologySpec)
    validate: ValidateSpec | None = None
    output: OutputSpec = field(default_factory=OutputSpec)

    def noise_model(self) -> NoiseModel | None:
        return None if self.noise is None else self.noise.build(self.seed)

    def to_dict(self) -> dict:
        d = {"units": self.units, "seed": self.seed}
        d["model"] = {"kind": self.model.kind, "params": dict(self.model.params)}
        d["probe"] = asdict(self.probe)
        d["deltas"] = asdict(self.deltas)
        d["k_grid"] = asdict(self.k_grid)
        d["noise"] = None if self.noise is None else asdict(self.noise)
        top = asdict(self.topology)
        top["eb"] = None if self.topology.eb is None else list(self.topology.eb)
        d["topology"] = top
        if self.validate is not None:
            v = asdict(self.validate)
            v["gamma_e_scan"] = list(self.validate.gamma_e_scan)
            v["dephasing_t2"] = list(self.validate.dephasing_t2)
            d["validate"] = v
        d["output"] = asdict(self.output)
        return d

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False)

    def with_updates(self, **changes) -> "RunConfig":
        return replace(self, **changes)


# ---------------------------------------------------------------- validation

def _number(value, where, integer=False, positive=False, allow_zero=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if integer and not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        raise ConfigError(f"{where}: must be {'non-negative' if allow_zero else 'positive'}")
    return value if integer else float(value)


def _mapping(raw, where, cls, required=()):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(raw).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    missing = [k for k in required if k not in raw]
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")
    return raw


def _parse_model(raw):
    _mapping(raw, "model", ModelSpec, required=("kind", "params"))
    kind = raw["kind"]
    if kind not in MODEL_PARAMS:
        raise ConfigError(f"model.kind: expected one of {sorted(MODEL_PARAMS)}, got {kind!r}")
    params = raw["params"]
    if not isinstance(params, dict):
        raise ConfigError("model.params: expected a mapping")
    names = MODEL_PARAMS[kind]
    if set(params) != set(names):
        raise ConfigError(f"model.params for {kind!r} must be exactly {list(names)}")
    spec = ModelSpec(kind, {n: _number(params[n], f"model.params.{n}") for n in names})
    try:
        spec.build()
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc
    return spec


def _parse_probe(raw):
    _mapping(raw, "probe", ProbeSpec)
    spec = ProbeSpec(**{k: _number(v, f"probe.{k}", positive=True) for k, v in raw.items()})
    try:
        spec.build()
    except ValueError as exc:
        raise ConfigError(f"probe: {exc}") from exc
    return spec


def _parse_deltas(raw):
    _mapping(raw, "deltas", GridSpec)
    out = {}
    for k, v in raw.items():
        out[k] = _number(v, f"deltas.{k}", integer=(k == "num"))
    spec = GridSpec(**out)
    if spec.num < 2 or spec.stop <= spec.start:
        raise ConfigError("deltas: need num >= 2 and stop > start")
    return spec


def _parse_kgrid(raw):
    _mapping(raw, "k_grid", KGridSpec)
    spec = KGridSpec(**{k: _number(v, f"k_grid.{k}", integer=True) for k, v in raw.items()})
    if spec.num < 8:
        raise ConfigError("k_grid.num must be >= 8")
    return spec


def _parse_noise(raw):
    if raw is None:
        return None
    _mapping(raw, "noise", NoiseSpec)
    out = {}
    for k, v in raw.items():
        if k == "dephasing_t2" and v is None:
            out[k] = None
        else:
            out[k] = _number(v, f"noise.{k}", integer=k in ("shots", "reps"), positive=True)
    spec = NoiseSpec(**out)
    try:
        spec.build(0)
    except ValueError as exc:
        raise ConfigError(f"noise: {exc}") from exc
    return spec


def _parse_topology(raw):
    _mapping(raw, "topology", TopologySpec)
    eb = raw.get("eb")
    if eb is not None:
        if not isinstance(eb, (list, tuple)) or len(eb) != 2:
            raise ConfigError("topology.eb: expected [re, im] or null")
        eb = tuple(_number(x, "topology.eb") for x in eb)
    refine = _number(raw.get("grid_refine", 1), "topology.grid_refine", integer=True)
    if refine < 1:
        raise ConfigError("topology.grid_refine must be >= 1")
    return TopologySpec(eb=eb, grid_refine=refine)


def _parse_validate(raw):
    if raw is None:
        return None
    _mapping(raw, "validate", ValidateSpec)
    out = {}
    for k, v in raw.items():
        if k in ("gamma_e_scan", "dephasing_t2"):
            if not isinstance(v, (list, tuple)) or not v:
                raise ConfigError(f"validate.{k}: expected a non-empty list")
            out[k] = tuple(_number(x, f"validate.{k}", positive=True, allow_zero=False) for x in v)
        else:
            out[k] = _number(v, f"validate.{k}", integer=(k == "gamma_fluct_reps"), positive=True)
    return ValidateSpec(**out)


def _parse_output(raw):
    _mapping(raw, "output", OutputSpec)
    d = raw.get("dir", "out")
    if not isinstance(d, str) or not d:
        raise ConfigError("output.dir: expected a non-empty string")
    return OutputSpec(dir=d)


def config_from_dict(raw) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at top level")
    unknown = sorted(set(raw) - set(TOP_KEYS))
    if unknown:
        raise ConfigError(f"unknown top-level keys {unknown}")
    missing = [k for k in REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing required keys {missing}")
    if raw["units"] != UNITS:
        raise ConfigError(f"units must be {UNITS!r}, got {raw['units']!r}")
    kw = {"units": UNITS, "model": _parse_model(raw["model"]),
          "probe": _parse_probe(raw["probe"])}
    if "seed" in raw:
        kw["seed"] = _number(raw["seed"], "seed", integer=True, positive=True)
    parsers = {"deltas": _parse_deltas, "k_grid": _parse_kgrid, "noise": _parse_noise,
               "topology": _parse_topology, "validate": _parse_validate, "output": _parse_output}
    for key, parse in parsers.items():
        if key in raw:
            kw[key] = parse(raw[key])
    return RunConfig(**kw)


def loads(text: str) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return config_from_dict(raw)


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def save(cfg: RunConfig, path) -> None:
    Path(path).write_text(cfg.dumps(), encoding="utf-8")
