"""JSON run configurations, one object per subcommand.

Every field has a default, so ``{}`` is a valid configuration for each
subcommand.  Parsing validates eagerly: the CFL bound, subcriticality of
``beta`` and the shape of sweep grids are checked before any run starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ParseError, ValidationError
from .interface_solver import SimConfig
from .phi import PhiModel, beta_critical, phi0_table
from .traveling_wave import WaveParams

SIMULATE = "simulate"
GRAPH = "graph-simulate"
CONVERGE = "converge"
DRIFT = "drift-sweep"
WAVE = "traveling-wave"
PHI_TABLE = "phi-table"
SUBCOMMANDS = (SIMULATE, GRAPH, CONVERGE, DRIFT, WAVE, PHI_TABLE)

INITIAL_KINDS = ("four_ellipse", "ellipse", "circle", "csv")
U0_KINDS = ("cosine", "csv")


def load_json(path: str | Path) -> dict:
    """Read a JSON object; syntax errors become :class:`ParseError` with line and column."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}:1:1: top level must be a JSON object")
    return data


def model_from_dict(data: dict | str | None) -> PhiModel:
    """``gaussian``, an explicit ``table``, or ``phi0`` (tabulated on the fly)."""
    if data is None:
        return PhiModel.gaussian()
    if isinstance(data, str):
        data = {"variant": data}
    variant = data.get("variant", "gaussian")
    if variant == "phi0":
        extra = set(data) - {"variant", "v_min", "v_max", "k"}
        if extra:
            raise ValidationError(f"unknown model keys {sorted(extra)}")
        return phi0_table(float(data.get("v_min", -5.0)), float(data.get("v_max", 5.0)),
                          int(data.get("k", 129)))
    if variant not in ("gaussian", "table"):
        raise ValidationError(f"model variant must be gaussian, table or phi0, got {variant!r}")
    return PhiModel.from_dict(data)


def _checked(cls, data: dict, convert: dict):
    names = {f.name for f in fields(cls)}
    extra = set(data) - names
    if extra:
        raise ValidationError(f"unknown keys for {cls.__name__}: {sorted(extra)}")
    kwargs = {}
    for k, v in data.items():
        try:
            kwargs[k] = convert[k](v) if k in convert and v is not None else v
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"{k}: {exc}") from None
    return cls(**kwargs)


def sim_config_from_dict(data: dict) -> SimConfig:
    data = dict(data)
    model = model_from_dict(data.pop("model", None))
    conv = {"n": int, "dt": float, "t_end": float, "beta": float, "tol": float,
            "max_fixed_point_iters": int, "max_area_iters": int, "reparam_every": int,
            "area_gain": float, "snapshot_stride": int}
    names = {f.name for f in fields(SimConfig)} - {"model"}
    extra = set(data) - names
    if extra:
        raise ValidationError(f"unknown keys for SimConfig: {sorted(extra)}")
    try:
        kwargs = {k: (conv[k](v) if v is not None else None) for k, v in data.items()}
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from None
    return SimConfig(model=model, **kwargs)


def _split(data: dict, own: set) -> tuple[dict, dict]:
    mine = {k: v for k, v in data.items() if k in own}
    rest = {k: v for k, v in data.items() if k not in own}
    return mine, rest


@dataclass(frozen=True)
class SimulateSettings:
    """Solver settings plus the initial curve (``four_ellipse``, ``ellipse``, ``circle`` or ``csv``)."""

    config: SimConfig = field(default_factory=SimConfig)
    initial: dict = field(default_factory=lambda: {"kind": "four_ellipse", "zeta": 2.0})

    def __post_init__(self):
        kind = self.initial.get("kind")
        if kind not in INITIAL_KINDS:
            raise ValidationError(f"initial.kind must be one of {INITIAL_KINDS}, got {kind!r}")
        if kind == "csv" and "path" not in self.initial:
            raise ValidationError("initial.kind = csv needs a path")

    @classmethod
    def from_dict(cls, data: dict) -> "SimulateSettings":
        own, rest = _split(data, {"initial"})
        initial = own.get("initial", {"kind": "four_ellipse", "zeta": 2.0})
        if not isinstance(initial, dict):
            raise ValidationError("initial must be an object")
        return cls(sim_config_from_dict(rest), dict(initial))

    def to_dict(self) -> dict:
        return {**self.config.to_dict(), "initial": dict(self.initial)}


@dataclass(frozen=True)
class GraphSettings:
    """Graph flow on a circular chart; ``dt`` defaults to ``h^2 / 2`` with ``h = 1 / n``."""

    config: SimConfig = field(default_factory=lambda: SimConfig(n=256, beta=0.5, t_end=1.0))
    R: float = 1.0
    delta0: float | None = None
    u0: dict = field(default_factory=lambda: {"kind": "cosine", "amplitude": 0.1, "mode": 2})
    checkpoints: int = 5

    def __post_init__(self):
        kind = self.u0.get("kind")
        if kind not in U0_KINDS:
            raise ValidationError(f"u0.kind must be one of {U0_KINDS}, got {kind!r}")
        if self.checkpoints < 1:
            raise ValidationError("checkpoints must be >= 1")
        if not self.R > 0:
            raise ValidationError("R must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "GraphSettings":
        own, rest = _split(data, {"R", "delta0", "u0", "checkpoints"})
        rest = {"n": 256, "beta": 0.5, "t_end": 1.0, **rest}
        kw = {}
        if "R" in own:
            kw["R"] = float(own["R"])
        if own.get("delta0") is not None:
            kw["delta0"] = float(own["delta0"])
        if "u0" in own:
            kw["u0"] = dict(own["u0"])
        if "checkpoints" in own:
            kw["checkpoints"] = int(own["checkpoints"])
        return cls(sim_config_from_dict(rest), **kw)

    def to_dict(self) -> dict:
        return {**self.config.to_dict(), "R": self.R, "delta0": self.delta0, "u0": dict(self.u0),
                "checkpoints": self.checkpoints}


@dataclass(frozen=True)
class ConvergeSettings:
    zeta: float = 2.0
    beta: float = 1.0
    T: float = 20.0
    Ns: tuple = (32, 64, 128, 256, 512)
    base: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self):
        Ns = sorted(self.Ns)
        if len(Ns) < 2 or any(b != 2 * a for a, b in zip(Ns, Ns[1:])):
            raise ValidationError("Ns must be a doubling sequence of length >= 2")
        bcr = beta_critical(self.base.model)
        if not 0 <= self.beta < bcr:
            raise ValidationError(f"beta = {self.beta} outside [0, beta_cr = {bcr:.6g})")

    @classmethod
    def from_dict(cls, data: dict) -> "ConvergeSettings":
        own, rest = _split(data, {"zeta", "beta", "T", "Ns"})
        kw = {}
        for k in ("zeta", "beta", "T"):
            if k in own:
                kw[k] = float(own[k])
        if "Ns" in own:
            kw["Ns"] = tuple(int(n) for n in own["Ns"])
        return cls(base=sim_config_from_dict(rest), **kw)

    def to_dict(self) -> dict:
        return {**self.base.to_dict(), "zeta": self.zeta, "beta": self.beta, "T": self.T,
                "Ns": list(self.Ns)}


@dataclass(frozen=True)
class DriftSettings:
    """``mode = beta`` sweeps ``betas`` at fixed ``zeta``; ``mode = zeta`` sweeps ``zetas`` at fixed ``beta``."""

    mode: str = "beta"
    zeta: float = 1.0
    betas: tuple = (0.2, 0.4, 0.6, 0.8, 1.0)
    beta: float = 1.0
    zetas: tuple = (1.0, 1.5, 2.0, 2.5, 3.0)
    base: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self):
        if self.mode not in ("beta", "zeta"):
            raise ValidationError(f"mode must be 'beta' or 'zeta', got {self.mode!r}")
        bcr = beta_critical(self.base.model)
        for b in (*self.betas, self.beta):
            if not 0 <= b < bcr:
                raise ValidationError(f"beta = {b} outside [0, beta_cr = {bcr:.6g})")
        for z in (*self.zetas, self.zeta):
            if not 0 < z < 4:
                raise ValidationError(f"zeta = {z} outside (0, 4)")

    @classmethod
    def from_dict(cls, data: dict) -> "DriftSettings":
        own, rest = _split(data, {"mode", "zeta", "betas", "beta", "zetas"})
        kw = {}
        if "mode" in own:
            kw["mode"] = str(own["mode"])
        for k in ("zeta", "beta"):
            if k in own:
                kw[k] = float(own[k])
        for k in ("betas", "zetas"):
            if k in own:
                kw[k] = tuple(float(v) for v in own[k])
        return cls(base=sim_config_from_dict(rest), **kw)

    def to_dict(self) -> dict:
        return {**self.base.to_dict(), "mode": self.mode, "zeta": self.zeta, "betas": list(self.betas),
                "beta": self.beta, "zetas": list(self.zetas)}


@dataclass(frozen=True)
class WaveSettings:
    """One shooting run, or a grid when ``sweep`` holds lists ``c``, ``lambda`` and ``beta``."""

    params: WaveParams = field(default_factory=lambda: WaveParams(c=1.0, lam=1.0, beta=1.0))
    sweep: dict | None = None

    def __post_init__(self):
        if self.sweep is not None:
            missing = {"c", "lambda", "beta"} - set(self.sweep)
            if missing:
                raise ValidationError(f"sweep needs lists for {sorted(missing)}")
            bcr = beta_critical(self.params.model)
            for b in self.sweep["beta"]:
                if not 0 <= b < bcr:
                    raise ValidationError(f"beta = {b} outside [0, beta_cr = {bcr:.6g})")

    @classmethod
    def from_dict(cls, data: dict) -> "WaveSettings":
        extra = set(data) - {"c", "lambda", "beta", "model", "sweep"}
        if extra:
            raise ValidationError(f"unknown keys for WaveSettings: {sorted(extra)}")
        try:
            p = WaveParams(c=float(data.get("c", 1.0)), lam=float(data.get("lambda", 1.0)),
                           beta=float(data.get("beta", 1.0)), model=model_from_dict(data.get("model")))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(str(exc)) from None
        sweep = data.get("sweep")
        if sweep is not None:
            sweep = {k: [float(v) for v in vals] for k, vals in sweep.items()}
        return cls(p, sweep)

    def to_dict(self) -> dict:
        p = self.params
        out = {"c": p.c, "lambda": p.lam, "beta": p.beta, "model": p.model.to_dict()}
        if self.sweep is not None:
            out["sweep"] = {k: list(v) for k, v in self.sweep.items()}
        return out


@dataclass(frozen=True)
class PhiTableSettings:
    v_min: float = -5.0
    v_max: float = 5.0
    k: int = 129
    Z: float = 20.0
    m: int = 4001

    def __post_init__(self):
        if not self.v_min < 0 < self.v_max:
            raise ValidationError("the table grid must straddle V = 0")
        if self.k < 33:
            raise ValidationError(f"k = {self.k} < 33")
        if self.m < 3 or self.m % 2 == 0:
            raise ValidationError(f"m = {self.m} must be odd and >= 3")
        if not self.Z > 0:
            raise ValidationError("Z must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "PhiTableSettings":
        return _checked(cls, data, {"v_min": float, "v_max": float, "k": int, "Z": float, "m": int})

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


SETTINGS = {SIMULATE: SimulateSettings, GRAPH: GraphSettings, CONVERGE: ConvergeSettings, DRIFT: DriftSettings,
         WAVE: WaveSettings, PHI_TABLE: PhiTableSettings}


def config_from_dict(data: dict, kind: str = SIMULATE):
    if kind not in SETTINGS:
        raise ValidationError(f"unknown subcommand {kind!r}")
    return SETTINGS[kind].from_dict(data)


def parse_config(path: str | Path | None, kind: str = SIMULATE):
    """Load and validate the configuration for subcommand ``kind``.

    ``path = None`` yields the defaults.

    Raises
    ------
    ParseError
        Malformed JSON, annotated with ``path:line:col``.
    ValidationError
        A value violates an invariant, for example ``dt/h^2 > 0.5`` or a
        supercritical ``beta``.
    """
    data = {} if path is None else load_json(path)
    return config_from_dict(data, kind)


def serialize_config(settings) -> str:
    return json.dumps(settings.to_dict(), indent=1, sort_keys=True)
