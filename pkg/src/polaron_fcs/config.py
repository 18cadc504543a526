"""Run configuration: a flat INI file with [bath], [protocol], [solver], [cf], [dist] and [run] sections."""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .bath import BathParams
from .evolve import SolverOptions
from .system import DriveProtocol, Frame
from .workdist import WINDOWS


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class CFSettings:
    delta_eta: float = 0.05
    eta_max: float = 500.0


@dataclass
class DistSettings:
    delta_w: float = 0.05
    window: str = "rectangular"
    w_min: float | None = None
    w_max: float | None = None


@dataclass
class RunSettings:
    frame: str = "polaron"
    output_dir: str = "output"
    threads: int = 1
    table_points: int = 512


@dataclass
class RunConfig:
    """Defaults reproduce the benchmark parameter set (strong coupling, slow sweep)."""

    bath: BathParams = field(default_factory=lambda: BathParams(alpha=0.4, omega_c=10.0, beta=1.0))
    protocol: DriveProtocol = field(default_factory=lambda: DriveProtocol(nu=0.1, t_i=-100.0, t_f=100.0))
    solver: SolverOptions = field(default_factory=SolverOptions)
    cf: CFSettings = field(default_factory=CFSettings)
    dist: DistSettings = field(default_factory=DistSettings)
    run: RunSettings = field(default_factory=RunSettings)

    SECTIONS = ("bath", "protocol", "solver", "cf", "dist", "run")

    @property
    def frame(self) -> Frame:
        return Frame.parse(self.run.frame)

    def to_dict(self):
        return {name: asdict(getattr(self, name)) for name in self.SECTIONS}

    def to_ini(self, path):
        parser = configparser.ConfigParser()
        for section, values in self.to_dict().items():
            parser[section] = {k: ("" if v is None else repr(v) if isinstance(v, float) else str(v))
                               for k, v in values.items()}
        path = Path(path)
        with path.open("w") as fh:
            parser.write(fh)
        return path


_TYPES = {
    "bath": BathParams, "protocol": DriveProtocol, "solver": SolverOptions,
    "cf": CFSettings, "dist": DistSettings, "run": RunSettings,
}


def _convert(section, name, raw, default):
    if raw is None:
        return default
    text = str(raw).strip()
    try:
        if isinstance(default, bool):
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float) or (default is None and section == "dist"):
            return None if text == "" else float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"[{section}] {name}: {exc}") from None


def build_config(values: dict) -> RunConfig:
    """Build and validate a RunConfig from nested {section: {key: raw}} values."""
    base = RunConfig()
    parts = {}
    for section in RunConfig.SECTIONS:
        cls = _TYPES[section]
        given = dict(values.get(section, {}))
        default_obj = getattr(base, section)
        names = {f.name for f in fields(cls)}
        unknown = set(given) - names
        if unknown:
            raise ConfigError(f"[{section}] unknown keys: {', '.join(sorted(unknown))}")
        kwargs = {f.name: _convert(section, f.name, given.get(f.name), getattr(default_obj, f.name))
                  for f in fields(cls)}
        try:
            parts[section] = cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] {exc}") from None
    unknown_sections = set(values) - set(RunConfig.SECTIONS)
    if unknown_sections:
        raise ConfigError(f"unknown sections: {', '.join(sorted(unknown_sections))}")
    cfg = RunConfig(**parts)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    try:
        Frame.parse(cfg.run.frame)
    except ValueError as exc:
        raise ConfigError(f"[run] frame: {exc}") from None
    if cfg.run.threads < 1:
        raise ConfigError("[run] threads must be >= 1")
    if cfg.run.table_points < 64:
        raise ConfigError("[run] table_points must be >= 64")
    if not cfg.cf.delta_eta > 0 or not cfg.cf.eta_max > 0:
        raise ConfigError("[cf] delta_eta and eta_max must be > 0")
    n = round(cfg.cf.eta_max / cfg.cf.delta_eta)
    if abs(n * cfg.cf.delta_eta - cfg.cf.eta_max) > 1e-9 * cfg.cf.eta_max:
        raise ConfigError("[cf] eta_max must be an integer multiple of delta_eta")
    if not cfg.dist.delta_w > 0:
        raise ConfigError("[dist] delta_w must be > 0")
    if cfg.dist.window not in WINDOWS:
        raise ConfigError(f"[dist] window must be one of {WINDOWS}")
    if (cfg.dist.w_min is None) != (cfg.dist.w_max is None):
        raise ConfigError("[dist] give both w_min and w_max, or neither")
    if cfg.dist.w_min is not None and not cfg.dist.w_min < cfg.dist.w_max:
        raise ConfigError("[dist] w_min must be below w_max")


def load_config(path=None, overrides=()) -> RunConfig:
    """Read an INI file (optional) and apply ``section.key=value`` overrides."""
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        for section in parser.sections():
            values[section] = dict(parser[section])
    for item in overrides:
        key, sep, raw = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        values.setdefault(section, {})[name] = raw
    return build_config(values)
