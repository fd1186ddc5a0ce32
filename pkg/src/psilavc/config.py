"""Run configuration: dataclasses plus a flat ``section.key=value`` file format."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import AvcError, ConfigurationError
from .isolation import IsolationParams, Mode
from .meter import DEFAULT_FLOOR_DB
from .prefs import DEFAULT_LATENCY_S, DEFAULT_WINDOW, FACTORY_FLOOR_DB, ListenerPrefs
from .solver import DEFAULT_DAMPING, DEFAULT_DEADBAND_DB, DEFAULT_OMEGA0, SolverParams
from .spectrum import DEFAULT_TOLERANCE, FftDesign, design_fft


@dataclass
class FftConfig:
    n: int = 128
    s: float = 5600.0
    window: str = "rect"
    tolerance: float = DEFAULT_TOLERANCE


@dataclass
class SolverConfig:
    omega0: float = DEFAULT_OMEGA0
    damping: float = DEFAULT_DAMPING
    deadband_db: float = DEFAULT_DEADBAND_DB
    adaptive: bool = False
    adaptive_k: float = 1.5
    adaptive_window: int = 22
    ceiling_db: float | None = None


@dataclass
class PrefsConfig:
    window: int = DEFAULT_WINDOW
    latency: float = DEFAULT_LATENCY_S
    sil_threshold: float = math.inf
    factory_floor_db: float = FACTORY_FLOOR_DB
    startup_volume_db: float = 50.0
    settle_s: float = 1.0


@dataclass
class MeterConfig:
    floor_db: float = DEFAULT_FLOOR_DB
    offset_db: float = 0.0


@dataclass
class IsolationConfig:
    max_lag: int = 8
    gain_lo: float = 0.25
    gain_hi: float = 4.0
    mode: Mode = "continuous"
    smoothing: float = 0.2
    bypass: bool = False


@dataclass
class Config:
    fft: FftConfig = field(default_factory=FftConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    prefs: PrefsConfig = field(default_factory=PrefsConfig)
    meter: MeterConfig = field(default_factory=MeterConfig)
    isolation: IsolationConfig = field(default_factory=IsolationConfig)
    seed: int = 0

    def design(self) -> FftDesign:
        return design_fft(self.fft.n, self.fft.s)

    def solver_params(self, floor_db: float | None = None) -> SolverParams:
        sc = self.solver
        return SolverParams(
            omega0=sc.omega0,
            damping=sc.damping,
            deadband_db=sc.deadband_db,
            floor_db=self.prefs.factory_floor_db if floor_db is None else floor_db,
            dt=self.design().cycle_period,
            adaptive=sc.adaptive,
            adaptive_k=sc.adaptive_k,
            adaptive_window=sc.adaptive_window,
            ceiling_db=sc.ceiling_db,
        )

    def listener_prefs(self) -> ListenerPrefs:
        p = self.prefs
        return ListenerPrefs(
            floor_db=p.factory_floor_db, sil_threshold=p.sil_threshold, latency=p.latency, window=p.window
        )

    def isolation_params(self) -> IsolationParams:
        i = self.isolation
        return IsolationParams(i.max_lag, i.gain_lo, i.gain_hi, i.smoothing, i.bypass)

    def validate(self) -> "Config":
        """Build every derived object once so bad values fail at load time."""
        checks = {
            "fft": self.design,
            "solver": self.solver_params,
            "prefs": self.listener_prefs,
            "isolation": self.isolation_params,
        }
        for section, build in checks.items():
            try:
                build()
            except (AvcError, ValueError) as exc:
                raise ConfigurationError(f"[{section}] {exc}") from None
        if self.fft.window not in ("rect", "hann"):
            raise ConfigurationError(f"fft.window must be 'rect' or 'hann', got {self.fft.window!r}")
        if self.isolation.mode not in ("startup_only", "continuous"):
            raise ConfigurationError(f"isolation.mode must be startup_only or continuous, got {self.isolation.mode!r}")
        if not 0 <= self.isolation.max_lag < self.fft.n / 4:
            raise ConfigurationError(f"isolation.max_lag must be in [0, fft.n/4), got {self.isolation.max_lag}")
        return self


def _convert(key: str, raw: str, annotation: str):
    raw = raw.strip()
    if "bool" in annotation:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"{key}: expected a boolean, got {raw!r}")
    if "None" in annotation and raw.lower() in ("", "none"):
        return None
    try:
        if annotation.startswith("int"):
            return int(raw)
        if annotation.startswith("float"):
            return float(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {raw!r} as {annotation}") from None
    return raw


def apply_override(cfg: Config, key: str, raw: str) -> None:
    """Set ``section.field`` (or top-level ``seed``) from a string."""
    key = key.strip()
    parts = key.split(".")
    target, name = cfg, parts[-1]
    if len(parts) == 2:
        target = getattr(cfg, parts[0], None)
        if not dataclasses.is_dataclass(target):
            raise ConfigurationError(f"unknown config section in {key!r}")
    elif len(parts) != 1:
        raise ConfigurationError(f"bad config key {key!r}")
    fields = {f.name: f for f in dataclasses.fields(target)}
    if name not in fields or dataclasses.is_dataclass(getattr(target, name)):
        raise ConfigurationError(f"unknown config key {key!r}")
    annotation = str(fields[name].type)
    setattr(target, name, _convert(key, raw, annotation))


def load_config(path: str | Path | None = None, overrides: list[str] = ()) -> Config:
    cfg = Config()
    if path is not None:
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigurationError(f"config line {lineno}: expected key=value")
            apply_override(cfg, key, value)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"override {item!r} is not key=value")
        apply_override(cfg, key, value)
    return cfg.validate()
