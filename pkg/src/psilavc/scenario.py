"""Synthetic SIL scenarios: stepped background, jitter and triangular spikes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .meter import DEFAULT_FLOOR_DB, band_partition
from .spectrum import FftDesign


@dataclass(frozen=True)
class Spike:
    start: float
    duration: float
    peak_delta: float
    shape: str = "triangular"

    def contribution(self, t: np.ndarray) -> np.ndarray:
        # linear rise to the peak at mid-duration, linear fall back to zero
        x = (np.asarray(t, dtype=float) - self.start) / self.duration
        inside = (x >= 0.0) & (x <= 1.0)
        return np.where(inside, self.peak_delta * (1.0 - np.abs(2.0 * x - 1.0)), 0.0)


@dataclass(frozen=True)
class Scenario:
    segments: tuple[tuple[float, float], ...]  # (level dB, duration s)
    fluctuation_db: float = 0.0
    spikes: tuple[Spike, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if not self.segments:
            raise ConfigurationError("scenario needs at least one segment")
        if any(d <= 0 for _, d in self.segments):
            raise ConfigurationError("segment durations must be positive")
        if self.fluctuation_db < 0:
            raise ConfigurationError("fluctuation_db must be >= 0")
        total = self.duration
        for sp in self.spikes:
            if sp.shape != "triangular":
                raise ConfigurationError(f"unsupported spike shape {sp.shape!r}")
            if sp.duration <= 0 or sp.start < 0 or sp.start + sp.duration > total:
                raise ConfigurationError(f"spike {sp} does not fit in {total:g} s")

    @property
    def duration(self) -> float:
        return math.fsum(d for _, d in self.segments)

    def boundaries(self) -> list[float]:
        """Start time of every segment after the first."""
        return list(np.cumsum([d for _, d in self.segments])[:-1])

    def background(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        levels = np.array([lv for lv, _ in self.segments])
        edges = np.cumsum([d for _, d in self.segments])
        idx = np.minimum(np.searchsorted(edges, t, side="right"), len(levels) - 1)
        return levels[idx]


# Background staircase is a stand-in; only the spikes and jitter are pinned.
DEFAULT_SEGMENTS = ((35.0, 4.0), (45.0, 6.0), (38.0, 6.0), (42.0, 4.0))
DEFAULT_SPIKES = (Spike(8.0, 0.5, 20.0), Spike(14.0, 0.25, 20.0))


def canonical_scenario(seed: int = 0, segments=DEFAULT_SEGMENTS) -> Scenario:
    return Scenario(tuple(segments), fluctuation_db=1.0, spikes=DEFAULT_SPIKES, seed=seed)


def period_times(sc: Scenario, dt: float) -> np.ndarray:
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    n = int(math.floor(sc.duration / dt + 1e-9))
    return np.arange(n) * dt


def generate_sil_trace(sc: Scenario, dt: float) -> np.ndarray:
    t = period_times(sc, dt)
    sil = sc.background(t)
    if sc.fluctuation_db > 0:
        rng = np.random.default_rng(sc.seed)
        sil = sil + rng.uniform(-sc.fluctuation_db, sc.fluctuation_db, len(t))
    for sp in sc.spikes:
        sil = sil + sp.contribution(t)
    return sil


def noise_block(
    level_db: float,
    design: FftDesign,
    rng: np.random.Generator,
    offset_db: float = 0.0,
    floor_db: float = DEFAULT_FLOOR_DB,
) -> np.ndarray:
    """One block of random-phase noise, flat over the PSIL bins, whose PSIL is ``level_db``.

    Every PSIL bin gets the same power p and the band levels are
    10*log10(size_k * p), so p follows from the geometric mean of the band
    sizes. Blocks at or below ``floor_db`` are silent.
    """
    n = design.n_samples
    if level_db <= floor_db:
        return np.zeros(n)
    part = band_partition(design)
    sizes = np.array(part.sizes, dtype=float)
    p = 10.0 ** ((level_db - offset_db) / 10.0) / np.exp(np.mean(np.log(sizes)))
    X = np.zeros(n // 2 + 1, dtype=complex)
    bins = np.concatenate([np.arange(r.start, r.stop) for r in part.ranges])
    phase = rng.uniform(0.0, 2.0 * np.pi, len(bins))
    X[bins] = n * np.sqrt(p / 2.0) * np.exp(1j * phase)
    if bins[-1] == n // 2:
        # Nyquist has no conjugate twin, so it must be real and carry p alone
        X[n // 2] = n * np.sqrt(p) * np.sign(np.cos(phase[-1]) or 1.0)
    return np.fft.irfft(X, n)


def synthesize_noise_audio(
    sc: Scenario, design: FftDesign, offset_db: float = 0.0, floor_db: float = DEFAULT_FLOOR_DB
) -> np.ndarray:
    """Sample stream whose blockwise PSIL follows ``generate_sil_trace``.

    Each block draws its phases from its own generator keyed on (seed,
    period), so any block can be regenerated alone.
    """
    sil = generate_sil_trace(sc, design.cycle_period)
    blocks = [
        noise_block(s, design, np.random.default_rng([sc.seed, i]), offset_db, floor_db)
        for i, s in enumerate(sil)
    ]
    return np.concatenate(blocks) if blocks else np.zeros(0)


# --- scenario file -------------------------------------------------------------

def _floats(value: str, count: int, lineno: int, key: str) -> list[float]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) < count:
        raise ConfigurationError(f"line {lineno}: {key}= needs {count} comma-separated values")
    try:
        return [float(p) for p in parts[:count]]
    except ValueError:
        raise ConfigurationError(f"line {lineno}: {key}= has a non-numeric value: {value!r}") from None


def parse_scenario(text: str) -> Scenario:
    """Parse ``key=value`` lines.

    Recognized keys: ``segment=<level_db>,<duration_s>`` (repeatable),
    ``spike=<start_s>,<duration_s>,<peak_db>[,triangular]`` (repeatable),
    ``fluctuation=<db>`` and ``seed=<int>``. ``#`` starts a comment.
    """
    segments, spikes = [], []
    fluct, seed = 0.0, 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not value:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        if key == "segment":
            lv, dur = _floats(value, 2, lineno, key)
            segments.append((lv, dur))
        elif key == "spike":
            start, dur, peak = _floats(value, 3, lineno, key)
            extra = [p.strip() for p in value.split(",")[3:]]
            shape = extra[0] if extra else "triangular"
            if shape != "triangular":
                raise ConfigurationError(f"line {lineno}: unsupported spike shape {shape!r}")
            spikes.append(Spike(start, dur, peak, shape))
        elif key == "fluctuation":
            (fluct,) = _floats(value, 1, lineno, key)
        elif key == "seed":
            try:
                seed = int(value)
            except ValueError:
                raise ConfigurationError(f"line {lineno}: seed must be an integer") from None
        else:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
    return Scenario(tuple(segments), fluct, tuple(spikes), seed)


def format_scenario(sc: Scenario) -> str:
    lines = [f"seed={sc.seed}", f"fluctuation={sc.fluctuation_db:g}"]
    lines += [f"segment={lv:g},{d:g}" for lv, d in sc.segments]
    lines += [f"spike={s.start:g},{s.duration:g},{s.peak_delta:g},{s.shape}" for s in sc.spikes]
    return "\n".join(lines) + "\n"


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def bundled_scenario_path(name: str = "canonical") -> Path:
    return Path(__file__).parent / "data" / f"{name}.scenario"


@dataclass(frozen=True)
class VolumeChange:
    t: float
    volume_db: float


def parse_events(text: str) -> list[VolumeChange]:
    """One ``t=<seconds> volume=<dB>`` per line; times must not decrease."""
    out: list[VolumeChange] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = dict(tok.partition("=")[::2] for tok in line.split())
        try:
            ev = VolumeChange(float(fields["t"]), float(fields["volume"]))
        except (KeyError, ValueError):
            raise ConfigurationError(f"events line {lineno}: expected 't=<s> volume=<dB>', got {raw.strip()!r}") from None
        if out and ev.t < out[-1].t:
            raise ConfigurationError(f"events line {lineno}: time goes backwards")
        out.append(ev)
    return out


@dataclass
class Adjustment:
    """A run of volume changes with less than ``settle`` seconds between them."""

    changes: list[VolumeChange] = field(default_factory=list)

    @property
    def start(self) -> float:
        return self.changes[0].t

    @property
    def end(self) -> float:
        return self.changes[-1].t

    @property
    def final_volume(self) -> float:
        return self.changes[-1].volume_db


def group_adjustments(changes: list[VolumeChange], settle: float = 1.0) -> list[Adjustment]:
    groups: list[Adjustment] = []
    for ch in changes:
        if groups and ch.t - groups[-1].end < settle:
            groups[-1].changes.append(ch)
        else:
            groups.append(Adjustment([ch]))
    return groups
