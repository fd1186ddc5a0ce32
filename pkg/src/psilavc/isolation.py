"""Reference subtraction: separate ambient noise from the device's own output.

The microphone picks up both the speakers and the room. Given the signal
that was sent to the speakers (the reference), we find the lag and gain that
best align it with the microphone, then subtract. What is left over is the
noise estimate that feeds the meter.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .errors import ConfigurationError, ProcessingError

log = logging.getLogger(__name__)

Mode = Literal["startup_only", "continuous"]

DEFAULT_MAX_LAG = 8
DEFAULT_GAIN_RANGE = (0.25, 4.0)
DEFAULT_SMOOTHING = 0.2


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class SampleBlock:
    """N consecutive samples at ``rate`` Hz. Full scale is +/-1.0."""

    samples: np.ndarray
    rate: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1:
            raise ProcessingError("block must be one-dimensional")
        if not is_power_of_two(len(x)):
            raise ProcessingError(f"block length {len(x)} is not a power of 2")
        if not np.all(np.isfinite(x)):
            raise ProcessingError("block contains non-finite samples")
        if not self.rate > 0:
            raise ProcessingError(f"sample rate must be positive, got {self.rate}")
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return len(self.samples)

    def energy(self) -> float:
        return float(np.dot(self.samples, self.samples))


@dataclass(frozen=True)
class Calibration:
    lag: int = 0
    gain: float = 1.0
    mode: Mode = "startup_only"
    updates: int = 0  # number of blocks that have contributed an estimate

    def __post_init__(self):
        if self.mode not in ("startup_only", "continuous"):
            raise ConfigurationError(f"unknown calibration mode {self.mode!r}")


@dataclass(frozen=True)
class IsolationParams:
    max_lag: int = DEFAULT_MAX_LAG
    gain_lo: float = DEFAULT_GAIN_RANGE[0]
    gain_hi: float = DEFAULT_GAIN_RANGE[1]
    smoothing: float = DEFAULT_SMOOTHING
    bypass: bool = False  # two-microphone variant: the noise mic needs no subtraction

    def __post_init__(self):
        if self.max_lag < 0:
            raise ConfigurationError("isolation.max_lag must be >= 0")
        if not (0 < self.gain_lo <= 1.0 <= self.gain_hi):
            raise ConfigurationError(
                f"isolation gain range must satisfy 0 < lo <= 1 <= hi, got [{self.gain_lo}, {self.gain_hi}]"
            )
        if not (0 < self.smoothing <= 1):
            raise ConfigurationError("isolation.smoothing must be in (0, 1]")


def _check_pair(mic: SampleBlock, ref: SampleBlock) -> None:
    if len(mic) != len(ref) or mic.rate != ref.rate:
        raise ConfigurationError(
            f"mic ({len(mic)} @ {mic.rate} Hz) and reference ({len(ref)} @ {ref.rate} Hz) do not match"
        )


def shifted(ref: np.ndarray, lag: int, history: np.ndarray | None = None) -> np.ndarray:
    """Return ``y`` with ``y[i] = ref[i - lag]``.

    Samples before the start of the block come from the tail of ``history``
    when given, otherwise they are zero. Samples past the end are always zero.
    """
    n = len(ref)
    out = np.zeros(n)
    if lag >= 0:
        out[lag:] = ref[: n - lag] if lag < n else []
        if lag and history is not None and len(history):
            tail = np.asarray(history, dtype=float)[-lag:]
            out[lag - len(tail) : lag] = tail
    else:
        k = -lag
        if k < n:
            out[: n - k] = ref[k:]
    return out


def phase_correlate(
    mic: SampleBlock, ref: SampleBlock, max_lag: int, history: np.ndarray | None = None
) -> int:
    """Lag in [-max_lag, max_lag] that maximizes sum(mic[i] * ref[i - lag]).

    Ties go to the smallest |lag|, then to the negative lag, so a flat
    correlation falls back to the factory value of zero.
    """
    _check_pair(mic, ref)
    if not 0 <= max_lag < len(mic) / 4:
        raise ConfigurationError(f"max_lag {max_lag} outside [0, N/4) for N={len(mic)}")
    best_lag, best = 0, None
    # scan order makes the first strict maximum win the tie-break
    for lag in sorted(range(-max_lag, max_lag + 1), key=lambda k: (abs(k), k)):
        c = float(np.dot(mic.samples, shifted(ref.samples, lag, history)))
        if best is None or c > best:
            best_lag, best = lag, c
    return best_lag


def amplitude_correlate(
    mic: SampleBlock, aligned_ref: SampleBlock, gain_lo: float, gain_hi: float
) -> tuple[float, bool]:
    """Least-squares gain for ``mic - g * aligned_ref``, clamped to the scan range.

    Returns ``(gain, degenerate)``; a silent reference gives the factory gain 1.0.
    """
    _check_pair(mic, aligned_ref)
    if not (0 < gain_lo <= 1.0 <= gain_hi):
        raise ConfigurationError(f"bad gain range [{gain_lo}, {gain_hi}]")
    ref_energy = aligned_ref.energy()
    if ref_energy == 0.0:
        return 1.0, True
    g = float(np.dot(mic.samples, aligned_ref.samples)) / ref_energy
    return min(max(g, gain_lo), gain_hi), False


def subtract_reference(
    mic: SampleBlock, ref: SampleBlock, cal: Calibration, history: np.ndarray | None = None
) -> SampleBlock:
    _check_pair(mic, ref)
    noise = mic.samples - cal.gain * shifted(ref.samples, cal.lag, history)
    return SampleBlock(noise, mic.rate)


def estimate(
    mic: SampleBlock, ref: SampleBlock, params: IsolationParams, history: np.ndarray | None = None
) -> tuple[int, float, bool]:
    """Run both correlators on one block, phase first."""
    lag = phase_correlate(mic, ref, params.max_lag, history)
    aligned = SampleBlock(shifted(ref.samples, lag, history), ref.rate)
    gain, degenerate = amplitude_correlate(mic, aligned, params.gain_lo, params.gain_hi)
    return lag, gain, degenerate


def isolate_noise(
    mic: SampleBlock,
    ref: SampleBlock | None,
    cal: Calibration,
    params: IsolationParams = IsolationParams(),
    history: np.ndarray | None = None,
) -> tuple[SampleBlock, Calibration]:
    """Subtract the aligned reference from ``mic`` and return (noise, calibration).

    ``history`` is the stretch of reference that immediately precedes ``ref``
    in the stream; with it, positive lags cancel right up to the block edge.

    In ``continuous`` mode both correlators rerun on every block. The lag is
    taken as estimated; the gain is smoothed across blocks with an
    exponential moving average. In ``startup_only`` mode the first block with
    a non-silent reference calibrates and later blocks reuse the result.
    """
    if ref is None or params.bypass:
        return mic, cal
    _check_pair(mic, ref)

    if cal.mode == "continuous" or cal.updates == 0:
        lag, gain, degenerate = estimate(mic, ref, params, history)
        if degenerate:
            log.debug("silent reference block; keeping calibration %s", cal)
        elif cal.updates == 0:
            cal = replace(cal, lag=lag, gain=gain, updates=1)
        else:
            a = params.smoothing
            cal = replace(cal, lag=lag, gain=(1 - a) * cal.gain + a * gain, updates=cal.updates + 1)

    return subtract_reference(mic, ref, cal, history), cal


@dataclass
class ReferenceTracker:
    """Stream-level wrapper that keeps the calibration and reference history."""

    params: IsolationParams = field(default_factory=IsolationParams)
    cal: Calibration = field(default_factory=Calibration)
    _history: np.ndarray | None = None

    def process(self, mic: SampleBlock, ref: SampleBlock | None) -> SampleBlock:
        noise, self.cal = isolate_noise(mic, ref, self.cal, self.params, self._history)
        if ref is not None:
            self._history = ref.samples[-max(self.params.max_lag, 1) :].copy()
        return noise
