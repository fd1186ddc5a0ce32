"""Blockwise power spectrum and FFT design checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DesignError, ProcessingError
from .isolation import SampleBlock, is_power_of_two

# design targets for an accurate PSIL estimate
MAX_RESOLUTION_HZ = 40.0
MAX_PERIOD_S = 0.025
MIN_MAX_FREQ_HZ = 2800.0
DEFAULT_TOLERANCE = 1.15

Verdict = Literal["pass", "marginal", "fail"]


@dataclass(frozen=True)
class FftDesign:
    n_samples: int
    sample_rate: float
    period_span: float  # (N-1)/s, first sample to last
    resolution: float  # 1/period_span
    max_freq: float  # N * resolution / 2
    cycle_period: float  # N/s, block cadence and solver timestep

    @property
    def n_bins(self) -> int:
        return self.n_samples // 2 + 1

    def bin_freqs(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.resolution


def design_fft(n_samples: int, sample_rate: float) -> FftDesign:
    if not isinstance(n_samples, (int, np.integer)) or n_samples < 2 or not is_power_of_two(int(n_samples)):
        raise DesignError(f"N must be a power of 2 and >= 2, got {n_samples}")
    if not sample_rate > 0:
        raise DesignError(f"sample rate must be positive, got {sample_rate}")
    n = int(n_samples)
    s = float(sample_rate)
    return FftDesign(
        n_samples=n,
        sample_rate=s,
        period_span=(n - 1) / s,
        resolution=s / (n - 1),
        max_freq=(n / (n - 1)) * s / 2,
        cycle_period=n / s,
    )


@dataclass(frozen=True)
class GuidelineReport:
    resolution_ok: Verdict
    period_ok: Verdict
    maxfreq_ok: Verdict
    details: dict[str, str]

    @property
    def verdicts(self) -> dict[str, Verdict]:
        return {"resolution": self.resolution_ok, "period": self.period_ok, "max_freq": self.maxfreq_ok}

    @property
    def any_fail(self) -> bool:
        return "fail" in self.verdicts.values()


def _upper_limit(value: float, limit: float, tolerance: float) -> Verdict:
    if value <= limit:
        return "pass"
    return "marginal" if value <= limit * tolerance else "fail"


def _lower_limit(value: float, limit: float, tolerance: float) -> Verdict:
    if value >= limit:
        return "pass"
    return "marginal" if value >= limit / tolerance else "fail"


def validate_design(d: FftDesign, tolerance: float = DEFAULT_TOLERANCE) -> GuidelineReport:
    """Grade a design against the three PSIL guidelines.

    ``tolerance`` softens each limit multiplicatively: a value that misses the
    strict limit but lands within the factor is reported as ``marginal``.
    """
    if tolerance < 1:
        raise DesignError(f"tolerance must be >= 1, got {tolerance}")
    res = _upper_limit(d.resolution, MAX_RESOLUTION_HZ, tolerance)
    per = _upper_limit(d.period_span, MAX_PERIOD_S, tolerance)
    mxf = _lower_limit(d.max_freq, MIN_MAX_FREQ_HZ, tolerance)
    details = {
        "resolution": f"df = {d.resolution:.2f} Hz, limit <= {MAX_RESOLUTION_HZ:g} Hz ({res})",
        "period": f"T = {d.period_span * 1e3:.2f} ms, limit <= {MAX_PERIOD_S * 1e3:g} ms ({per})",
        "max_freq": f"f_m = {d.max_freq:.1f} Hz, limit >= {MIN_MAX_FREQ_HZ:g} Hz ({mxf})",
    }
    return GuidelineReport(res, per, mxf, details)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided power per bin; sums to the block's mean square."""

    powers: np.ndarray
    bin_freqs: np.ndarray

    def __len__(self):
        return len(self.powers)


def compute_spectrum(
    block: SampleBlock, design: FftDesign | None = None, window: Literal["rect", "hann"] = "rect"
) -> Spectrum:
    """Power spectrum of one block.

    Normalized so a unit sine at an exact bin frequency puts 0.5 in that bin;
    with the rectangular window the bin powers sum to mean(x**2).
    """
    n = len(block)
    if design is not None:
        if n != design.n_samples:
            raise ProcessingError(f"block length {n} does not match design N={design.n_samples}")
        resolution = design.resolution
    else:
        resolution = block.rate / (n - 1)
    x = block.samples
    if window == "hann":
        w = np.hanning(n)
        x = x * w / np.sqrt(np.mean(w * w))
    elif window != "rect":
        raise ProcessingError(f"unknown window {window!r}")

    X = np.fft.rfft(x)
    p = (X.real**2 + X.imag**2) / (n * n)
    p[1 : n // 2] *= 2.0  # fold the conjugate half; DC and Nyquist have no twin
    return Spectrum(p, np.arange(n // 2 + 1) * resolution)
