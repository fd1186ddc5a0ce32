"""Preferred speech interference level from a block spectrum.

PSIL is the plain average, in dB, of the noise levels in the octave bands
centred on 500, 1000 and 2000 Hz. Anything outside 354-2828 Hz is ignored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MeteringError
from .spectrum import FftDesign, Spectrum

BAND_EDGES_HZ = ((354.0, 707.0), (707.0, 1414.0), (1414.0, 2828.0))
DEFAULT_FLOOR_DB = -120.0


@dataclass(frozen=True)
class BandPartition:
    ranges: tuple[range, range, range]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.ranges)


def band_partition(d: FftDesign) -> BandPartition:
    """Assign spectrum bins to the three PSIL octave bands.

    Bands are (lower, upper] except the lowest, which also keeps a bin
    sitting exactly on 354 Hz.
    """
    f = d.bin_freqs()
    ranges = []
    for k, (lo, hi) in enumerate(BAND_EDGES_HZ):
        above = f >= lo if k == 0 else f > lo
        idx = np.flatnonzero(above & (f <= hi))
        if len(idx) == 0:
            raise MeteringError(
                f"band {lo:g}-{hi:g} Hz has no bins for N={d.n_samples}, s={d.sample_rate:g} "
                f"(df = {d.resolution:.1f} Hz, f_m = {d.max_freq:.1f} Hz)"
            )
        ranges.append(range(int(idx[0]), int(idx[-1]) + 1))
    return BandPartition(tuple(ranges))


def band_level(spec: Spectrum, rng: range, floor_db: float = DEFAULT_FLOOR_DB, offset_db: float = 0.0) -> float:
    """10*log10 of the summed band power, plus ``offset_db``, never below ``floor_db``.

    0 dB is a band power of 1.0 (a full-scale sine is 0.5, i.e. -3.01 dB).
    ``offset_db`` is a fixed calibration, e.g. to express levels as SPL.
    """
    if rng.start < 0 or rng.stop > len(spec.powers):
        raise MeteringError(f"bin range {rng} outside spectrum of {len(spec.powers)} bins")
    total = math.fsum(spec.powers[rng.start : rng.stop])
    if total <= 0.0:
        return floor_db
    return max(10.0 * math.log10(total) + offset_db, floor_db)


@dataclass(frozen=True)
class PsilSample:
    band_levels: tuple[float, float, float]
    psil: float
    period_index: int = 0
    time: float = 0.0


def psil(
    spec: Spectrum,
    part: BandPartition,
    floor_db: float = DEFAULT_FLOOR_DB,
    period_index: int = 0,
    time: float = 0.0,
    offset_db: float = 0.0,
) -> PsilSample:
    if part.ranges[-1].stop > len(spec.powers):
        raise MeteringError("partition does not fit this spectrum")
    levels = tuple(band_level(spec, r, floor_db, offset_db) for r in part.ranges)
    return PsilSample(levels, sum(levels) / 3.0, period_index, time)
