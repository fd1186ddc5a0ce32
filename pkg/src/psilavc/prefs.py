"""Learn the listener's preferred signal-to-SIL ratio and gain floor.

Every manual volume change is a hint. In a normal environment it sets the
preferred ratio R0 between gain and SIL. Turning the volume up in a room
quieter than any the listener has already accepted sets the floor A_min
instead, and leaves R0 alone.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Literal

from .meter import PsilSample

FACTORY_FLOOR_DB = 2.5
DEFAULT_WINDOW = 11  # about a quarter second at the point design
DEFAULT_LATENCY_S = 10.0


@dataclass(frozen=True)
class ListenerPrefs:
    r0_pref: float = 0.0
    floor_db: float = FACTORY_FLOOR_DB
    sil_threshold: float = math.inf  # no quiet baseline learned yet
    latency: float = DEFAULT_LATENCY_S
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        if not math.isfinite(self.floor_db):
            raise ValueError("floor_db must be finite")
        if not self.latency > 0:
            raise ValueError("latency must be positive")
        if self.window < 1:
            raise ValueError("window must be >= 1")


@dataclass(frozen=True)
class AdjustEvent:
    end_time: float
    final_gain_db: float
    direction: Literal["up", "down"]
    is_startup: bool = False


def recency_weights(m: int) -> list[float]:
    return [2.0 * i / (m + 1) for i in range(1, m + 1)]


def weighted_mean(values: list[float]) -> float:
    """(1/m) * sum(w_i * v_i) with w_i = 2i/(m+1); the last value is newest."""
    m = len(values)
    return math.fsum(w * v for w, v in zip(recency_weights(m), values)) / m


@dataclass
class SilHistory:
    """Recent PSIL samples plus the bookkeeping needed to learn SIL_t."""

    capacity: int = 64
    samples: deque = field(default_factory=deque)
    # (end_time, weighted average) for windows not yet judged against the latency rule
    pending: deque = field(default_factory=deque)
    adjustments: list[float] = field(default_factory=list)

    def append(self, sample: PsilSample, window: int = DEFAULT_WINDOW) -> None:
        if self.samples and sample.period_index <= self.samples[-1].period_index:
            raise ValueError("samples must arrive in period order")
        self.samples.append(sample)
        while len(self.samples) > max(self.capacity, window):
            self.samples.popleft()
        if len(self.samples) >= window:
            self.pending.append((sample.time, weighted_sil_average(self, window)))

    def note_adjustment(self, t: float) -> None:
        self.adjustments.append(t)

    def __len__(self):
        return len(self.samples)


def weighted_sil_average(history: SilHistory, m: int) -> float:
    """Recency-weighted mean of the last ``m`` SILs.

    With fewer than ``m`` samples available the weights are rebuilt for the
    samples that exist (check ``len(history) < m`` to detect that case).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not history.samples:
        raise ValueError("no SIL history")
    recent = list(history.samples)[-m:]
    return weighted_mean([s.psil for s in recent])


def on_manual_adjust(
    ev: AdjustEvent, history: SilHistory, prefs: ListenerPrefs, current_A: float
) -> ListenerPrefs:
    """Apply one completed volume adjustment.

    ``current_A`` is the normalized gain the listener ended up at. The
    adjustment is recorded in ``history`` for the SIL_t latency rule.
    """
    avg = weighted_sil_average(history, prefs.window)
    history.note_adjustment(ev.end_time)
    if ev.is_startup:
        return replace(prefs, r0_pref=ev.final_gain_db - avg)
    # an infinite threshold means no quiet baseline has been learned yet
    quiet = math.isfinite(prefs.sil_threshold) and avg < prefs.sil_threshold
    if quiet and ev.direction == "up":
        return replace(prefs, floor_db=current_A)
    return replace(prefs, r0_pref=ev.final_gain_db - avg)


def update_sil_threshold(history: SilHistory, prefs: ListenerPrefs, now: float) -> ListenerPrefs:
    """Lower SIL_t to any window average the listener tolerated for ``latency`` seconds."""
    threshold = prefs.sil_threshold
    cutoff = now - prefs.latency
    while history.pending and history.pending[0][0] <= cutoff:
        end, avg = history.pending.popleft()
        prompted = any(end <= t <= end + prefs.latency for t in history.adjustments)
        if not prompted:
            threshold = min(threshold, avg)
    if history.pending:
        oldest = history.pending[0][0]
        history.adjustments = [t for t in history.adjustments if t >= oldest]
    else:
        history.adjustments = [t for t in history.adjustments if t >= cutoff]
    if threshold == prefs.sil_threshold:
        return prefs
    return replace(prefs, sil_threshold=threshold)
