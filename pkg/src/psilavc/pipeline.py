"""End-to-end processing loop: noise isolation, meter, solver, listener preferences."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .config import Config
from .errors import ProcessingError
from .isolation import Calibration, ReferenceTracker, SampleBlock
from .meter import PsilSample, band_partition, psil
from .prefs import AdjustEvent, ListenerPrefs, SilHistory, on_manual_adjust, update_sil_threshold
from .scenario import Scenario, VolumeChange, generate_sil_trace, group_adjustments, synthesize_noise_audio
from .solver import SolverState, gain_signal, init_solver, step
from .spectrum import compute_spectrum

log = logging.getLogger(__name__)

CSV_COLUMNS = ["period", "time_s", "sil_db", "A_db", "gain_db", "band1_db", "band2_db", "band3_db"]


@dataclass(frozen=True)
class TraceRecord:
    period: int
    time_s: float
    sil_db: float
    A_db: float
    gain_db: float
    bands: tuple[float, float, float] | None = None


@dataclass
class PipelineResult:
    records: list[TraceRecord]
    prefs: ListenerPrefs
    calibration: Calibration | None = None
    dropped: int = 0
    applied: list[tuple[float, str]] = field(default_factory=list)  # (time, "r0" | "floor")

    def a_values(self) -> np.ndarray:
        return np.array([r.A_db for r in self.records])

    def sil_values(self) -> np.ndarray:
        return np.array([r.sil_db for r in self.records])


class _Loop:
    """Per-period state machine shared by the SIL-driven and audio-driven runs."""

    def __init__(self, config: Config, events: Sequence[VolumeChange] = ()):
        self.cfg = config
        self.dt = config.design().cycle_period
        self.prefs = config.listener_prefs()
        self.params = config.solver_params(self.prefs.floor_db)
        self.history = SilHistory(capacity=max(64, self.prefs.window))
        self.adjustments = group_adjustments(list(events), config.prefs.settle_s)
        self.state: SolverState | None = None
        self.last_sil: float | None = None
        self.records: list[TraceRecord] = []
        self.dropped = 0
        self.applied: list[tuple[float, str]] = []

    def _gain_at(self, t: float) -> float:
        # gain in force just before time t
        for rec in reversed(self.records):
            if rec.time_s < t:
                return rec.gain_db
        return self.records[0].gain_db if self.records else self.cfg.prefs.startup_volume_db

    def feed(self, i: int, sil: float, bands=None) -> None:
        t = i * self.dt
        if not math.isfinite(sil):
            self.dropped += 1
            log.warning("period %d: non-finite SIL dropped", i)
            if self.state is not None:
                st = self.state
                self.records.append(TraceRecord(i, t, sil, st.a_val, gain_signal(st, self.prefs.r0_pref), bands))
            return

        self.history.append(PsilSample(bands or (sil, sil, sil), sil, i, t), self.prefs.window)
        if self.state is None:
            self.state = init_solver(sil, self.params)
            startup = AdjustEvent(t, self.cfg.prefs.startup_volume_db, "up", is_startup=True)
            self.prefs = on_manual_adjust(startup, self.history, self.prefs, self.state.a_val)
        else:
            self.state = step(self.state, sil, self.last_sil, self.params)
        self.last_sil = sil
        self.prefs = update_sil_threshold(self.history, self.prefs, t)

        while self.adjustments and self.adjustments[0].end <= t + 1e-12:
            self._apply(self.adjustments.pop(0), sil)

        st = self.state
        self.records.append(TraceRecord(i, t, sil, st.a_val, gain_signal(st, self.prefs.r0_pref), bands))

    def _apply(self, adj, sil: float) -> None:
        before = self._gain_at(adj.start)
        direction = "up" if adj.final_volume > before else "down"
        ev = AdjustEvent(adj.end, adj.final_volume, direction)
        established_a = adj.final_volume - self.prefs.r0_pref
        old = self.prefs
        self.prefs = on_manual_adjust(ev, self.history, self.prefs, established_a)
        if self.prefs.floor_db != old.floor_db:
            self.applied.append((adj.end, "floor"))
            self.params = replace(self.params, floor_db=self.prefs.floor_db)
            # the listener set A directly; restart from there, floor included
            self.state = replace(init_solver(max(sil, established_a), self.params), period_index=self.state.period_index)
        else:
            self.applied.append((adj.end, "r0"))
            self.state = replace(init_solver(sil, self.params), period_index=self.state.period_index)

    def result(self, cal=None) -> PipelineResult:
        return PipelineResult(self.records, self.prefs, cal, self.dropped, self.applied)


def run_sil(sil_trace: Sequence[float], config: Config, events: Sequence[VolumeChange] = ()) -> PipelineResult:
    loop = _Loop(config, events)
    for i, s in enumerate(sil_trace):
        loop.feed(i, float(s))
    return loop.result()


def run_audio(
    mic: np.ndarray,
    ref: np.ndarray | None,
    config: Config,
    events: Sequence[VolumeChange] = (),
) -> PipelineResult:
    """Process a sample stream block by block.

    ``ref`` is what the device sent to its speakers; pass None when the
    microphone already hears only the room (two-microphone setups).
    """
    design = config.design()
    n = design.n_samples
    mic = np.asarray(mic, dtype=float)
    if ref is not None:
        ref = np.asarray(ref, dtype=float)
        if len(ref) != len(mic):
            log.warning("mic has %d samples, reference %d; using the common prefix", len(mic), len(ref))
            common = min(len(mic), len(ref))
            mic, ref = mic[:common], ref[:common]
    n_blocks = len(mic) // n
    if n_blocks == 0:
        log.warning("input shorter than one block (%d < %d samples); empty trace", len(mic), n)

    part = band_partition(design)
    tracker = ReferenceTracker(
        config.isolation_params(), Calibration(mode=config.isolation.mode)
    )
    loop = _Loop(config, events)
    floor, offset = config.meter.floor_db, config.meter.offset_db
    for i in range(n_blocks):
        sl = slice(i * n, (i + 1) * n)
        mblock = SampleBlock(mic[sl], design.sample_rate)
        rblock = SampleBlock(ref[sl], design.sample_rate) if ref is not None else None
        noise = tracker.process(mblock, rblock)
        spec = compute_spectrum(noise, design, config.fft.window)
        ps = psil(spec, part, floor, i, i * design.cycle_period, offset)
        loop.feed(i, ps.psil, ps.band_levels)
    return loop.result(tracker.cal if ref is not None else None)


def run_pipeline(
    source: Scenario | tuple[np.ndarray, np.ndarray | None],
    config: Config,
    events: Sequence[VolumeChange] = (),
    mode: str = "sil",
) -> PipelineResult:
    """Run a scenario (as a SIL trace or as synthesized audio) or a (mic, ref) pair."""
    if isinstance(source, Scenario):
        design = config.design()
        if mode == "sil":
            return run_sil(generate_sil_trace(source, design.cycle_period), config, events)
        if mode == "audio":
            audio = synthesize_noise_audio(source, design, config.meter.offset_db, config.meter.floor_db)
            return run_audio(audio, None, config, events)
        raise ProcessingError(f"unknown mode {mode!r}")
    mic, ref = source
    return run_audio(mic, ref, config, events)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def trace_csv(records: Sequence[TraceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        bands = [_fmt(b) for b in r.bands] if r.bands else ["", "", ""]
        w.writerow([r.period, _fmt(r.time_s), _fmt(r.sil_db), _fmt(r.A_db), _fmt(r.gain_db), *bands])
    return buf.getvalue()


def read_trace_csv(text: str) -> list[TraceRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        bands = None
        if row["band1_db"]:
            bands = (float(row["band1_db"]), float(row["band2_db"]), float(row["band3_db"]))
        out.append(
            TraceRecord(int(row["period"]), float(row["time_s"]), float(row["sil_db"]),
                        float(row["A_db"]), float(row["gain_db"]), bands)
        )
    return out
