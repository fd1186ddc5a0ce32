"""Damped-oscillator gain solver.

The normalized gain A (dB) is driven toward the measured SIL S like a mass on
a damped spring:

    A'' + b*w0*A' + w0**2 * (A - S) = 0

integrated once per processing period with explicit Euler. Two extra rules
shape the response: A holds still while it is within ``deadband_db`` of the
current SIL, and A never goes below the listener's floor.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ProcessingError

# constants used for the published reference run
DEFAULT_OMEGA0 = 8.0
DEFAULT_DAMPING = 4.0
DEFAULT_DEADBAND_DB = 1.0
DEFAULT_FLOOR_DB = 2.5
POINT_DESIGN_DT = 128 / 5600


@dataclass(frozen=True)
class SolverParams:
    omega0: float = DEFAULT_OMEGA0
    damping: float = DEFAULT_DAMPING
    deadband_db: float = DEFAULT_DEADBAND_DB
    floor_db: float = DEFAULT_FLOOR_DB
    dt: float = POINT_DESIGN_DT
    adaptive: bool = False
    adaptive_k: float = 1.5
    adaptive_window: int = 22
    ceiling_db: float | None = None

    def __post_init__(self):
        if not (self.omega0 > 0 and self.damping > 0 and self.deadband_db >= 0 and self.dt > 0):
            raise ConfigurationError(
                "solver needs omega0 > 0, damping > 0, deadband_db >= 0, dt > 0; "
                f"got omega0={self.omega0}, damping={self.damping}, deadband_db={self.deadband_db}, dt={self.dt}"
            )
        if not math.isfinite(self.floor_db):
            raise ConfigurationError("solver.floor_db must be finite")
        b = self.damping
        if b >= 2:
            fast = self.omega0 * (b + math.sqrt(b * b - 4)) / 2
            if self.dt * fast >= 2:
                raise ConfigurationError(
                    f"explicit Euler unstable: dt*fast_rate = {self.dt * fast:.3f} >= 2 "
                    f"(dt={self.dt}, omega0={self.omega0}, damping={b})"
                )
        if self.adaptive and (self.adaptive_k <= 0 or self.adaptive_window < 2):
            raise ConfigurationError("adaptive deadband needs adaptive_k > 0 and adaptive_window >= 2")
        if self.ceiling_db is not None and self.ceiling_db < self.floor_db:
            raise ConfigurationError("solver.ceiling_db is below solver.floor_db")


@dataclass(frozen=True)
class SolverState:
    a_val: float
    a_dot: float = 0.0
    a_ddot: float = 0.0
    period_index: int = 0
    recent: tuple[float, ...] = ()  # trailing SIL window, adaptive deadband only


def init_solver(s0: float, params: SolverParams) -> SolverState:
    if not math.isfinite(s0):
        raise ProcessingError(f"non-finite initial SIL {s0}")
    recent = (s0,) if params.adaptive else ()
    return SolverState(max(s0, params.floor_db), 0.0, 0.0, 0, recent)


def deadband(state: SolverState, params: SolverParams) -> float:
    if not params.adaptive or len(state.recent) < 2:
        return params.deadband_db
    w = np.asarray(state.recent)
    rms = float(np.sqrt(np.mean((w - w.mean()) ** 2)))
    return max(params.deadband_db, params.adaptive_k * rms)


def step(state: SolverState, s_next: float, s_current: float, params: SolverParams) -> SolverState:
    """Advance one processing period.

    ``s_current`` is the SIL for the period the state belongs to, ``s_next``
    the SIL for the period being entered. A non-finite SIL raises
    ProcessingError and the caller keeps its old state.
    """
    if not (math.isfinite(s_next) and math.isfinite(s_current)):
        raise ProcessingError(f"non-finite SIL ({s_current}, {s_next})")
    dt = params.dt
    w2 = params.omega0 * params.omega0
    bw = params.damping * params.omega0
    a, a_dot, a_ddot = state.a_val, state.a_dot, state.a_ddot

    a_dot_next = a_dot + dt * a_ddot
    if abs(a - s_current) >= deadband(state, params):
        a_next = a + dt * a_dot
    else:
        a_next = a
    a_ddot_next = w2 * s_next - bw * a_dot_next - w2 * a_next
    if a_next <= params.floor_db:
        a_next = params.floor_db
    if params.ceiling_db is not None and a_next > params.ceiling_db:
        a_next = params.ceiling_db

    recent = state.recent
    if params.adaptive:
        recent = (recent + (s_next,))[-params.adaptive_window :]
    return SolverState(a_next, a_dot_next, a_ddot_next, state.period_index + 1, recent)


def gain_signal(state: SolverState, r0_pref: float) -> float:
    """Amplifier gain in dB: the normalized signal plus the preferred ratio."""
    return state.a_val + r0_pref


def run_trace(sil_trace: Sequence[float] | Iterable[float], params: SolverParams) -> list[SolverState]:
    sil = [float(s) for s in sil_trace]
    if not sil:
        raise ProcessingError("empty SIL trace")
    states = [init_solver(sil[0], params)]
    for i in range(1, len(sil)):
        states.append(step(states[-1], sil[i], sil[i - 1], params))
    return states


def a_values(states: Sequence[SolverState]) -> np.ndarray:
    return np.fromiter((st.a_val for st in states), dtype=float, count=len(states))
