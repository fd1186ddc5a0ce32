"""Excursion of A above background for +20 dB triangular spikes of varying length.

Each spike sits alone on a constant background. The coarse run is compared
with the dt/10 integrator kept in the test suite.

    python scripts/spike_sweep.py
"""
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import fine_integrator  # noqa: E402

from psilavc import Scenario, SolverParams, Spike, generate_sil_trace, run_trace  # noqa: E402
from psilavc.solver import a_values  # noqa: E402

BACKGROUND = 40.0


def main():
    p = SolverParams(omega0=8.0, damping=4.0, deadband_db=1.0, floor_db=2.5)
    print(f"{'dur s':>6} {'coarse dB':>10} {'dt/10 dB':>9} {'return s':>9}")
    for dur in (0.1, 0.2, 0.25, 0.3, 0.4, 0.5):
        sc = Scenario(((BACKGROUND, 6.0),), spikes=(Spike(2.0, dur, 20.0),))
        s = generate_sil_trace(sc, p.dt)
        t = np.arange(len(s)) * p.dt
        coarse = a_values(run_trace(s, p))
        fine = fine_integrator(s, p.omega0, p.damping, p.deadband_db, p.floor_db, p.dt)
        end = 2.0 + dur
        back = np.flatnonzero((t > end) & (np.abs(coarse - BACKGROUND) <= p.deadband_db))
        ret = t[back[0]] - end if len(back) else np.inf
        print(f"{dur:6.2f} {coarse.max() - BACKGROUND:10.2f} {fine.max() - BACKGROUND:9.2f} {ret:9.2f}")


if __name__ == "__main__":
    main()
