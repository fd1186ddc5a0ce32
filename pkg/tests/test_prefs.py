import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psilavc.meter import PsilSample
from psilavc.prefs import (
    AdjustEvent,
    ListenerPrefs,
    SilHistory,
    on_manual_adjust,
    recency_weights,
    update_sil_threshold,
    weighted_mean,
    weighted_sil_average,
)

DT = 128 / 5600


def history_of(values, start=0, window=11):
    h = SilHistory()
    for i, v in enumerate(values, start):
        h.append(PsilSample((v, v, v), v, i, i * DT), window)
    return h


def test_weights_normalize():
    for m in range(1, 101):
        assert abs(math.fsum(recency_weights(m)) / m - 1.0) <= 1e-12


def test_weighted_average_examples():
    assert weighted_sil_average(history_of([50.0] * 20), 11) == pytest.approx(50.0, abs=1e-12)
    assert weighted_sil_average(history_of([40.0, 50.0, 60.0]), 3) == pytest.approx(160 / 3, abs=1e-9)
    assert weighted_sil_average(history_of([40.0, 50.0, 60.0]), 1) == 60.0


def test_weighted_average_partial_history_reweights():
    h = history_of([40.0, 50.0, 60.0])
    assert weighted_sil_average(h, 11) == weighted_mean([40.0, 50.0, 60.0])
    with pytest.raises(ValueError):
        weighted_sil_average(SilHistory(), 3)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1000), min_size=2, max_size=60, unique=True))
def test_recency_bias(tenths):
    values = [v / 10 for v in sorted(tenths)]
    assert weighted_mean(values) > math.fsum(values) / len(values)


def test_history_rejects_out_of_order():
    h = history_of([1.0, 2.0])
    with pytest.raises(ValueError):
        h.append(PsilSample((1, 1, 1), 1.0, 1, 0.0))


def test_quiet_upward_adjust_sets_floor_only():
    prefs = ListenerPrefs(r0_pref=12.0, sil_threshold=30.0)
    h = history_of([20.0] * 20)
    ev = AdjustEvent(1.0, 17.0, "up")
    new = on_manual_adjust(ev, h, prefs, current_A=5.0)
    assert new.floor_db == 5.0
    assert new.r0_pref == prefs.r0_pref


def test_noisy_adjust_sets_r0_only():
    prefs = ListenerPrefs(r0_pref=12.0, sil_threshold=30.0)
    new = on_manual_adjust(AdjustEvent(1.0, 60.0, "up"), history_of([50.0] * 20), prefs, current_A=48.0)
    assert new.r0_pref == pytest.approx(10.0, abs=1e-12)
    assert new.floor_db == prefs.floor_db


def test_quiet_downward_adjust_goes_to_r0():
    prefs = ListenerPrefs(r0_pref=12.0, sil_threshold=30.0)
    new = on_manual_adjust(AdjustEvent(1.0, 28.0, "down"), history_of([20.0] * 20), prefs, current_A=8.0)
    assert new.r0_pref == pytest.approx(8.0)
    assert new.floor_db == prefs.floor_db


def test_unlearned_threshold_never_sets_floor():
    prefs = ListenerPrefs(r0_pref=12.0)
    new = on_manual_adjust(AdjustEvent(1.0, 17.0, "up"), history_of([5.0] * 20), prefs, current_A=5.0)
    assert new.floor_db == prefs.floor_db
    assert new.r0_pref == pytest.approx(12.0)


def test_startup_sets_r0_and_keeps_factory_floor():
    prefs = ListenerPrefs(sil_threshold=100.0)  # quiet enough for A_min mode, but startup wins
    new = on_manual_adjust(AdjustEvent(0.0, 55.0, "up", is_startup=True), history_of([48.0]), prefs, 48.0)
    assert new.r0_pref == pytest.approx(7.0)
    assert new.floor_db == 2.5


@settings(max_examples=100, deadline=None)
@given(
    sils=st.lists(st.floats(0, 90), min_size=1, max_size=30),
    gain=st.floats(0, 120),
    a=st.floats(0, 60),
    threshold=st.floats(0, 90),
    up=st.booleans(),
)
def test_mode_exclusivity(sils, gain, a, threshold, up):
    prefs = ListenerPrefs(r0_pref=3.0, floor_db=1.0, sil_threshold=threshold)
    new = on_manual_adjust(AdjustEvent(1.0, gain, "up" if up else "down"), history_of(sils), prefs, a)
    changed = (new.floor_db != prefs.floor_db, new.r0_pref != prefs.r0_pref)
    assert changed != (True, True)


def run_log(sil_at, adjust_times, until, prefs):
    """Replay a SIL function and adjustment times through the threshold rule."""
    h = SilHistory()
    n = int(until / DT)
    pending = sorted(adjust_times)
    for i in range(n):
        t = i * DT
        h.append(PsilSample((0, 0, 0), sil_at(t), i, t), prefs.window)
        while pending and pending[0] <= t:
            h.note_adjustment(pending.pop(0))
        prefs = update_sil_threshold(h, prefs, t)
    return prefs


def test_threshold_unchanged_without_history():
    prefs = ListenerPrefs()
    assert update_sil_threshold(SilHistory(), prefs, 100.0) == prefs
    assert prefs.sil_threshold == math.inf


def test_threshold_learns_tolerated_quiet():
    prefs = run_log(lambda t: 20.0 if t < 5 else 40.0, [], 30.0, ListenerPrefs(latency=10.0))
    assert prefs.sil_threshold <= 20.0 + 1e-9


def test_threshold_skips_windows_that_prompted_adjustment():
    # quiet 20 dB stretch ends at 5 s, listener reacts at 7 s (inside the 10 s latency)
    prefs = run_log(lambda t: 20.0 if t < 5 else 40.0, [7.0], 30.0, ListenerPrefs(latency=10.0))
    # every window ending before 7 s is excluded, so only the 40 dB stretch counts
    assert prefs.sil_threshold == pytest.approx(40.0)


def test_threshold_waits_for_latency():
    prefs = run_log(lambda t: 20.0, [], 9.0, ListenerPrefs(latency=10.0))
    assert prefs.sil_threshold == math.inf


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(10, 80), min_size=5, max_size=5), st.lists(st.floats(0, 25), max_size=3))
def test_threshold_monotone(levels, adjusts):
    prefs = ListenerPrefs(latency=2.0)
    h = SilHistory()
    seen = []
    pending = sorted(adjusts)
    for i in range(int(25 / DT)):
        t = i * DT
        h.append(PsilSample((0, 0, 0), levels[int(t // 5)], i, t), prefs.window)
        while pending and pending[0] <= t:
            h.note_adjustment(pending.pop(0))
        prefs = update_sil_threshold(h, prefs, t)
        seen.append(prefs.sil_threshold)
    assert all(b <= a for a, b in zip(seen, seen[1:]))
