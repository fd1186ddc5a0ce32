"""Command line: design, analyze, simulate, process.

Exit codes: 0 success, 1 input or configuration error, 2 design guideline failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import sys
from pathlib import Path

import numpy as np

from .config import Config, load_config
from .errors import AvcError
from .isolation import SampleBlock
from .meter import band_partition, psil
from .pipeline import PipelineResult, run_audio, run_pipeline, trace_csv
from .scenario import bundled_scenario_path, load_scenario, parse_events
from .spectrum import compute_spectrum, design_fft, validate_design
from .svg import trace_svg
from .wavio import read_wav

log = logging.getLogger("psilavc")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args) -> Config:
    return load_config(args.config, args.set or [])


def _events(path):
    return parse_events(Path(path).read_text()) if path else []


def cmd_design(args) -> int:
    d = design_fft(args.n, args.s)
    report = validate_design(d, args.tolerance)
    rows = [
        ("n_samples", f"{d.n_samples}", ""),
        ("sample_rate", f"{d.sample_rate:g}", "Hz"),
        ("period_span", f"{d.period_span * 1e3:.3f}", "ms"),
        ("resolution", f"{d.resolution:.3f}", "Hz"),
        ("max_freq", f"{d.max_freq:.1f}", "Hz"),
        ("cycle_period", f"{d.cycle_period * 1e3:.3f}", "ms"),
        ("n_bins", f"{d.n_bins}", ""),
    ]
    rows += [(f"guideline_{k}", v, "") for k, v in report.verdicts.items()]
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["field", "value", "unit"])
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        width = max(len(r[0]) for r in rows)
        for name, value, unit in rows:
            print(f"{name:<{width}}  {value:>10} {unit}".rstrip())
        for text in report.details.values():
            print(f"  {text}")
    return 2 if report.any_fail else 0


def _load_matching(path, cfg: Config) -> np.ndarray:
    x, rate = read_wav(path)
    if rate != cfg.fft.s:
        raise AvcError(f"{path}: sample rate {rate} Hz does not match configured fft.s = {cfg.fft.s:g} Hz (no resampling)")
    return x


def cmd_analyze(args) -> int:
    cfg = _config(args)
    x = _load_matching(args.wav, cfg)
    d = cfg.design()
    part = band_partition(d)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["period", "time_s", "band1_db", "band2_db", "band3_db", "psil_db"])
    n = d.n_samples
    if len(x) < n:
        log.warning("%s is shorter than one block", args.wav)
    for i in range(len(x) // n):
        spec = compute_spectrum(SampleBlock(x[i * n : (i + 1) * n], d.sample_rate), d, cfg.fft.window)
        ps = psil(spec, part, cfg.meter.floor_db, i, i * d.cycle_period, cfg.meter.offset_db)
        w.writerow([i, f"{ps.time:.6f}", *(f"{b:.6f}" for b in ps.band_levels), f"{ps.psil:.6f}"])
    _emit(buf.getvalue(), args.out)
    return 0


def _summary(res: PipelineResult) -> str:
    p = res.prefs
    lines = [
        f"periods={len(res.records)}",
        f"r0_pref_db={p.r0_pref:.6f}",
        f"floor_db={p.floor_db:.6f}",
        f"sil_threshold_db={p.sil_threshold:.6f}",
        f"adjustments={','.join(f'{t:g}:{kind}' for t, kind in res.applied) or 'none'}",
    ]
    if res.calibration is not None:
        lines.append(f"calibration_lag={res.calibration.lag} calibration_gain={res.calibration.gain:.6f}")
    if res.dropped:
        lines.append(f"dropped={res.dropped}")
    return "\n".join(lines) + "\n"


def _finish(res: PipelineResult, args) -> None:
    _emit(trace_csv(res.records), args.out)
    if getattr(args, "plot", None):
        t = [r.time_s for r in res.records]
        Path(args.plot).write_text(trace_svg(t, res.sil_values(), res.a_values()))
    summary = _summary(res)
    if getattr(args, "summary", None):
        Path(args.summary).write_text(summary)
    sys.stderr.write(summary)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    sc = load_scenario(args.scenario or bundled_scenario_path())
    seed = args.seed if args.seed is not None else sc.seed
    sc = dataclasses.replace(sc, seed=seed)
    res = run_pipeline(sc, cfg, _events(args.events), mode="audio" if args.audio else "sil")
    _finish(res, args)
    return 0


def cmd_process(args) -> int:
    cfg = _config(args)
    mic = _load_matching(args.mic, cfg)
    ref = _load_matching(args.ref, cfg) if args.ref else None
    res = run_audio(mic, ref, cfg, _events(args.events))
    _finish(res, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="psilavc", description="Speech-interference-driven automatic volume control")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
        sp.add_argument("-o", "--out", help="write CSV here instead of stdout")

    d = sub.add_parser("design", help="FFT design values and guideline check")
    d.add_argument("--n", type=int, default=128)
    d.add_argument("--s", type=float, default=5600.0)
    d.add_argument("--tolerance", type=float, default=1.15)
    d.add_argument("--csv", action="store_true", help="field,value,unit CSV instead of text")
    d.set_defaults(func=cmd_design)

    a = sub.add_parser("analyze", help="per-period PSIL of a WAV file")
    a.add_argument("wav")
    common(a)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="run a scenario through the solver")
    s.add_argument("scenario", nargs="?", help="scenario file (default: bundled canonical)")
    s.add_argument("--events", help="volume events file")
    s.add_argument("--audio", action="store_true", help="synthesize noise audio and meter it")
    s.add_argument("--plot", metavar="SVG", help="also write an SVG chart of S and A")
    s.add_argument("--seed", type=int)
    s.add_argument("--summary", help="write the run summary to this file")
    common(s)
    s.set_defaults(func=cmd_simulate)

    pr = sub.add_parser("process", help="mic + reference WAVs to a gain trace")
    pr.add_argument("mic")
    pr.add_argument("ref", nargs="?")
    pr.add_argument("--events", help="volume events file")
    pr.add_argument("--plot", metavar="SVG")
    pr.add_argument("--summary")
    common(pr)
    pr.set_defaults(func=cmd_process)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (AvcError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
