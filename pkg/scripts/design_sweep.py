"""Sweep block length and sample rate and print the design guideline verdicts.

    python scripts/design_sweep.py
"""
import itertools

from psilavc import design_fft, validate_design

SIZES = (64, 128, 256, 512)
RATES = (4000, 5600, 6400, 8000, 11025, 16000)


def main():
    print(f"{'N':>5} {'s':>6} {'T ms':>7} {'df Hz':>7} {'fm Hz':>7}  verdicts (resolution/period/max_freq)")
    for n, s in itertools.product(SIZES, RATES):
        d = design_fft(n, s)
        rep = validate_design(d)
        v = "/".join(rep.verdicts[k] for k in ("resolution", "period", "max_freq"))
        print(f"{n:>5} {s:>6} {d.period_span * 1e3:7.2f} {d.resolution:7.2f} {d.max_freq:7.0f}  {v}")


if __name__ == "__main__":
    main()
