"""Minimal SVG line chart of SIL and normalized gain against time."""
from __future__ import annotations

from typing import Sequence

import numpy as np


def trace_svg(t: Sequence[float], sil: Sequence[float], a: Sequence[float], width=800, height=400) -> str:
    t, sil, a = (np.asarray(v, dtype=float) for v in (t, sil, a))
    pad = 50
    finite = np.concatenate([sil[np.isfinite(sil)], a])
    lo, hi = float(np.floor(finite.min() / 5) * 5), float(np.ceil(finite.max() / 5) * 5)
    if hi == lo:
        hi = lo + 5
    t0, t1 = (float(t[0]), float(t[-1])) if len(t) > 1 else (0.0, 1.0)
    span = t1 - t0 or 1.0

    def xy(tt, yy):
        x = pad + (tt - t0) / span * (width - 2 * pad)
        y = height - pad - (yy - lo) / (hi - lo) * (height - 2 * pad)
        return x, y

    def polyline(y, color, w):
        pts = " ".join(f"{x:.1f},{yy:.1f}" for x, yy in zip(*xy(t, y)) if np.isfinite(yy))
        return f'<polyline fill="none" stroke="{color}" stroke-width="{w}" points="{pts}"/>'

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]
    for v in np.arange(lo, hi + 1e-9, 5.0):
        _, y = xy(t0, v)
        parts.append(f'<text x="{pad - 6}" y="{y + 4:.1f}" text-anchor="end">{v:g}</text>')
    for s in np.arange(np.ceil(t0), t1 + 1e-9, max(1.0, np.ceil(span / 10))):
        x, _ = xy(s, lo)
        parts.append(f'<text x="{x:.1f}" y="{height - pad + 16}" text-anchor="middle">{s:g}</text>')
    parts.append(f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">time (s)</text>')
    parts.append(f'<text x="14" y="{height / 2}" transform="rotate(-90 14 {height / 2})" text-anchor="middle">dB</text>')
    parts.append(polyline(sil, "red", 1))
    parts.append(polyline(a, "black", 2))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
