"""Mono 16-bit PCM WAV read/write on top of the stdlib ``wave`` module."""
from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

FULL_SCALE = 32768.0


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Return (samples scaled to +/-1.0, sample rate)."""
    try:
        with wave.open(str(path), "rb") as w:
            if w.getnchannels() != 1 or w.getsampwidth() != 2:
                raise ConfigurationError(
                    f"{path}: need mono 16-bit PCM, got {w.getnchannels()} channel(s), {8 * w.getsampwidth()}-bit"
                )
            rate, nframes = w.getframerate(), w.getnframes()
            raw = w.readframes(nframes)
    except (wave.Error, EOFError) as exc:
        raise ConfigurationError(f"{path}: unreadable WAV ({exc})") from None
    if len(raw) != 2 * nframes:
        raise ConfigurationError(f"{path}: truncated, header says {nframes} frames but found {len(raw) // 2}")
    return np.frombuffer(raw, dtype="<i2").astype(float) / FULL_SCALE, rate


def write_wav(path: str | Path, samples: np.ndarray, rate: int) -> None:
    x = np.clip(np.round(np.asarray(samples, dtype=float) * FULL_SCALE), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(rate))
        w.writeframes(x.tobytes())
