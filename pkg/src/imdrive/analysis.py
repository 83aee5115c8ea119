"""Spectra, THD and ripple of uniformly sampled waveforms."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from imdrive.errors import InvalidWindowError, UndefinedTHDError


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_rate: float
    start_time: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise InvalidWindowError("waveform needs at least two samples")
        if not self.sample_rate > 0:
            raise InvalidWindowError(f"bad sample rate {self.sample_rate}")
        object.__setattr__(self, "samples", x)

    @property
    def t(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) / self.sample_rate

    def window(self, start: float, stop: float) -> "Waveform":
        """Samples with ``start <= t < stop`` (indices rounded to the grid)."""
        i0 = int(round((start - self.start_time) * self.sample_rate))
        n = int(round((stop - start) * self.sample_rate))
        if i0 < 0 or n < 2 or i0 + n > self.samples.size:
            raise InvalidWindowError(
                f"window [{start}, {stop}) not covered by record "
                f"[{self.start_time}, {self.t[-1]}]")
        return Waveform(self.samples[i0:i0 + n], self.sample_rate,
                        self.start_time + i0 / self.sample_rate)


@dataclass(frozen=True)
class Spectrum:
    """Single-sided amplitude spectrum; a bin-centred sinusoid reads its amplitude."""
    freqs: np.ndarray
    mags: np.ndarray

    @property
    def resolution(self) -> float:
        return float(self.freqs[1] - self.freqs[0]) if self.freqs.size > 1 else math.inf

    def bin_of(self, f: float) -> int:
        return int(np.argmin(np.abs(self.freqs - f)))

    def magnitude_at(self, f: float) -> float:
        return float(self.mags[self.bin_of(f)])


def _integer_cycles(w: Waveform, f1: float) -> np.ndarray:
    per_cycle = w.sample_rate / f1
    cycles = math.floor(w.samples.size / per_cycle + 1e-9)
    if cycles < 1:
        raise InvalidWindowError(
            f"{w.samples.size} samples is shorter than one {f1} Hz cycle")
    return w.samples[: int(round(cycles * per_cycle))]


def spectrum(w: Waveform, f1: float = 60.0) -> Spectrum:
    """
    Amplitude spectrum over the longest whole number of ``f1`` cycles.

    Rectangular window; the record is truncated at its end so the bins
    fall on multiples of ``f1`` divided by the cycle count.
    """
    x = _integer_cycles(w, f1)
    n = x.size
    mags = np.abs(np.fft.rfft(x)) / n
    mags[1:] *= 2.0
    if n % 2 == 0:
        mags[-1] /= 2.0
    return Spectrum(np.fft.rfftfreq(n, 1.0 / w.sample_rate), mags)


def thd(sp: Spectrum, f1: float, band: tuple[float, float] | None = None) -> float:
    """
    Broadband THD: RMS of every non-DC, non-fundamental bin over the fundamental.

    Sideband energy at non-integer multiples of ``f1`` is included. ``band``
    restricts the distortion sum to bins with ``lo < f < hi``.
    """
    k = sp.bin_of(f1)
    if abs(sp.freqs[k] - f1) > 0.5 * sp.resolution or sp.mags[k] <= 1e-12 * sp.mags.max():
        raise UndefinedTHDError(f"no fundamental at {f1} Hz")
    keep = np.ones(sp.mags.size, dtype=bool)
    keep[[0, k]] = False
    if band is not None:
        keep &= (sp.freqs > band[0]) & (sp.freqs < band[1])
    return float(np.sqrt(np.sum(sp.mags[keep] ** 2)) / sp.mags[k])


def dominant_components(sp: Spectrum, k: int, exclude_below: float = 0.0):
    """
    Largest bins at or above ``exclude_below``.

    Returns
    -------
    list of (float, float)
        ``(frequency, magnitude)`` pairs, largest first; equal magnitudes
        keep the lower frequency first.

    """
    keep = np.flatnonzero(sp.freqs >= exclude_below)
    order = np.lexsort((sp.freqs[keep], -sp.mags[keep]))[:max(k, 0)]
    return [(float(sp.freqs[i]), float(sp.mags[i])) for i in keep[order]]


def fundamental(w: Waveform, f1: float) -> tuple[float, float]:
    """Amplitude and cosine phase of the ``f1`` component."""
    x = _integer_cycles(w, f1)
    t = np.arange(x.size) / w.sample_rate
    z = 2.0 / x.size * np.sum(x * np.exp(-2j * np.pi * f1 * t))
    return float(abs(z)), float(np.angle(z))


def ripple_pp(w: Waveform, f1: float) -> float:
    """Peak-to-peak of the waveform after removing its ``f1`` component."""
    x = _integer_cycles(w, f1)
    amp, ph = fundamental(w, f1)
    t = np.arange(x.size) / w.sample_rate
    r = x - amp * np.cos(2 * np.pi * f1 * t + ph)
    return float(r.max() - r.min())


def write_spectrum_csv(sp: Spectrum, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("frequency_hz,magnitude\n")
        for f, m in zip(sp.freqs, sp.mags):
            fh.write(f"{float(f)!r},{float(m)!r}\n")
    return path


def read_spectrum_csv(path) -> Spectrum:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["frequency_hz", "magnitude"]:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = np.array([[float(a), float(b)] for a, b in reader]).reshape(-1, 2)
    return Spectrum(rows[:, 0], rows[:, 1])
