"""Whole-signal magnitude spectrum, its probability normalization and raw peaks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal_io import AudioBuffer

__all__ = [
    "Spectrum",
    "ProbabilityDistribution",
    "compute_spectrum",
    "to_probability",
    "find_raw_peaks",
    "next_pow2",
]

WINDOWS = ("none", "hann")


def next_pow2(n: int) -> int:
    """Smallest power of two >= n."""
    return 1 << max(0, int(n - 1).bit_length())


@dataclass(frozen=True)
class Spectrum:
    freqs_hz: np.ndarray
    magnitudes: np.ndarray
    sample_rate_hz: int
    fft_size: int

    @property
    def resolution_hz(self) -> float:
        return self.sample_rate_hz / self.fft_size


@dataclass(frozen=True)
class ProbabilityDistribution:
    freqs_hz: np.ndarray
    probabilities: np.ndarray

    def argmax_hz(self, low_hz: float | None = None, high_hz: float | None = None) -> float:
        """Grid frequency of maximal probability, optionally within [low_hz, high_hz]."""
        mask = np.ones(self.freqs_hz.size, dtype=bool)
        if low_hz is not None:
            mask &= self.freqs_hz >= low_hz
        if high_hz is not None:
            mask &= self.freqs_hz <= high_hz
        if not mask.any():
            raise ValueError("no grid points inside the requested range")
        idx = np.flatnonzero(mask)
        return float(self.freqs_hz[idx[np.argmax(self.probabilities[idx])]])


def compute_spectrum(buffer: AudioBuffer, fft_size: int | None = None, window: str = "none") -> Spectrum:
    """One-sided DFT magnitudes of ``buffer``.

    The buffer is zero-padded or truncated to ``fft_size`` (default: next power
    of two >= its length).  ``window`` is ``"none"`` (rectangular) or ``"hann"``.
    """
    n_fft = next_pow2(len(buffer)) if fft_size is None else int(fft_size)
    if n_fft < 2:
        raise ValueError(f"fft_size must be at least 2, got {fft_size}")
    if window not in WINDOWS:
        raise ValueError(f"unknown window {window!r}; expected one of {WINDOWS}")
    x = buffer.samples[:n_fft]
    if window == "hann":
        x = x * np.hanning(x.size)
    mags = np.abs(np.fft.rfft(x, n=n_fft))
    freqs = np.arange(mags.size) * (buffer.sample_rate_hz / n_fft)
    return Spectrum(freqs, mags, buffer.sample_rate_hz, n_fft)


def to_probability(spectrum: Spectrum, power: bool = False) -> ProbabilityDistribution:
    """Normalize magnitudes (or squared magnitudes with ``power=True``) to unit mass."""
    weights = spectrum.magnitudes ** 2 if power else spectrum.magnitudes
    total = weights.sum()
    if not total > 0:
        raise ValueError("spectrum is identically zero; the frequency distribution is undefined")
    return ProbabilityDistribution(spectrum.freqs_hz, weights / total)


def find_raw_peaks(spectrum: Spectrum, k: int) -> list[tuple[float, float]]:
    """Up to ``k`` interior local maxima as ``(freq_hz, magnitude)``, strongest first.

    A maximum must rise strictly from its left neighbour and fall strictly to
    its right one; a flat-topped maximum is reported at its lowest-frequency
    grid point.  The two endpoints of the grid are never peaks.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    m = spectrum.magnitudes
    if m.size < 3:
        return []
    # collapse runs of equal values so plateaus behave like single points
    change = np.flatnonzero(np.diff(m) != 0) + 1
    starts = np.concatenate(([0], change))
    vals = m[starts]
    if vals.size < 3:
        return []
    interior = np.flatnonzero((vals[1:-1] > vals[:-2]) & (vals[1:-1] > vals[2:])) + 1
    idx = starts[interior]
    order = np.lexsort((idx, -m[idx]))[:k]
    return [(float(spectrum.freqs_hz[i]), float(m[i])) for i in idx[order]]
