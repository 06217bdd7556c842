"""Histogram binning of a frequency distribution into a ranked set of pitches.

The pipeline is::

    buffer -> magnitude spectrum -> probability distribution
           -> fixed-width histogram over the audible range
           -> bins above the mass threshold -> merge near-duplicates -> top K

Each bin reports a single frequency.  Three readings are available through
``BinningConfig.center``:

``"centroid"`` (default)
    probability-weighted mean frequency of the grid points inside the bin.
``"peak"``
    the grid point of largest probability inside the bin.
``"midpoint"``
    the arithmetic centre of the bin interval.

The peak reading is blind to the bin width whenever a bin already contains the
spectral maximum, so it cannot show the accuracy gained from narrower bins;
the centroid keeps peak-level accuracy for narrow bins and degrades as leakage
from a wider bin pulls it toward the bin centre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple

import numpy as np

from .signal_io import AudioBuffer
from .spectrum import ProbabilityDistribution, Spectrum, compute_spectrum, to_probability

__all__ = [
    "BinningConfig",
    "Histogram",
    "PitchEntry",
    "PitchSet",
    "PipelineResult",
    "build_histogram",
    "select_top",
    "merge_similar",
    "bin_method",
    "run_pipeline",
]

CENTERS = ("centroid", "peak", "midpoint")


@dataclass(frozen=True)
class BinningConfig:
    bin_size_hz: float = 2.0
    threshold: float = 0.0005
    top_k: int = 10
    audible_min_hz: float = 20.0
    audible_max_hz: float = 20000.0
    merge_tolerance_hz: float | None = None  # None: one bin width
    center: str = "centroid"
    fft_size: int | None = None
    window: str = "none"

    def __post_init__(self):
        if not self.audible_min_hz >= 0:
            raise ValueError("audible_min_hz must be non-negative")
        if not self.audible_min_hz < self.audible_max_hz:
            raise ValueError("audible_min_hz must be below audible_max_hz")
        if not 0 < self.bin_size_hz < self.audible_max_hz - self.audible_min_hz:
            raise ValueError(
                f"bin_size_hz must lie in (0, {self.audible_max_hz - self.audible_min_hz}), got {self.bin_size_hz}"
            )
        if not self.threshold >= 0:
            raise ValueError("threshold must be non-negative")
        if int(self.top_k) != self.top_k or self.top_k < 1:
            raise ValueError("top_k must be a positive integer")
        if self.merge_tolerance_hz is not None and not self.merge_tolerance_hz >= 0:
            raise ValueError("merge_tolerance_hz must be non-negative")
        if self.center not in CENTERS:
            raise ValueError(f"center must be one of {CENTERS}, got {self.center!r}")
        if self.fft_size is not None and self.fft_size < 2:
            raise ValueError("fft_size must be at least 2")

    @property
    def merge_tol(self) -> float:
        return self.bin_size_hz if self.merge_tolerance_hz is None else self.merge_tolerance_hz

    def with_bin_size(self, bin_size_hz: float) -> "BinningConfig":
        return replace(self, bin_size_hz=float(bin_size_hz))


@dataclass(frozen=True)
class Histogram:
    """Summed probability per fixed-width bin of ``[audible_min, audible_max]``.

    Bins are half-open ``[lo, hi)`` except the last one, which is closed and
    may be narrower than ``bin_size_hz``.  Per-bin frequencies are NaN for
    bins that received no grid point.
    """

    edges_hz: np.ndarray
    mass: np.ndarray
    counts: np.ndarray
    representative_hz: np.ndarray
    centroid_hz: np.ndarray
    bin_size_hz: float
    discarded_mass: float

    @property
    def n_bins(self) -> int:
        return self.mass.size

    @property
    def midpoints_hz(self) -> np.ndarray:
        return 0.5 * (self.edges_hz[:-1] + self.edges_hz[1:])

    def centers(self, how: str) -> np.ndarray:
        if how == "centroid":
            return self.centroid_hz
        if how == "peak":
            return self.representative_hz
        if how == "midpoint":
            return self.midpoints_hz
        raise ValueError(f"center must be one of {CENTERS}, got {how!r}")


class PitchEntry(NamedTuple):
    center_hz: float
    mass: float


@dataclass(frozen=True)
class PitchSet:
    entries: tuple[PitchEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[PitchEntry]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> PitchEntry:
        return self.entries[i]

    @property
    def centers_hz(self) -> list[float]:
        return [e.center_hz for e in self.entries]

    @property
    def total_mass(self) -> float:
        return math.fsum(e.mass for e in self.entries)

    def top(self, k: int) -> "PitchSet":
        return PitchSet(self.entries[:k])


def _ranked(entries) -> tuple[PitchEntry, ...]:
    return tuple(sorted(entries, key=lambda e: (-e.mass, e.center_hz)))


def bin_edges(low_hz: float, high_hz: float, bin_size_hz: float) -> np.ndarray:
    """Uniform edges from ``low_hz`` in steps of ``bin_size_hz``, closed by ``high_hz``."""
    n = int(math.ceil((high_hz - low_hz) / bin_size_hz))
    while n > 1 and low_hz + (n - 1) * bin_size_hz >= high_hz:
        n -= 1
    return np.append(low_hz + np.arange(n) * bin_size_hz, high_hz)


def build_histogram(dist: ProbabilityDistribution, config: BinningConfig) -> Histogram:
    """Accumulate distribution mass into bins across the audible range.

    Grid points outside ``[audible_min_hz, audible_max_hz]`` are dropped; their
    mass is kept in ``discarded_mass``.
    """
    lo, hi = config.audible_min_hz, config.audible_max_hz
    f, p = dist.freqs_hz, dist.probabilities
    inside = (f >= lo) & (f <= hi)
    if not inside.any():
        raise ValueError(
            f"no frequency grid point lies inside the audible range [{lo}, {hi}] Hz"
        )
    edges = bin_edges(lo, hi, config.bin_size_hz)
    n_bins = edges.size - 1
    f_in, p_in = f[inside], p[inside]
    idx = np.minimum(np.searchsorted(edges, f_in, side="right") - 1, n_bins - 1)

    mass = np.bincount(idx, weights=p_in, minlength=n_bins)
    counts = np.bincount(idx, minlength=n_bins)
    occupied = counts > 0

    # first grid point of maximal probability per bin
    order = np.lexsort((np.arange(idx.size), -p_in, idx))
    first = order[np.concatenate(([True], idx[order][1:] != idx[order][:-1]))]
    representative = np.full(n_bins, np.nan)
    representative[idx[first]] = f_in[first]

    weighted = np.bincount(idx, weights=p_in * f_in, minlength=n_bins)
    centroid = np.full(n_bins, np.nan)
    has_mass = mass > 0
    centroid[has_mass] = weighted[has_mass] / mass[has_mass]
    # zero-mass bins are never selected, but keep a frequency for them anyway
    fallback = occupied & ~has_mass
    centroid[fallback] = representative[fallback]

    return Histogram(
        edges_hz=edges,
        mass=mass,
        counts=counts,
        representative_hz=representative,
        centroid_hz=centroid,
        bin_size_hz=config.bin_size_hz,
        discarded_mass=float(p[~inside].sum()),
    )


def select_top(hist: Histogram, config: BinningConfig) -> PitchSet:
    """Accept bins whose mass exceeds ``config.threshold`` and keep the heaviest ``top_k``."""
    accepted = np.flatnonzero(hist.mass > config.threshold)
    centers = hist.centers(config.center)[accepted]
    masses = hist.mass[accepted]
    order = np.lexsort((centers, -masses))[: config.top_k]
    return PitchSet(tuple(PitchEntry(float(centers[i]), float(masses[i])) for i in order))


def merge_similar(pitches: PitchSet, tolerance_hz: float) -> PitchSet:
    """Fold each entry into the first heavier kept entry within ``tolerance_hz``.

    Masses add up; the kept entry keeps its own center.
    """
    if not tolerance_hz >= 0:
        raise ValueError(f"tolerance_hz must be non-negative, got {tolerance_hz}")
    kept: list[list[float]] = []
    for entry in _ranked(pitches.entries):
        for k in kept:
            if abs(entry.center_hz - k[0]) <= tolerance_hz:
                k[1] += entry.mass
                break
        else:
            kept.append([entry.center_hz, entry.mass])
    return PitchSet(_ranked(PitchEntry(c, m) for c, m in kept))


class PipelineResult(NamedTuple):
    spectrum: Spectrum
    distribution: ProbabilityDistribution
    histogram: Histogram
    pitches: PitchSet


def run_pipeline(buffer: AudioBuffer, config: BinningConfig | None = None) -> PipelineResult:
    """Run every binning stage and keep the intermediate products."""
    config = config or BinningConfig()
    spectrum = compute_spectrum(buffer, config.fft_size, config.window)
    dist = to_probability(spectrum)
    hist = build_histogram(dist, config)
    # rank all accepted bins, merge, and only then cut to top_k, so that
    # near-duplicate bins cannot crowd distinct pitches out of the result
    accepted = select_top(hist, replace(config, top_k=hist.n_bins))
    pitches = merge_similar(accepted, config.merge_tol).top(config.top_k)
    return PipelineResult(spectrum, dist, hist, pitches)


def bin_method(buffer: AudioBuffer, config: BinningConfig | None = None) -> PitchSet:
    """Prominent frequencies of ``buffer`` ranked by binned spectral mass."""
    return run_pipeline(buffer, config).pitches
