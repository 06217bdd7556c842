"""Autocorrelation reference pitch and the bin-size / scale-factor error sweeps."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from .binning import BinningConfig, PitchSet, bin_method
from .intonation import RatioLike, estimate_bin_size, parse_ratio, ptolemy_factors
from .signal_io import AudioBuffer
from .spectrum import compute_spectrum, to_probability

__all__ = [
    "SweepRow",
    "SweepReport",
    "autocorr_f0",
    "error_percent",
    "factor_sweep",
    "bin_size_sweep",
    "DEFAULT_BAND_HZ",
    "DEFAULT_BIN_SIZES_HZ",
    "FAILED",
]

DEFAULT_BAND_HZ = (50.0, 1000.0)
DEFAULT_BIN_SIZES_HZ = (2.0, 5.0, 10.0)

# error recorded for a row whose pitch set came back empty
FAILED = math.inf


class SweepRow(NamedTuple):
    parameter: Union[Fraction, float]
    bin_size_hz: float
    estimate_hz: float
    error_pct: float

    @property
    def failed(self) -> bool:
        return math.isinf(self.error_pct)


@dataclass(frozen=True)
class SweepReport:
    """Per-parameter drone estimates and their error against a reference.

    ``reference_hz`` is ``None`` when errors were measured against known
    partial frequencies (``true_freqs_hz``) instead of an autocorrelation pitch.
    ``best_index`` is ``None`` only if every row failed.
    """

    reference_hz: float | None
    rows: tuple[SweepRow, ...]
    best_index: int | None
    true_freqs_hz: tuple[float, ...] | None = None

    @property
    def best(self) -> SweepRow | None:
        return None if self.best_index is None else self.rows[self.best_index]


def autocorrelation(x: np.ndarray, lags: np.ndarray) -> np.ndarray:
    """Biased autocorrelation ``r[t] = sum_n x[n] * x[n + t]`` at the given lags."""
    n = x.size
    return np.array([np.dot(x[: n - t], x[t:]) for t in lags])


def autocorr_f0(
    buffer: AudioBuffer,
    f_min_hz: float = DEFAULT_BAND_HZ[0],
    f_max_hz: float = DEFAULT_BAND_HZ[1],
    interpolate: bool = True,
    peak_ratio: float = 0.8,
) -> float:
    """Pitch from the biased autocorrelation over lags for ``[f_min_hz, f_max_hz]``.

    The chosen lag is the shortest local maximum whose value reaches
    ``peak_ratio`` times the largest value in the band.  A period that falls
    between two integer lags can make a multiple of it correlate slightly
    better than the period itself; preferring the first strong peak avoids
    reporting that subharmonic.  ``peak_ratio=1`` reduces to the plain
    argmax (shorter lag on ties).

    With ``interpolate`` a parabola through the chosen lag and its neighbours
    refines it to a fractional lag; otherwise the result is exactly
    ``fs / lag``.  The parabola is fitted to the unbiased values
    ``r[t] / (N - t)`` so the taper of the biased sum does not tilt the peak.
    """
    fs = buffer.sample_rate_hz
    if not 0 < f_min_hz < f_max_hz < fs / 2:
        raise ValueError(f"need 0 < f_min_hz < f_max_hz < {fs / 2}, got [{f_min_hz}, {f_max_hz}]")
    if not 0 < peak_ratio <= 1:
        raise ValueError("peak_ratio must lie in (0, 1]")
    x = buffer.samples
    if len(x) < 2 * fs / f_min_hz:
        raise ValueError(
            f"buffer of {len(x)} samples is too short; need {math.ceil(2 * fs / f_min_hz)} for f_min_hz={f_min_hz}"
        )
    if np.ptp(x) == 0:
        raise ValueError("buffer is constant; autocorrelation pitch is undefined")
    lag_lo = math.ceil(fs / f_max_hz)
    lag_hi = math.floor(fs / f_min_hz)
    # one extra lag on each side so band edges can be tested as local maxima
    lags = np.arange(lag_lo - 1, lag_hi + 2)
    r = autocorrelation(x, lags)
    band = r[1:-1]
    top = band.max()
    if peak_ratio == 1:
        i = int(np.argmax(band)) + 1
    else:
        is_peak = (band >= r[:-2]) & (band > r[2:]) & (band >= peak_ratio * top)
        i = int(np.flatnonzero(is_peak)[0]) + 1 if is_peak.any() else int(np.argmax(band)) + 1
    lag = float(lags[i])
    if interpolate:
        u = r[i - 1: i + 2] / (x.size - lags[i - 1: i + 2])
        curvature = u[0] - 2.0 * u[1] + u[2]
        if curvature < 0:
            lag += 0.5 * (u[0] - u[2]) / curvature
    return fs / lag


def error_percent(estimate_hz: float, reference_hz: float) -> float:
    """``100 * |estimate - reference| / reference``."""
    if not reference_hz > 0:
        raise ValueError(f"reference_hz must be positive, got {reference_hz}")
    return 100.0 * abs(estimate_hz - reference_hz) / reference_hz


def nearest_center_error(pitches: PitchSet, true_freqs_hz: Sequence[float]) -> float:
    """Mean over true partials of the percentage distance to the closest center."""
    if len(pitches) == 0:
        return FAILED
    centers = np.array(pitches.centers_hz)
    return float(np.mean([error_percent(float(centers[np.argmin(np.abs(centers - t))]), t)
                          for t in true_freqs_hz]))


def _best(rows: Sequence[SweepRow], keys: Sequence[float]) -> int | None:
    ok = [i for i, row in enumerate(rows) if not row.failed]
    if not ok:
        return None
    return min(ok, key=lambda i: (rows[i].error_pct, keys[i], i))


def _map(fn: Callable, items: Sequence, max_workers: int | None) -> list:
    if max_workers is None or max_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(fn, items))


def _drone(pitches: PitchSet) -> float:
    return pitches[0].center_hz if len(pitches) else math.nan


def factor_sweep(
    buffer: AudioBuffer,
    factors: Sequence[RatioLike] | None = None,
    mode: str = "interval",
    config: BinningConfig | None = None,
    band_hz: tuple[float, float] = DEFAULT_BAND_HZ,
    max_workers: int | None = None,
) -> SweepReport:
    """Error of the binned drone estimate for each bin-size factor.

    For each factor the bin width is ``estimate_bin_size(f_max, factor, mode)``,
    where ``f_max`` is the most probable audible frequency of the whole signal.
    The drone estimate is the heaviest pitch and the reference is
    :func:`autocorr_f0` over ``band_hz``.  The best row has the lowest error;
    ties go to the smaller factor.
    """
    config = config or BinningConfig()
    factors = [parse_ratio(f) for f in (ptolemy_factors() if factors is None else factors)]
    if not factors:
        raise ValueError("factor list is empty")
    reference = autocorr_f0(buffer, *band_hz)
    dist = to_probability(compute_spectrum(buffer, config.fft_size, config.window))
    f_max = dist.argmax_hz(config.audible_min_hz, config.audible_max_hz)

    def row(factor: Fraction) -> SweepRow:
        size = estimate_bin_size(f_max, factor, mode)
        estimate = _drone(bin_method(buffer, config.with_bin_size(size)))
        err = FAILED if math.isnan(estimate) else error_percent(estimate, reference)
        return SweepRow(factor, size, estimate, err)

    rows = tuple(_map(row, factors, max_workers))
    return SweepReport(reference, rows, _best(rows, [float(f) for f in factors]))


def bin_size_sweep(
    buffer: AudioBuffer,
    sizes_hz: Sequence[float] = DEFAULT_BIN_SIZES_HZ,
    true_freqs_hz: Sequence[float] | None = None,
    config: BinningConfig | None = None,
    band_hz: tuple[float, float] = DEFAULT_BAND_HZ,
    max_workers: int | None = None,
) -> SweepReport:
    """Binning error for each bin width.

    With ``true_freqs_hz`` (synthetic input) the error is the mean
    nearest-center percentage error over the known partials.  Without it the
    heaviest pitch is compared with :func:`autocorr_f0`.  Ties go to the
    smaller bin.
    """
    config = config or BinningConfig()
    sizes = [float(s) for s in sizes_hz]
    if not sizes:
        raise ValueError("bin size list is empty")
    truth = None if true_freqs_hz is None else tuple(float(f) for f in true_freqs_hz)
    reference = None if truth is not None else autocorr_f0(buffer, *band_hz)

    def row(size: float) -> SweepRow:
        pitches = bin_method(buffer, config.with_bin_size(size))
        estimate = _drone(pitches)
        if truth is not None:
            err = nearest_center_error(pitches, truth)
        else:
            err = FAILED if math.isnan(estimate) else error_percent(estimate, reference)
        return SweepRow(size, size, estimate, err)

    rows = tuple(_map(row, sizes, max_workers))
    return SweepReport(reference, rows, _best(rows, sizes), truth)
