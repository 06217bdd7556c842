"""Binning-based pitch detection with just-intonation bin-size estimation."""

__version__ = "0.1.0"

from .binning import (
    BinningConfig,
    Histogram,
    PitchEntry,
    PitchSet,
    bin_method,
    build_histogram,
    merge_similar,
    run_pipeline,
    select_top,
)
from .intonation import (
    RatioEntry,
    RatioTable,
    estimate_bin_size,
    label_swara,
    ratio_diff,
    ratio_table,
)
from .reference_pitch import SweepReport, autocorr_f0, bin_size_sweep, error_percent, factor_sweep
from .signal_io import AudioBuffer, SyntheticSpec, load_wav, scale, synthesize, write_wav
from .spectrum import ProbabilityDistribution, Spectrum, compute_spectrum, find_raw_peaks, to_probability
