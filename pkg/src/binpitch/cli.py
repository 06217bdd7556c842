"""``binpitch`` command line: analyze, synth, dist, sweep-factor, sweep-binsize, ratios.

Exit status is 0 on success, 1 for I/O or analysis failures and 2 for
invalid command-line usage.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
from contextlib import contextmanager
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import __version__
from .binning import CENTERS, BinningConfig, run_pipeline
from .intonation import parse_ratio, ratio_str, ratio_table
from .reference_pitch import DEFAULT_BIN_SIZES_HZ, SweepReport, bin_size_sweep, factor_sweep
from .signal_io import (
    AudioBuffer,
    SyntheticSpec,
    WavError,
    load_wav,
    parse_freq_list,
    spec_from_range,
    synthesize,
    write_wav,
)
from .spectrum import WINDOWS


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Plain decimal with 6 significant digits; no exponent notation."""
    if isinstance(x, Fraction):
        x = float(x)
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    return np.format_float_positional(x, precision=6, unique=False, fractional=False, trim="-")


def jnum(x):
    """JSON-safe number rounded like :func:`fmt`; non-finite values become null."""
    x = float(x)
    if not np.isfinite(x):
        return None
    return float(fmt(x))


# -- argument parsing --------------------------------------------------------

def _freq_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None
    if not 0 < lo < hi:
        raise argparse.ArgumentTypeError(f"range needs 0 < LO < HI, got {text!r}")
    return lo, hi


def _freq_list(text: str) -> tuple[float, ...]:
    try:
        return parse_freq_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ratio_list(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(parse_ratio(p.strip()) for p in text.split(",") if p.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad ratio list {text!r}: {exc}") from None


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _output_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--seed", type=_seed, default=0, help="seed for randomized fixtures")
    return p


def _binning_parent() -> argparse.ArgumentParser:
    d = BinningConfig()
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("binning")
    g.add_argument("--bin-size", type=float, default=d.bin_size_hz, help="bin width in Hz")
    g.add_argument("--threshold", type=float, default=d.threshold, help="minimum accepted bin mass")
    g.add_argument("--top-k", type=int, default=d.top_k)
    g.add_argument("--audible-min", type=float, default=d.audible_min_hz)
    g.add_argument("--audible-max", type=float, default=d.audible_max_hz)
    g.add_argument("--merge-tolerance", type=float, default=None, help="Hz; default one bin width")
    g.add_argument("--center", choices=CENTERS, default=d.center)
    g.add_argument("--fft-size", type=int, default=None)
    g.add_argument("--window", choices=WINDOWS, default=d.window)
    return p


def _synth_flags(p: argparse.ArgumentParser, required: bool) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--freqs", type=_freq_list, help="comma-separated partial frequencies in Hz")
    src.add_argument("--random", type=int, metavar="P", help="draw P partial frequencies from --range")
    p.add_argument("--range", type=_freq_range, default=(100.0, 500.0), metavar="LO..HI")
    p.add_argument("--min-gap", type=float, default=0.0, help="minimum spacing of random partials (Hz)")
    p.add_argument("--fs", type=int, default=8000, help="sample rate in Hz")
    p.add_argument("--dur", type=float, default=1.0, help="duration in seconds")
    p.add_argument("--phase", type=float, default=0.0, help="common phase offset in radians")
    p.add_argument("--amplitude", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    out, binning = _output_parent(), _binning_parent()
    parser = argparse.ArgumentParser(prog="binpitch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[binning, out], help="top pitches of a WAV file")
    p.add_argument("wav")

    p = sub.add_parser("synth", parents=[out], help="write a multi-partial test signal as 16-bit WAV")
    _synth_flags(p, required=True)

    p = sub.add_parser("dist", parents=[binning, out], help="frequency probability distribution of a WAV file")
    p.add_argument("wav")

    p = sub.add_parser("sweep-factor", parents=[binning, out], help="error per bin-size factor")
    p.add_argument("wav")
    p.add_argument("--mode", choices=("interval", "literal"), default="interval")
    p.add_argument("--factors", type=_ratio_list, default=None, help="comma-separated ratios, e.g. 1/1,16/15")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("sweep-binsize", parents=[binning, out], help="error per bin size")
    p.add_argument("wav", nargs="?")
    _synth_flags(p, required=False)
    p.add_argument("--sizes", type=_freq_list, default=DEFAULT_BIN_SIZES_HZ, help="comma-separated bin sizes in Hz")
    p.add_argument("--workers", type=int, default=None)

    sub.add_parser("ratios", parents=[out], help="tuning ratio table with difference columns")
    return parser


def config_from_args(args) -> BinningConfig:
    try:
        return BinningConfig(
            bin_size_hz=args.bin_size,
            threshold=args.threshold,
            top_k=args.top_k,
            audible_min_hz=args.audible_min,
            audible_max_hz=args.audible_max,
            merge_tolerance_hz=args.merge_tolerance,
            center=args.center,
            fft_size=args.fft_size,
            window=args.window,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def spec_from_args(args) -> SyntheticSpec:
    kwargs = dict(phase_rad=args.phase, amplitude=args.amplitude, duration_s=args.dur, sample_rate_hz=args.fs)
    try:
        if args.freqs is not None:
            return SyntheticSpec(args.freqs, **kwargs)
        lo, hi = args.range
        if hi >= args.fs / 2:
            raise ValueError(f"range upper bound {hi} Hz is not below the Nyquist frequency {args.fs / 2} Hz")
        rng = np.random.default_rng(args.seed)
        return spec_from_range(args.random, lo, hi, rng, min_gap_hz=args.min_gap, **kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- output ------------------------------------------------------------------

@contextmanager
def _sink(path: str):
    if path == "-":
        yield sys.stdout
        return
    buf = io.StringIO()
    yield buf
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _write_csv(fh, header: Sequence[str], rows, comments: Sequence[tuple[str, str]] = ()) -> None:
    for key, value in comments:
        fh.write(f"# {key}={value}\n")
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(row) + "\n")


def _write_json(fh, payload) -> None:
    fh.write(json.dumps(payload, indent=2, allow_nan=False) + "\n")


def _emit_report(args, report: SweepReport, parameter_kind: str) -> None:
    comments = [("reference_hz", "none" if report.reference_hz is None else fmt(report.reference_hz))]
    if report.true_freqs_hz is not None:
        comments.append(("true_freqs_hz", ";".join(fmt(f) for f in report.true_freqs_hz)))
    comments.append(("best_index", "none" if report.best_index is None else str(report.best_index)))
    with _sink(args.out) as fh:
        if args.format == "json":
            _write_json(fh, {
                "reference_hz": None if report.reference_hz is None else jnum(report.reference_hz),
                "true_freqs_hz": None if report.true_freqs_hz is None else [jnum(f) for f in report.true_freqs_hz],
                "parameter_kind": parameter_kind,
                "best_index": report.best_index,
                "rows": [
                    {
                        "parameter": ratio_str(r.parameter) if isinstance(r.parameter, Fraction) else jnum(r.parameter),
                        "bin_size_hz": jnum(r.bin_size_hz),
                        "estimate_hz": jnum(r.estimate_hz),
                        "error_pct": jnum(r.error_pct),
                    }
                    for r in report.rows
                ],
            })
        else:
            rows = ((fmt(r.parameter), fmt(r.bin_size_hz), fmt(r.estimate_hz), fmt(r.error_pct)) for r in report.rows)
            _write_csv(fh, ("parameter", "bin_size_hz", "estimate_hz", "error_pct"), rows, comments)


# -- commands ----------------------------------------------------------------

def cmd_analyze(args) -> None:
    config = config_from_args(args)
    buffer = load_wav(args.wav)
    result = run_pipeline(buffer, config)
    meta = [
        ("sample_rate_hz", str(buffer.sample_rate_hz)),
        ("fft_size", str(result.spectrum.fft_size)),
        ("bin_size_hz", fmt(config.bin_size_hz)),
        ("threshold", fmt(config.threshold)),
        ("top_k", str(config.top_k)),
    ]
    entries = list(result.pitches)
    with _sink(args.out) as fh:
        if args.format == "json":
            _write_json(fh, {
                "metadata": {
                    "sample_rate_hz": buffer.sample_rate_hz,
                    "fft_size": result.spectrum.fft_size,
                    "bin_size_hz": jnum(config.bin_size_hz),
                    "threshold": jnum(config.threshold),
                    "top_k": config.top_k,
                },
                "pitches": [
                    {"rank": i, "center_hz": jnum(e.center_hz), "mass": jnum(e.mass)}
                    for i, e in enumerate(entries, 1)
                ],
            })
        else:
            rows = ((str(i), fmt(e.center_hz), fmt(e.mass)) for i, e in enumerate(entries, 1))
            _write_csv(fh, ("rank", "center_hz", "mass"), rows, meta)


def cmd_synth(args) -> None:
    spec = spec_from_args(args)
    if args.out == "-":
        raise UsageError("synth needs --out PATH for the WAV file")
    write_wav(args.out, synthesize(spec))


def cmd_dist(args) -> None:
    config = config_from_args(args)
    result = run_pipeline(load_wav(args.wav), config)
    dist = result.distribution
    inside = (dist.freqs_hz >= config.audible_min_hz) & (dist.freqs_hz <= config.audible_max_hz)
    freqs, probs = dist.freqs_hz[inside], dist.probabilities[inside]
    with _sink(args.out) as fh:
        if args.format == "json":
            _write_json(fh, {
                "freq_hz": [jnum(f) for f in freqs],
                "probability": [jnum(p) for p in probs],
            })
        else:
            _write_csv(fh, ("freq_hz", "probability"), ((fmt(f), fmt(p)) for f, p in zip(freqs, probs)))


def cmd_sweep_factor(args) -> None:
    config = config_from_args(args)
    buffer = load_wav(args.wav)
    report = factor_sweep(buffer, args.factors, args.mode, config, max_workers=args.workers)
    _emit_report(args, report, "factor")


def cmd_sweep_binsize(args) -> None:
    config = config_from_args(args)
    synthetic = args.freqs is not None or args.random is not None
    if synthetic == (args.wav is not None):
        raise UsageError("give exactly one input: a WAV path or --freqs/--random")
    truth = None
    if synthetic:
        spec = spec_from_args(args)
        buffer: AudioBuffer = synthesize(spec)
        truth = spec.partial_freqs_hz
    else:
        buffer = load_wav(args.wav)
    report = bin_size_sweep(buffer, args.sizes, truth, config, max_workers=args.workers)
    _emit_report(args, report, "bin_size_hz")


def cmd_ratios(args) -> None:
    table = ratio_table()
    with _sink(args.out) as fh:
        if args.format == "json":
            _write_json(fh, [
                {
                    "note": e.note_label,
                    "ptolemy": ratio_str(e.ptolemy),
                    "calculated": ratio_str(e.calculated),
                    "zarlino": ratio_str(e.zarlino),
                    "diff_ptolemy": jnum(e.diff_ptolemy),
                    "diff_zarlino": jnum(e.diff_zarlino),
                }
                for e in table
            ])
        else:
            rows = (
                (e.note_label, ratio_str(e.ptolemy), ratio_str(e.calculated), ratio_str(e.zarlino), fmt(e.diff_ptolemy), fmt(e.diff_zarlino))
                for e in table
            )
            _write_csv(fh, ("note", "ptolemy", "calculated", "zarlino", "diff_ptolemy", "diff_zarlino"), rows)


COMMANDS = {
    "analyze": cmd_analyze,
    "synth": cmd_synth,
    "dist": cmd_dist,
    "sweep-factor": cmd_sweep_factor,
    "sweep-binsize": cmd_sweep_binsize,
    "ratios": cmd_ratios,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (WavError, OSError, ValueError) as exc:
        print(f"binpitch: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
