"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""
import csv
import io
import time

import numpy as np
import pytest

from binpitch.binning import BinningConfig, PitchEntry, PitchSet, bin_method, build_histogram, merge_similar, select_top
from binpitch.cli import main
from binpitch.intonation import SYSTEMS, label_swara
from binpitch.reference_pitch import autocorr_f0, bin_size_sweep, factor_sweep
from binpitch.signal_io import scale, spec_from_range, synthesize
from binpitch.spectrum import ProbabilityDistribution, compute_spectrum, to_probability

from conftest import partials, planted_drone, tone
from oracles import brute_force_histogram

SEED = 20240611

# diff columns as printed in the reference ratio table (ptolemy, zarlino)
PRINTED_DIFFS = {
    "C": (0, 0), "C#": (0.01316, 0.01183), "B": (0.02343, 0.02343), "B#": (0, 0),
    "E": (0.01562, 0.01562), "F": (0, 0), "F#": (0.01757, 0.01757), "G": (0, 0),
    "G#": (0.01975, 0.01774), "A": (0.02083, 0.02083), "A#": (0.02222, 0.02222), "C'": (0, 0),
}


def test_criterion_1_ratio_table(criterion, tmp_path, capsys):
    t0 = time.perf_counter()
    out = tmp_path / "ratios.csv"
    assert main(["ratios", "--out", str(out)]) == 0
    table = list(csv.DictReader(io.StringIO(out.read_text())))
    elapsed = time.perf_counter() - t0
    labels = [r["note"] for r in table]
    labels[-1] = "C'"
    misses = []
    for label, r in zip(labels, table):
        for col, expect in zip(("diff_ptolemy", "diff_zarlino"), PRINTED_DIFFS[label]):
            got = float(r[col])
            if abs(got - expect) > 5e-5:
                misses.append(f"{label} {col} printed {expect} computed {got:g}")
    ok = len(table) == 12 and not misses and elapsed < 1.0
    criterion(1, "ratio table diffs within 5e-5", ok,
              f"{24 - len(misses)}/24 cells match, {elapsed:.2f}s" + ("; " + "; ".join(misses) if misses else ""))
    assert ok, misses


def test_criterion_2_pure_tone_recovery(criterion):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    config = BinningConfig(bin_size_hz=2.0, window="none")
    worst, hits = 0.0, 0
    for f in rng.uniform(100, 500, 100):
        buf = tone(float(f), fs=8000, dur=1.0)
        grid = 8000 / compute_spectrum(buf).fft_size
        err = abs(bin_method(buf, config)[0].center_hz - f)
        worst = max(worst, err)
        hits += err <= config.bin_size_hz / 2 + grid
    elapsed = time.perf_counter() - t0
    ok = hits == 100 and elapsed < 10
    criterion(2, "pure-tone recovery", ok, f"{hits}/100 within 1 Hz + grid step, worst {worst:.3f} Hz, {elapsed:.1f}s")
    assert ok


def test_criterion_3_bin_size_experiment(criterion):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    errors = []
    for _ in range(20):
        spec = spec_from_range(3, 100, 500, rng, min_gap_hz=25)
        rep = bin_size_sweep(synthesize(spec), (2, 5, 10), true_freqs_hz=spec.partial_freqs_hz)
        errors.append([r.error_pct for r in rep.rows])
    elapsed = time.perf_counter() - t0
    e2, e5, e10 = np.mean(errors, axis=0)
    ok = e2 < e10 and elapsed < 30
    criterion(3, "2 Hz bins beat 10 Hz bins", ok,
              f"mean error 2 Hz {e2:.4f}%, 5 Hz {e5:.4f}%, 10 Hz {e10:.4f}%, {elapsed:.1f}s")
    assert ok


def _edges(lo, hi, b):
    n, edges = 0, []
    while lo + n * b < hi:
        edges.append(lo + n * b)
        n += 1
    return edges + [hi]


def test_criterion_4_histogram_oracle(criterion):
    rng = np.random.default_rng(SEED)
    checked, exact = 0, 0
    for i in range(50):
        bin_size = (0.5, 2.0, 5.0, 10.0)[i % 4]
        n = int(rng.integers(200, 2000))
        # half the grids land on bin edges exactly
        spacing = float(rng.choice([0.25, 0.5, 1.0])) if i % 2 else float(rng.uniform(0.1, 3.0))
        freqs = np.arange(n) * spacing
        p = rng.exponential(size=n) * (rng.random(n) < 0.7)
        p[rng.integers(n)] += 1.0
        dist = ProbabilityDistribution(freqs, p / p.sum())
        hi = min(float(freqs[-1]), float(rng.uniform(200, 1500)))
        config = BinningConfig(bin_size_hz=bin_size, audible_min_hz=20.0, audible_max_hz=hi)
        hist = build_histogram(dist, config)
        edges = _edges(20.0, hi, bin_size)
        expected = brute_force_histogram(dist.freqs_hz.tolist(), dist.probabilities.tolist(), edges)
        checked += 1
        exact += hist.edges_hz.tolist() == edges and hist.mass.tolist() == expected
    ok = exact == checked == 50
    criterion(4, "histogram equals brute-force oracle", ok, f"{exact}/{checked} bit-identical")
    assert ok


def test_criterion_5_autocorrelation(criterion):
    rng = np.random.default_rng(SEED)
    tones = [abs(autocorr_f0(tone(float(f))) / f - 1) for f in rng.uniform(100, 500, 100)]
    stacks = [abs(autocorr_f0(partials((f, 2 * f, 3 * f))) / f - 1) for f in map(float, rng.uniform(100, 500, 50))]
    ok = max(tones) < 0.01 and max(stacks) < 0.01
    criterion(5, "autocorrelation reference", ok,
              f"pure tones worst {100 * max(tones):.3f}%, {{f,2f,3f}} worst {100 * max(stacks):.3f}% from f")
    assert ok


def test_criterion_6_planted_drone(criterion):
    picked = [factor_sweep(planted_drone(j), mode="interval").best_index for j in range(12)]
    hits = sum(b == j for j, b in enumerate(picked))
    ok = hits >= 11
    misses = [f"j={j} picked {b}" for j, b in enumerate(picked) if b != j]
    criterion(6, "factor sweep planted drone", ok, f"{hits}/12 recovered" + (f"; {', '.join(misses)}" if misses else ""))
    assert ok


def test_criterion_7_invariants(criterion):
    rng = np.random.default_rng(SEED)
    failures = []

    for _ in range(20):
        spec = spec_from_range(int(rng.integers(1, 6)), 100, 1000, rng, min_gap_hz=10)
        buf = synthesize(spec)
        c = float(10 ** rng.uniform(-3, 3))
        for center, atol in (("peak", 0.0), ("centroid", 1e-9)):
            cfg = BinningConfig(center=center)
            a, b = bin_method(buf, cfg), bin_method(scale(buf, c), cfg)
            if len(a) != len(b) or not np.allclose(a.centers_hz, b.centers_hz, rtol=0, atol=atol) \
                    or not np.allclose([e.mass for e in a], [e.mass for e in b], rtol=0, atol=1e-9):
                failures.append(f"amplitude {center}")

    for _ in range(20):
        spec = spec_from_range(int(rng.integers(1, 6)), 100, 3000, rng)
        dist = to_probability(compute_spectrum(synthesize(spec)))
        cfg = BinningConfig(bin_size_hz=float(rng.choice([0.5, 2, 5, 10])), audible_max_hz=float(rng.uniform(500, 3500)))
        hist = build_histogram(dist, cfg)
        if abs(hist.mass.sum() + hist.discarded_mass - 1) > 1e-9:
            failures.append("histogram mass")
        lo, hi = sorted(rng.uniform(0, 0.01, 2))
        k = int(rng.integers(1, 20))
        a = select_top(hist, BinningConfig(threshold=lo, top_k=k))
        b = select_top(hist, BinningConfig(threshold=hi, top_k=k))
        if len(b) > len(a) or not set(b.entries) <= set(a.entries):
            failures.append("threshold monotonicity")

    for _ in range(50):
        n = int(rng.integers(1, 30))
        ps = PitchSet(tuple(PitchEntry(float(f), float(m)) for f, m in zip(rng.uniform(100, 200, n), rng.random(n))))
        merged = merge_similar(ps, float(rng.uniform(0, 20)))
        if abs(merged.total_mass - ps.total_mass) > 1e-12 or len(merged) > len(ps):
            failures.append("merge mass")

    for _ in range(200):
        f, tonic = 10 ** rng.uniform(1, 4, 2)
        system = SYSTEMS[int(rng.integers(3))]
        if label_swara(2 * f, tonic, system) != label_swara(f, tonic, system):
            failures.append("octave invariance")

    ok = not failures
    criterion(7, "invariance suite", ok,
              "amplitude, threshold, mass conservation, octave checks all hold" if ok else ", ".join(sorted(set(failures))))
    assert ok, failures
