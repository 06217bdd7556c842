import math

import numpy as np
import pytest

from binpitch.signal_io import AudioBuffer, SyntheticSpec, synthesize


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def tone(freq, fs=8000, dur=1.0, **kw):
    return synthesize(SyntheticSpec((freq,), duration_s=dur, sample_rate_hz=fs, **kw))


def partials(freqs, fs=8000, dur=1.0, **kw):
    return synthesize(SyntheticSpec(tuple(freqs), duration_s=dur, sample_rate_hz=fs, **kw))


def mixture(components, fs, n):
    """Sum of ``amplitude * cos`` terms from ``(freq, amplitude)`` pairs."""
    t = np.arange(n)
    x = sum(a * np.cos(2 * np.pi * f * t / fs) for f, a in components)
    return AudioBuffer(x / np.max(np.abs(x)), fs)


PLANT_FS = 8192
PLANT_DRONE_HZ = 256.0


def planted_drone(j):
    """Signal whose drone is recovered only by bins of the width set by factor ``j``.

    On a 1 Hz grid the drone sits at 256 Hz, which is also the spectral maximum
    and the autocorrelation fundamental.  A satellite just wider than the next
    smaller width pulls narrower bins' drone off target or lets a competitor
    at 512/513 Hz outweigh it.  A second satellite next to a 768 Hz competitor,
    just wider than width ``j``, lets any wider bin merge the two and outweigh
    the drone.
    """
    from binpitch.intonation import estimate_bin_size, ptolemy_factors

    factors = ptolemy_factors()
    widths = sorted({estimate_bin_size(PLANT_DRONE_HZ, f) for f in factors})
    bj = estimate_bin_size(PLANT_DRONE_HZ, factors[j])
    k = widths.index(bj)
    comps = [(PLANT_DRONE_HZ, 1.0)]
    if k > 0:
        d = math.floor(widths[k - 1]) + 1
        comps += [(PLANT_DRONE_HZ + d, 0.4), (512.0, 0.6), (513.0, 0.6)]
    if k < len(widths) - 1:
        d = math.floor(bj) + 1
        comps += [(768.0, 0.9), (768.0 + d, 0.7)]
    return mixture(comps, PLANT_FS, PLANT_FS)


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    def record(number, name, ok, detail):
        line = f"criterion {number} [{name}]: {'PASS' if ok else 'FAIL'} ({detail})"
        _CRITERIA.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
