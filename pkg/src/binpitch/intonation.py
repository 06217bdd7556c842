"""Just-intonation ratio tables, bin-size estimation and swara labelling.

Ratios are :class:`fractions.Fraction` values, so differences between tuning
systems are exact until they are converted for display.

The reference table has three columns per scale row: Ptolemy's diatonic
ratios, a three-limit (Pythagorean) column built from stacked fifths, and
Zarlino's ratios.  Row labels and their order are kept as in the source table,
including the unusual ``B``/``B#`` rows between ``C#`` and ``E``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

__all__ = [
    "Rational",
    "RatioEntry",
    "RatioTable",
    "SYSTEMS",
    "KOMAL_RISHABH",
    "ratio_table",
    "ratio_diff",
    "ratio_diff_exact",
    "estimate_bin_size",
    "label_swara",
    "ptolemy_factors",
    "parse_ratio",
    "ratio_str",
]

Rational = Fraction
RatioLike = Union[Fraction, int, str]

SYSTEMS = ("ptolemy", "calculated", "zarlino")

# inverse of the flat second 16/15; governs the bin-size estimate
KOMAL_RISHABH = Fraction(15, 16)

_ROWS = (
    ("C", "1/1", "1/1", "1/1"),
    ("C#", "16/15", "256/243", "25/24"),
    ("B", "15/8", "243/128", "15/8"),
    ("B#", "9/5", "9/5", "9/5"),
    ("E", "5/4", "81/64", "5/4"),
    ("F", "4/3", "4/3", "4/3"),
    ("F#", "45/32", "729/512", "45/32"),
    ("G", "3/2", "3/2", "3/2"),
    ("G#", "8/5", "128/81", "25/16"),
    ("A", "5/3", "27/16", "5/3"),
    ("A#", "9/5", "16/9", "16/9"),
    ("C", "2/1", "2/1", "2/1"),
)


def ratio_str(r: Fraction) -> str:
    """Always ``n/d``, so unison prints as ``1/1`` rather than ``1``."""
    return f"{r.numerator}/{r.denominator}"


def parse_ratio(value: RatioLike) -> Fraction:
    """``Fraction`` from ``"16/15"``, an int, or an existing ``Fraction``."""
    r = Fraction(value)
    if r <= 0:
        raise ValueError(f"ratio must be positive, got {value!r}")
    return r


@dataclass(frozen=True)
class RatioEntry:
    note_label: str
    ptolemy: Fraction
    calculated: Fraction
    zarlino: Fraction

    def __post_init__(self):
        for system in SYSTEMS:
            r = getattr(self, system)
            if not 1 <= r <= 2:
                raise ValueError(f"{self.note_label}: {system} ratio {r} is outside one octave")

    def ratio(self, system: str) -> Fraction:
        if system not in SYSTEMS:
            raise ValueError(f"unknown tuning system {system!r}; expected one of {SYSTEMS}")
        return getattr(self, system)

    @property
    def diff_ptolemy(self) -> float:
        return ratio_diff(self.ptolemy, self.calculated)

    @property
    def diff_zarlino(self) -> float:
        return ratio_diff(self.zarlino, self.calculated)


@dataclass(frozen=True)
class RatioTable:
    entries: tuple[RatioEntry, ...]

    def __post_init__(self):
        first, last = self.entries[0], self.entries[-1]
        for system in SYSTEMS:
            if first.ratio(system) != 1 or last.ratio(system) != 2:
                raise ValueError("table must run from unison 1/1 to the octave 2/1")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[RatioEntry]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> RatioEntry:
        return self.entries[i]

    def row(self, label: str) -> RatioEntry:
        """First row carrying ``label`` (``"C"`` matches the unison row)."""
        for e in self.entries:
            if e.note_label == label:
                return e
        raise KeyError(label)

    def column(self, system: str) -> tuple[Fraction, ...]:
        return tuple(e.ratio(system) for e in self.entries)


_TABLE = RatioTable(tuple(
    RatioEntry(label, Fraction(p), Fraction(c), Fraction(z)) for label, p, c, z in _ROWS
))


def ratio_table() -> RatioTable:
    return _TABLE


def ptolemy_factors() -> tuple[Fraction, ...]:
    """Default factor set for sweeps: the Ptolemy column, top to bottom."""
    return _TABLE.column("ptolemy")


def ratio_diff_exact(a: RatioLike, b: RatioLike) -> Fraction:
    return abs(Fraction(a) - Fraction(b))


def ratio_diff(a: RatioLike, b: RatioLike) -> float:
    """``|a - b|`` as a float, computed exactly before conversion."""
    return float(ratio_diff_exact(a, b))


def estimate_bin_size(f_max_hz: float, factor: RatioLike, mode: str = "interval") -> float:
    """Bin width from the dominant frequency and a scale-degree factor.

    ``mode="literal"`` evaluates ``15/16 * f_max * factor``.  ``mode="interval"``
    (default) uses the width of the komal-rishabh step instead,
    ``(1 - 15/16) * f_max * factor = f_max * factor / 16``, which gives widths
    of the same order as a semitone around ``f_max * factor``.
    """
    if not f_max_hz > 0:
        raise ValueError(f"f_max_hz must be positive, got {f_max_hz}")
    r = parse_ratio(factor)
    if not 1 <= r <= 2:
        raise ValueError(f"factor must lie within one octave [1, 2], got {r}")
    if mode == "literal":
        k = KOMAL_RISHABH
    elif mode == "interval":
        k = 1 - KOMAL_RISHABH
    else:
        raise ValueError(f"mode must be 'literal' or 'interval', got {mode!r}")
    return float(k * r) * f_max_hz


def fold_octave(ratio: float) -> float:
    """Map a positive ratio into [1, 2) by exact powers of two."""
    if not ratio > 0:
        raise ValueError("ratio must be positive")
    mantissa, _ = math.frexp(ratio)
    return 2.0 * mantissa


def cents(ratio: float) -> float:
    return 1200.0 * math.log2(ratio)


def label_swara(freq_hz: float, tonic_hz: float, system: str = "ptolemy") -> tuple[str, float]:
    """Nearest table row to ``freq_hz`` relative to ``tonic_hz``.

    Returns the row label and the signed deviation in cents from that row's
    ratio.  Closest row wins; on a tie the earlier row wins.
    """
    if not (freq_hz > 0 and tonic_hz > 0):
        raise ValueError("frequencies must be positive")
    if system not in SYSTEMS:
        raise ValueError(f"unknown tuning system {system!r}; expected one of {SYSTEMS}")
    folded = fold_octave(freq_hz / tonic_hz)
    best_label, best_dev = "", math.inf
    for entry in _TABLE:
        dev = cents(folded / float(entry.ratio(system)))
        if abs(dev) < abs(best_dev):
            best_label, best_dev = entry.note_label, dev
    return best_label, best_dev
