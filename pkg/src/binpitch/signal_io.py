"""Audio buffers: WAV ingestion, WAV output and synthetic multi-partial signals.

Supported input is little-endian RIFF/WAVE with integer PCM (8/16/24/32 bit)
or IEEE float (32/64 bit) samples, mono or stereo.  Output is always 16-bit
PCM mono.
"""
from __future__ import annotations

import struct
import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "AudioBuffer",
    "SyntheticSpec",
    "WavError",
    "WavReadError",
    "UnsupportedFormatError",
    "EmptyAudioError",
    "ChannelCountError",
    "load_wav",
    "write_wav",
    "synthesize",
    "scale",
    "spec_from_range",
    "parse_freq_list",
]

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

MAX_PARTIALS = 8


class WavError(Exception):
    """Base class for WAV ingestion failures."""


class WavReadError(WavError):
    """The file could not be read or is not a well-formed RIFF/WAVE file."""


class UnsupportedFormatError(WavError):
    """The codec or sample width is not one of the supported PCM/float layouts."""


class EmptyAudioError(WavError):
    """The data chunk holds no sample frames."""


class ChannelCountError(WavError):
    """More than two channels."""


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional (mono)")
        if samples.size == 0:
            raise ValueError("samples must be non-empty")
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be a positive integer, got {self.sample_rate_hz!r}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.samples)))


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a sum of equal-amplitude cosines sharing one phase offset."""

    partial_freqs_hz: tuple[float, ...]
    phase_rad: float = 0.0
    amplitude: float = 1.0
    duration_s: float = 1.0
    sample_rate_hz: int = 8000

    def __post_init__(self):
        freqs = tuple(float(f) for f in self.partial_freqs_hz)
        object.__setattr__(self, "partial_freqs_hz", freqs)
        if not freqs:
            raise ValueError("at least one partial frequency is required")
        if len(freqs) > MAX_PARTIALS:
            raise ValueError(f"at most {MAX_PARTIALS} partials are supported, got {len(freqs)}")
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be a positive integer")
        nyquist = self.sample_rate_hz / 2
        for f in freqs:
            if not f > 0:
                raise ValueError(f"partial frequencies must be positive, got {f}")
            if f >= nyquist:
                raise ValueError(f"partial {f} Hz is not below the Nyquist frequency {nyquist} Hz")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        if not self.duration_s > 0:
            raise ValueError("duration_s must be positive")
        if self.n_samples < 2:
            raise ValueError("duration_s * sample_rate_hz must give at least 2 samples")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))


def synthesize(spec: SyntheticSpec) -> AudioBuffer:
    """Render ``amplitude * mean_i cos(2*pi*f_i*n/fs + phase)``."""
    n = np.arange(spec.n_samples, dtype=np.float64)
    acc = np.zeros(spec.n_samples)
    for f in spec.partial_freqs_hz:
        acc += np.cos(2.0 * np.pi * f * n / spec.sample_rate_hz + spec.phase_rad)
    return AudioBuffer(spec.amplitude * (acc / len(spec.partial_freqs_hz)), spec.sample_rate_hz)


def scale(buffer: AudioBuffer, target_peak: float = 1.0, length: int | None = None) -> AudioBuffer:
    """Peak-normalize ``buffer`` to ``target_peak``, optionally truncating first.

    ``length`` keeps only the first ``length`` samples, which bounds the cost of
    analysing very long recordings.
    """
    if not target_peak > 0:
        raise ValueError("target_peak must be positive")
    samples = buffer.samples
    if length is not None:
        if length < 1:
            raise ValueError("length must be at least 1")
        samples = samples[:length]
    peak = np.max(np.abs(samples))
    if peak == 0:
        raise ValueError("cannot scale an all-zero buffer")
    if peak == target_peak:
        return AudioBuffer(samples.copy(), buffer.sample_rate_hz)
    return AudioBuffer(samples * (target_peak / peak), buffer.sample_rate_hz)


# -- WAV input ---------------------------------------------------------------

@dataclass
class _Format:
    tag: int
    channels: int
    sample_rate: int
    bits: int
    block_align: int = field(default=0)


def _parse_fmt(body: bytes) -> _Format:
    if len(body) < 16:
        raise WavReadError("fmt chunk is truncated")
    tag, channels, rate, _byte_rate, block_align, bits = struct.unpack("<HHIIHH", body[:16])
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 40:
            raise WavReadError("WAVE_FORMAT_EXTENSIBLE fmt chunk is truncated")
        # first two bytes of the sub-format GUID carry the actual format code
        tag = struct.unpack("<H", body[24:26])[0]
    return _Format(tag, channels, rate, bits, block_align)


def _decode(data: bytes, fmt: _Format) -> np.ndarray:
    width = fmt.bits // 8
    if fmt.tag == WAVE_FORMAT_PCM:
        if fmt.bits == 8:
            raw = np.frombuffer(data, dtype=np.uint8)
            return (raw.astype(np.float64) - 128.0) / 128.0
        if fmt.bits == 16:
            return np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
        if fmt.bits == 24:
            raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
            ints = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
            ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
            return ints.astype(np.float64) / float(1 << 23)
        if fmt.bits == 32:
            return np.frombuffer(data, dtype="<i4").astype(np.float64) / float(1 << 31)
        raise UnsupportedFormatError(f"unsupported PCM sample width: {fmt.bits} bits")
    if fmt.tag == WAVE_FORMAT_IEEE_FLOAT:
        if fmt.bits == 32:
            return np.frombuffer(data, dtype="<f4").astype(np.float64)
        if fmt.bits == 64:
            return np.frombuffer(data, dtype="<f8").copy()
        raise UnsupportedFormatError(f"unsupported float sample width: {fmt.bits} bits")
    raise UnsupportedFormatError(f"unsupported WAVE format code 0x{fmt.tag:04x} ({width}-byte samples)")


def load_wav(path: str | Path) -> AudioBuffer:
    """Read a WAV file into a mono :class:`AudioBuffer` scaled to [-1, 1].

    Stereo input is downmixed by averaging the two channels.

    Raises:
        WavReadError: the file is missing, unreadable or not RIFF/WAVE.
        UnsupportedFormatError: compressed codecs or unusual sample widths.
        EmptyAudioError: the data chunk is empty.
        ChannelCountError: more than two channels.
    """
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise WavReadError(f"cannot read {path}: {exc}") from exc
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise WavReadError(f"{path} is not a RIFF/WAVE file")

    fmt: _Format | None = None
    data: bytes | None = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos:pos + 4]
        size = struct.unpack("<I", blob[pos + 4:pos + 8])[0]
        body = blob[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(body)
        elif chunk_id == b"data":
            data = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise WavReadError(f"{path} has no fmt chunk")
    if data is None:
        raise WavReadError(f"{path} has no data chunk")

    if fmt.channels < 1:
        raise WavReadError(f"{path} declares zero channels")
    if fmt.channels > 2:
        raise ChannelCountError(f"{path} has {fmt.channels} channels; only mono and stereo are supported")
    if fmt.bits % 8 != 0 or fmt.bits == 0:
        raise UnsupportedFormatError(f"unsupported sample width: {fmt.bits} bits")
    frame_bytes = fmt.channels * fmt.bits // 8
    n_frames = len(data) // frame_bytes
    if n_frames == 0:
        raise EmptyAudioError(f"{path} contains no sample frames")
    if fmt.sample_rate <= 0:
        raise WavReadError(f"{path} declares sample rate {fmt.sample_rate}")

    samples = _decode(data[:n_frames * frame_bytes], fmt)
    if fmt.channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    return AudioBuffer(samples, fmt.sample_rate)


# -- WAV output --------------------------------------------------------------

def to_pcm16(samples: np.ndarray) -> np.ndarray:
    """Quantize [-1, 1] floats to int16 with the same 1/32768 full scale used on read."""
    q = np.round(np.asarray(samples, dtype=np.float64) * 32768.0)
    return np.clip(q, -32768, 32767).astype("<i2")


def write_wav(path: str | Path, buffer: AudioBuffer) -> None:
    """Write ``buffer`` as 16-bit PCM mono.  Samples outside [-1, 1] are clipped."""
    pcm = to_pcm16(buffer.samples)
    try:
        with open(path, "wb") as fh, wave.open(fh, "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(2)
            w.setframerate(buffer.sample_rate_hz)
            w.writeframes(pcm.tobytes())
    except wave.Error as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def spec_from_range(
    n_partials: int,
    low_hz: float,
    high_hz: float,
    rng: np.random.Generator,
    *,
    min_gap_hz: float = 0.0,
    max_tries: int = 10_000,
    **spec_kwargs,
) -> SyntheticSpec:
    """Draw ``n_partials`` frequencies uniformly from [low_hz, high_hz].

    With ``min_gap_hz`` the draw is repeated until all pairwise gaps reach it.
    """
    if not 0 < low_hz < high_hz:
        raise ValueError("need 0 < low_hz < high_hz")
    for _ in range(max_tries):
        freqs = np.sort(rng.uniform(low_hz, high_hz, n_partials))
        if n_partials < 2 or np.min(np.diff(freqs)) >= min_gap_hz:
            return SyntheticSpec(tuple(float(f) for f in freqs), **spec_kwargs)
    raise ValueError(f"could not place {n_partials} partials {min_gap_hz} Hz apart in [{low_hz}, {high_hz}]")


def parse_freq_list(text: str) -> tuple[float, ...]:
    """Parse ``"150,300,450"`` into floats."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty frequency list")
    return tuple(float(p) for p in parts)

