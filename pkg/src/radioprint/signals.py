"""Complex-baseband frame container and waveform configuration."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np

__all__ = ["FrameConfig", "IqFrame", "rms", "save_frame", "load_frame"]


def rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.abs(x) ** 2)))


@dataclass(frozen=True)
class FrameConfig:
    """Waveform parameters shared by transmitter and receiver."""

    symbol_rate_hz: float = 1e6
    samples_per_symbol: int = 8
    rrc_rolloff: float = 0.35
    rrc_span_symbols: int = 10  # even; filter covers span+1 symbol instants
    carrier_frequency_hz: float = 2.412e9
    frame_bits: int = 30_000

    def __post_init__(self):
        if self.samples_per_symbol < 4:
            raise ValueError("samples_per_symbol must be >= 4")
        if self.rrc_span_symbols % 2 != 0:
            raise ValueError("rrc_span_symbols must be even")
        if self.frame_bits % 4 != 0:
            raise ValueError("frame_bits must be divisible by 4")

    @property
    def sample_rate_hz(self) -> float:
        return self.symbol_rate_hz * self.samples_per_symbol


@dataclass
class IqFrame:
    """A burst of complex baseband samples plus the metadata needed to
    demodulate it.

    ``delay_samples`` tracks accumulated filter group delay, so symbol
    instants sit at ``delay_samples + k * samples_per_symbol``.
    """

    samples: np.ndarray
    sample_rate_hz: float
    symbol_rate_hz: float
    delay_samples: int = 0

    def __post_init__(self):
        sps = self.sample_rate_hz / self.symbol_rate_hz
        if abs(sps - round(sps)) > 1e-9 or round(sps) < 4:
            raise ValueError("sample rate must be an integer >= 4 multiple of symbol rate")
        self.samples = np.asarray(self.samples, dtype=np.complex128)

    @property
    def samples_per_symbol(self) -> int:
        return int(round(self.sample_rate_hz / self.symbol_rate_hz))

    def with_samples(self, samples: np.ndarray, extra_delay: int = 0) -> "IqFrame":
        return replace(self, samples=samples, delay_samples=self.delay_samples + extra_delay)


def save_frame(path, frame: IqFrame) -> None:
    """Raw little-endian float64 I/Q pairs plus a text sidecar with the metadata."""
    interleaved = np.empty(2 * frame.samples.size, dtype="<f8")
    interleaved[0::2] = frame.samples.real
    interleaved[1::2] = frame.samples.imag
    interleaved.tofile(path)
    with open(str(path) + ".meta", "w") as fh:
        fh.write(f"sample_rate_hz = {frame.sample_rate_hz:.17g}\n")
        fh.write(f"symbol_rate_hz = {frame.symbol_rate_hz:.17g}\n")
        fh.write(f"delay_samples = {frame.delay_samples}\n")
        fh.write(f"n_samples = {frame.samples.size}\n")


def load_frame(path) -> IqFrame:
    meta = {}
    with open(str(path) + ".meta") as fh:
        for line in fh:
            if "=" in line:
                key, value = line.split("=", 1)
                meta[key.strip()] = value.strip()
    n = int(meta["n_samples"])
    raw = np.fromfile(path, dtype="<f8", count=2 * n)
    if raw.size != 2 * n:
        raise ValueError(f"{path}: expected {2 * n} float64 values, found {raw.size}")
    if os.path.getsize(path) != 16 * n:
        raise ValueError(f"{path}: file size does not match sidecar sample count")
    return IqFrame(
        samples=raw[0::2] + 1j * raw[1::2],
        sample_rate_hz=float(meta["sample_rate_hz"]),
        symbol_rate_hz=float(meta["symbol_rate_hz"]),
        delay_samples=int(meta["delay_samples"]),
    )
