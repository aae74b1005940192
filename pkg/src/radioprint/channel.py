"""Flat channel: path gain, Doppler rotation, additive white Gaussian noise."""

from __future__ import annotations

import numpy as np

from .params import ChannelRealization
from .seeds import rng_for
from .signals import IqFrame

__all__ = ["apply_channel", "noise_variance_for"]

BITS_PER_SYMBOL = 4  # 16-QAM


def noise_variance_for(signal_power: float, eb_n0_db: float, samples_per_symbol: int) -> float:
    """Complex noise variance giving the requested Eb/N0 at this oversampling.

    Eb/N0 relates to per-sample SNR through bits per symbol and the symbol
    spreading over samples_per_symbol samples.
    """
    eb_n0 = 10.0 ** (eb_n0_db / 10.0)
    return signal_power / (eb_n0 * BITS_PER_SYMBOL / samples_per_symbol)


def apply_channel(frame: IqFrame, ch: ChannelRealization, seed: int, *tags) -> IqFrame:
    """Scale by the path gain, rotate by Doppler, then add AWGN.

    ``eb_n0_db = inf`` disables the noise (clean-channel runs).
    """
    out = frame.samples * 10.0 ** (ch.gain_db / 20.0)
    if ch.doppler_hz != 0.0:
        k = np.arange(out.size)
        out = out * np.exp(2j * np.pi * ch.doppler_hz * k / frame.sample_rate_hz)
    if np.isfinite(ch.eb_n0_db):
        power = float(np.mean(np.abs(out) ** 2))
        var = noise_variance_for(power, ch.eb_n0_db, frame.samples_per_symbol)
        rng = rng_for(seed, "awgn", *tags)
        noise = rng.normal(0.0, np.sqrt(var / 2.0), (out.size, 2))
        out = out + noise[:, 0] + 1j * noise[:, 1]
    return frame.with_samples(out)
