"""16-QAM transmitter chain with per-device analog impairments.

Stage order models the physical signal path: bit mapping, pulse shaping,
I/Q modulator imbalance, power-amplifier compression, then the local
oscillator's frequency offset.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve

from .params import TxProfile
from .seeds import rng_for
from .signals import FrameConfig, IqFrame, rms

__all__ = [
    "generate_prbs",
    "map_16qam",
    "demap_16qam",
    "symbols_to_bits",
    "ideal_constellation",
    "rrc_taps",
    "pulse_shape",
    "apply_iq_imbalance",
    "apply_pa_nonlinearity",
    "apply_lo_offset",
    "transmit",
]

# Gray-coded 4-level PAM on each rail: bit pair (b0, b1) indexed as 2*b0+b1.
_GRAY_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])
_QAM_NORM = np.sqrt(10.0)  # E[|symbol|^2] = 1 for equiprobable levels


def generate_prbs(n_bits: int, seed: int) -> np.ndarray:
    """Pseudo-random payload bits (uint8 0/1)."""
    if n_bits < 1:
        raise ValueError("n_bits must be positive")
    return rng_for(seed, "prbs").integers(0, 2, n_bits, dtype=np.uint8)


def map_16qam(bits: np.ndarray) -> np.ndarray:
    """Gray-map bits to unit-power 16-QAM symbols; 4 bits per symbol, first
    pair -> I rail, second pair -> Q rail."""
    bits = np.asarray(bits)
    if bits.size % 4 != 0:
        raise ValueError(f"bit count must be divisible by 4, got {bits.size}")
    quads = bits.reshape(-1, 4).astype(np.int64)
    i_level = _GRAY_LEVELS[2 * quads[:, 0] + quads[:, 1]]
    q_level = _GRAY_LEVELS[2 * quads[:, 2] + quads[:, 3]]
    return (i_level + 1j * q_level) / _QAM_NORM


def ideal_constellation() -> np.ndarray:
    """The 16 reference points at unit average power."""
    levels = np.array([-3.0, -1.0, 1.0, 3.0])
    grid = (levels[:, None] + 1j * levels[None, :]).ravel()
    return grid / _QAM_NORM


# decision thresholds between the sorted rail levels [-3, -1, 1, 3]/sqrt(10)
_RAIL_EDGES = np.array([-2.0, 0.0, 2.0]) / _QAM_NORM


def demap_16qam(symbols: np.ndarray) -> np.ndarray:
    """Minimum-distance decisions; returns indices into ideal_constellation().

    The grid is separable, so per-rail threshold slicing matches the full 2-D
    nearest-point search at a fraction of the cost.
    """
    s = np.asarray(symbols)
    i_idx = np.digitize(s.real, _RAIL_EDGES)
    q_idx = np.digitize(s.imag, _RAIL_EDGES)
    return 4 * i_idx + q_idx


_BITS_FOR_LEVEL = {-3.0: (0, 0), -1.0: (0, 1), 3.0: (1, 0), 1.0: (1, 1)}


def symbols_to_bits(indices: np.ndarray) -> np.ndarray:
    """Invert the Gray map for decided constellation indices."""
    points = ideal_constellation() * _QAM_NORM
    out = np.empty((len(indices), 4), dtype=np.uint8)
    i_levels = points.real[indices]
    q_levels = points.imag[indices]
    for col, levels in ((0, i_levels), (2, q_levels)):
        for level, (b0, b1) in _BITS_FOR_LEVEL.items():
            mask = levels == level
            out[mask, col] = b0
            out[mask, col + 1] = b1
    return out.ravel()


def rrc_taps(rolloff: float, span_symbols: int, samples_per_symbol: int) -> np.ndarray:
    """Unit-energy root-raised-cosine taps.

    Closed form in symbol time t with roll-off beta:

        h(t) = [sin(pi t (1-beta)) + 4 beta t cos(pi t (1+beta))]
               / [pi t (1 - (4 beta t)^2)]

    with the usual removable singularities at t = 0 and |t| = 1/(4 beta).
    """
    if not 0.0 < rolloff < 1.0:
        raise ValueError("rolloff must be in (0, 1)")
    sps = samples_per_symbol
    n = span_symbols * sps
    t = np.arange(-n // 2, n // 2 + 1) / sps
    h = np.empty_like(t)

    singular = np.abs(np.abs(t) - 1.0 / (4.0 * rolloff)) < 1e-10
    zero = np.abs(t) < 1e-10
    regular = ~(singular | zero)

    tr = t[regular]
    h[regular] = (
        np.sin(np.pi * tr * (1.0 - rolloff))
        + 4.0 * rolloff * tr * np.cos(np.pi * tr * (1.0 + rolloff))
    ) / (np.pi * tr * (1.0 - (4.0 * rolloff * tr) ** 2))
    h[zero] = 1.0 - rolloff + 4.0 * rolloff / np.pi
    if singular.any():
        h[singular] = (rolloff / np.sqrt(2.0)) * (
            (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * rolloff))
            + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * rolloff))
        )
    return h / np.sqrt(np.sum(h**2))


def pulse_shape(symbols: np.ndarray, cfg: FrameConfig) -> IqFrame:
    """Upsample by zero insertion and shape with the RRC prototype.

    The filter's group delay (span/2 symbols) is recorded on the frame so
    downstream stages can locate symbol instants.
    """
    sps = cfg.samples_per_symbol
    taps = rrc_taps(cfg.rrc_rolloff, cfg.rrc_span_symbols, sps)
    upsampled = np.zeros(len(symbols) * sps, dtype=np.complex128)
    upsampled[::sps] = symbols
    shaped = fftconvolve(upsampled, taps)
    return IqFrame(
        samples=shaped,
        sample_rate_hz=cfg.sample_rate_hz,
        symbol_rate_hz=cfg.symbol_rate_hz,
        delay_samples=(len(taps) - 1) // 2,
    )


def apply_iq_imbalance(frame: IqFrame, gain_db: float, phase_deg: float) -> IqFrame:
    """Modulator rail mismatch: the Q rail is scaled by g and rotated by phi.

        s_out = I + j * g * exp(j phi) * Q

    so I_out = I - g Q sin(phi) and Q_out = g Q cos(phi).
    """
    g = 10.0 ** (gain_db / 20.0)
    phi = np.deg2rad(phase_deg)
    i, q = frame.samples.real, frame.samples.imag
    out = (i - g * q * np.sin(phi)) + 1j * (g * q * np.cos(phi))
    return frame.with_samples(out)


def apply_pa_nonlinearity(frame: IqFrame, backoff_db: float, smoothness: float = 2.0) -> IqFrame:
    """Memoryless AM/AM compression (Rapp model, smoothness p):

        v_out = v / (1 + (v / v_sat)^(2p))^(1/(2p))

    v_sat sits ``backoff_db`` above the frame RMS.  Phase is preserved.
    For p = 2 the input 1 dB compression point is at 0.8746 * v_sat
    (solve (1 + r^4)^(-1/4) = 10^(-1/20)).
    """
    level = rms(frame.samples)
    if level == 0.0:
        return frame.with_samples(frame.samples.copy())
    v_sat = level * 10.0 ** (backoff_db / 20.0)
    v = np.abs(frame.samples)
    compression = (1.0 + (v / v_sat) ** (2.0 * smoothness)) ** (-1.0 / (2.0 * smoothness))
    return frame.with_samples(frame.samples * compression)


def apply_lo_offset(frame: IqFrame, offset_ppm: float, carrier_hz: float) -> IqFrame:
    """Rotate by the oscillator's frequency error: ppm of the carrier."""
    delta_hz = offset_ppm * 1e-6 * carrier_hz
    k = np.arange(frame.samples.size)
    rotation = np.exp(2j * np.pi * delta_hz * k / frame.sample_rate_hz)
    return frame.with_samples(frame.samples * rotation)


def transmit(bits: np.ndarray, tx: TxProfile, cfg: FrameConfig) -> IqFrame:
    """Full chain: map -> shape -> I/Q imbalance -> PA -> LO offset."""
    symbols = map_16qam(bits)
    frame = pulse_shape(symbols, cfg)
    frame = apply_iq_imbalance(frame, tx.iq_gain_imbalance_db, tx.iq_phase_imbalance_deg)
    frame = apply_pa_nonlinearity(frame, tx.pa_backoff_db)
    frame = apply_lo_offset(frame, tx.lo_offset_ppm, cfg.carrier_frequency_hz)
    return frame
