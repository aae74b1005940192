"""Process-variation model for the transmitter fleet and channel draws.

Each manufactured transmitter gets fixed analog impairment values drawn from
truncated normal distributions; each transmission additionally sees a fresh
channel realization.  The default numbers model a 2.412 GHz WLAN-class radio.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seeds import rng_for

__all__ = [
    "Dist",
    "ParamSpec",
    "TxProfile",
    "ChannelRealization",
    "sample_truncated_normal",
    "sample_fleet",
    "sample_channel",
    "save_fleet",
    "load_fleet",
]


@dataclass(frozen=True)
class Dist:
    """Mean / standard deviation of one truncated-normal parameter."""

    mean: float
    std: float


@dataclass(frozen=True)
class ParamSpec:
    """Population statistics for device impairments and channel conditions.

    All normal draws are truncated to mean +/- 3 sigma by rejection
    resampling, so no sampled value ever leaves that span.
    """

    carrier_frequency_hz: float = 2.412e9
    lo_offset_ppm: Dist = field(default_factory=lambda: Dist(0.0, 8.3))
    iq_gain_imbalance_db: Dist = field(default_factory=lambda: Dist(0.0, 1.0))
    iq_phase_imbalance_deg: Dist = field(default_factory=lambda: Dist(0.0, 5.0))
    pa_backoff_db: Dist = field(default_factory=lambda: Dist(30.0, 1.0))
    eb_n0_db: Dist = field(default_factory=lambda: Dist(15.0, 2.0))
    doppler_hz: Dist = field(default_factory=lambda: Dist(0.0, 1.0))
    channel_gain_db_range: tuple[float, float] = (-30.0, 0.0)

    def lo_offset_std_hz(self) -> float:
        """LO-offset spread expressed in Hz at the carrier (8.3 ppm -> 20.0 kHz)."""
        return self.lo_offset_ppm.std * 1e-6 * self.carrier_frequency_hz


@dataclass(frozen=True)
class TxProfile:
    """Impairment values of one manufactured transmitter (its fingerprint)."""

    device_id: int
    lo_offset_ppm: float
    iq_gain_imbalance_db: float
    iq_phase_imbalance_deg: float
    pa_backoff_db: float


@dataclass(frozen=True)
class ChannelRealization:
    """Per-transmission environment: noise level, Doppler shift, path gain."""

    eb_n0_db: float
    doppler_hz: float
    gain_db: float


def sample_truncated_normal(rng: np.random.Generator, dist: Dist, size=None):
    """Normal draw rejected and redrawn until inside mean +/- 3 sigma."""
    if dist.std == 0.0:
        return np.full(size, dist.mean) if size is not None else dist.mean
    scalar = size is None
    n = 1 if scalar else int(np.prod(size))
    out = rng.normal(dist.mean, dist.std, n)
    lo, hi = dist.mean - 3.0 * dist.std, dist.mean + 3.0 * dist.std
    bad = (out < lo) | (out > hi)
    while bad.any():
        out[bad] = rng.normal(dist.mean, dist.std, int(bad.sum()))
        bad = (out < lo) | (out > hi)
    if scalar:
        return float(out[0])
    return out.reshape(size)


def sample_fleet(n_devices: int, spec: ParamSpec, seed: int) -> list[TxProfile]:
    """Manufacture ``n_devices`` transmitters with independent impairments.

    Each device's draw is seeded by its id, so device k is identical no
    matter how large the fleet around it is.
    """
    if n_devices < 1:
        raise ValueError(f"n_devices must be >= 1, got {n_devices}")
    fleet = []
    for device_id in range(n_devices):
        rng = rng_for(seed, "fleet", device_id)
        fleet.append(
            TxProfile(
                device_id=device_id,
                lo_offset_ppm=sample_truncated_normal(rng, spec.lo_offset_ppm),
                iq_gain_imbalance_db=sample_truncated_normal(rng, spec.iq_gain_imbalance_db),
                iq_phase_imbalance_deg=sample_truncated_normal(rng, spec.iq_phase_imbalance_deg),
                pa_backoff_db=sample_truncated_normal(rng, spec.pa_backoff_db),
            )
        )
    return fleet


def sample_channel(spec: ParamSpec, seed: int, *tags) -> ChannelRealization:
    """One channel realization: truncated-normal Eb/N0 and Doppler, uniform gain."""
    rng = rng_for(seed, "channel", *tags)
    lo, hi = spec.channel_gain_db_range
    return ChannelRealization(
        eb_n0_db=sample_truncated_normal(rng, spec.eb_n0_db),
        doppler_hz=sample_truncated_normal(rng, spec.doppler_hz),
        gain_db=float(rng.uniform(lo, hi)),
    )


_FLEET_HEADER = "# device_id lo_offset_ppm iq_gain_imbalance_db iq_phase_imbalance_deg pa_backoff_db"


def save_fleet(path, fleet: list[TxProfile]) -> None:
    """Write the fleet as flat text, one device per line, round-trip exact."""
    with open(path, "w") as fh:
        fh.write(_FLEET_HEADER + "\n")
        for tx in fleet:
            fh.write(
                f"{tx.device_id} {tx.lo_offset_ppm:.17g} {tx.iq_gain_imbalance_db:.17g} "
                f"{tx.iq_phase_imbalance_deg:.17g} {tx.pa_backoff_db:.17g}\n"
            )


def load_fleet(path) -> list[TxProfile]:
    fleet = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
            fleet.append(
                TxProfile(
                    device_id=int(parts[0]),
                    lo_offset_ppm=float(parts[1]),
                    iq_gain_imbalance_db=float(parts[2]),
                    iq_phase_imbalance_deg=float(parts[3]),
                    pa_backoff_db=float(parts[4]),
                )
            )
    return fleet
