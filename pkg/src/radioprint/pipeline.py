"""End-to-end single-frame evaluation: bits -> transmit -> channel -> features.

Seed discipline: every helper derives child seeds from (master seed, stream
tag, indices), so evaluations are reproducible and order independent.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .channel import apply_channel
from .params import ChannelRealization, ParamSpec, TxProfile, sample_channel
from .receiver import FeatureVector, FrameRejected, IDEAL_RX, RxProfile, receive_and_extract
from .seeds import child_seed
from .signals import FrameConfig, IqFrame
from .transmitter import generate_prbs, transmit

__all__ = ["evaluate_frame", "transmit_frame", "evaluate_transmitted", "parallel_map"]


def transmit_frame(tx: TxProfile, cfg: FrameConfig, challenge_seed: int) -> IqFrame:
    """Deterministic transmit of the payload addressed by ``challenge_seed``."""
    bits = generate_prbs(cfg.frame_bits, challenge_seed)
    return transmit(bits, tx, cfg)


def evaluate_transmitted(
    frame: IqFrame,
    spec: ParamSpec,
    cfg: FrameConfig,
    env_seed: int,
    rx: RxProfile = IDEAL_RX,
    rrc_enabled: bool = True,
    channel: ChannelRealization | None = None,
) -> FeatureVector:
    """Push an already-transmitted frame through a fresh channel and receiver."""
    ch = channel if channel is not None else sample_channel(spec, env_seed)
    received = apply_channel(frame, ch, child_seed(env_seed, "noise"))
    return receive_and_extract(received, rx=rx, cfg=cfg, rrc_enabled=rrc_enabled)


def evaluate_frame(
    tx: TxProfile,
    spec: ParamSpec,
    cfg: FrameConfig,
    seed: int,
    rx: RxProfile = IDEAL_RX,
    rrc_enabled: bool = True,
) -> FeatureVector:
    """One observation of one device: fresh payload, fresh channel."""
    frame = transmit_frame(tx, cfg, child_seed(seed, "bits"))
    return evaluate_transmitted(
        frame, spec, cfg, child_seed(seed, "env"), rx=rx, rrc_enabled=rrc_enabled
    )


def parallel_map(fn, items, threads: int = 1) -> list:
    """Map preserving order; results are placed by index, so the output is
    identical for any thread count."""
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
