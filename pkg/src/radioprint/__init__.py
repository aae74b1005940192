"""radioprint: simulation laboratory for RF transmitter fingerprinting.

Process variation gives every manufactured radio a unique set of analog
impairments.  This package simulates a fleet of 16-QAM transmitters, extracts
impairment estimates at a software receiver, classifies devices with a small
neural network, and scores the scheme with hardware-authentication metrics
and a statistical randomness battery.

Subpackage map:

- params       : fleet process variation and channel statistics
- transmitter  : bit source, QAM mapping, pulse shaping, impairment models
- channel      : path gain, Doppler, AWGN
- receiver     : AGC, matched filter, blind carrier recovery, features
- pipeline     : end-to-end single-frame evaluation helpers
- mlp          : classifier, trainer, receiver compensation
- metrics      : fingerprint distances, identification error, FAR/FRR
- nist         : randomness test subset and bitstream derivation
- experiments  : reproducible sweep harness and CSV output
- cli          : command-line front end
"""

from .params import ChannelRealization, Dist, ParamSpec, TxProfile, load_fleet, sample_fleet, sample_channel, save_fleet
from .receiver import (
    CHANNEL_FEATURE_NAMES,
    DEVICE_FEATURE_NAMES,
    FEATURE_NAMES,
    IDEAL_RX,
    FeatureVector,
    FrameRejected,
    RxProfile,
    receive_and_extract,
)
from .signals import FrameConfig, IqFrame
from .transmitter import transmit

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization",
    "Dist",
    "ParamSpec",
    "TxProfile",
    "load_fleet",
    "sample_fleet",
    "sample_channel",
    "save_fleet",
    "CHANNEL_FEATURE_NAMES",
    "DEVICE_FEATURE_NAMES",
    "FEATURE_NAMES",
    "IDEAL_RX",
    "FeatureVector",
    "FrameRejected",
    "RxProfile",
    "receive_and_extract",
    "FrameConfig",
    "IqFrame",
    "transmit",
    "__version__",
]
