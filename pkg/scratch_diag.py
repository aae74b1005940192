import numpy as np

from radioprint.channel import apply_channel
from radioprint.params import ChannelRealization, ParamSpec, TxProfile
from radioprint.receiver import agc, matched_filter, _recover_carrier, extract_iq_features
from radioprint.signals import FrameConfig
from radioprint.transmitter import generate_prbs, map_16qam, pulse_shape, transmit, apply_lo_offset, apply_iq_imbalance, apply_pa_nonlinearity

cfg = FrameConfig()
spec = ParamSpec()
bits = generate_prbs(cfg.frame_bits, 7)
symbols = map_16qam(bits)

def probe(label, frame, rrc=True):
    from radioprint.receiver import _rotation_lag_samples
    frame, g = agc(frame)
    frame = matched_filter(frame, cfg, enabled=rrc)
    sol = _recover_carrier(frame, _rotation_lag_samples(frame, cfg))
    f = extract_iq_features(sol.symbols)
    print(f"{label:40s} sys_evm {f['systematic_evm']:.4f}  rand_evm {f['random_evm']:.4f}  "
          f"gain {f['gain_db']:+.3f}  phase {f['phase_deg']:+.3f}  rc {f['ring_compression']:.4f}")

# stage by stage, noiseless
base = pulse_shape(symbols, cfg)
probe("shaped only", base)
probe("shaped + LO 8.3ppm", apply_lo_offset(base, 8.3, cfg.carrier_frequency_hz))
probe("shaped + IQ (1dB,5deg)", apply_iq_imbalance(base, 1.0, 5.0))
probe("shaped + PA 30dB", apply_pa_nonlinearity(base, 30.0))
tx = TxProfile(0, 8.3, 1.0, 5.0, 30.0)
full = transmit(bits, tx, cfg)
probe("full tx chain", full)

ch_clean = ChannelRealization(eb_n0_db=np.inf, doppler_hz=0.0, gain_db=-10.0)
probe("full tx + clean channel", apply_channel(full, ch_clean, 1))
ch_noise = ChannelRealization(eb_n0_db=15.0, doppler_hz=0.0, gain_db=-10.0)
probe("full tx + 15dB channel", apply_channel(full, ch_noise, 1))
ideal_tx = TxProfile(0, 0.0, 0.0, 0.0, 200.0)
probe("ideal tx + 15dB channel", apply_channel(transmit(bits, ideal_tx, cfg), ch_noise, 1))
