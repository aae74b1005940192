import time

import numpy as np

from radioprint.params import ChannelRealization, ParamSpec, TxProfile
from radioprint.pipeline import evaluate_frame, transmit_frame, evaluate_transmitted
from radioprint.receiver import receive_and_extract, IDEAL_RX
from radioprint.signals import FrameConfig

spec = ParamSpec()
cfg = FrameConfig()

tx = TxProfile(device_id=0, lo_offset_ppm=8.3, iq_gain_imbalance_db=1.0,
               iq_phase_imbalance_deg=5.0, pa_backoff_db=30.0)

t0 = time.time()
fv = evaluate_frame(tx, spec, cfg, seed=42)
t1 = time.time()
print(f"one evaluation: {t1-t0:.3f} s")
for name in fv.__dataclass_fields__:
    print(f"  {name:28s} {getattr(fv, name):+.6f}")

# fixed channel at nominal Eb/N0: estimator accuracy across noise draws
errs = {"freq": [], "gain": [], "phase": [], "rc": [], "evm": []}
ch = ChannelRealization(eb_n0_db=15.0, doppler_hz=0.0, gain_db=-10.0)
frame = transmit_frame(tx, cfg, challenge_seed=7)
t0 = time.time()
for trial in range(30):
    fv = evaluate_transmitted(frame, spec, cfg, env_seed=1000 + trial, channel=ch)
    errs["freq"].append(fv.est_freq_offset_ppm - 8.3)
    errs["gain"].append(fv.est_gain_imbalance_db - 1.0)
    errs["phase"].append(fv.est_phase_imbalance_deg - 5.0)
    errs["rc"].append(fv.est_ring_compression)
    errs["evm"].append(fv.est_residual_evm)
t1 = time.time()
print(f"\n30 fixed-channel trials in {t1-t0:.2f} s ({(t1-t0)/30*1000:.1f} ms each)")
for k, v in errs.items():
    v = np.array(v)
    print(f"  {k:6s} mean {v.mean():+.6f}  std {v.std():.6f}")
