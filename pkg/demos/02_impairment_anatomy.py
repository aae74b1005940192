"""How each analog impairment distorts the 16-QAM constellation.

Runs the transmit chain with one impairment at a time and reports what the
receiver's estimators see.  The amplifier sweep shows ring compression
kicking in as back-off shrinks toward the compression point.
"""

from dataclasses import replace

from radioprint.params import ParamSpec, TxProfile
from radioprint.pipeline import evaluate_frame
from radioprint.signals import FrameConfig

CLEAN = TxProfile(
    device_id=0,
    lo_offset_ppm=0.0,
    iq_gain_imbalance_db=0.0,
    iq_phase_imbalance_deg=0.0,
    pa_backoff_db=30.0,
)

# push noise far down so the impairment under study dominates
spec = ParamSpec()
quiet = replace(spec, eb_n0_db=replace(spec.eb_n0_db, mean=35.0, std=0.0))
fc = FrameConfig(frame_bits=16400)


def probe(tag: str, tx: TxProfile) -> None:
    fv = evaluate_frame(tx, quiet, fc, seed=3)
    print(
        f"  {tag:28s} freq {fv.est_freq_offset_ppm:+8.3f} ppm  "
        f"gain {fv.est_gain_imbalance_db:+6.3f} dB  "
        f"phase {fv.est_phase_imbalance_deg:+6.2f} deg  "
        f"ring {fv.est_ring_compression:.4f}  evm {fv.est_residual_evm:.4f}"
    )


print("single impairments, one at a time:")
probe("none", CLEAN)
probe("LO offset +5 ppm", replace(CLEAN, lo_offset_ppm=5.0))
probe("gain imbalance +1 dB", replace(CLEAN, iq_gain_imbalance_db=1.0))
probe("phase imbalance +5 deg", replace(CLEAN, iq_phase_imbalance_deg=5.0))

print("\namplifier back-off sweep (smaller back-off -> stronger compression):")
for backoff in (30.0, 10.0, 6.0, 3.0):
    probe(f"back-off {backoff:.0f} dB", replace(CLEAN, pa_backoff_db=backoff))

print(
    "\nAt the fleet's 30 dB operating point the outer ring is essentially "
    "untouched; compression only bites several sigma below it."
)
