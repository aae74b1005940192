import numpy as np

from radioprint.receiver import agc, matched_filter, _symbol_stream, _coarse_frequency, _derotate, _decision_phase_fit
from radioprint.signals import FrameConfig
from radioprint.transmitter import generate_prbs, map_16qam, pulse_shape, apply_lo_offset

cfg = FrameConfig()
bits = generate_prbs(cfg.frame_bits, 7)
symbols = map_16qam(bits)
frame = apply_lo_offset(pulse_shape(symbols, cfg), 8.3, cfg.carrier_frequency_hz)
frame, _ = agc(frame)
frame = matched_filter(frame, cfg)

true_df = 8.3e-6 * cfg.carrier_frequency_hz
print(f"true offset {true_df:.3f} Hz, delay {frame.delay_samples}, lag phase {np.degrees(2*np.pi*true_df*frame.delay_samples/frame.sample_rate_hz):.2f} deg")

raw = _symbol_stream(frame)
fs = frame.symbol_rate_hz
coarse = _coarse_frequency(raw, fs)
print(f"coarse {coarse:.3f} Hz  (err {coarse - true_df:+.3f})")

lag = 2 * np.pi * coarse * frame.delay_samples / frame.sample_rate_hz
base = _derotate(raw, coarse, fs, lag)

def bulk4(s, label):
    ang = np.degrees(np.angle(np.mean((s / np.abs(s).mean())**4))) / 4
    print(f"{label:28s} bulk angle (mod 90) {ang:+.3f} deg")

bulk4(raw, "raw")
bulk4(base, "base (lag-corrected)")

# compare against the aligned truth: derotate raw by the TRUE offset+lag
truth = _derotate(raw, true_df, fs, 2 * np.pi * true_df * frame.delay_samples / frame.sample_rate_hz)
bulk4(truth, "truth-derotated")
err = truth / np.sqrt(np.mean(np.abs(truth)**2)) - symbols[:len(truth)]
print(f"truth-derotated vs tx symbols rms err {np.sqrt(np.mean(np.abs(err)**2)):.4f}")

fine, phase = _decision_phase_fit(base, fs)
print(f"fine {fine:+.4f} Hz  intercept {np.degrees(phase):+.3f} deg")
refined = _derotate(base, fine, fs, phase)
fine2, phase2 = _decision_phase_fit(refined, fs)
print(f"fine2 {fine2:+.4f} Hz  intercept2 {np.degrees(phase2):+.3f} deg")
bulk4(refined, "refined")
