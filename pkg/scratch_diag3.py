import numpy as np

from radioprint.signals import FrameConfig
from radioprint.transmitter import rrc_taps, generate_prbs, map_16qam, pulse_shape, apply_lo_offset
from radioprint.receiver import agc, matched_filter, _symbol_stream, _derotate

cfg = FrameConfig()
sps = cfg.samples_per_symbol
h = rrc_taps(cfg.rrc_rolloff, cfg.rrc_span_symbols, sps)
df = 8.3e-6 * cfg.carrier_frequency_hz
w = 2 * np.pi * df / cfg.sample_rate_hz
m = np.arange(len(h))

# effective cascade seen by the derotated decimated stream
q = np.convolve(h, h * np.exp(-1j * w * m))
center = (len(q) - 1) // 2
print(f"cascade center: |q| {np.abs(q[center]):.5f}  arg {np.degrees(np.angle(q[center])):+.3f} deg")
taps_sym = q[center % sps::sps]
c0 = np.abs(q[center])
isi = np.sqrt((np.abs(taps_sym) ** 2).sum() - c0**2) / c0
print(f"symbol-spaced ISI (cascade) {20*np.log10(isi):.1f} dB")

# compare: actual frame pipeline, alignment scan
bits = generate_prbs(cfg.frame_bits, 7)
symbols = map_16qam(bits)
frame = apply_lo_offset(pulse_shape(symbols, cfg), 8.3, cfg.carrier_frequency_hz)
frame, _ = agc(frame)
frame = matched_filter(frame, cfg)

fs_samp = frame.sample_rate_hz
n_sym = len(symbols)
for d_off in (-2, -1, 0, 1, 2):
    start = frame.delay_samples + d_off
    sel = frame.samples[start::sps][:n_sym]
    k = np.arange(n_sym)
    phases = w * (start + sps * k)
    derot = sel * np.exp(-1j * phases)
    derot = derot / np.sqrt(np.mean(np.abs(derot) ** 2))
    err = derot - symbols
    print(f"offset {d_off:+d}: rms err {np.sqrt(np.mean(np.abs(err)**2)):.4f}  bulk {np.degrees(np.angle(np.mean(derot**4)))/4:+.3f} deg")
