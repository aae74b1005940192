import numpy as np
from radioprint.params import ParamSpec, sample_fleet
from radioprint.signals import FrameConfig
from radioprint.pipeline import evaluate_transmitted, transmit_frame, parallel_map
from radioprint.seeds import child_seed
from radioprint.metrics import geo_mean_ppm, feature_scales, MEASUREMENT_SIGMA, _FLOOR_SIGMAS, resolvable_features

spec = ParamSpec()
cfg = FrameConfig()
fleet = sample_fleet(50, spec, seed=7)
challenge = child_seed(11, "challenge")

def device_rows(tx):
    frame = transmit_frame(tx, cfg, challenge)
    rows = []
    for e in range(20):
        fv = evaluate_transmitted(frame, spec, cfg, child_seed(11, "env", tx.device_id, e))
        rows.append(fv.to_array()[:5])
    return np.array(rows)

feats = np.array(parallel_map(device_rows, fleet, 4))  # (50, 20, 5)
nominal, sigma = feature_scales(spec)
usable = resolvable_features(spec)
span = np.hypot(sigma, MEASUREMENT_SIGMA)
floor = _FLOOR_SIGMAS * MEASUREMENT_SIGMA

# per-eval log-geo
dev = np.abs(feats - nominal)
terms = np.hypot(dev[:, :, usable], floor[usable]) / (6 * span[usable])
lg = np.mean(np.log(terms), axis=2)  # (50, 20)

intra_sd = lg.std(axis=1)
print("log-geo intra sd: median %.4f  p90 %.4f  max %.4f (device %d)" % (
    np.median(intra_sd), np.percentile(intra_sd, 90), intra_sd.max(), intra_sd.argmax()))

# worst device: which feature term swings most?
w = int(intra_sd.argmax())
lt = np.log(terms[w])  # (20, nfeat)
names = [n for n, u in zip(["freq","gain","phase","evm"], [True]*4)]
print(f"device {w}: profile freq {fleet[w].lo_offset_ppm:.3f} gain {fleet[w].iq_gain_imbalance_db:.3f} "
      f"phase {fleet[w].iq_phase_imbalance_deg:.3f}")
for j, nm in enumerate(np.array(["freq","gain","phase","evm"])[:terms.shape[2]]):
    print(f"  {nm:5s} term-log sd {lt[:,j].std():.4f}  mean {lt[:,j].mean():.3f}  feat mean {feats[w,:,j].mean():.5f} sd {feats[w,:,j].std():.5f}")

# distribution across devices: per-feature contribution to intra sd
for j, nm in enumerate(np.array(["freq","gain","phase","evm"])[:terms.shape[2]]):
    sds = np.log(terms[:, :, j]).std(axis=1)
    print(f"{nm:5s}: term-log sd median {np.median(sds):.4f} p90 {np.percentile(sds,90):.4f} max {sds.max():.4f}")

# device log-geo spread (identity signal)
dev_mean = lg.mean(axis=1)
print(f"\ndevice mean log-geo spread sd {dev_mean.std():.3f}")
# failure estimate: P(intra > inter)
ia, ib = np.triu_indices(20, 1)
intra = np.abs(np.exp(lg[:, ia]) - np.exp(lg[:, ib])).ravel() * 1e6
da, db = np.triu_indices(50, 1)
inter = np.abs(np.exp(lg[da]) - np.exp(lg[db])).ravel() * 1e6
rng = np.random.default_rng(0)
xi = intra[rng.integers(0, intra.size, 400000)]
xj = inter[rng.integers(0, inter.size, 400000)]
print(f"identifiability {np.mean(xi < xj) + 0.5*np.mean(xi == xj):.4f}")
# which inter pairs collide: fraction of inter below intra median
print(f"P(inter < intra median) {np.mean(inter < np.median(intra)):.4f}")
