import numpy as np
from radioprint.params import ParamSpec, sample_fleet
from radioprint.signals import FrameConfig
from radioprint.pipeline import evaluate_transmitted, transmit_frame, parallel_map
from radioprint.seeds import child_seed
from radioprint.metrics import feature_scales, MEASUREMENT_SIGMA, resolvable_features

spec = ParamSpec()
cfg = FrameConfig()
fleet = sample_fleet(50, spec, seed=7)
challenge = child_seed(11, "challenge")

def device_rows(tx):
    frame = transmit_frame(tx, cfg, challenge)
    out = []
    for e in range(20):
        fv = evaluate_transmitted(frame, spec, cfg, child_seed(11, "env", tx.device_id, e))
        out.append(fv.to_array())
    return np.array(out)

feats = np.array(parallel_map(device_rows, fleet, 4))  # (50, 20, 8)
np.save("/tmp/feats5020.npy", feats)
nominal, sigma = feature_scales(spec)
usable = resolvable_features(spec)
span = np.hypot(sigma, MEASUREMENT_SIGMA)

def ident(lg):
    g = np.exp(lg)
    ia, ib = np.triu_indices(g.shape[1], 1)
    intra = np.abs(g[:, ia] - g[:, ib]).ravel()
    da, db = np.triu_indices(g.shape[0], 1)
    inter = np.abs(g[da] - g[db]).ravel()
    rng = np.random.default_rng(0)
    xi = intra[rng.integers(0, intra.size, 400000)]
    xj = inter[rng.integers(0, inter.size, 400000)]
    return np.mean(xi < xj) + 0.5 * np.mean(xi == xj), np.median(intra), np.median(inter)

dev = np.abs(feats[:, :, :5] - nominal)
for kappa in [2, 4, 6, 8, 10, 14, 20]:
    floor = kappa * MEASUREMENT_SIGMA
    terms = np.hypot(dev[:, :, usable], floor[usable]) / (6 * span[usable])
    lg = np.mean(np.log(terms), axis=2)
    idn, mi, mj = ident(lg)
    print(f"kappa {kappa:4.1f}: identifiability {idn:.4f}  intra-med {mi*1e6:9.1f}  inter-med {mj*1e6:9.1f}  ratio {mj/mi:5.1f}")

# adaptive floor: scale resolution by measured channel quality (15 dB reference)
snr = feats[:, :, 7]
for kappa in [3, 4, 6, 8]:
    q = 10 ** ((15.0 - snr) / 20.0)  # (50,20) noise amplitude vs reference
    floor = kappa * MEASUREMENT_SIGMA[None, None, usable] * q[:, :, None]
    terms = np.hypot(dev[:, :, usable], floor) / (6 * span[usable])
    lg = np.mean(np.log(terms), axis=2)
    idn, mi, mj = ident(lg)
    print(f"adaptive kappa {kappa:4.1f}: identifiability {idn:.4f}  intra-med {mi*1e6:9.1f}  ratio {mj/mi:5.1f}")
