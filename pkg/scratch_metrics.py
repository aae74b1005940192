import time
import numpy as np
from radioprint.params import ParamSpec, TxProfile, sample_fleet
from radioprint.signals import FrameConfig
from radioprint.metrics import (
    feature_scales, feature_vector_from_profile, geo_mean_ppm, compute_distances,
    crp_count, guess_probability_log2,
)
from radioprint.receiver import FeatureVector

spec = ParamSpec()

t0 = time.time()
nominal, sigma = feature_scales(spec)
print(f"scales derived in {time.time()-t0:.2f}s")
print("nominal:", nominal)
print("sigma:  ", sigma)

# profile micro-sim vs the values the live receiver measured for (1 dB, 5 deg)
fv = feature_vector_from_profile(TxProfile(0, 8.3, 1.0, 5.0, 30.0))
print(f"\nprofile(1dB,5deg): gain {fv.est_gain_imbalance_db:.4f} phase {fv.est_phase_imbalance_deg:.4f} "
      f"rc {fv.est_ring_compression:.5f} evm {fv.est_residual_evm:.5f}  (live receiver saw evm 0.0722, rc 1.0012)")

# geo examples
fv_nom = FeatureVector(0, 0, 0, nominal[3], nominal[4], 0, 0, np.inf)
print(f"\ngeo at nominal (pure): {geo_mean_ppm(fv_nom, spec)}")
fv_3s = FeatureVector(3*sigma[0], 3*sigma[1], 3*sigma[2], nominal[3], nominal[4]+3*sigma[4], 0, 0, np.inf)
print(f"geo at +3sigma (pure): {geo_mean_ppm(fv_3s, spec):.3f}  (want 500000)")

from radioprint.metrics import MEASUREMENT_SIGMA
span = np.hypot(sigma, MEASUREMENT_SIGMA)
fv_3r = FeatureVector(*(nominal + 3*span), 0, 0, np.inf)
print(f"geo at +3span (robust): {geo_mean_ppm(fv_3r, spec, robust=True):.3f}  (want ~500000)")

print(f"\ncrp_count(5,16) = 2^80? {crp_count(5,16) == 2**80}, log10 {np.log10(float(crp_count(5,16))):.2f}")
print(f"guess log2: {guess_probability_log2(5,16)}")

# identifiability at moderate scale: 50 tx x 20 evals
t0 = time.time()
fleet = sample_fleet(50, spec, seed=7)
d = compute_distances(fleet, 20, FrameConfig(), seed=11, spec=spec, threads=4)
print(f"\n50x20 distances in {time.time()-t0:.1f}s")
print(f"identifiability {d.identifiability:.4f}")
print(f"intra: median {np.median(d.d_intra):.1f} worst {d.worst_case_d_intra:.1f} ppm")
print(f"inter: median {np.median(d.d_inter):.1f} worst {d.worst_case_d_inter:.1f} ppm")
print(f"median ratio {np.median(d.d_inter)/np.median(d.d_intra):.1f}x")
