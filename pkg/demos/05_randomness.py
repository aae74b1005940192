"""Does a fleet's fingerprint material look random?  NIST SP 800-22 subset.

A thousand devices, 16 bits each, rank-normalized and fed through eight
statistical tests in 2000-bit records, side by side with a seeded PRNG.
"""

import numpy as np

from radioprint.nist import NistConfig, TEST_NAMES, nist_subset, puf_bitstream
from radioprint.params import ParamSpec, sample_fleet
from radioprint.seeds import rng_for

fleet = sample_fleet(1000, ParamSpec(), seed=42)
bits = puf_bitstream(fleet)
print(f"fleet bitstream: {bits.size} bits, ones fraction {bits.mean():.4f}")

prng = rng_for(42, "baseline").integers(0, 2, size=bits.size, dtype=np.uint8)
cfg = NistConfig()
fleet_res = nist_subset(bits, cfg)
prng_res = nist_subset(prng, cfg)

print(f"\n{'test':24s} {'fleet':>8s} {'prng':>8s}")
for name in TEST_NAMES:
    f, p = fleet_res[name], prng_res[name]
    print(f"{name:24s} {f.pass_rate:8.2f} {p.pass_rate:8.2f}")

n_ok = sum(r.passed for r in fleet_res.values())
print(f"\nfleet material passes {n_ok}/8 tests at the 0.01 significance level")
