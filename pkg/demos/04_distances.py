"""Fingerprint distances: same device twice vs two different devices.

Each evaluation reduces a feature vector to one scalar distance from the
population nominal.  Re-evaluating one device moves that scalar a little;
switching devices moves it a lot.  The gap is what makes the fleet behave
like a physical unclonable function.
"""

import numpy as np

from radioprint.metrics import compute_distances, crp_count
from radioprint.params import ParamSpec, sample_fleet
from radioprint.signals import FrameConfig

spec = ParamSpec()
fleet = sample_fleet(20, spec, seed=9)

print("evaluating 20 devices x 12 frames each ...")
dist = compute_distances(fleet, 12, FrameConfig(frame_bits=16400), seed=9, threads=4)

intra, inter = dist.d_intra, dist.d_inter
print(f"\n  same-device distance:      median {np.median(intra):12.1f} ppm, worst {dist.worst_case_d_intra:12.1f}")
print(f"  cross-device distance:     median {np.median(inter):12.1f} ppm, worst {dist.worst_case_d_inter:12.1f}")
print(f"  median separation:         {np.median(inter) / np.median(intra):.0f}x")
print(f"  Prob(intra < inter):       {dist.identifiability:.4f}")

print(f"\nchallenge space: a 5-feature, 16-bit response gives {crp_count(5):.3e} pairs")
print("(an impostor guessing a response at random is hopeless at that size)")
