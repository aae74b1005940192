"""Calibrate acceptance operating points before freezing them into tests."""

import time

import numpy as np

from radioprint.experiments import (
    ExperimentConfig,
    _single_error_run,
    replicate_seed,
    run_experiment,
)
from radioprint.metrics import compute_distances
from radioprint.params import sample_fleet
from radioprint.seeds import child_seed


def run(label, cfg, **kw):
    t0 = time.time()
    fd = _single_error_run(cfg, replicate_seed(cfg), threads=1, **kw)
    print(
        f"{label}: error {fd.probability:.4f} ({fd.n_errors}/{fd.n_evaluations})"
        f" in {time.time() - t0:.0f} s",
        flush=True,
    )
    return fd


# criterion 2d candidates: no-RRC sigma=10 must land in [1e-2, 1e-1),
# and RRC < no-RRC strictly at sigma in {2, 6, 10}
for ntx in (10, 12):
    for sigma, evals in ((2.0, 3000), (6.0, 2000), (10.0, 2000)):
        for rrc in (True, False):
            cfg = ExperimentConfig(
                n_tx=ntx, ebn0_sigma_db=sigma, rrc_enabled=rrc,
                n_eval_frames=evals, n_seeds=1,
            )
            run(f"6d ntx={ntx} sigma={sigma:.0f} rrc={rrc}", cfg)

# criterion 2c: 10 iterations vs fixed preamble, ratio must be <= 2
cfg = ExperimentConfig(n_tx=200, n_eval_frames=4000, n_seeds=1)
run("6c ntx=200 iters=10", cfg)
run("6c ntx=200 fixed", cfg, fixed_preamble=True)

# criterion 2b: hidden 50 within 2x of hidden 100
for ntx in (200, 500):
    for hidden in (50, 100):
        cfg = ExperimentConfig(n_tx=ntx, n_hidden=hidden, n_eval_frames=4000, n_seeds=1)
        run(f"6b ntx={ntx} hidden={hidden}", cfg)

# criterion 4: fig10 at 100 Tx through the shared-enrollment runner
t0 = time.time()
cfg = ExperimentConfig(n_tx=100, n_eval_frames=2000, n_seeds=1)
for row in run_experiment("fig10", cfg, sweep=[100], threads=1):
    print(
        f"fig10 {row['rx_mode']}: error {row['error_probability']:.4f} "
        f"({row['n_errors']}/{row['n_evaluations']})",
        flush=True,
    )
print(f"fig10 total {time.time() - t0:.0f} s", flush=True)

# criterion 2a bottom end
for ntx in (10, 50):
    cfg = ExperimentConfig(n_tx=ntx, n_eval_frames=2000, n_seeds=1)
    run(f"6a ntx={ntx}", cfg)

# criterion 3 at the pinned size: 100 Tx x 50 evaluations
t0 = time.time()
cfg = ExperimentConfig(n_tx=100, n_eval_frames=50, n_seeds=1)
seed = replicate_seed(cfg)
spec = cfg.param_spec()
fleet = sample_fleet(cfg.n_tx, spec, child_seed(seed, "fleet"))
dist = compute_distances(fleet, cfg.n_eval_frames, cfg.frame_config(), seed, spec=spec)
print(
    f"6ef 100x50: ident {dist.identifiability:.6f} "
    f"median intra {np.median(dist.d_intra):.2f} inter {np.median(dist.d_inter):.2f} "
    f"ratio {np.median(dist.d_inter) / np.median(dist.d_intra):.1f} "
    f"in {time.time() - t0:.0f} s",
    flush=True,
)
