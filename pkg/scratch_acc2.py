"""Second calibration pass: shaping fleet size and fig6a medians."""

import time

from radioprint.experiments import ExperimentConfig, _single_error_run, replicate_seed, run_experiment


def run(label, cfg, **kw):
    t0 = time.time()
    fd = _single_error_run(cfg, replicate_seed(cfg), threads=1, **kw)
    print(
        f"{label}: error {fd.probability:.4f} ({fd.n_errors}/{fd.n_evaluations})"
        f" in {time.time() - t0:.0f} s",
        flush=True,
    )
    return fd


# bracket the no-shaping sigma=10 arm inside [1e-2, 1e-1)
for ntx in (4, 6, 8):
    cfg = ExperimentConfig(
        n_tx=ntx, ebn0_sigma_db=10.0, rrc_enabled=False, n_eval_frames=2000, n_seeds=1
    )
    run(f"6d ntx={ntx} sigma=10 rrc=False", cfg)

# fig6a fixtures exactly as the acceptance suite runs them (3-seed medians)
for sweep in ([10, 50], [200]):
    t0 = time.time()
    rows = run_experiment("fig6a", ExperimentConfig(n_eval_frames=2000), sweep=sweep)
    for r in rows:
        print(
            f"6a ntx={r['n_tx']}: median error {r['error_probability']:.4f} "
            f"({r['n_errors']}/{r['n_evaluations']}) status={r['status']}",
            flush=True,
        )
    print(f"sweep {sweep} total {time.time() - t0:.0f} s", flush=True)
