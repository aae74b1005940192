import time

import numpy as np

from radioprint.experiments import ExperimentConfig, run_experiment, write_csv

tiny = ExperimentConfig(
    n_tx=6, n_train_iterations=4, frame_bits=16400, n_eval_frames=60, n_seeds=2,
    master_seed=11,
)

t0 = time.time()
rows = run_experiment("fig6a", tiny, sweep=[3, 6], threads=2)
print(f"fig6a ({time.time() - t0:.1f} s)")
for r in rows:
    print(" ", {k: r[k] for k in ("kind", "n_tx", "error_probability", "ci_low", "ci_high", "status")})

t0 = time.time()
rows6c = run_experiment("fig6c", tiny, sweep=[1, 4], threads=2)
print(f"fig6c ({time.time() - t0:.1f} s)")
for r in rows6c:
    print(" ", {k: r[k] for k in ("arm", "n_train_iterations", "error_probability", "status")})

t0 = time.time()
rows6ef = run_experiment("fig6ef", ExperimentConfig(n_tx=6, n_eval_frames=5, frame_bits=16400, master_seed=3), threads=2)
print(f"fig6ef ({time.time() - t0:.1f} s)  rows: {len(rows6ef)}")
for r in rows6ef[:5]:
    print(" ", {k: r[k] for k in ("record", "statistic", "value")})

t0 = time.time()
rows7 = run_experiment("fig7", ExperimentConfig(n_tx=700, master_seed=5), threads=1)
print(f"fig7 ({time.time() - t0:.1f} s)")
for r in rows7:
    print(" ", r["test"], r["puf_pass_rate"], r["prng_pass_rate"], r["puf_skipped"])

t0 = time.time()
rows10 = run_experiment(
    "fig10",
    ExperimentConfig(n_tx=4, n_train_iterations=3, frame_bits=16400, n_eval_frames=40, n_seeds=1, master_seed=9),
    sweep=[4],
    threads=2,
)
print(f"fig10 ({time.time() - t0:.1f} s)")
for r in rows10:
    print(" ", r["rx_mode"], r["error_probability"], r["status"])

# determinism across thread counts
a = run_experiment("fig6a", tiny, sweep=[3], threads=1)
b = run_experiment("fig6a", tiny, sweep=[3], threads=3)
print("threads invariant:", a == b)
p1 = write_csv(a, "/tmp/rp_a.csv")
p2 = write_csv(b, "/tmp/rp_b.csv")
print("csv bytes equal:", open(p1, "rb").read() == open(p2, "rb").read())
print(open(p1).read().splitlines()[0])
print(open(p1).read().splitlines()[1])

# failure recording: rx_mode compensated with absurd reject? simpler: fig7 row error
try:
    run_experiment("fig7", ExperimentConfig(n_tx=10))
except ValueError as e:
    print("fig7 validation:", e)
bad = run_experiment("fig6a", ExperimentConfig(n_tx=3, n_train_iterations=1, frame_bits=16400, n_eval_frames=10, n_seeds=1, n_hidden=50000), sweep=[3], threads=1)
print("partial failure status:", bad[0]["status"][:60], "| has error col:", "error_probability" in bad[0])
