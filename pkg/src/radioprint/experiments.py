"""Experiment orchestration: parameter sweeps, seed replication, CSV output.

Each experiment kind sweeps one axis of the identification problem and
writes a flat result table.  Every row echoes the resolved configuration it
was produced under, so a result file is self-describing; reruns with the
same configuration and master seed are byte-identical for any thread count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .metrics import FalseDetection, compute_distances, false_detection_probability
from .mlp import (
    CompensatorModel,
    Hyperparameters,
    apply_compensator,
    build_loopback_pairs,
    build_training_set,
    train_classifier,
    train_compensator,
)
from .nist import TEST_NAMES, NistConfig, nist_subset, puf_bitstream
from .params import Dist, ParamSpec, sample_fleet
from .pipeline import evaluate_frame, evaluate_transmitted, parallel_map, transmit_frame
from .receiver import IDEAL_RX, FrameRejected, RxProfile
from .seeds import child_seed, rng_for
from .signals import FrameConfig

__all__ = [
    "ExperimentConfig",
    "EXPERIMENT_KINDS",
    "NONIDEAL_RX",
    "RX_MODES",
    "replicate_seed",
    "train_model",
    "evaluate_model",
    "run_experiment",
    "write_csv",
]

# Enrollment always runs through the reference receiver; rx_mode picks the
# receiver the identification traffic passes through afterwards.  "nonideal"
# uses the field receiver's features raw, "compensated" maps them back into
# the reference frame first.
RX_MODES = ("ideal", "nonideal", "compensated")

# a field receiver comes off the same line as the transmitters; one-sigma
# impairments
NONIDEAL_RX = RxProfile(
    lo_offset_ppm=8.3, iq_gain_imbalance_db=1.0, iq_phase_imbalance_deg=5.0
)

@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run depends on; results are a pure function of this."""

    n_tx: int = 50
    n_hidden: int = 50
    n_train_iterations: int = 10
    frame_bits: int = 30_000
    ebn0_sigma_db: float = 2.0
    rrc_enabled: bool = True
    rx_mode: str = "ideal"
    n_eval_frames: int = 1000
    master_seed: int = 0
    output_path: str = "results"
    n_seeds: int = 3

    def __post_init__(self):
        for name in ("n_tx", "n_hidden", "n_train_iterations", "n_eval_frames", "n_seeds"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.ebn0_sigma_db < 0:
            raise ValueError("ebn0_sigma_db must be >= 0")
        if self.rx_mode not in RX_MODES:
            raise ValueError(f"rx_mode must be one of {RX_MODES}")

    def frame_config(self) -> FrameConfig:
        return FrameConfig(frame_bits=self.frame_bits)

    def param_spec(self) -> ParamSpec:
        return replace(ParamSpec(), eb_n0_db=Dist(15.0, self.ebn0_sigma_db))


# config fields echoed into every result row; output_path names the file
# location and threads is runtime plumbing, neither affects any value
_ECHO_FIELDS = (
    "n_tx",
    "n_hidden",
    "n_train_iterations",
    "frame_bits",
    "ebn0_sigma_db",
    "rrc_enabled",
    "rx_mode",
    "n_eval_frames",
    "master_seed",
    "n_seeds",
)


def _row(
    kind: str, cfg: ExperimentConfig, values: dict, status: str = "ok", overrides: dict | None = None
) -> dict:
    out = {"kind": kind}
    for name in _ECHO_FIELDS:
        out[name] = getattr(cfg, name)
    if overrides:
        out.update(overrides)
    out.update(values)
    out["status"] = status
    return out


def _diagnostic(exc: Exception) -> str:
    return f"failed: {type(exc).__name__}: {exc}"


def _rx_for_mode(mode: str) -> RxProfile:
    return IDEAL_RX if mode == "ideal" else NONIDEAL_RX


def _fit_compensator(
    cfg: ExperimentConfig, spec: ParamSpec, seed: int, rx: RxProfile
) -> CompensatorModel:
    """Loopback calibration of one field receiver against a small bench fleet."""
    bench = sample_fleet(8, spec, child_seed(seed, "calib-fleet"))
    ideal, nonideal = build_loopback_pairs(
        bench,
        rx,
        n_iterations=6,
        cfg=cfg.frame_config(),
        seed=child_seed(seed, "loopback"),
        spec=spec,
    )
    return train_compensator(ideal, nonideal)


def replicate_seed(cfg: ExperimentConfig, r: int = 0) -> int:
    """Seed of the r-th replicate; replicate 0 is the one `train`/`eval` use."""
    return child_seed(cfg.master_seed, "replicate", r)


def _prepare(cfg: ExperimentConfig, seed: int):
    """Fleet plus the evaluation-side receiver and its compensator, if any."""
    spec = cfg.param_spec()
    fc = cfg.frame_config()
    fleet = sample_fleet(cfg.n_tx, spec, child_seed(seed, "fleet"))
    rx = _rx_for_mode(cfg.rx_mode)
    comp = _fit_compensator(cfg, spec, seed, rx) if cfg.rx_mode == "compensated" else None
    return spec, fc, fleet, rx, comp


def _measure(cfg, seed, model, fleet, spec, fc, rx, comp, frames, threads) -> FalseDetection:
    """False detection over fresh observations, round-robin across the fleet."""

    def one(i):
        tx = fleet[i % len(fleet)]
        e_seed = child_seed(seed, "eval", tx.device_id, i)
        try:
            if frames is None:
                fv = evaluate_frame(tx, spec, fc, e_seed, rx=rx, rrc_enabled=cfg.rrc_enabled)
            else:
                fv = evaluate_transmitted(
                    frames[tx.device_id],
                    spec,
                    fc,
                    child_seed(e_seed, "env"),
                    rx=rx,
                    rrc_enabled=cfg.rrc_enabled,
                )
        except FrameRejected:
            return None
        if comp:
            fv = apply_compensator(comp, fv)
        return fv.to_array(), tx.device_id

    results = parallel_map(one, range(cfg.n_eval_frames), threads=threads)
    kept = [r for r in results if r is not None]
    if len(kept) < 0.9 * cfg.n_eval_frames:
        raise RuntimeError("frame rejection rate above 10% while evaluating")
    feats = np.array([f for f, _ in kept])
    ids = np.array([d for _, d in kept])
    return false_detection_probability(model, feats, ids)


def _enroll(cfg: ExperimentConfig, seed: int, fleet, spec, fc, threads: int):
    """Build the enrollment database through the reference receiver and fit.

    The trained model is deliberately independent of ``rx_mode``: enrollment
    happens once, on bench-quality hardware, before any field receiver is in
    the picture.
    """
    rows, labels = build_training_set(
        fleet,
        cfg.n_train_iterations,
        fc,
        seed,
        spec=spec,
        rx=IDEAL_RX,
        rrc_enabled=cfg.rrc_enabled,
        threads=threads,
    )
    return train_classifier(
        rows, labels, Hyperparameters(hidden_dim=cfg.n_hidden), seed=child_seed(seed, "mlp")
    )


def train_model(cfg: ExperimentConfig, seed: int | None = None, *, threads: int = 1):
    """Fit the identification classifier from reference-receiver enrollment."""
    seed = replicate_seed(cfg) if seed is None else seed
    spec, fc, fleet, _, _ = _prepare(cfg, seed)
    return _enroll(cfg, seed, fleet, spec, fc, threads)


def evaluate_model(
    cfg: ExperimentConfig, model, seed: int | None = None, *, threads: int = 1
) -> FalseDetection:
    """Measure a trained model on fresh traffic through the rx_mode receiver."""
    seed = replicate_seed(cfg) if seed is None else seed
    spec, fc, fleet, rx, comp = _prepare(cfg, seed)
    return _measure(cfg, seed, model, fleet, spec, fc, rx, comp, None, threads)


def _single_error_run(
    cfg: ExperimentConfig,
    seed: int,
    *,
    fixed_preamble: bool = False,
    threads: int = 1,
) -> FalseDetection:
    """Enroll a fleet and measure false detection on fresh transmissions."""
    spec, fc, fleet, rx, comp = _prepare(cfg, seed)

    if fixed_preamble:
        # every frame carries the same header bit-stream; only channels differ
        header_seed = child_seed(seed, "preamble")
        frames = {tx.device_id: transmit_frame(tx, fc, header_seed) for tx in fleet}

        def train_one(item):
            tx, it = item
            env = child_seed(child_seed(seed, "train", tx.device_id, it), "env")
            try:
                fv = evaluate_transmitted(
                    frames[tx.device_id], spec, fc, env, rx=IDEAL_RX, rrc_enabled=cfg.rrc_enabled
                )
            except FrameRejected:
                return None
            return fv.to_array()

        items = [(tx, it) for tx in fleet for it in range(cfg.n_train_iterations)]
        results = parallel_map(train_one, items, threads=threads)
        rows = [r for r in results if r is not None]
        labels = [tx.device_id for (tx, _), r in zip(items, results) if r is not None]
        if len(items) - len(rows) > 0.1 * len(items):
            raise RuntimeError("frame rejection rate above 10% while training")
        model = train_classifier(
            np.array(rows),
            np.array(labels),
            Hyperparameters(hidden_dim=cfg.n_hidden),
            seed=child_seed(seed, "mlp"),
        )
    else:
        frames = None
        model = _enroll(cfg, seed, fleet, spec, fc, threads)

    return _measure(cfg, seed, model, fleet, spec, fc, rx, comp, frames, threads)


def _median_fd(fds: list[FalseDetection]) -> dict:
    """The median-error replicate's numbers (lower median for even counts)."""
    order = np.argsort([fd.probability for fd in fds], kind="stable")
    fd = fds[order[(len(fds) - 1) // 2]]
    return {
        "error_probability": float(fd.probability),
        "ci_low": float(fd.ci_low),
        "ci_high": float(fd.ci_high),
        "n_evaluations": int(fd.n_evaluations),
        "n_errors": int(fd.n_errors),
    }


def _replicated_error(
    cfg: ExperimentConfig, *, fixed_preamble: bool = False, threads: int = 1
) -> dict:
    """Median error over the configured seed replicates, with that run's CI."""
    fds = []
    for r in range(cfg.n_seeds):
        seed = replicate_seed(cfg, r)
        fds.append(
            _single_error_run(cfg, seed, fixed_preamble=fixed_preamble, threads=threads)
        )
    return _median_fd(fds)


def _sweep_errors(kind, cfg, points, threads, extra=None):
    """One error measurement per sweep point; a failed point keeps its row."""
    rows = []
    for overrides, values in points:
        base = dict(values or {})
        try:
            pc = replace(cfg, **overrides)
            base.update(_replicated_error(pc, threads=threads, **(extra or {})))
            rows.append(_row(kind, pc, base))
        except Exception as exc:  # record the point, keep sweeping
            rows.append(_row(kind, cfg, base, status=_diagnostic(exc), overrides=overrides))
    return rows


def _run_fig6a(cfg, sweep, threads):
    points = [int(v) for v in (sweep or (10, 50, 200))]
    return _sweep_errors("fig6a", cfg, [({"n_tx": v}, {}) for v in points], threads)


def _run_fig6b(cfg, sweep, threads):
    points = [int(v) for v in (sweep or (10, 25, 50, 100))]
    return _sweep_errors("fig6b", cfg, [({"n_hidden": v}, {}) for v in points], threads)


def _run_fig6c(cfg, sweep, threads):
    points = [int(v) for v in (sweep or (1, 3, 10))]
    rows = _sweep_errors(
        "fig6c",
        cfg,
        [({"n_train_iterations": v}, {"arm": "payload"}) for v in points],
        threads,
    )
    rows += _sweep_errors(
        "fig6c",
        cfg,
        [({}, {"arm": "fixed_preamble"})],
        threads,
        extra={"fixed_preamble": True},
    )
    return rows


def _run_fig6d(cfg, sweep, threads):
    sigmas = [float(v) for v in (sweep or (2.0, 6.0, 10.0))]
    points = [
        ({"ebn0_sigma_db": s, "rrc_enabled": rrc}, {})
        for s in sigmas
        for rrc in (True, False)
    ]
    return _sweep_errors("fig6d", cfg, points, threads)


def _run_fig6ef(cfg, sweep, threads):
    """Distance distributions; n_eval_frames counts evaluations per device."""
    seed = child_seed(cfg.master_seed, "replicate", 0)
    spec = cfg.param_spec()
    fleet = sample_fleet(cfg.n_tx, spec, child_seed(seed, "fleet"))
    dist = compute_distances(
        fleet, cfg.n_eval_frames, cfg.frame_config(), seed, spec=spec, threads=threads
    )
    rows = []
    for stat, value in (
        ("identifiability", float(dist.identifiability)),
        ("worst_case_d_intra_ppm", float(dist.worst_case_d_intra)),
        ("worst_case_d_inter_ppm", float(dist.worst_case_d_inter)),
        ("median_d_intra_ppm", float(np.median(dist.d_intra))),
        ("median_d_inter_ppm", float(np.median(dist.d_inter))),
        ("n_intra_pairs", int(dist.d_intra.size)),
        ("n_inter_pairs", int(dist.d_inter.size)),
    ):
        rows.append(_row("fig6ef", cfg, {"record": "summary", "statistic": stat, "value": value}))

    both = np.concatenate([dist.d_intra, dist.d_inter])
    both = both[both > 0]
    edges = np.logspace(np.log10(both.min() * 0.999), np.log10(both.max() * 1.001), 31)
    for series, data in (("intra", dist.d_intra), ("inter", dist.d_inter)):
        counts, _ = np.histogram(data, bins=edges)
        for b in range(counts.size):
            rows.append(
                _row(
                    "fig6ef",
                    cfg,
                    {
                        "record": "histogram",
                        "series": series,
                        "bin_low_ppm": float(edges[b]),
                        "bin_high_ppm": float(edges[b + 1]),
                        "count": int(counts[b]),
                    },
                )
            )
    return rows


def _run_fig7(cfg, sweep, threads):
    """Randomness table: fleet bitstream vs a seeded PRNG reference."""
    min_tx = (10_000 + 15) // 16
    if cfg.n_tx < min_tx:
        raise ValueError(
            f"fig7 needs n_tx >= {min_tx} so the 16-bit-per-device stream "
            "reaches the 10,000-bit minimum"
        )
    spec = cfg.param_spec()
    fleet = sample_fleet(cfg.n_tx, spec, child_seed(cfg.master_seed, "fleet"))
    puf_bits = puf_bitstream(fleet, spec)
    prng_bits = rng_for(child_seed(cfg.master_seed, "prng-baseline"), "bits").integers(
        0, 2, size=puf_bits.size, dtype=np.uint8
    )
    ncfg = NistConfig()
    puf_res = nist_subset(puf_bits, ncfg)
    prng_res = nist_subset(prng_bits, ncfg)
    rows = []
    for name in TEST_NAMES:
        rows.append(
            _row(
                "fig7",
                cfg,
                {
                    "test": name,
                    "puf_pass_rate": puf_res[name].pass_rate,
                    "puf_n_records": puf_res[name].n_records,
                    "puf_skipped": puf_res[name].skipped,
                    "prng_pass_rate": prng_res[name].pass_rate,
                    "prng_n_records": prng_res[name].n_records,
                    "prng_skipped": prng_res[name].skipped,
                },
            )
        )
    return rows


def _run_fig10(cfg, sweep, threads):
    """Deployment-receiver comparison; one enrollment model serves all modes.

    Evaluation seeds are shared across modes, so every mode scores the same
    transmissions seen through a different receiver front end.
    """
    points = [int(v) for v in (sweep or (10, 50, 100))]
    rows = []
    for v in points:
        per_mode: dict[str, list[FalseDetection]] = {m: [] for m in RX_MODES}
        try:
            base = replace(cfg, n_tx=v)
            for r in range(base.n_seeds):
                seed = replicate_seed(base, r)
                spec = base.param_spec()
                fc = base.frame_config()
                fleet = sample_fleet(base.n_tx, spec, child_seed(seed, "fleet"))
                model = _enroll(base, seed, fleet, spec, fc, threads)
                for mode in RX_MODES:
                    mc = replace(base, rx_mode=mode)
                    rx = _rx_for_mode(mode)
                    comp = (
                        _fit_compensator(mc, spec, seed, rx)
                        if mode == "compensated"
                        else None
                    )
                    per_mode[mode].append(
                        _measure(mc, seed, model, fleet, spec, fc, rx, comp, None, threads)
                    )
        except Exception as exc:  # one point down, keep the sweep alive
            for mode in RX_MODES:
                rows.append(
                    _row(
                        "fig10",
                        cfg,
                        {},
                        status=_diagnostic(exc),
                        overrides={"n_tx": v, "rx_mode": mode},
                    )
                )
            continue
        for mode in RX_MODES:
            rows.append(
                _row("fig10", replace(base, rx_mode=mode), _median_fd(per_mode[mode]))
            )
    return rows


_RUNNERS = {
    "fig6a": _run_fig6a,
    "fig6b": _run_fig6b,
    "fig6c": _run_fig6c,
    "fig6d": _run_fig6d,
    "fig6ef": _run_fig6ef,
    "fig7": _run_fig7,
    "fig10": _run_fig10,
}

EXPERIMENT_KINDS = tuple(_RUNNERS)


def run_experiment(
    kind: str,
    cfg: ExperimentConfig,
    *,
    sweep=None,
    threads: int = 1,
) -> list[dict]:
    """Run one experiment kind; returns result rows ready for ``write_csv``.

    ``sweep`` overrides the kind's default sweep values (device counts for
    fig6a/fig10, hidden sizes for fig6b, training iterations for fig6c,
    Eb/N0 sigmas for fig6d).  A failing sweep point is recorded in its row's
    status column and the sweep continues.
    """
    if kind not in _RUNNERS:
        raise ValueError(f"unknown experiment kind {kind!r}; choose from {EXPERIMENT_KINDS}")
    return _RUNNERS[kind](cfg, sweep, threads)


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(rows: list[dict], path) -> Path:
    """RFC-4180 table; header is the union of row keys in first-seen order."""
    if not rows:
        raise ValueError("no rows to write")
    columns: list[str] = []
    for r in rows:
        for key in r:
            if key not in columns:
                columns.append(key)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_format_cell(r.get(c)) for c in columns])
    return path
