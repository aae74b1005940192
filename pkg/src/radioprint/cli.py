"""Command-line front end.

Configuration precedence is command line > config file > built-in defaults.
Config files are line-oriented ``key = value`` text; ``#`` starts a comment.
Every command exits 0 on success and prints a one-line ``error: ...`` to
stderr otherwise (exit 2 for usage and configuration problems, 1 for
failures at run time).
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    EXPERIMENT_KINDS,
    ExperimentConfig,
    _ECHO_FIELDS,
    _row,
    evaluate_model,
    replicate_seed,
    run_experiment,
    train_model,
    write_csv,
)
from .mlp import load_model, save_model
from .nist import NistConfig, nist_subset, puf_bitstream
from .params import sample_fleet, save_fleet
from .seeds import child_seed

__all__ = ["main"]


class CliError(Exception):
    def __init__(self, message: str, exit_code: int = 2):
        super().__init__(message)
        self.exit_code = exit_code


_BOOL_WORDS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _parse_bool(text: str) -> bool:
    try:
        return _BOOL_WORDS[text.strip().lower()]
    except KeyError:
        raise ValueError(f"not a boolean: {text!r}")


_CONFIG_COERCERS = {
    "n_tx": int,
    "n_hidden": int,
    "n_train_iterations": int,
    "frame_bits": int,
    "ebn0_sigma_db": float,
    "rrc_enabled": _parse_bool,
    "rx_mode": str,
    "n_eval_frames": int,
    "master_seed": int,
    "output_path": str,
    "n_seeds": int,
}


def read_config_file(path) -> dict:
    """Parse key = value lines with # comments into typed config overrides."""
    p = Path(path)
    if not p.is_file():
        raise CliError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(p.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise CliError(f"{path}:{lineno}: expected key = value")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_COERCERS:
            raise CliError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            out[key] = _CONFIG_COERCERS[key](value)
        except ValueError:
            raise CliError(f"{path}:{lineno}: bad value for {key}: {value!r}")
    return out


def _int_list(flag: str, text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise CliError(f"--{flag} expects an integer or comma-separated integers, got {text!r}")
    if not values:
        raise CliError(f"--{flag} got no values")
    return values


# which config field the multi-valued sweep flag drives, per experiment kind
_SWEEP_AXES = {
    "fig6a": ("ntx", "n_tx"),
    "fig10": ("ntx", "n_tx"),
    "fig6b": ("hidden", "n_hidden"),
    "fig6c": ("iters", "n_train_iterations"),
}


def resolve_config(args, kind: str | None = None) -> tuple[ExperimentConfig, list | None]:
    """Merge defaults, config file, and flags; returns (config, sweep override)."""
    merged = read_config_file(args.config) if args.config else {}
    if args.seed is not None:
        merged["master_seed"] = args.seed
    if args.out is not None:
        merged["output_path"] = args.out

    sweep = None
    sweep_flag, sweep_field = _SWEEP_AXES.get(kind, (None, None))
    for flag, field in (("ntx", "n_tx"), ("hidden", "n_hidden"), ("iters", "n_train_iterations")):
        raw = getattr(args, flag)
        if raw is None:
            continue
        values = _int_list(flag, raw)
        if len(values) == 1:
            merged[field] = values[0]
        elif flag == sweep_flag:
            sweep = values
        else:
            raise CliError(f"--{flag} takes a single value for this command")

    try:
        cfg = ExperimentConfig(**merged)
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc))
    if args.threads < 1:
        raise CliError("--threads must be >= 1")
    return cfg, sweep


def _out_dir(cfg: ExperimentConfig) -> Path:
    path = Path(cfg.output_path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_fleet(args) -> int:
    cfg, _ = resolve_config(args)
    fleet = sample_fleet(cfg.n_tx, cfg.param_spec(), child_seed(cfg.master_seed, "fleet"))
    path = _out_dir(cfg) / "fleet.txt"
    save_fleet(path, fleet)
    print(f"{path} ({len(fleet)} devices, master seed {cfg.master_seed})")
    return 0


def cmd_train(args) -> int:
    cfg, _ = resolve_config(args)
    model = train_model(cfg, threads=args.threads)
    path = _out_dir(cfg) / "model.txt"
    save_model(path, model)
    print(
        f"{path} (classes {model.output_dim}, hidden {model.hidden_dim}, "
        f"training error {model.final_error:.3e} after {model.epochs_run} epochs)"
    )
    return 0


def cmd_eval(args) -> int:
    cfg, _ = resolve_config(args)
    model_path = Path(cfg.output_path) / "model.txt"
    if not model_path.is_file():
        raise CliError(f"model file not found: {model_path} (run `train` first)")
    model = load_model(model_path)
    fd = evaluate_model(cfg, model, threads=args.threads)
    row = _row(
        "eval",
        cfg,
        {
            "error_probability": float(fd.probability),
            "ci_low": float(fd.ci_low),
            "ci_high": float(fd.ci_high),
            "n_evaluations": int(fd.n_evaluations),
            "n_errors": int(fd.n_errors),
        },
    )
    path = write_csv([row], _out_dir(cfg) / "eval.csv")
    print(
        f"{path} error_probability={fd.probability:.6g} "
        f"ci=[{fd.ci_low:.6g},{fd.ci_high:.6g}] n={fd.n_evaluations}"
    )
    return 0


def cmd_experiment(args) -> int:
    cfg, sweep = resolve_config(args, kind=args.kind)
    rows = run_experiment(args.kind, cfg, sweep=sweep, threads=args.threads)
    path = write_csv(rows, _out_dir(cfg) / f"{args.kind}.csv")
    failed = sum(1 for r in rows if r.get("status") != "ok")
    if failed:
        print(f"warning: {failed} sweep point(s) failed; see status column", file=sys.stderr)
    print(path)
    return 0


def cmd_nist(args) -> int:
    cfg, _ = resolve_config(args)
    min_tx = (10_000 + 15) // 16
    if cfg.n_tx < min_tx:
        raise CliError(f"nist needs n_tx >= {min_tx} (16 bits per device, 10,000-bit minimum)")
    fleet = sample_fleet(cfg.n_tx, cfg.param_spec(), child_seed(cfg.master_seed, "fleet"))
    results = nist_subset(puf_bitstream(fleet, cfg.param_spec()), NistConfig())
    rows = [
        _row(
            "nist",
            cfg,
            {
                "test": r.name,
                "pass_rate": r.pass_rate,
                "n_records": r.n_records,
                "n_passed": r.n_passed,
                "skipped": r.skipped,
            },
        )
        for r in results.values()
    ]
    path = write_csv(rows, _out_dir(cfg) / "nist.csv")
    n_ok = sum(1 for r in results.values() if r.passed)
    print(f"{path} {n_ok}/{len(results)} tests passed")
    return 0


def cmd_report(args) -> int:
    directory = Path(args.out) if args.out else Path(ExperimentConfig().output_path)
    if not directory.is_dir():
        raise CliError(f"no such directory: {directory}")
    files = sorted(directory.glob("*.csv"))
    if not files:
        print(f"no result files in {directory}")
        return 0
    for f in files:
        with open(f, newline="") as fh:
            rows = list(csv.DictReader(fh))
        ok = sum(1 for r in rows if r.get("status", "ok") == "ok")
        print(f"{f.name} rows={len(rows)} ok={ok} failed={len(rows) - ok}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--ntx", help="device count, or comma list where the kind sweeps it")
    common.add_argument("--hidden", help="hidden units, or comma list for fig6b")
    common.add_argument("--iters", help="training iterations, or comma list for fig6c")

    parser = argparse.ArgumentParser(
        prog="radioprint",
        description="Transmitter-fingerprint identification experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fleet", parents=[common], help="sample a fleet and export it").set_defaults(
        func=cmd_fleet
    )
    sub.add_parser("train", parents=[common], help="train the identification model").set_defaults(
        func=cmd_train
    )
    sub.add_parser("eval", parents=[common], help="evaluate a trained model").set_defaults(
        func=cmd_eval
    )
    p_exp = sub.add_parser("experiment", parents=[common], help="run one experiment kind")
    p_exp.add_argument("kind", choices=EXPERIMENT_KINDS)
    p_exp.set_defaults(func=cmd_experiment)
    sub.add_parser(
        "nist", parents=[common], help="run the randomness battery on a fleet bitstream"
    ).set_defaults(func=cmd_nist)
    sub.add_parser("report", parents=[common], help="summarize result files").set_defaults(
        func=cmd_report
    )
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints usage itself
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
