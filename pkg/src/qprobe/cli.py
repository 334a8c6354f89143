"""Command-line front end.

Subcommands: ``stats`` (single-point moments as JSON), ``fn`` (averaged
detection series), ``sweep`` (parameter scans as CSV), ``mc`` (Monte
Carlo runs, CSV records plus JSON summary) and ``verify`` (built-in
cross-check suite).  Models and distributions come from a flat key=value
config file (``--model``) and/or flags; flags override the file.

Exit codes: 0 on success, 1 on numerical failure (ill-conditioned solve,
closed-form divergence), 2 on configuration errors.  The environment
variable QPROBE_THREADS caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import config as cfgmod
from .errors import ConfigError, DivergenceError, IllConditionedError, QprobeError
from .intervals import (ExponentialInterval, FixedInterval, GammaInterval,
                        IntervalDistribution)
from .model import DEFAULT_DEGENERACY_TOL, spectral_reduce
from .superop import build_superops, detection_stats, fn_series, zero_mode_census
from .trajectory import run_bernoulli, run_per_realization
from .verify import run_verify

SWEEP_OUTPUTS = ("p_det", "n_mean", "n_sq", "t_mean", "t_sq", "lambda_max")


def _max_workers() -> int:
    raw = os.environ.get("QPROBE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"QPROBE_THREADS must be an integer, got {raw!r}") from None


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="key=value config file")
    p.add_argument("--L", type=int, help="ring size")
    p.add_argument("--gamma", type=float, help="hopping strength")
    p.add_argument("--xin", type=int, help="initial site")
    p.add_argument("--xd", type=int, help="detection site")
    p.add_argument("--dist", choices=("fixed", "exp", "gamma"), help="interval family")
    p.add_argument("--tau", type=float, help="fixed interval value")
    p.add_argument("--mean", type=float, help="mean interval")
    p.add_argument("--alpha", type=float, help="gamma shape parameter")
    p.add_argument("--seed", type=int, help="rng seed (unsigned 64-bit)")
    p.add_argument("--degeneracy-tol", type=float, default=None,
                   help="energy clustering tolerance (default 1e-9)")
    p.add_argument("--pseudo-inverse", action="store_true",
                   help="use a truncated-SVD pseudo-inverse on singular solves")


def _merged_config(args) -> dict[str, str]:
    file_cfg = cfgmod.load_config_file(args.model) if args.model else {}
    overrides = {
        "L": args.L, "gamma": args.gamma, "x_in": args.xin, "x_d": args.xd,
        "dist": args.dist, "tau": args.tau, "mean": args.mean,
        "alpha": args.alpha, "seed": args.seed,
    }
    cfg = cfgmod.merge_overrides(file_cfg, overrides)
    if "kind" not in cfg and "L" in cfg:
        cfg["kind"] = "ring"
    return cfg


def _reduce_from_args(args, cfg):
    model = cfgmod.model_from_config(cfg)
    tol = args.degeneracy_tol if args.degeneracy_tol else DEFAULT_DEGENERACY_TOL
    return model, spectral_reduce(model, degeneracy_tol=tol)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def cmd_stats(args) -> int:
    cfg = _merged_config(args)
    _, sd = _reduce_from_args(args, cfg)
    dist = cfgmod.distribution_from_config(cfg)
    sset = build_superops(sd, dist)
    stats = detection_stats(sset, dist, pseudo_inverse=args.pseudo_inverse)
    census = zero_mode_census(sset)
    doc = {
        "config": cfg,
        "reduced_dim": sd.reduced_dim,
        "stats": stats.as_dict(),
        "zero_modes": {
            "n_zero": census.n_zero,
            "n_nonzero": census.n_nonzero,
            "slowest_decay_abs": abs(census.slowest_decay),
            "slowest_decay_re": census.slowest_decay.real,
            "slowest_decay_im": census.slowest_decay.imag,
        },
    }
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_fn(args) -> int:
    cfg = _merged_config(args)
    _, sd = _reduce_from_args(args, cfg)
    dist = cfgmod.distribution_from_config(cfg)
    series = fn_series(build_superops(sd, dist), args.nmax)
    series = np.maximum(series, 0.0)      # clamp roundoff negatives on output only
    fh, close = _open_out(args.out)
    try:
        if args.format == "json":
            json.dump({"config": cfg, "fn": list(series)}, fh, indent=2)
            fh.write("\n")
        else:
            writer = csv.writer(fh)
            writer.writerow(["n", "fn"])
            for n, value in enumerate(series, 1):
                writer.writerow([n, repr(float(value))])
    finally:
        if close:
            fh.close()
    return 0


@dataclass(frozen=True)
class SweepSpec:
    """One-axis parameter scan over a shared model."""

    axis: str                      # "mean_tau" | "alpha"
    grid: tuple[float, ...]
    outputs: tuple[str, ...]

    def __post_init__(self):
        if self.axis not in ("mean_tau", "alpha"):
            raise ConfigError(f"sweep axis must be mean_tau or alpha, got {self.axis!r}")
        if not self.grid:
            raise ConfigError("sweep grid is empty")
        if any(g <= 0 for g in self.grid):
            raise ConfigError("sweep grid values must be positive")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        bad = [o for o in self.outputs if o not in SWEEP_OUTPUTS]
        if bad:
            raise ConfigError(f"unknown sweep outputs: {bad}")


def _sweep_distribution(cfg, axis: str, value: float) -> IntervalDistribution:
    kind = cfg.get("dist")
    if axis == "alpha":
        if kind != "gamma":
            raise ConfigError("alpha axis requires dist=gamma")
        return GammaInterval(value, float(cfg["mean"]))
    if kind == "fixed":
        return FixedInterval(value)
    if kind == "exp":
        return ExponentialInterval(value)
    if kind == "gamma":
        return GammaInterval(float(cfg["alpha"]), value)
    raise ConfigError(f"unknown dist {kind!r}")


def run_sweep(sd, cfg, spec: SweepSpec, pseudo_inverse: bool = False) -> list[dict]:
    """Evaluate every grid point; per-point failures are flagged in-row."""

    def one(value: float) -> dict:
        row = {spec.axis: value}
        try:
            dist = _sweep_distribution(cfg, spec.axis, value)
            sset = build_superops(sd, dist)
            stats = None
            if set(spec.outputs) - {"lambda_max"}:
                stats = detection_stats(sset, dist, pseudo_inverse=pseudo_inverse)
            for name in spec.outputs:
                if name == "lambda_max":
                    row[name] = abs(zero_mode_census(sset).slowest_decay)
                else:
                    row[name] = getattr(stats, name)
            row["status"] = "ok"
        except IllConditionedError as exc:
            for name in spec.outputs:
                row[name] = ""
            row["status"] = f"ill-conditioned cond~{exc.condition:.3e}"
        return row

    workers = _max_workers()
    if workers == 1:
        return [one(v) for v in spec.grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, spec.grid))


def cmd_sweep(args) -> int:
    cfg = _merged_config(args)
    _, sd = _reduce_from_args(args, cfg)
    try:
        grid = tuple(float(x) for x in args.grid.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"cannot parse --grid {args.grid!r}") from None
    outputs = tuple(args.outputs.split(",")) if args.outputs else SWEEP_OUTPUTS
    spec = SweepSpec(axis=args.axis, grid=grid, outputs=outputs)
    rows = run_sweep(sd, cfg, spec, pseudo_inverse=args.pseudo_inverse)
    fh, close = _open_out(args.out)
    try:
        if args.format == "json":
            json.dump({"config": cfg, "rows": rows}, fh, indent=2)
            fh.write("\n")
        else:
            writer = csv.writer(fh)
            header = [spec.axis, *spec.outputs, "status"]
            writer.writerow(header)
            for row in rows:
                writer.writerow([
                    repr(float(row[spec.axis])),
                    *[repr(float(row[o])) if row[o] != "" else "" for o in spec.outputs],
                    row["status"],
                ])
    finally:
        if close:
            fh.close()
    return 0


def cmd_mc(args) -> int:
    cfg = _merged_config(args)
    model = cfgmod.model_from_config(cfg)
    dist = cfgmod.distribution_from_config(cfg)
    seed = cfgmod.seed_from_config(cfg, default=0)
    if args.mode == "bernoulli":
        ens = run_bernoulli(model, dist, n_real=args.nreal, seed=seed,
                            n_abort=args.n_abort)
    else:
        ens = run_per_realization(model, dist, n_real=args.nreal,
                                  n_cut=args.ncut, seed=seed)
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh)
        if ens.mode == "bernoulli":
            writer.writerow(["n", "t"])
            for n, t in zip(ens.attempts, ens.times):
                writer.writerow([int(n), repr(float(t))])
        else:
            writer.writerow(["realization", "nbar"])
            for i, nb in enumerate(ens.nbar):
                writer.writerow([i, repr(float(nb))])
    finally:
        if close:
            fh.close()
    summary = {"config": cfg, "summary": ens.summary()}
    stream = sys.stdout if close else sys.stderr
    json.dump(summary, stream, indent=2)
    stream.write("\n")
    return 0


def cmd_verify(args) -> int:
    ok = run_verify(args.level)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qprobe",
        description="First-detection statistics under randomly timed projective probing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_stats = sub.add_parser("stats", help="single-point detection statistics (JSON)")
    _add_model_flags(p_stats)
    p_stats.set_defaults(func=cmd_stats)

    p_fn = sub.add_parser("fn", help="averaged detection series")
    _add_model_flags(p_fn)
    p_fn.add_argument("--nmax", type=int, required=True, help="series length")
    p_fn.add_argument("--out", help="output file ('-' for stdout)")
    p_fn.add_argument("--format", choices=("csv", "json"), default="csv")
    p_fn.set_defaults(func=cmd_fn)

    p_sweep = sub.add_parser("sweep", help="parameter scan (CSV)")
    _add_model_flags(p_sweep)
    p_sweep.add_argument("--axis", choices=("mean_tau", "alpha"), required=True)
    p_sweep.add_argument("--grid", required=True,
                         help="comma-separated strictly increasing positive values")
    p_sweep.add_argument("--outputs",
                         help=f"comma-separated subset of {','.join(SWEEP_OUTPUTS)}")
    p_sweep.add_argument("--out", help="output file ('-' for stdout)")
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.set_defaults(func=cmd_sweep)

    p_mc = sub.add_parser("mc", help="Monte Carlo run (CSV + JSON summary)")
    _add_model_flags(p_mc)
    p_mc.add_argument("--mode", choices=("bernoulli", "per_realization"),
                      default="bernoulli")
    p_mc.add_argument("--nreal", type=int, required=True, help="realization count")
    p_mc.add_argument("--ncut", type=int, default=200,
                      help="probes per realization (per_realization mode)")
    p_mc.add_argument("--n-abort", type=int, default=10**6,
                      help="attempt cap per realization (bernoulli mode)")
    p_mc.add_argument("--out", help="CSV output file; summary JSON goes to stdout")
    p_mc.set_defaults(func=cmd_mc)

    p_verify = sub.add_parser("verify", help="run the built-in cross-check suite")
    p_verify.add_argument("--level", choices=("quick", "full"), default="quick")
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (IllConditionedError, DivergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except QprobeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
