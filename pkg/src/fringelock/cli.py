"""Command line front end.

Three subcommands: ``run`` simulates one record, ``sweep`` repeats a run over
several seeds, ``analyze`` recomputes visibility from an existing counts.csv.
Exit codes: 0 on success, 2 for configuration or usage errors, 3 when a run
fails at runtime (calibration failure, unreadable input, broken contract).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import analyze_counts
from .config import ScenarioConfig, SCENARIOS, build_config, load_config
from .detection import CountSeries
from .errors import CalibrationError, ConfigError, ContractViolation
from .scenario import run_scenario, write_outputs


def _common_run_options(sub):
    sub.add_argument("--scenario", choices=SCENARIOS, help="preset to start from")
    sub.add_argument("--config", help="config file (flat key = value lines)")
    sub.add_argument("--duration-s", type=float, help="override run length")
    sub.add_argument(
        "--set",
        dest="assignments",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key (repeatable)",
    )
    sub.add_argument("--out-dir", default="runs", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fringelock",
        description="Simulated stabilised fibre interferometer for gated "
        "single-photon fringe records",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="simulate one record")
    run_p.add_argument("--seed", type=int, help="random seed")
    _common_run_options(run_p)
    run_p.set_defaults(func=_cmd_run)

    sweep_p = subs.add_parser("sweep", help="repeat a run over several seeds")
    sweep_p.add_argument(
        "--seeds", help="comma-separated seed list (default: first-seed..)"
    )
    sweep_p.add_argument("--first-seed", type=int, default=1)
    sweep_p.add_argument("--n-seeds", type=int, default=5)
    _common_run_options(sweep_p)
    sweep_p.set_defaults(func=_cmd_sweep)

    an_p = subs.add_parser("analyze", help="visibility analysis of a counts.csv")
    an_p.add_argument("--counts", required=True, help="counts.csv from a run")
    an_p.add_argument("--window-s", type=float, default=600.0)
    an_p.add_argument("--hist-bin", type=float, default=0.01)
    an_p.add_argument("--out-dir", help="where to write results (default: beside input)")
    an_p.set_defaults(func=_cmd_analyze)
    return parser


def _overrides_from_args(args, seed=None) -> dict[str, str]:
    overrides: dict[str, str] = {}
    if args.scenario:
        overrides["scenario"] = args.scenario
    if seed is not None:
        overrides["seed"] = str(seed)
    if args.duration_s is not None:
        overrides["duration_s"] = repr(args.duration_s)
    for item in args.assignments:
        if "=" not in item:
            raise ConfigError("--set", f"expected KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def _build_config(args, seed=None) -> ScenarioConfig:
    overrides = _overrides_from_args(args, seed=seed)
    if args.config:
        return load_config(args.config, overrides)
    return build_config([], overrides)


def _summary_line(result) -> str:
    stats = result.stats
    rate = float(result.counts.net.mean())
    return (
        f"seed={result.config.seed} scenario={result.config.scenario} "
        f"bins={len(result.counts)} mean_net={rate:.1f}/bin "
        f"mean_visibility={stats.mean:.4f} std_visibility={stats.std:.4f}"
    )


def _cmd_run(args) -> int:
    cfg = _build_config(args, seed=args.seed)
    result = run_scenario(cfg)
    written = write_outputs(result, args.out_dir)
    print(_summary_line(result))
    print(f"wrote {len(written)} files to {Path(args.out_dir)}")
    return 0


def _cmd_sweep(args) -> int:
    if args.seeds:
        try:
            seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        except ValueError:
            raise ConfigError("--seeds", f"not an integer list: {args.seeds!r}") from None
    else:
        seeds = list(range(args.first_seed, args.first_seed + args.n_seeds))
    if not seeds:
        raise ConfigError("--seeds", "no seeds given")
    out_root = Path(args.out_dir)
    rows = []
    for seed in seeds:
        cfg = _build_config(args, seed=seed)
        result = run_scenario(cfg)
        write_outputs(result, out_root / f"seed_{seed}")
        print(_summary_line(result))
        rows.append(
            (seed, result.stats.mean, result.stats.std, result.stats.n_valid)
        )
    out_root.mkdir(parents=True, exist_ok=True)
    summary = out_root / "sweep_summary.csv"
    with open(summary, "w", encoding="utf-8") as fh:
        fh.write("seed,mean_visibility,std_visibility,n_valid\n")
        for seed, mean, std, n_valid in rows:
            fh.write(f"{seed},{mean:.10g},{std:.10g},{n_valid}\n")
    means = np.array([r[1] for r in rows], dtype=float)
    print(
        f"{len(seeds)} seeds: grand_mean={means.mean():.4f} "
        f"seed_to_seed_std={means.std():.4f}"
    )
    print(f"wrote {summary}")
    return 0


def _read_counts(path: Path) -> CountSeries:
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise ConfigError("--counts", str(exc)) from None
    for column in ("time_s", "raw", "net"):
        if data.dtype.names is None or column not in data.dtype.names:
            raise ConfigError("--counts", f"missing column {column!r} in {path}")
    times = np.atleast_1d(data["time_s"])
    if len(times) < 2:
        raise ConfigError("--counts", "need at least two bins")
    bin_s = float(times[1] - times[0])
    if bin_s <= 0 or not np.allclose(np.diff(times), bin_s, atol=1e-6):
        raise ConfigError("--counts", "time axis is not uniform")
    return CountSeries(
        bin_s=bin_s,
        raw=np.atleast_1d(data["raw"]).astype(np.int64),
        net=np.atleast_1d(data["net"]),
    )


def _cmd_analyze(args) -> int:
    counts_path = Path(args.counts)
    series = _read_counts(counts_path)
    stats = analyze_counts(series, args.window_s, args.hist_bin)
    out_dir = Path(args.out_dir) if args.out_dir else counts_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    times = series.times_s()
    vis_path = out_dir / "visibility.csv"
    with open(vis_path, "w", encoding="utf-8") as fh:
        fh.write("time_s,visibility,valid\n")
        for t, v, ok in zip(times, stats.visibility, stats.valid):
            fh.write(f"{t:.10g},{v:.10g},{int(ok)}\n")
    hist_path = out_dir / "histogram.csv"
    with open(hist_path, "w", encoding="utf-8") as fh:
        fh.write("bin_lo,bin_hi,count\n")
        for lo, hi, c in zip(
            stats.hist_edges[:-1], stats.hist_edges[1:], stats.hist_counts
        ):
            fh.write(f"{lo:.10g},{hi:.10g},{c}\n")
    print(
        f"bins={len(series)} valid={stats.n_valid} "
        f"mean_visibility={stats.mean:.4f} std_visibility={stats.std:.4f}"
    )
    print(f"wrote {vis_path} and {hist_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CalibrationError, ContractViolation) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
