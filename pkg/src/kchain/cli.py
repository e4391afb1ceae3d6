"""Command-line entry point: simulate / sweep / plotdata.

Exit codes: 0 success, 2 configuration or usage errors (with the offending
key or line named), 3 integration failures (with the failing stage).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import math
import os
import sys

from .config import (ConfigError, apply_overrides, parse_config_text,
                     scenario_from_config)
from .cosim import run_scenario
from .errors import IntegrationDiverged, IntegrationUnstable, KchainError
from .experiments import compute_metrics, fig2_config, fig3_config
from .runio import fmt, write_plots, write_run_directory

_PRESETS = {"fig2": fig2_config, "fig3": fig3_config}


def _load_config(args) -> dict:
    if args.preset:
        cfg = _PRESETS[args.preset]()
    elif args.config:
        with open(args.config) as fh:
            cfg = parse_config_text(fh.read())
    else:
        raise ConfigError("either --preset or --config is required")
    if args.set:
        cfg = apply_overrides(cfg, args.set)
    return cfg


def _run_one(cfg: dict, outdir: str) -> dict:
    """Run one seed and write its directory; returns the summary row."""
    scenario = scenario_from_config(cfg)
    result = run_scenario(scenario)
    report = compute_metrics(result)
    if scenario.model == "ising":
        onset = report.sync_onset
    else:
        onset = result.diagnostics.wave_onset
    if outdir:
        write_run_directory(outdir, result, report)
    return {
        "seed": scenario.seed,
        "onset": onset,
        "band_count": report.band_count,
        "pump_rate": report.pump_rate,
        "exponent": report.spreading_exponent,
    }


def _summary_line(row: dict) -> str:
    onset = "none" if row["onset"] is None else f"{row['onset']:.3g}"
    pump = row["pump_rate"]
    pump_s = "nan" if pump is None or (isinstance(pump, float)
                                       and math.isnan(pump)) else f"{pump:.3g}"
    return (f"seed={row['seed']} onset={onset} "
            f"band_count={row['band_count']} pump_rate={pump_s}")


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    if args.seed is not None:
        cfg["run"]["seed"] = int(args.seed)
    outdir = args.out or f"runs/{cfg.get('name', 'run')}-s{cfg['run']['seed']}"
    row = _run_one(cfg, outdir)
    print(_summary_line(row))
    return 0


def _parse_seeds(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        seeds = list(range(int(lo), int(hi) + 1))
    elif text:
        seeds = [int(tok) for tok in text.split(",") if tok.strip()]
    else:
        seeds = []
    if not seeds:
        raise ConfigError(f"empty seed range {text!r}")
    return seeds


def _parse_grid(text: str) -> tuple[str, list[float]]:
    key, _, spec = text.partition("=")
    try:
        start_s, step_s, stop_s = spec.split(":")
        start, step, stop = float(start_s), float(step_s), float(stop_s)
    except ValueError as exc:
        raise ConfigError(
            f"grid spec {text!r} must be key=start:step:stop") from exc
    if step <= 0 or stop < start:
        raise ConfigError(f"grid spec {text!r} must advance forward")
    values = []
    v = start
    while v <= stop + 1e-12 * max(1.0, abs(stop)):
        values.append(round(v, 12))
        v += step
    return key.strip(), values


def _sweep_worker(task):
    cfg, outdir = task
    return _run_one(cfg, outdir)


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    seeds = (_parse_seeds(args.seeds) if args.seeds is not None
             else [cfg["run"]["seed"]])
    grid_key, grid_values = (None, [None])
    if args.grid:
        grid_key, grid_values = _parse_grid(args.grid)
    outdir = args.out or f"runs/{cfg.get('name', 'run')}-sweep"
    os.makedirs(outdir, exist_ok=True)

    tasks = []
    for seed in seeds:
        for value in grid_values:
            run_cfg = apply_overrides(cfg, [f"run.seed={seed}"])
            label = f"s{seed}"
            if grid_key is not None:
                run_cfg = apply_overrides(run_cfg, [f"{grid_key}={value}"])
                label += f"-{grid_key.split('.')[-1]}{value:g}"
            tasks.append((run_cfg, os.path.join(outdir, label)))

    workers = int(os.environ.get("KCHAIN_THREADS", os.cpu_count() or 1))
    workers = max(1, min(workers, len(tasks)))
    if workers == 1:
        rows = [_sweep_worker(task) for task in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_worker, tasks))

    summary_path = os.path.join(outdir, "ensemble_summary.csv")
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["seed"]
        if grid_key is not None:
            header.append(grid_key)
        header += ["onset", "band_count", "pump_rate", "exponent"]
        writer.writerow(header)
        for (run_cfg, _), row in zip(tasks, rows):
            out = [str(row["seed"])]
            if grid_key is not None:
                node = run_cfg
                for part in grid_key.split("."):
                    node = node[part]
                out.append(fmt(node))
            out += [fmt(row["onset"]) if row["onset"] is not None else "nan",
                    str(row["band_count"]), fmt(row["pump_rate"]),
                    fmt(row["exponent"])]
            writer.writerow(out)
            print(_summary_line(row))
    print(f"wrote {summary_path}")
    return 0


def cmd_plotdata(args) -> int:
    if not os.path.isdir(args.run):
        print(f"error: run directory {args.run!r} does not exist",
              file=sys.stderr)
        return 2
    write_plots(args.run)
    print(f"wrote {os.path.join(args.run, 'plots')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kchain",
        description="co-simulation of oscillator networks driving spin chains")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and export it")
    sim.add_argument("--preset", choices=sorted(_PRESETS))
    sim.add_argument("--config", help="YAML config file")
    sim.add_argument("--set", action="append", default=[],
                     metavar="KEY=VALUE", help="dotted-key override")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", help="output run directory")
    sim.set_defaults(func=cmd_simulate)

    swp = sub.add_parser("sweep", help="seed/parameter ensemble")
    swp.add_argument("--preset", choices=sorted(_PRESETS))
    swp.add_argument("--config")
    swp.add_argument("--set", action="append", default=[],
                     metavar="KEY=VALUE")
    swp.add_argument("--seeds", help="range '1..20' or list '1,2,5'")
    swp.add_argument("--grid", metavar="KEY=START:STEP:STOP")
    swp.add_argument("--out")
    swp.set_defaults(func=cmd_sweep)

    plot = sub.add_parser("plotdata", help="emit SVG heatmaps for a run")
    plot.add_argument("--run", required=True, help="existing run directory")
    plot.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationDiverged, IntegrationUnstable) as exc:
        print(f"integration error: {exc}", file=sys.stderr)
        return 3
    except KchainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
