"""Command-line front end.

    wban-ee run CONFIG [--out DIR] [--methods LIST] [--seeds LIST] [--slots T] [--activity NAME] [-v]
    wban-ee validate CONFIG
    wban-ee steady-state CONFIG

Exit codes: 0 success, 2 configuration error, 3 runtime/allocator error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import harvest
from .config import RunConfig, load_config
from .errors import ParseError, ValidationError, WbanError
from .sim import Scenario, SimResult, run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

CSV_COLUMNS = (
    "slot", "sensor", "energy_before_J", "phi_W", "shadow_factor", "rate_bps",
    "power_W", "overflow_J", "energy_after_J", "network_ee_bpJ", "method", "seed",
)

log = logging.getLogger("wban_ee")


def fmt(v) -> str:
    """Shortest round-trip decimal form, stable across platforms."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def result_rows(result: SimResult):
    for rec in result.records:
        for i in range(rec.rate.size):
            yield (
                rec.t, i, rec.energy_before[i], rec.phi[i], rec.shadow_factor[i], rec.rate[i],
                rec.power[i], rec.overflow[i], rec.energy_after[i], rec.ee, result.method, result.seed,
            )


def write_csv(result: SimResult, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in result_rows(result):
            w.writerow([fmt(v) for v in row])


def csv_name(method: str, seed: int) -> str:
    return f"{method}_seed{seed}.csv"


def _run_pair(scenario: Scenario, out_dir: Path) -> dict:
    result = run_scenario(scenario)
    path = out_dir / csv_name(scenario.method, scenario.seed)
    write_csv(result, path)
    return {
        "method": scenario.method,
        "seed": scenario.seed,
        "csv": path.name,
        **result.summary,
        "ee_per_slot": [float(e) for e in result.ee],
    }


def run(cfg: RunConfig) -> int:
    """Run every (method, seed) pair, write one CSV each and a summary.json."""
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    pairs = [cfg.scenario(m, s) for s in cfg.seeds for m in cfg.methods]
    try:
        if cfg.jobs > 1:
            with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
                runs = list(pool.map(_run_pair, pairs, [cfg.out_dir] * len(pairs)))
        else:
            runs = [_run_pair(sc, cfg.out_dir) for sc in pairs]
    except WbanError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for r in runs:
        log.info("%s seed=%d mean EE %.6g bit/J", r["method"], r["seed"], r["mean_ee_bpJ"])

    reference = "optimal" if "optimal" in cfg.methods else cfg.methods[0]
    ratios = {}
    for seed in cfg.seeds:
        by_method = {r["method"]: np.array(r["ee_per_slot"]) for r in runs if r["seed"] == seed}
        ref = by_method[reference]
        ratios[str(seed)] = {
            m: [float(v) for v in ee / ref] for m, ee in by_method.items() if m != reference
        }
    summary = {
        "config": str(cfg.config_path) if cfg.config_path else None,
        "csv_columns": list(CSV_COLUMNS),
        "reference_method": reference,
        "runs": runs,
        "ee_ratio_per_slot": ratios,
    }
    with open(cfg.out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def cmd_steady_state(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    sc = cfg.scenario(cfg.methods[0], cfg.seeds[0])
    print("sensor,pi,g_avg_W", file=out)
    for i, chain in enumerate(sc.chains):
        pi = harvest.steady_state(chain).pi
        pi_s = " ".join(fmt(float(p)) for p in pi)
        print(f"{i},{pi_s},{fmt(harvest.average_rate(chain))}", file=out)
    return EXIT_OK


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wban-ee",
        description="Energy-efficient source-rate allocation for energy-harvesting body area networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate every (method, seed) pair and write CSV traces")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--out", dest="out_dir", type=Path)
    p_run.add_argument("--methods", type=_csv_list, help="comma-separated: optimal,sweep,exhaustive,baseline")
    p_run.add_argument("--seeds", type=lambda s: [int(x) for x in _csv_list(s)])
    p_run.add_argument("--slots", type=int)
    p_run.add_argument("--activity", choices=("relaxing", "walking", "running"))
    p_run.add_argument("--jobs", type=int, help="parallel worker processes")
    p_run.add_argument("-v", "--verbose", action="count", default=0,
                       help="-v progress, -vv simplex tableau dumps")

    p_val = sub.add_parser("validate", help="check a config file without running it")
    p_val.add_argument("config", type=Path)

    p_ss = sub.add_parser("steady-state", help="print each sensor's harvest steady state")
    p_ss.add_argument("config", type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.command == "run":
        overrides = {
            "out_dir": args.out_dir, "methods": args.methods, "seeds": args.seeds,
            "slots": args.slots, "activity": args.activity, "jobs": args.jobs,
            "verbosity": args.verbose or None,
        }
    try:
        scenario, cfg = load_config(args.config, **overrides)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    level = {0: logging.WARNING, 1: logging.INFO}.get(cfg.verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    if args.command == "validate":
        print(
            f"ok: {scenario.n} sensors, activity={scenario.activity.name}, slots={scenario.slots}, "
            f"methods={','.join(cfg.methods)}, seeds={','.join(map(str, cfg.seeds))}"
        )
        return EXIT_OK
    try:
        if args.command == "steady-state":
            return cmd_steady_state(cfg)
        return run(cfg)
    except WbanError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
