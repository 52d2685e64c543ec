"""Command-line entry point: ``scma-comp [--config FILE] [flags]``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, SimConfig, load_config
from .sim import emit_outputs, run_case_sweep, run_simulation

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scma-comp",
                                description="Downlink MU-SCMA-CoMP system-level simulator")
    p.add_argument("--config", type=Path, help="flat TOML file with SimConfig keys")
    p.add_argument("--case", type=int, help="scenario case 1..6")
    p.add_argument("--cases", type=_int_list, help="comma-separated cases to run on shared drops, e.g. 1,3,4,5,6")
    p.add_argument("--speed", type=float, help="user speed in km/h")
    p.add_argument("--speeds", type=_float_list, help="comma-separated speeds for a sweep")
    p.add_argument("--seed", type=int)
    p.add_argument("--drops", type=int, dest="n_drops")
    p.add_argument("--ttis", type=int, dest="ttis_per_drop")
    p.add_argument("--users", type=int, dest="n_users")
    p.add_argument("--out", dest="out_dir")
    p.add_argument("--trace", action="store_true", default=None, help="write per-decision JSONL traces")
    p.add_argument("--sinr-dump", action="store_true", default=None, dest="sinr_dump",
                   help="write the per-link SINR CSV (single-case runs only)")
    p.add_argument("--variant", choices=("prose", "printed"), dest="dual_variant",
                   help="dual-pairing rate variant")
    return p


def resolve_config(args: argparse.Namespace) -> SimConfig:
    cfg = load_config(args.config) if args.config else SimConfig()
    overrides = {k: getattr(args, k) for k in
                 ("seed", "n_drops", "ttis_per_drop", "n_users", "out_dir", "trace", "sinr_dump",
                  "dual_variant") if getattr(args, k) is not None}
    if args.case is not None:
        overrides["case"] = args.case
    if args.speed is not None:
        overrides["speed_kmh"] = args.speed
    try:
        return cfg.replace(**overrides)
    except TypeError as exc:  # wrong value types from the command line
        raise ConfigError("cli", str(exc)) from None


def run(args: argparse.Namespace) -> Path:
    cfg = resolve_config(args)
    if args.cases:
        for c in args.cases:
            cfg.replace(case=c)  # validates each case number up front
    if args.speeds:
        for v in args.speeds:
            cfg.replace(speed_kmh=v)
    out = Path(cfg.out_dir)
    trace_dir = out / "traces" if cfg.trace else None
    if args.cases or args.speeds:
        result = run_case_sweep(cfg, args.cases or [cfg.case], args.speeds, trace_dir)
    else:
        out.mkdir(parents=True, exist_ok=True)
        sinr_path = out / "sinr.csv" if cfg.sinr_dump else None
        result = run_simulation(cfg, trace_dir, sinr_path)
    return emit_outputs(result, out, cfg)["summary"]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        summary = run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure past validation is a runtime error
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {summary}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
