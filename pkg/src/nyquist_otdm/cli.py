"""Command line front end: run scenarios, sweep a parameter, calibrate combs,
and validate configs without running them."""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .mzm import MzmParams, calibrate_flat_comb, comb_report_to_dict, \
    drive_plan_to_json, format_comb_table
from .scenario import ConfigError, parse_scenario, run_scenario, \
    scenario_from_file, sweep


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nyquist-otdm",
        description="Simulate electrically sampled Nyquist-pulse optical TDM "
                    "links and flat frequency-comb generation.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario config")
    run_p.add_argument("config", type=Path, help="scenario JSON file")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    run_p.add_argument("--out-dir", type=Path, default=None,
                       help="write a report bundle here")

    sweep_p = sub.add_parser("sweep", help="run a config once per value of "
                                           "one parameter")
    sweep_p.add_argument("config", type=Path)
    sweep_p.add_argument("--param", required=True,
                         help="dotted config path, e.g. noise.osnr_db")
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated values, e.g. 20,25,30")
    sweep_p.add_argument("--seed", type=int, default=None)
    sweep_p.add_argument("--out-dir", type=Path, default=None,
                         help="write one bundle per value under this directory")

    cal_p = sub.add_parser("calibrate-comb",
                           help="find dual-drive modulator settings for a "
                                "flat comb")
    cal_p.add_argument("--lines", type=int, default=3,
                       help="number of comb lines (odd)")
    cal_p.add_argument("--spacing-ghz", type=float, required=True,
                       help="line spacing in GHz")
    cal_p.add_argument("--flatness-target-db", type=float, default=0.1)
    cal_p.add_argument("--modulation-index", type=float, default=0.3)
    cal_p.add_argument("--v-pi", type=float, default=0.42,
                       help="switching voltage in volts")
    cal_p.add_argument("--eo-bandwidth-ghz", type=float, default=16.0,
                       help="electro-optic 3 dB bandwidth in GHz")
    cal_p.add_argument("--extinction-arm1-db", type=float, default=40.0)
    cal_p.add_argument("--extinction-arm2-db", type=float, default=37.0)
    cal_p.add_argument("--out-dir", type=Path, default=None)

    val_p = sub.add_parser("validate", help="check a config and exit")
    val_p.add_argument("config", type=Path)
    return parser


def _parse_values(text: str) -> list:
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise ConfigError("--values", "empty value in list")
        if re.fullmatch(r"[+-]?\d+", part):
            values.append(int(part))
        else:
            try:
                values.append(float(part))
            except ValueError:
                raise ConfigError("--values", f"not a number: {part!r}") from None
    return values


def _cmd_run(args) -> int:
    raw = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        raw["seed"] = args.seed
    bundle = run_scenario(parse_scenario(raw))
    print(bundle.summary())
    if args.out_dir is not None:
        for p in bundle.write(args.out_dir):
            print(f"wrote {p}")
    return 0


def _cmd_sweep(args) -> int:
    raw = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        raw["seed"] = args.seed
    values = _parse_values(args.values)
    bundles = sweep(raw, args.param, values)
    for value, bundle in zip(values, bundles):
        print(f"--- {args.param} = {value} ---")
        print(bundle.summary())
        if args.out_dir is not None:
            tag = re.sub(r"[^A-Za-z0-9_.+-]", "_", str(value))
            for p in bundle.write(Path(args.out_dir) / f"{args.param}={tag}"):
                print(f"wrote {p}")
    return 0


def _cmd_calibrate(args) -> int:
    if args.lines < 3 or args.lines % 2 == 0:
        raise ConfigError("--lines", "must be an odd number >= 3")
    params = MzmParams(
        v_pi=args.v_pi,
        eo_3db_bandwidth=args.eo_bandwidth_ghz * 1e9,
        dc_extinction_arm1_db=args.extinction_arm1_db,
        dc_extinction_arm2_db=args.extinction_arm2_db,
    )
    cal = calibrate_flat_comb(args.lines, args.spacing_ghz * 1e9, params,
                              flatness_target_db=args.flatness_target_db,
                              modulation_index=args.modulation_index)
    print(format_comb_table(cal.report))
    print(f"converged: {'yes' if cal.converged else 'no'}")
    print(f"waveform rmse vs ideal: {cal.waveform_rmse_percent:.4f} %")
    if args.out_dir is not None:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        plan_path = out / "drive_plan.json"
        plan_path.write_text(drive_plan_to_json(cal.plan) + "\n")
        report_path = out / "comb_report.json"
        report_path.write_text(json.dumps(comb_report_to_dict(cal.report),
                                          sort_keys=True, indent=2) + "\n")
        print(f"wrote {plan_path}")
        print(f"wrote {report_path}")
    return 0


def _cmd_validate(args) -> int:
    scenario_from_file(args.config)
    print("ok")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "sweep": _cmd_sweep,
               "calibrate-comb": _cmd_calibrate, "validate": _cmd_validate}
    try:
        return handler[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON in config: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
