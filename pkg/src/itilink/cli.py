"""Command-line front end: presets, arbitrary scenario runs, CRLB printout.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .estimation import crlb_general
from .harness import (ConfigError, load_scenarios, parse_override,
                      resolved_dict, run_scenario, write_csv)
from .harness.config import ScenarioConfig
from .numerics import IllConditionedError
from .ofdm import OfdmConfig, symmetric_used_subcarriers
from .pilots import make_joint_plan

FIG_PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")

# Paper-scale numerology, switched in by --full-scale with a runtime warning.
FULL_SCALE_OVERRIDES = {
    "ofdm": {"n_fft": 2048, "n_cp": 144, "n_used": 1200,
             "sample_rate_hz": 30.72e6},
}


def _preset_path(name: str):
    return resources.files("itilink.presets").joinpath(f"{name}.toml")


def _deep_update(base: dict, extra: dict) -> dict:
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _deep_update(base[k], v)
        else:
            base[k] = v
    return base


def _run_scenarios(path, args) -> int:
    overrides: dict = {}
    for text in args.set or []:
        _deep_update(overrides, parse_override(text))
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "full_scale", False):
        print("warning: full-scale numerology (N=2048); expect long runtimes",
              file=sys.stderr)
        _deep_update(overrides, {k: dict(v) for k, v in
                                 FULL_SCALE_OVERRIDES.items()})
    scenarios = load_scenarios(path, overrides)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for scn in scenarios:
        records.extend(run_scenario(scn, workers=args.workers))
        cfg_path = out_dir / f"{scn.scenario_id}.config.json"
        cfg_path.write_text(json.dumps(resolved_dict(scn), indent=2) + "\n")
    csv_path = out_dir / f"{args.csv_name}.csv"
    write_csv(records, csv_path)
    print(f"wrote {len(records)} records to {csv_path}")
    return 0


def _cmd_run(args) -> int:
    args.csv_name = Path(args.config).stem
    return _run_scenarios(args.config, args)


def _cmd_fig(name: str, args) -> int:
    args.csv_name = name
    with resources.as_file(_preset_path(name)) as path:
        return _run_scenarios(path, args)


def _cmd_validate(args) -> int:
    scenarios = load_scenarios(args.config)
    from .harness import build_runtime
    for scn in scenarios:
        build_runtime(scn)
        print(f"{scn.scenario_id}: ok")
    return 0


def _cmd_crlb(args) -> int:
    n_fft = args.n
    cfg = OfdmConfig(n_fft=n_fft, n_cp=0,
                     used_subcarriers=symmetric_used_subcarriers(n_fft, n_fft // 2),
                     sample_rate_hz=float(n_fft) * 15e3)
    plan = make_joint_plan(args.m, range(n_fft), bin_domain=range(n_fft),
                           family="cyclic_shift")
    general = crlb_general(plan, args.l, args.sigma2, cfg)
    closed = args.m * args.l / n_fft * args.sigma2
    print(f"closed-form M*L/N*sigma2 = {closed:.12g}")
    print(f"general trace bound      = {general:.12g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itilink",
        description="Reuse-1 OFDMA downlink simulator: MSE/CRLB and coded "
                    "BLER experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_opts(p, with_config: bool):
        if with_config:
            p.add_argument("--config", required=True, help="scenario TOML file")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override every scenario's master_seed")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config field, e.g. cfo.derotation=max")
        p.add_argument("--workers", type=int,
                       default=int(os.environ.get("ITILINK_WORKERS", "1")),
                       help="parallel trial workers (default $ITILINK_WORKERS or 1)")
        p.add_argument("--full-scale", action="store_true",
                       help="switch to the N=2048 paper numerology")

    p_run = sub.add_parser("run", help="run scenarios from a file")
    add_run_opts(p_run, with_config=True)
    p_run.set_defaults(fn=_cmd_run)

    for name in FIG_PRESETS:
        p_fig = sub.add_parser(name, help=f"run the bundled {name} preset")
        add_run_opts(p_fig, with_config=False)
        p_fig.set_defaults(fn=lambda a, _n=name: _cmd_fig(_n, a))

    p_val = sub.add_parser("validate", help="check a scenario file, run nothing")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(fn=_cmd_validate)

    p_crlb = sub.add_parser("crlb", help="print CRLB values for (M, L, N, sigma2)")
    p_crlb.add_argument("--m", type=int, required=True)
    p_crlb.add_argument("--l", type=int, required=True)
    p_crlb.add_argument("--n", type=int, required=True)
    p_crlb.add_argument("--sigma2", type=float, required=True)
    p_crlb.set_defaults(fn=_cmd_crlb)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (IllConditionedError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
