# apps/schrotbc/cli.py
"""
schrotbc command line.

    schrotbc run      --profile fcg-i --c0 4 --scheme NP50 --method TR
    schrotbc sweep    --table IV --scheme CQ --method BDF1
    schrotbc compare  --method TR --nt 257
    schrotbc presets  --table III

Exit codes: 0 ok, 1 numerical diagnostic, 2 bad configuration, 3 instability.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from apps.schrotbc.config import (PRESET_TABLES, ProfileConfig, RunConfig, describe_preset,
                                  load_config, preset_config, sweep_levels)
from apps.schrotbc.errors import ConfigError, InstabilityError, SchrotbcError
from apps.schrotbc.settings import get_settings
from apps.schrotbc.sweep import compare_schemes, convergence_sweep, execute
from utils.logging import setup as setup_logging

EXIT_OK, EXIT_DIAGNOSTIC, EXIT_CONFIG, EXIT_UNSTABLE = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schrotbc",
                                description="Free Schrödinger solver with discrete transparent walls")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file mirroring RunConfig")
    common.add_argument("--table", choices=["III", "IV", "V"], help="start from a tabulated protocol")
    common.add_argument("--full-scale", action="store_true", help="full grids (200² / 100³, Nt=5001)")
    common.add_argument("--scheme", help="CQ | NP20 | NP50 | CP20 | CP50 | HF")
    common.add_argument("--method", choices=["BDF1", "TR", "bdf1", "tr"])
    common.add_argument("--pade-order", type=int)
    common.add_argument("--nt", type=int, nargs="+", help="time levels (several for sweep)")
    common.add_argument("--tmax", type=float)
    common.add_argument("--grid", type=int, help="points per direction (LGL and Fourier)")
    common.add_argument("--profile", choices=["fcg-i", "fcg-ii", "fhg-i", "fhg-ii"])
    common.add_argument("--c0", type=float)
    common.add_argument("--dim", type=int, choices=[2, 3])
    common.add_argument("--beta", type=int, choices=[1, -1])
    common.add_argument("--snapshot-every", type=int)
    common.add_argument("--check-robin", action="store_true")
    common.add_argument("--threads", type=int, help="override SCHROTBC_THREADS")
    common.add_argument("--out", help="output directory")

    sub.add_parser("run", parents=[common], help="single simulation")
    sub.add_parser("sweep", parents=[common], help="Δt convergence study")
    sub.add_parser("compare", parents=[common], help="all boundary maps for one method")
    pre = sub.add_parser("presets", help="print the tabulated parameter blocks")
    pre.add_argument("--table", choices=list(PRESET_TABLES))
    pre.add_argument("--full-scale", action="store_true")
    return p


def build_config(args: argparse.Namespace) -> RunConfig:
    """Config file or tabulated protocol, then command-line overrides."""
    if args.config:
        config = load_config(args.config)
    else:
        dim = args.dim or 2
        table = args.table or ("IV" if args.command == "sweep" else "V" if dim == 3 else "III")
        config = preset_config(table, args.full_scale, method=args.method)

    changes = {}
    if args.dim is not None:
        changes["dim"] = args.dim
    if args.grid is not None:
        changes["n_lgl"] = changes["n_fourier"] = args.grid
    for key in ("scheme", "method", "pade_order", "tmax", "snapshot_every", "out"):
        value = getattr(args, key)
        if value is not None:
            changes[key] = value
    if args.pade_order is not None and args.scheme is None:
        changes["scheme"] = config.scheme.rstrip("0123456789")      # order applies to the family
    if args.check_robin:
        changes["check_robin"] = True
    if args.beta is not None:
        changes["domain"] = {**config.domain.model_dump(), "beta": args.beta}
    if args.nt:
        if args.command == "sweep":
            changes["nt_set"] = args.nt
            changes["nt"] = min(args.nt)
        elif len(args.nt) > 1:
            raise ConfigError(f"{args.command} takes a single --nt, got {args.nt}")
        else:
            changes["nt"] = args.nt[0]
    if args.profile or args.c0 is not None:
        label = args.profile or config.profile.label
        c0 = args.c0 if args.c0 is not None else config.profile.c0
        changes["profile"] = ProfileConfig.from_label(label, c0).model_dump()
    if args.command == "sweep" and not config.nt_set and "nt_set" not in changes:
        changes["nt_set"] = sweep_levels(changes.get("method", config.method), args.full_scale)
        changes["nt"] = changes["nt_set"][0]

    return config.with_updates(**changes) if changes else config


def _out_dir(config: RunConfig, command: str) -> Path:
    if config.out:
        return Path(config.out)
    p = config.profile
    name = f"{config.scheme_spec().label}_{p.label}_c{p.c0:g}"
    if command == "compare":
        name = f"{config.method.name}_{p.label}_c{p.c0:g}"
    return Path(get_settings().output_root) / command / name


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    settings = get_settings()
    setup_logging(settings.log_level, settings.log_file)
    log = logging.getLogger("cli")

    args = _parser().parse_args(argv)
    if args.command == "presets":
        tables = [args.table] if args.table else list(PRESET_TABLES)
        blocks = {t: describe_preset(t, args.full_scale) for t in tables}
        print(json.dumps(blocks if len(tables) > 1 else blocks[tables[0]], indent=2))
        return EXIT_OK

    log.info("START %s settings: %s", args.command, settings.show())
    try:
        config = build_config(args)
        out = _out_dir(config, args.command)
        if args.command == "run":
            result = execute(config, out)
            log.info("RESULT max_e=%.6e E_end=%.6f out=%s", result.max_error,
                     result.energy[-1], out)
        elif args.command == "sweep":
            report = convergence_sweep(config, out, args.threads)
            log.info("RESULT slope=%.4f out=%s", report.fit.slope, out)
        else:
            compare_schemes(config, out, args.threads)
            log.info("RESULT out=%s", out / "comparison.json")
    except (ConfigError, ValidationError) as exc:
        log.error("CONFIG-ERROR %s", exc)
        details = getattr(exc, "details", None)
        if details:
            log.error("CONFIG-ERROR details=%s", details)
        return EXIT_CONFIG
    except InstabilityError as exc:
        log.error("INSTABILITY %s", exc)
        return EXIT_UNSTABLE
    except SchrotbcError as exc:
        log.error("DIAGNOSTIC %s details=%s", exc, exc.details)
        return EXIT_DIAGNOSTIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
