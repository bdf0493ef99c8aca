"""Command line entry point: ``looptoda run|campaign|validate <config>``.

Exit status: 0 all checks pass, 1 a check failed, 2 invalid config, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .errors import ValidationError
from .export import atomic_write, export_grid

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="looptoda", description="Loop-group Toda solutions and their verification.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="path to a JSON run config")
    common.add_argument("--seed", type=int, help="override the campaign seed")
    common.add_argument("--fd-step", type=float, help="override grid.fd_step")
    common.add_argument("--quiet", action="store_true", help="suppress per-check summary lines")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="build the configured field, export it and run checks")
    sub.add_parser("campaign", parents=[common], help="randomized check campaign from the config's campaign block")
    sub.add_parser("validate", parents=[common], help="validate the config and exit")
    return ap


def _apply_overrides(cfg, args):
    updates = {}
    if args.fd_step is not None:
        if not args.fd_step > 0:
            raise ValidationError("flag --fd-step: must be positive")
        updates["grid"] = cfg.grid.model_copy(update={"fd_step": args.fd_step})
    if args.seed is not None:
        if cfg.campaign is None and args.command == "campaign":
            raise ValidationError("flag --seed: config has no campaign block")
        if cfg.campaign is not None:
            updates["campaign"] = cfg.campaign.model_copy(update={"seed": args.seed})
    if not updates:
        return cfg
    from .config import parse_config, dump_config
    # re-validate so overrides get the same domain checks as the file
    return parse_config(dump_config(cfg.model_copy(update=updates)))


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    out = (lambda *a: None) if args.quiet else print

    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if args.command == "validate":
        out(f"config {args.config} is valid")
        return EXIT_OK

    from .runner import execute, execute_campaign
    try:
        if args.command == "campaign":
            if cfg.campaign is None:
                print("error: field campaign: required for the campaign command", file=sys.stderr)
                return EXIT_INVALID
            result = execute_campaign(cfg)
            report, report_text = result.report, result.to_json()
            grid = None
        else:
            report, grid = execute(cfg)
            report_text = report.to_json()
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        if grid is not None and cfg.outputs.grid_path:
            export_grid(grid, cfg.outputs.grid_path, cfg.outputs.format)
        if cfg.outputs.report_path:
            atomic_write(cfg.outputs.report_path, report_text + "\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    for line in report.summary_lines():
        out(line)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
