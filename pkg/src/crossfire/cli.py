"""Command line: ``crossfire run|validate|list-experiments``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .experiments import EXPERIMENTS, experiment_config, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("crossfire")


def parse_seeds(text: str) -> list[int]:
    """``"0,1,5"`` or ranges like ``"0-9"`` (inclusive), mixed freely."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep and lo:
            a, b = int(lo), int(hi)
            if b < a:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(a, b + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crossfire", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a named experiment")
    r.add_argument("experiment")
    r.add_argument("--config", help="YAML config file (defaults when omitted)")
    r.add_argument("--seeds", help="e.g. 0-9 or 0,3,7 (default: config seeds)")
    r.add_argument("--out", help="output directory (default: config output_dir)")

    v = sub.add_parser("validate", help="check a config file and print the resolved config")
    v.add_argument("--config", required=True)

    sub.add_parser("list-experiments", help="names and descriptions of the experiments")
    return p


def _report_config_error(exc: ConfigError) -> int:
    for issue in exc.issues:
        print(f"config error: {issue}", file=sys.stderr)
    return EXIT_CONFIG


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    if args.command == "list-experiments":
        for name, exp in EXPERIMENTS.items():
            print(f"{name}\t{exp.description}")
        return EXIT_OK

    if args.command == "validate":
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            return _report_config_error(exc)
        except OSError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(cfg.to_yaml(), end="")
        return EXIT_OK

    if args.experiment not in EXPERIMENTS:
        print(f"config error: unknown experiment {args.experiment!r}; "
              f"choose from {', '.join(EXPERIMENTS)}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = (experiment_config(args.experiment, path=args.config) if args.config
               else experiment_config(args.experiment))
        seeds = parse_seeds(args.seeds) if args.seeds else None
    except ConfigError as exc:
        return _report_config_error(exc)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = run_experiment(args.experiment, cfg, seeds, args.out)
    except Exception as exc:  # noqa: BLE001 - any failure past validation is a runtime error
        log.debug("run failed", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(summary['files']) + 1} files to {args.out or cfg.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
