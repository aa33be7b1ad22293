"""``fieldlens`` command line.

Exit status: 0 on success, 2 on validation errors (bad config, missing
inputs or upstream artifacts), 1 on runtime errors. Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from filelock import FileLock, Timeout

from . import __version__, pipeline
from .errors import FieldlensError, ValidationError

log = logging.getLogger("fieldlens")

SUBCOMMANDS = ("harvest", "ingest", "graph", "metrics", "motifs", "communities", "topics", "socionet", "report", "all")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", required=True, type=Path, help="pipeline config file")
    common.add_argument("--out", type=Path, help="output directory (harvest: output JSONL file)")
    common.add_argument("--seed", type=int, help="Louvain seed (overrides config)")
    common.add_argument("--prune", choices=pipeline.PRUNE_CHOICES, help="leaf pruning mode (overrides config)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="fieldlens", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "topics":
            p.add_argument("action", choices=("bundle", "apply"))
    return parser


def _load_config(args) -> pipeline.PipelineConfig:
    overrides = {"seed": args.seed, "prune": args.prune}
    if args.out is not None and args.command != "harvest":
        overrides["out"] = str(args.out.resolve())
    return pipeline.PipelineConfig.from_file(args.config, overrides)


def _dispatch(args, cfg: pipeline.PipelineConfig) -> None:
    if args.command == "harvest":
        text = pipeline.stage_harvest(cfg, args.out)
        if args.out is None:
            sys.stdout.write(text)
        return
    if args.command == "all":
        bundle = pipeline.run_all(cfg)
        log.info("report written to %s (%d artifacts)", bundle.out_dir, len(bundle.manifest))
        return
    if args.command == "ingest":
        cfg.validate()
    key = f"topics {args.action}" if args.command == "topics" else args.command
    pipeline.STAGES[key](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _load_config(args)
        if args.command == "harvest":
            _dispatch(args, cfg)
            return 0
        cfg.out.mkdir(parents=True, exist_ok=True)
        lock = FileLock(str(cfg.out / ".fieldlens.lock"))
        try:
            with lock.acquire(timeout=0):
                _dispatch(args, cfg)
        except Timeout:
            print(f"fieldlens: another run holds {cfg.out / '.fieldlens.lock'}", file=sys.stderr)
            return 1
    except ValidationError as exc:
        print(f"fieldlens: error: {exc}", file=sys.stderr)
        return 2
    except (FieldlensError, OSError, ValueError) as exc:
        print(f"fieldlens: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
