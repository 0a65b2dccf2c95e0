from __future__ import annotations

import argparse
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from invgame.runner import generate_demo, run_scenario, verify


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invgame", description="Forward and inverse LQ differential games.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every iteration")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one or more scenario files")
    run.add_argument("scenarios", nargs="+", type=Path)
    run.add_argument("--out", type=Path, default=Path("results"), help="artifact directory (default: results)")
    run.add_argument("--seed", type=int, default=None, help="override the scenario noise seed")
    run.add_argument("--jobs", type=int, default=1, help="scenarios to run concurrently")
    run.add_argument("--trace-every", type=int, default=1, help="write every K-th trace row")

    demo = commands.add_parser("demo", help="solve a scenario's demonstrated game and write its trajectory")
    demo.add_argument("scenario", type=Path)
    demo.add_argument("--out", type=Path, default=Path("results"))
    demo.add_argument("--seed", type=int, default=None)

    check = commands.add_parser("verify", help="check that gains are an equilibrium of a game")
    check.add_argument("game", type=Path, help="game report or scenario JSON")
    check.add_argument("feedback", type=Path, help="JSON holding F (or F_star)")
    check.add_argument("--out", type=Path, default=Path("results"))
    check.add_argument("--tol", type=float, default=1e-8)
    return parser


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _run_many(paths: Sequence[Path], args: argparse.Namespace) -> int:
    if args.trace_every < 1:
        logging.getLogger(__name__).error("--trace-every must be at least 1")
        return 1
    options = dict(out_dir=args.out, seed=args.seed, trace_every=args.trace_every)
    if args.jobs <= 1 or len(paths) == 1:
        codes: List[int] = [run_scenario(path, **options) for path in paths]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(run_scenario, path, **options) for path in paths]
            codes = [future.result() for future in futures]
    return max(codes)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse the command line and dispatch to the runner."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    if args.command == "run":
        return _run_many(args.scenarios, args)
    if args.command == "demo":
        return generate_demo(args.scenario, out_dir=args.out, seed=args.seed)
    return verify(args.game, args.feedback, out_dir=args.out, tol=args.tol)


if __name__ == "__main__":
    raise SystemExit(main())
