"""Command-line entry point: gen, solve, verify, bench, psro.

Exit status: 0 on success, 1 when `verify` finds a failed condition, 2 on
usage errors and on any `EfgError`.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .bench import GENERATORS, SuiteSpec, run_suite
from .config import LOG_LEVELS, configure_logging, get_settings
from .errors import EfgError
from .game import dump_assessment, dump_game, load_assessment, save_assessment, save_game
from .games import (
    ASSESSMENTS,
    FIXTURES,
    PRESETS,
    GenGoofParams,
    bargain_game,
    gen_goof,
    private_gen_goof,
    random_game,
    resolve_game,
)
from .games.bargain import valuation_pairs
from .psro import MSS_CHOICES, PsroConfig, run_psro, write_epochs
from .solvers import ALGORITHMS, SolveConfig, solve
from .verify import is_pbe

log = logging.getLogger("pbecfr")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2


def _int_list(text: str) -> List[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


# -----------------------------
# Subcommands
# -----------------------------
def cmd_gen(args: argparse.Namespace) -> int:
    if args.kind in ("gengoof", "private-gengoof"):
        params = GenGoofParams(k=args.k, u_max=args.umax, seed=args.seed)
        game = gen_goof(params) if args.kind == "gengoof" else private_gen_goof(params)
    elif args.kind == "bargain":
        params = PRESETS[args.preset](args.seed)
        if not args.explicit:
            data = asdict(params)
            data["valuation_pairs"] = len(valuation_pairs(params))
            data["offers"] = len(params.offers())
            _emit(json.dumps({"bargain": data}, indent=2) + "\n", args.out)
            return EXIT_OK
        game = bargain_game(params)
    elif args.kind == "random":
        game = random_game(args.seed, max_nodes=args.nodes, max_depth=args.depth, zero_sum=args.zero_sum)
    else:
        if args.name not in FIXTURES:
            raise EfgError(f"unknown fixture {args.name!r}, expected one of {sorted(FIXTURES)}")
        game = FIXTURES[args.name]()
        if args.assessment_out:
            make = ASSESSMENTS.get(args.name)
            if make is None:
                raise EfgError(f"fixture {args.name!r} has no reference assessment")
            save_assessment(game, make(game), args.assessment_out)
            log.info("wrote %s", args.assessment_out)

    log.info("generated %s: %d nodes, %d infosets", args.kind, game.num_nodes, len(game.infosets))
    if args.out:
        save_game(game, args.out)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(dump_game(game))
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    game = resolve_game(args.game)
    config = SolveConfig(
        iterations=args.iters,
        seed=args.seed,
        checkpoint_every=args.checkpoint_every,
        algorithm=args.alg,
        progress=args.progress,
    )
    result = solve(game, config)
    if args.log:
        result.log.to_csv(args.log)
        log.info("wrote %s", args.log)
    _emit(dump_assessment(game, result.assessment), args.out)
    final = result.log.final
    log.info("%s T=%d: %s=%.6g", args.alg, args.iters, result.log.metric, final.regret)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    game = resolve_game(args.game)
    assessment = load_assessment(game, args.assessment)
    tol = args.tol if args.tol is not None else get_settings().tol
    report = is_pbe(game, assessment, tol)
    _emit(json.dumps(report.to_json(), indent=2) + "\n", args.out)
    if report.passed:
        log.info("assessment is a PBE within tol %g", tol)
        return EXIT_OK
    for name in report.failures():
        log.error("failed: %s", name)
    if report.agm.certificate is not None:
        log.error("%s", report.agm.certificate)
    return EXIT_VERIFY_FAILED


def cmd_bench(args: argparse.Namespace) -> int:
    suite = SuiteSpec(
        generator=args.generator,
        k=args.k,
        instances=args.instances,
        seed=args.seed,
        iterations=tuple(args.iters),
        u_max=args.umax,
        random_nodes=args.nodes,
    )
    report = run_suite(suite, jobs=args.jobs, progress=args.progress)
    if args.csv:
        report.write_csv(args.csv)
        log.info("wrote %s", args.csv)
    if args.out:
        report.write_json(args.out)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(json.dumps({"version": __version__, "suite": asdict(suite), "summary": report.summary(),
                                     "failures": report.failures}, indent=2) + "\n")
    return EXIT_OK


def cmd_psro(args: argparse.Namespace) -> int:
    game = resolve_game(args.true_game, u_max=args.umax)
    config = PsroConfig(
        true_game=game,
        mss=args.mss,
        growth=args.growth,
        epochs=args.epochs,
        iterations=args.iters,
        seed=args.seed,
        payoffs=args.payoffs,
        temperature=args.temperature,
        progress=args.progress,
    )
    records = run_psro(config)
    if args.log:
        write_epochs(records, args.log)
        log.info("wrote %s", args.log)
    summary = {
        "version": __version__,
        "config": {
            "true_game": args.true_game, "mss": args.mss, "growth": args.growth, "epochs": args.epochs,
            "iterations": args.iters, "seed": args.seed, "payoffs": args.payoffs, "temperature": args.temperature,
        },
        "epochs": [asdict(r) for r in records],
    }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


# -----------------------------
# Parser
# -----------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pbecfr", description="PBE-CFR solver, PBE verifiers, game generators and PSRO")
    ap.add_argument("--version", action="version", version=f"pbecfr {__version__}")
    ap.add_argument("--log-level", choices=sorted(LOG_LEVELS), default=None, help="overrides EFG_LOG")
    sub = ap.add_subparsers(dest="command")

    gen = sub.add_parser("gen", help="generate a game (JSON)")
    gen.add_argument("kind", choices=["gengoof", "private-gengoof", "bargain", "random", "fixture"])
    gen.add_argument("--k", type=int, default=4, help="outcomes per round (GenGoof)")
    gen.add_argument("--umax", type=float, default=10.0, help="per-round reward cap (GenGoof)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--preset", choices=sorted(PRESETS), default="standard", help="bargain preset")
    gen.add_argument("--explicit", action="store_true", help="bargain: export the explicit game tree")
    gen.add_argument("--nodes", type=int, default=200, help="random: node cap")
    gen.add_argument("--depth", type=int, default=6, help="random: depth cap")
    gen.add_argument("--zero-sum", action="store_true", help="random: zero-sum utilities")
    gen.add_argument("--name", default="figure1", help="fixture name")
    gen.add_argument("--assessment-out", default=None, help="fixture: write its reference assessment")
    gen.add_argument("--out", default=None, help="output path (stdout if omitted)")
    gen.set_defaults(func=cmd_gen)

    sv = sub.add_parser("solve", help="run CFR or PBE-CFR")
    sv.add_argument("--game", required=True, help="game JSON path or spec such as gengoof:4:7")
    sv.add_argument("--alg", choices=ALGORITHMS, default="pbe-cfr")
    sv.add_argument("--iters", type=int, default=500)
    sv.add_argument("--seed", type=int, default=0)
    sv.add_argument("--checkpoint-every", type=int, default=None)
    sv.add_argument("--progress", action="store_true")
    sv.add_argument("--out", default=None, help="assessment output path (stdout if omitted)")
    sv.add_argument("--log", default=None, help="checkpoint CSV path")
    sv.set_defaults(func=cmd_solve)

    vf = sub.add_parser("verify", help="check an assessment for PBE")
    vf.add_argument("--game", required=True, help="game JSON path or spec such as fixture:figure1")
    vf.add_argument("--assessment", required=True)
    vf.add_argument("--tol", type=float, default=None, help="defaults to EFG_TOL")
    vf.add_argument("--out", default=None, help="report path (stdout if omitted)")
    vf.set_defaults(func=cmd_verify)

    bn = sub.add_parser("bench", help="time CFR and PBE-CFR over a suite")
    bn.add_argument("--generator", choices=GENERATORS, default="private-gengoof")
    bn.add_argument("--k", type=int, default=3)
    bn.add_argument("--instances", type=int, default=10)
    bn.add_argument("--seed", type=int, default=0)
    bn.add_argument("--iters", type=_int_list, default=[500], help="comma-separated T values")
    bn.add_argument("--umax", type=float, default=10.0)
    bn.add_argument("--nodes", type=int, default=200, help="random generator node cap")
    bn.add_argument("--jobs", type=int, default=1)
    bn.add_argument("--progress", action="store_true")
    bn.add_argument("--out", default=None, help="JSON report path (summary to stdout if omitted)")
    bn.add_argument("--csv", default=None, help="per-row CSV path")
    bn.set_defaults(func=cmd_bench)

    ps = sub.add_parser("psro", help="tree-exploiting PSRO with exact best responses")
    ps.add_argument("--true-game", required=True, help="game spec or JSON path")
    ps.add_argument("--mss", choices=MSS_CHOICES, default="pbe")
    ps.add_argument("--growth", type=int, default=2)
    ps.add_argument("--epochs", type=int, default=30)
    ps.add_argument("--iters", type=int, default=500)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--payoffs", default="exact", help="exact or mc:N")
    ps.add_argument("--temperature", type=float, default=1.0)
    ps.add_argument("--umax", type=float, default=10.0)
    ps.add_argument("--progress", action="store_true")
    ps.add_argument("--log", default=None, help="per-epoch CSV path")
    ps.set_defaults(func=cmd_psro)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        ap.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    if args.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        configure_logging(args.log_level)
        return args.func(args)
    except EfgError as e:
        log.error("%s", e)
        return EXIT_USAGE
    except OSError as e:
        log.error("%s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
