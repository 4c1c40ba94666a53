"""``heg`` command line: solve, check, generate, oracle and verify-paper.

Exit codes: 0 success / property holds, 1 usage error, 2 capability error,
3 property does not hold (or an acceptance criterion failed).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import acceptance
from . import algorithms as alg
from . import generators as gen
from . import io
from .config import Config
from .core import Instance
from .errors import CapabilityError, HegError, InvalidArgumentError
from .hgcrp import psi_maximal_partition
from .stability import check

EXIT_OK, EXIT_USAGE, EXIT_CAPABILITY, EXIT_FAILS = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_options(defaults: bool) -> argparse.ArgumentParser:
    # Subcommands re-declare the globals with suppressed defaults so that the
    # flags work on either side of the subcommand name.
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = _Parser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--subset-budget", type=int, default=d(Config.subset_budget))
    g.add_argument("--partition-limit", type=int, default=d(Config.partition_limit))
    g.add_argument("--epsilon", type=float, default=d(Config.epsilon))
    g.add_argument("--seed", type=int, default=d(0))
    g.add_argument("--json", action="store_true", default=d(False),
                   help="machine-readable reports")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="heg", parents=[_global_options(True)],
                     description="Hedonic expertise game solvers and oracles.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _global_options(False)

    solve = sub.add_parser("solve", parents=[common], help="compute a partition")
    solve.add_argument("--method", required=True,
                       choices=["greedy-core", "brd", "cis", "brute-optimal"])
    solve.add_argument("--instance", required=True)
    solve.add_argument("--trace", help="write the move trace JSON here")

    chk = sub.add_parser("check", parents=[common], help="test a stability property")
    chk.add_argument("--property", required=True,
                     choices=["ns", "cis", "core", "approx-core", "perfect", "so", "po"])
    chk.add_argument("--alpha", type=float)
    chk.add_argument("--instance", required=True)
    chk.add_argument("--partition", required=True)

    gen_p = sub.add_parser("generate", parents=[common], help="build an instance")
    gen_p.add_argument("--from", dest="source", required=True,
                       choices=["max-coverage", "set-cover", "hvcg", "random"])
    gen_p.add_argument("--spec", help="SetSystem, graph or random-parameter JSON")

    orc = sub.add_parser("oracle", parents=[common], help="exact brute-force oracles")
    orc.add_argument("--problem", required=True, choices=["max-joint-utility"])
    orc.add_argument("--instance", required=True)
    orc.add_argument("--pool", help="comma-separated agent ids (default: all agents)")

    sub.add_parser("verify-paper", parents=[common], help="run the acceptance suite")
    return parser


def _config(args) -> Config:
    return Config(subset_budget=args.subset_budget, partition_limit=args.partition_limit,
                  epsilon=args.epsilon)


def _emit(obj) -> None:
    sys.stdout.write(io.dumps(obj) + "\n")


def _solve(args, cfg) -> int:
    game = io.game_from_json(io.load_json(args.instance))
    trace = alg.MoveTrace(seed=args.seed)
    if args.method == "brute-optimal":
        p = psi_maximal_partition(game, config=cfg)
    elif not isinstance(game, Instance):
        raise InvalidArgumentError(f"method {args.method!r} needs an HEG instance")
    elif args.method == "greedy-core":
        p = alg.greedy_core_partition(game)
    elif args.method == "brd":
        p0 = alg.initial_block_partition(game, args.seed)
        p, trace = alg.imitative_brd(game, p0, seed=args.seed, config=cfg)
    else:
        p, trace = alg.cis_algorithm(game, args.seed, config=cfg)
    _emit(io.partition_to_json(p, game))
    if args.trace:
        Path(args.trace).write_text(io.dumps(trace.to_dict()) + "\n")
    return EXIT_OK


def _check(args, cfg) -> int:
    game = io.game_from_json(io.load_json(args.instance))
    p = io.partition_from_json(io.load_json(args.partition), game)
    report = check(game, p, args.property, alpha=args.alpha, config=cfg)
    _emit(report.to_dict())
    return EXIT_OK if report.holds else EXIT_FAILS


def _generate(args, cfg) -> int:
    spec = io.load_json(args.spec) if args.spec else None
    if args.source == "random":
        params = dict(spec or {})
        unknown = set(params) - {"n", "skills", "kappa", "beta", "density", "seed"}
        if unknown:
            raise InvalidArgumentError(f"unknown random parameters: {sorted(unknown)}")
        params["seed"] = args.seed
        params.setdefault("n", 6)
        params.setdefault("skills", 3)
        params.setdefault("kappa", min(3, params["n"]))
        inst = gen.random_instance(params.pop("n"), params.pop("skills"), params.pop("kappa"),
                                   **params)
    elif spec is None:
        raise InvalidArgumentError(f"--from {args.source} needs --spec")
    elif args.source == "hvcg":
        inst = gen.from_graph(io.graph_from_json(spec))
    else:
        ss = io.set_system_from_json(spec)
        inst = gen.from_max_coverage(ss) if args.source == "max-coverage" else gen.from_set_cover(ss)
    _emit(io.instance_to_json(inst))
    return EXIT_OK


def _oracle(args, cfg) -> int:
    game = io.game_from_json(io.load_json(args.instance))
    if not isinstance(game, Instance):
        raise InvalidArgumentError("max-joint-utility needs an HEG instance")
    pool = [a.strip() for a in args.pool.split(",") if a.strip()] if args.pool else None
    c = alg.brute_force_max_joint_utility(game, pool, config=cfg)
    _emit({"coalition": game.ids(c), "utility": game.utility(c)})
    return EXIT_OK


def _verify(args, cfg) -> int:
    echo = None if args.json else print
    results = acceptance.run_all(cfg, echo=echo)
    if args.json:
        _emit([r.to_dict() for r in results])
    return EXIT_FAILS if any(r.status == "fail" for r in results) else EXIT_OK


COMMANDS = {"solve": _solve, "check": _check, "generate": _generate,
            "oracle": _oracle, "verify-paper": _verify}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except CapabilityError as exc:
        print(f"heg: capability limit: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (HegError, OSError, KeyError, TypeError, ValueError) as exc:
        print(f"heg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> None:
    sys.exit(run(argv))
