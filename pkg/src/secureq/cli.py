"""Command-line front end.

Exit codes: 0 for a positive answer, 1 for a negative one, 2 for errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .errors import NoWitness, ParseError, SolverError
from .gamefile import dump_witness, load_witness, parse_game_file, player_expression
from .oracle import enumerate_bounded_se, verify_se
from .secure_eq import Constraint, build_witness, compute_a_v, compute_se_v
from .zero_sum import coalition_region

YES, NO, ERROR = 0, 1, 2


def _fmt(arena, states) -> str:
    return "{" + ",".join(str(s) for s in arena.sort(states)) + "}"


def _coalition(text: str) -> frozenset:
    text = text.strip()
    if not text:
        return frozenset()
    try:
        return frozenset(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"coalition must look like 1,2 not {text!r}") from None


def _constraint(text: str) -> Constraint:
    try:
        return Constraint.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Report:
    """Collects the answer and prints it as text or JSON."""

    def __init__(self, fmt, out):
        self.fmt = fmt
        self.out = out
        self.doc = {"answer": None, "region": None, "timings": {}}
        self.lines = []
        self._t = time.perf_counter()

    def lap(self, name):
        now = time.perf_counter()
        self.doc["timings"][name] = round(now - self._t, 6)
        self._t = now

    def say(self, line):
        self.lines.append(line)

    def finish(self, answer, region=None, arena=None, **extra):
        self.doc["answer"] = answer
        if region is not None:
            self.doc["region"] = [str(s) for s in arena.sort(region)]
        self.doc.update(extra)
        if self.fmt == "json":
            print(json.dumps(self.doc, sort_keys=True), file=self.out)
        else:
            for line in self.lines:
                print(line, file=self.out)


def _validate(args, rep):
    arena, objectives = parse_game_file(args.file)
    rep.lap("parse")
    rep.say(f"ok: {len(arena)} states, {len(arena.edges)} edges, {arena.n} players")
    rep.finish("valid")
    return YES


def _check_players(arena, coalition):
    bad = sorted(p for p in coalition if not 1 <= p <= arena.n)
    if bad:
        raise SolverError(f"coalition mentions player {bad[0]}; players are 1..{arena.n}")


def _region(args, rep):
    arena, objectives = parse_game_file(args.file)
    _check_players(arena, args.coalition)
    e = player_expression(args.objective, objectives)
    rep.lap("parse")
    region = coalition_region(arena, args.coalition, e, route=args.route)
    rep.lap("solve")
    rep.say(_fmt(arena, region))
    rep.finish(_fmt(arena, region), region, arena, provenance=region.provenance)
    return YES


def _game_and_constraint(args):
    arena, objectives = parse_game_file(args.file)
    if args.constraint.n != arena.n:
        raise SolverError(f"constraint {args.constraint} has {args.constraint.n} bits, arena has {arena.n} players")
    if args.state not in arena:
        raise SolverError(f"unknown state {args.state!r}")
    return arena, objectives


def _se_exists(args, rep):
    arena, objectives = _game_and_constraint(args)
    rep.lap("parse")
    a_v = compute_a_v(arena, objectives, args.constraint)
    rep.lap("A_v")
    se = compute_se_v(arena, objectives, args.constraint, a_v=a_v)
    rep.lap("SE_v")
    answer = args.state in se
    rep.say("yes" if answer else "no")
    rep.say(f"A_v = {_fmt(arena, a_v)}")
    rep.say(f"SE_v = {_fmt(arena, se)}")
    rep.finish("yes" if answer else "no", se, arena, A_v=[str(s) for s in arena.sort(a_v)])
    return YES if answer else NO


def _witness(args, rep):
    arena, objectives = _game_and_constraint(args)
    rep.lap("parse")
    try:
        profile = build_witness(arena, objectives, args.state, args.constraint)
    except NoWitness as exc:
        rep.lap("build")
        rep.say(f"no: {exc}")
        rep.finish("no")
        return NO
    rep.lap("build")
    Path(args.out).write_text(dump_witness(profile, args.state))
    lasso = profile.metadata["cooperation_lasso"]
    rep.say(f"witness written to {args.out}")
    rep.say(f"cooperation: stem {lasso['stem']} cycle {lasso['cycle']}")
    rep.say("memory per player: " + ", ".join(str(len(st.memory)) for st in profile.strategies))
    rep.finish("yes", out=str(args.out))
    return YES


def _verify(args, rep):
    arena, objectives = parse_game_file(args.file)
    if args.state not in arena:
        raise SolverError(f"unknown state {args.state!r}")
    path = Path(args.witness)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(None, exc.strerror or str(exc), str(path)) from None
    profile = load_witness(text, arena, str(path))
    rep.lap("parse")
    report = verify_se(arena, objectives, profile, args.state)
    rep.lap("verify")
    if report is None:
        rep.say("secure")
        rep.finish("secure")
        return YES
    achievable = "".join(map(str, report.achievable))
    rep.say(f"not secure: player {report.player} can reach payoff {achievable}")
    rep.say(f"deviation play: stem {list(report.play.stem)} cycle {list(report.play.cycle)}")
    rep.finish("deviation", player=report.player, achievable=achievable)
    return NO


def _oracle(args, rep):
    arena, objectives = _game_and_constraint(args)
    rep.lap("parse")
    profile = enumerate_bounded_se(arena, objectives, args.state, args.constraint, args.memory_bound)
    rep.lap("search")
    if profile is not None:
        rep.say(f"found witness with memory bound {args.memory_bound}")
        rep.finish("found")
        return YES
    rep.say(f"none within bound {args.memory_bound} (evidence, not proof, of a negative answer)")
    rep.finish("none within bound")
    return NO


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="game file (JSON)")
    common.add_argument("--format", choices=("text", "json"), default="text")

    query = argparse.ArgumentParser(add_help=False)
    query.add_argument("--state", required=True)
    query.add_argument("--constraint", required=True, type=_constraint,
                       help="payoff bitstring, player 1 leftmost")

    parser = argparse.ArgumentParser(prog="secureq", description="Secure equilibria in multi-player games on graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a game file")
    p.set_defaults(func=_validate)

    p = sub.add_parser("region", parents=[common], help="winning region of a coalition")
    p.add_argument("--coalition", required=True, type=_coalition, help="players, e.g. 1,2")
    p.add_argument("--objective", required=True, help="expression over p1..pn with !, &, |")
    p.add_argument("--route", default="auto", choices=("auto", "streett", "rabin", "muller", "lar"))
    p.set_defaults(func=_region)

    p = sub.add_parser("se-exists", parents=[common, query], help="decide a constrained secure equilibrium")
    p.set_defaults(func=_se_exists)

    p = sub.add_parser("witness", parents=[common, query], help="build a secure equilibrium")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_witness)

    p = sub.add_parser("verify", parents=[common], help="check a witness file")
    p.add_argument("--witness", required=True)
    p.add_argument("--state", required=True)
    p.set_defaults(func=_verify)

    p = sub.add_parser("oracle", parents=[common, query], help="bounded-memory brute-force search")
    p.add_argument("--memory-bound", type=int, default=2)
    p.set_defaults(func=_oracle)
    return parser


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ERROR if exc.code else YES
    rep = _Report(args.format, out)
    try:
        return args.func(args, rep)
    except (SolverError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
