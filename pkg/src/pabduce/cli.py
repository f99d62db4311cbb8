"""Command-line driver.

    pabduce run --program murder.alp --goal "enter(M,house1), killed(M,woman), enter(M,house2)"
    pabduce gen-bench 4 > bench4.alp
    pabduce count-worlds --bench 4

Exit codes: 0 success, 1 no answer (P(G)=0), 2 search limit hit, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from importlib import resources
from pathlib import Path

from . import engine
from .engine import ResourceExceeded, SearchLimits
from .explain import choice_prob, collect
from .gen import BENCH_GOAL, gen_bench
from .syntax import ParseError, Program, parse_goal, parse_program
from .unify import UnsupportedQuantifier
from .wmc import Manager, NodeBudgetExceeded, compile, formula_of, goal_probability, to_dot

EXIT_OK, EXIT_NO_ANSWER, EXIT_LIMIT, EXIT_INPUT = 0, 1, 2, 3


class InputError(ValueError):
    pass


def fmt_prob(p: float, digits: int = 6) -> str:
    """Round half to even at ``digits`` decimals, from the shortest repr of ``p``."""
    return str(Decimal(repr(p)).quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN))


@dataclass
class QueryReport:
    goal: str
    total_probability: float
    answers: list = field(default_factory=list)
    worlds_found: int = 0
    status: str = "ok"
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {"goal": self.goal, "total_probability": self.total_probability,
                "answers": self.answers, "worlds_found": self.worlds_found,
                "status": self.status}


def load_program(source: str) -> tuple[Program, str]:
    """Parse a program file (or a bundled example by name); returns it with its text."""
    path = Path(source)
    if not path.exists():
        bundled = resources.files("pabduce") / "programs" / f"{Path(source).stem}.alp"
        if not bundled.is_file():
            raise InputError(f"no such program file: {source}")
        text = bundled.read_text()
    else:
        text = path.read_text()
    return parse_program(text), text


def default_goal(text: str) -> str | None:
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("%") and line[1:].strip().startswith("goal:"):
            return line[1:].strip()[len("goal:"):].strip()
    return None


def run_query(program: Program, goal_text: str, limits: SearchLimits = SearchLimits(), *,
              factoring: bool = True, workers: int = 1):
    """Derive, group and weigh; returns ``(report, leaves, explanation set)``."""
    goal = parse_goal(goal_text)
    status = "ok"
    t0 = time.perf_counter()
    try:
        leaves = engine.derive(program, goal, limits, factoring=factoring, workers=workers)
    except ResourceExceeded as exc:
        leaves, status = exc.leaves, f"resource_limit:{exc.limit}"
    K, answers = collect(leaves)
    probs = program.probabilities
    report = QueryReport(goal_text, goal_probability(K, probs), worlds_found=len(leaves),
                         status=status)
    rows = []
    for ans in answers:
        expls = [{"choices": [{"ic": c.ic_id, "theta": c.describe_theta(), "k": c.k} for c in e],
                  "probability": choice_prob(e, probs)} for e in ans.explanations]
        expls.sort(key=lambda r: -r["probability"])
        rows.append({"delta": list(ans.delta), "theta": ans.theta, "explanations": expls,
                     "probability": goal_probability(ans.explanations, probs)})
    # most probable answers first; the stable sort keeps search order among ties
    rows.sort(key=lambda r: -r["probability"])
    report.answers = rows
    report.wall_time = time.perf_counter() - t0
    return report, leaves, K


def _format_choice(c: dict) -> str:
    inner = ",".join(f"{v}/{t}" for v, t in c["theta"].items())
    return f"(ic{c['ic']},{{{inner}}},{c['k']})"


def render_text(report: QueryReport, digits: int, list_explanations: bool) -> str:
    out = [f"goal: {report.goal}"]
    for i, a in enumerate(report.answers, 1):
        theta = ", ".join(f"{v}={t}" for v, t in a["theta"].items()) or "(no bindings)"
        out.append(f"answer {i}: {theta}  P={fmt_prob(a['probability'], digits)}")
        out.append(f"  delta: {{{', '.join(a['delta'])}}}")
        if list_explanations:
            for e in a["explanations"]:
                choices = ", ".join(_format_choice(c) for c in e["choices"])
                out.append(f"  {{{choices}}}  {fmt_prob(e['probability'], digits)}")
    out.append(f"P(G) = {fmt_prob(report.total_probability, digits)}")
    out.append(f"worlds found: {report.worlds_found}")
    out.append(f"status: {report.status}")
    out.append(f"time: {report.wall_time:.3f}s")
    return "\n".join(out) + "\n"


def _limits(args) -> SearchLimits:
    return SearchLimits(args.max_depth, args.max_nodes, args.max_leaves)


def cmd_run(args) -> int:
    program, text = load_program(args.program)
    goal_text = args.goal if args.goal is not None else default_goal(text)
    if goal_text is None:
        raise InputError("no goal given and the program has no '% goal:' line")
    report, leaves, K = run_query(program, goal_text, _limits(args),
                                  factoring=not args.no_factoring, workers=args.parallel)
    if args.json:
        sys.stdout.write(json.dumps(report.to_json(), indent=2) + "\n")
    else:
        sys.stdout.write(render_text(report, args.precision, args.list_explanations))
    if args.dump_bdd:
        f, variables = formula_of(K, program.probabilities)
        mgr, root = compile(f, Manager())
        Path(args.dump_bdd).write_text(to_dot(mgr, root, variables))
    if args.oracle:
        from .oracle import UniverseTooLarge, oracle_probability
        try:
            ref = oracle_probability(program, parse_goal(goal_text), limits=_limits(args),
                                     factoring=not args.no_factoring)
        except UniverseTooLarge as exc:
            print(f"oracle skipped: {exc}", file=sys.stderr)
        else:
            diff = abs(ref - report.total_probability)
            print(f"oracle: P(G) = {fmt_prob(ref, args.precision)}  |diff| = {diff:.3e}",
                  file=sys.stderr)
    if report.status != "ok":
        return EXIT_LIMIT
    return EXIT_OK if leaves else EXIT_NO_ANSWER


def cmd_gen_bench(args) -> int:
    sys.stdout.write(gen_bench(args.n))
    return EXIT_OK


def cmd_count_worlds(args) -> int:
    if args.bench is not None:
        program, goal_text = parse_program(gen_bench(args.bench)), BENCH_GOAL
    else:
        if args.program is None:
            raise InputError("count-worlds needs --program or --bench")
        program, text = load_program(args.program)
        goal_text = args.goal if args.goal is not None else default_goal(text)
        if goal_text is None:
            raise InputError("no goal given and the program has no '% goal:' line")
    try:
        leaves = engine.derive(program, parse_goal(goal_text), _limits(args),
                               factoring=not args.no_factoring, workers=args.parallel)
    except ResourceExceeded as exc:
        print(f"search limit {exc.limit} hit after {len(exc.leaves)} worlds", file=sys.stderr)
        return EXIT_LIMIT
    print(len(leaves))
    return EXIT_OK


def _search_flags(p: argparse.ArgumentParser) -> None:
    d = SearchLimits()
    p.add_argument("--max-depth", type=int, default=d.max_depth)
    p.add_argument("--max-nodes", type=int, default=d.max_nodes)
    p.add_argument("--max-leaves", type=int, default=d.max_leaves)
    p.add_argument("--no-factoring", action="store_true", help="disable the factoring transition")
    p.add_argument("--parallel", type=int, default=1, metavar="N",
                   help="search subtrees in N worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pabduce", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="answer a goal and report its probability")
    run.add_argument("--program", required=True, help="program file or bundled example name")
    run.add_argument("--goal", help="goal conjunction (default: the program's '%% goal:' line)")
    run.add_argument("--json", action="store_true")
    run.add_argument("--list-explanations", action="store_true")
    run.add_argument("--oracle", action="store_true", help="cross-check by world enumeration")
    run.add_argument("--dump-bdd", metavar="FILE", help="write the compiled BDD as DOT")
    run.add_argument("--precision", type=int, default=6, metavar="D")
    _search_flags(run)
    run.set_defaults(func=cmd_run)

    gb = sub.add_parser("gen-bench", help="print the size-n benchmark program")
    gb.add_argument("n", type=int)
    gb.set_defaults(func=cmd_gen_bench)

    cw = sub.add_parser("count-worlds", help="number of successful derivations")
    cw.add_argument("--program")
    cw.add_argument("--goal")
    cw.add_argument("--bench", type=int, metavar="N", help="use the size-N benchmark")
    _search_flags(cw)
    cw.set_defaults(func=cmd_count_worlds)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "precision", 0) < 0:
            raise InputError("--precision must be non-negative")
        return args.func(args)
    except (InputError, ParseError, UnsupportedQuantifier, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NodeBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
