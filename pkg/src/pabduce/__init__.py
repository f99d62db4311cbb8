"""Exact inference for abductive logic programs with probabilistic integrity constraints."""

from .engine import ResourceExceeded, SearchLimits, derive
from .explain import AtomicChoice, Explanation, ExplanationSet, choice_prob, collect
from .syntax import ParseError, parse_goal, parse_program
from .wmc import goal_probability

__all__ = [
    "parse_program", "parse_goal", "ParseError", "derive", "SearchLimits", "ResourceExceeded",
    "collect", "choice_prob", "goal_probability", "AtomicChoice", "Explanation",
    "ExplanationSet", "solve",
]


def solve(program_text: str, goal_text: str, **kw) -> tuple[float, list]:
    """P(G) and the answers of ``goal_text`` against ``program_text``."""
    program = parse_program(program_text)
    leaves = derive(program, parse_goal(goal_text), **kw)
    K, answers = collect(leaves)
    return goal_probability(K, program.probabilities), answers
