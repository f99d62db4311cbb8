"""Sweep the key-constraint probability q in the murder example.

Prints the husband and unknown-killer masses and locates the q below which
the unknown killer is the more probable answer.
"""

import math
from importlib import resources

from pabduce import choice_prob, collect, derive, parse_goal, parse_program

GOAL = "enter(M,house1), killed(M,woman), enter(M,house2)"
TEXT = (resources.files("pabduce") / "programs" / "murder.alp").read_text()


def masses(q):
    program = parse_program(TEXT.replace("0.7 ::", f"{q!r} ::"))
    _, answers = collect(derive(program, parse_goal(GOAL)))
    probs = program.probabilities
    out = {bool(a.theta): sum(choice_prob(e, probs) for e in a.explanations) for a in answers}
    return out[True], out[False]


def main():
    print(f"{'q':>6} {'husband':>9} {'unknown':>9}")
    for q in [0.1, 0.2, 0.25, 0.29, 0.292, 0.294, 0.3, 0.5, 0.7, 0.9]:
        h, u = masses(q)
        print(f"{q:>6} {h:>9.6f} {u:>9.6f}{'  <- unknown wins' if h < u else ''}")
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        h, u = masses(mid)
        lo, hi = (mid, hi) if h < u else (lo, mid)
    print(f"crossover q = {lo:.9f}   (1 - sqrt(2)/2 = {1 - math.sqrt(2) / 2:.9f})")


if __name__ == "__main__":
    main()
