"""Acceptance checks; the summary prints one pass/fail line per criterion."""

import math
import random
import time
from functools import lru_cache

import pytest

from pabduce.engine import derive, discover_instances
from pabduce.explain import choice_prob, collect
from pabduce.gen import BENCH_GOAL, gen_bench, random_program
from pabduce.ground import brute_force_probability, leaf_violations
from pabduce.oracle import enumerate_worlds, oracle_probability, total_world_mass
from pabduce.syntax import Struct, Var, parse_goal, parse_program
from pabduce.unify import mgu, solve_eq, subst
from pabduce.wmc import DnfFormula, compile, goal_probability, prob

from conftest import MURDER_GOAL, murder_program

BENCH_COUNTS = {1: 5, 2: 17, 3: 53, 4: 161, 5: 485, 6: 1457, 7: 4373, 8: 13121}
N_RANDOM = 200


def weigh(program, goal):
    leaves = derive(program, goal)
    K, answers = collect(leaves)
    probs = program.probabilities
    return leaves, goal_probability(K, probs), answers


@lru_cache(maxsize=None)
def bench(n):
    program, goal = parse_program(gen_bench(n)), parse_goal(BENCH_GOAL)
    return program, goal, derive(program, goal)


@lru_cache(maxsize=None)
def random_corpus():
    """Seeds in order until N_RANDOM programs with 0 < P(G) < 1; every drawn program is kept."""
    out, informative, seed = [], 0, 0
    while informative < N_RANDOM:
        text, goal_text = random_program(seed)
        program, goal = parse_program(text), parse_goal(goal_text)
        ref = brute_force_probability(program, goal)
        out.append((seed, program, goal, ref))
        informative += 0 < ref < 1
        seed += 1
    return out


# -- 1 ------------------------------------------------------------------------

@pytest.mark.criterion(1, "murder: two answers 0.91 / 0.09, explanations 0.49/0.21/0.21/0.09, < 1 s")
def test_murder(murder):
    program, goal = murder
    t0 = time.perf_counter()
    leaves, total, answers = weigh(program, goal)
    elapsed = time.perf_counter() - t0
    probs = program.probabilities
    assert len(answers) == 2
    by_binding = {tuple(sorted(a.theta.items())): a for a in answers}
    husband = by_binding[(("M", "husband"),)]
    unknown = by_binding[()]
    assert goal_probability(husband.explanations, probs) == pytest.approx(0.91, abs=1e-9)
    assert goal_probability(unknown.explanations, probs) == pytest.approx(0.09, abs=1e-9)
    per = sorted((choice_prob(e, probs) for a in answers for e in a.explanations), reverse=True)
    assert per == pytest.approx([0.49, 0.21, 0.21, 0.09], abs=1e-9)
    # the unknown killer keeps M unbound in the abduced atoms
    assert all("M" in atom for atom in unknown.delta)
    assert elapsed < 1.0


# -- 2 ------------------------------------------------------------------------

@pytest.mark.criterion(2, "murder threshold: husband mass < unknown-killer mass flips between q=0.292 and 0.294")
def test_threshold_flip():
    goal = parse_goal(MURDER_GOAL)
    verdict = {}
    for q in (0.292, 0.294):
        program = murder_program(q)
        _, _, answers = weigh(program, goal)
        probs = program.probabilities
        mass = {bool(a.theta): sum(choice_prob(e, probs) for e in a.explanations) for a in answers}
        verdict[q] = mass[True] < mass[False] - 1e-9
        assert mass[True] + mass[False] == pytest.approx(1.0, abs=1e-9)
        assert mass[False] == pytest.approx((1 - q) ** 2, abs=1e-9)
    assert verdict == {0.292: True, 0.294: False}
    assert 0.292 < 1 - math.sqrt(2) / 2 < 0.294


# -- 3 ------------------------------------------------------------------------

@pytest.mark.criterion(3, "power grid: P(G)=0.199695, 1600 worlds, top explanations 0.1 for down(pp) and down(w1), < 10 s")
def test_power_grid(power):
    program, goal = power
    t0 = time.perf_counter()
    leaves, total, answers = weigh(program, goal)
    elapsed = time.perf_counter() - t0
    probs = program.probabilities
    assert total == pytest.approx(0.199695, abs=5e-7)
    assert len(leaves) == 1600
    ranked = sorted(((choice_prob(e, probs), a.delta) for a in answers for e in a.explanations),
                    key=lambda t: -t[0])
    (p1, d1), (p2, d2), (p3, _) = ranked[:3]
    assert p1 == pytest.approx(0.1, abs=1e-9) and p2 == pytest.approx(0.1, abs=1e-9)
    assert p3 < 0.1 - 1e-9
    assert {d1, d2} == {("down(pp)",), ("down(w1)",)}
    assert elapsed < 10.0


# -- 4 ------------------------------------------------------------------------

@pytest.mark.criterion(4, "benchmark world counts n=1..8 (5, 17, 53, 161, 485, 1457, 4373, 13121)")
@pytest.mark.parametrize("n", sorted(BENCH_COUNTS))
def test_bench_counts(n):
    _, _, leaves = bench(n)
    assert len(leaves) == BENCH_COUNTS[n] == 2 * 3 ** n - 1


# -- 5 ------------------------------------------------------------------------

@pytest.mark.criterion(5, f"engine vs brute-force oracle on >= {N_RANDOM} random programs, |diff| <= 1e-9")
def test_random_programs_match_oracle():
    corpus = random_corpus()
    informative = 0
    for seed, program, goal, ref in corpus:
        assert len(program.pics) <= 6 and len(program.kb) <= 4 and len(program.constants()) <= 3
        leaves, total, _ = weigh(program, goal)
        assert abs(total - ref) <= 1e-9, f"seed {seed}: engine {total} vs brute force {ref}"
        assert abs(oracle_probability(program, goal) - ref) <= 1e-9, f"seed {seed}: world oracle"
        informative += 0 < ref < 1
    assert informative >= N_RANDOM


# -- 6 ------------------------------------------------------------------------

@pytest.mark.criterion(6, "world probabilities sum to 1 +- 1e-9 for every program of criteria 1-5")
def test_world_mass(murder, power):
    programs = [murder, power] + [(murder_program(q), parse_goal(MURDER_GOAL)) for q in (0.292, 0.294)]
    programs += [(p, g) for _, p, g, _ in random_corpus()]
    for program, goal in programs:
        worlds = enumerate_worlds(program, goal, entailment=False)
        assert abs(sum(p for _, p, _ in worlds) - 1.0) <= 1e-9
    for n in sorted(BENCH_COUNTS):
        program, goal, _ = bench(n)
        universe = discover_instances(program, goal)
        assert len(universe) == 3 * n
        mass = total_world_mass(program.pic(ic_id).prob for ic_id, _ in universe)
        assert abs(mass - 1.0) <= 1e-9


# -- 7 ------------------------------------------------------------------------

@pytest.mark.criterion(7, "BDD: 1000 random DNFs (<= 12 vars) match truth tables within 1e-12; (X11 & X21) | (X12 & X21) at 0.5 = 0.375")
def test_bdd_probability():
    import itertools
    rng = random.Random(1)
    for _ in range(1000):
        n = rng.randint(1, 12)
        cubes = []
        for _ in range(rng.randint(0, 6)):
            chosen = rng.sample(range(1, n + 1), rng.randint(0, min(4, n)))
            cubes.append(tuple(v if rng.random() < 0.5 else -v for v in chosen))
        f = DnfFormula(tuple(cubes), n)
        probs = [rng.random() for _ in range(n)]
        expected = 0.0
        for bits in itertools.product((False, True), repeat=n):
            if f.evaluate(bits):
                expected += math.prod(p if b else 1 - p for b, p in zip(bits, probs))
        mgr, root = compile(f)
        assert abs(prob(mgr, root, probs) - expected) <= 1e-12
    mgr, root = compile(DnfFormula(((1, 3), (2, 3)), 3))
    assert mgr.size(root) == 3
    assert prob(mgr, root, [0.5] * 3) == pytest.approx(0.375, abs=1e-12)


# -- 8 ------------------------------------------------------------------------

@pytest.mark.criterion(8, "equality rewriting rules and substitution idempotence")
def test_unification_rules():
    a, b = Struct("a"), Struct("b")
    X, Y = Var(-1, "X"), Var(-2, "Y")
    U = Var(-3, "U", universal=True)
    f = lambda *t: Struct("f", t)  # noqa: E731
    assert solve_eq(X, X) == {}                             # identity
    assert solve_eq(f(a), X) == {X: f(a)}                   # reorientation
    assert solve_eq(X, U) == {U: X}                         # universal bound first
    assert len(solve_eq(X, Y)) == 1                         # existential pair
    assert solve_eq(X, f(X)) is None                        # occurs check
    assert solve_eq(f(X, Y), f(a, b)) == {X: a, Y: b}       # decomposition
    assert solve_eq(f(X), Struct("g", (X,))) is None        # functor clash
    assert solve_eq(f(X), f(X, Y)) is None                  # arity clash
    rng = random.Random(3)
    pool = [a, b, X, Y, U]
    for _ in range(2000):
        def term(depth):
            if depth == 0 or rng.random() < 0.4:
                return rng.choice(pool)
            return Struct(rng.choice("fg"), tuple(term(depth - 1) for _ in range(rng.randint(1, 2))))
        s, t = term(3), term(3)
        m = mgu(s, t)
        if m is not None:
            assert all(subst(v, m) == v for v in m.values())
            assert subst(s, m) == subst(t, m)


# -- 9 ------------------------------------------------------------------------

@pytest.mark.criterion(9, "explanations consistent and monotone on every node; no leaf violates a constraint")
def test_soundness_invariants(murder, power):
    cases = [murder, power, *[bench(n)[:2] for n in (1, 2, 3)]]
    cases += [(p, g) for _, p, g, _ in random_corpus()[:300]]
    for program, goal in cases:
        for leaf in derive(program, goal, check=True):
            assert leaf_violations(program, leaf) == []
