"""Reduced ordered BDDs and exact probability of an explanation set.

Nodes are integers owned by a :class:`Manager`: ``0`` and ``1`` are the
terminals, every other id names a hash-consed ``(level, hi, lo)`` triple.
Because of hash-consing two logically equal functions built in the same
manager get the same id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .explain import ExplanationSet

__all__ = [
    "BoolVar", "DnfFormula", "Manager", "NodeBudgetExceeded", "formula_of", "compile",
    "prob", "goal_probability", "to_dot",
]


class NodeBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class BoolVar:
    index: int
    ic_id: int
    theta: tuple
    prob: float

    @property
    def label(self) -> str:
        inner = ",".join(f"{n}/{t}" for n, t in self.theta)
        return f"X{self.ic_id}{{{inner}}}"


@dataclass(frozen=True)
class DnfFormula:
    """Disjunction of cubes; a cube is a tuple of signed 1-based variable indices."""

    cubes: tuple[tuple[int, ...], ...]
    nvars: int

    def __post_init__(self):
        for cube in self.cubes:
            if any(-lit in cube for lit in cube):
                raise ValueError(f"cube {cube} contains a variable with both signs")

    def evaluate(self, assignment: Sequence[bool]) -> bool:
        """``assignment[i]`` is the value of variable ``i + 1``."""
        return any(all(assignment[abs(l) - 1] == (l > 0) for l in cube) for cube in self.cubes)


class Manager:
    def __init__(self, max_nodes: int | None = None):
        self.level: list[int] = [1 << 62, 1 << 62]
        self.hi: list[int] = [0, 1]
        self.lo: list[int] = [0, 1]
        self.unique: dict[tuple[int, int, int], int] = {}
        self.cache: dict[tuple, int] = {}
        self.max_nodes = max_nodes

    def __len__(self):
        return len(self.level)

    def mk(self, level: int, hi: int, lo: int) -> int:
        if hi == lo:
            return hi
        key = (level, hi, lo)
        node = self.unique.get(key)
        if node is None:
            if self.max_nodes is not None and len(self.level) >= self.max_nodes:
                raise NodeBudgetExceeded(f"BDD exceeded {self.max_nodes} nodes")
            node = len(self.level)
            self.level.append(level)
            self.hi.append(hi)
            self.lo.append(lo)
            self.unique[key] = node
        return node

    def var(self, level: int, positive: bool = True) -> int:
        return self.mk(level, 1, 0) if positive else self.mk(level, 0, 1)

    def apply(self, op: str, f: int, g: int) -> int:
        """Binary ``and``/``or`` by Shannon expansion on the top variable, memoized."""
        if op == "and":
            if f == 0 or g == 0:
                return 0
            if f == 1:
                return g
            if g == 1 or f == g:
                return f
        else:
            if f == 1 or g == 1:
                return 1
            if f == 0:
                return g
            if g == 0 or f == g:
                return f
        if f > g:
            f, g = g, f
        key = (op, f, g)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        lf, lg = self.level[f], self.level[g]
        top = min(lf, lg)
        f1, f0 = (self.hi[f], self.lo[f]) if lf == top else (f, f)
        g1, g0 = (self.hi[g], self.lo[g]) if lg == top else (g, g)
        out = self.mk(top, self.apply(op, f1, g1), self.apply(op, f0, g0))
        self.cache[key] = out
        return out

    def negate(self, f: int) -> int:
        if f < 2:
            return 1 - f
        key = ("not", f, f)
        hit = self.cache.get(key)
        if hit is None:
            hit = self.mk(self.level[f], self.negate(self.hi[f]), self.negate(self.lo[f]))
            self.cache[key] = hit
        return hit

    def cube(self, lits: Iterable[int]) -> int:
        """Conjunction of signed 1-based literals, built bottom-up."""
        node = 1
        for lit in sorted(lits, key=abs, reverse=True):
            node = self.mk(abs(lit), node if lit > 0 else 0, 0 if lit > 0 else node)
        return node

    def size(self, root: int) -> int:
        seen, stack = set(), [root]
        while stack:
            n = stack.pop()
            if n < 2 or n in seen:
                continue
            seen.add(n)
            stack += [self.hi[n], self.lo[n]]
        return len(seen)


def formula_of(K: ExplanationSet | Iterable, probs: dict[int, float]) -> tuple[DnfFormula, list[BoolVar]]:
    """One cube per explanation; variables numbered by first appearance in sorted order."""
    explanations = sorted(K, key=lambda e: e.sort_key)
    index: dict[tuple, int] = {}
    variables: list[BoolVar] = []
    cubes = []
    for e in explanations:
        cube = []
        for c in e.sorted():
            i = index.get(c.instance_id)
            if i is None:
                i = index[c.instance_id] = len(variables) + 1
                variables.append(BoolVar(i, c.ic_id, c.theta, probs[c.ic_id]))
            cube.append(i if c.k else -i)
        cubes.append(tuple(cube))
    return DnfFormula(tuple(cubes), len(variables)), variables


def compile(f: DnfFormula, manager: Manager | None = None) -> tuple[Manager, int]:
    """OR of the cube BDDs; returns the manager and the root id."""
    mgr = manager if manager is not None else Manager()
    root = 0
    for cube in f.cubes:
        root = mgr.apply("or", root, mgr.cube(cube))
    return mgr, root


def prob(manager: Manager, root: int, probs: Sequence[float]) -> float:
    """Probability that the function rooted at ``root`` is true.

    ``probs[i - 1]`` is the probability of variable ``i``.  Each internal
    node is evaluated once (memo table ``pmap``).
    """
    pmap: dict[int, float] = {0: 0.0, 1: 1.0}
    # iterative post-order so deep diagrams do not hit the recursion limit
    stack = [root]
    while stack:
        n = stack[-1]
        if n in pmap:
            stack.pop()
            continue
        hi, lo = manager.hi[n], manager.lo[n]
        if hi not in pmap or lo not in pmap:
            stack += [c for c in (hi, lo) if c not in pmap]
            continue
        stack.pop()
        p = probs[manager.level[n] - 1]
        pmap[n] = p * pmap[hi] + (1.0 - p) * pmap[lo]
    return pmap[root]


def goal_probability(K: ExplanationSet | Iterable, probs: dict[int, float],
                     max_nodes: int | None = None) -> float:
    f, variables = formula_of(K, probs)
    mgr, root = compile(f, Manager(max_nodes))
    return prob(mgr, root, [v.prob for v in variables])


def to_dot(manager: Manager, root: int, variables: Sequence[BoolVar] | None = None) -> str:
    """Graphviz rendering: solid edges to the 1-child, dashed to the 0-child."""
    lines = ["digraph bdd {", '  node [shape=box]; t1 [label="1"]; t0 [label="0"];',
             "  node [shape=ellipse];"]
    seen, stack = set(), [root]

    def name(n):
        return f"t{n}" if n < 2 else f"n{n}"

    while stack:
        n = stack.pop()
        if n < 2 or n in seen:
            continue
        seen.add(n)
        lv = manager.level[n]
        label = variables[lv - 1].label if variables else f"x{lv}"
        label = label.replace('"', '\\"')
        lines.append(f'  n{n} [label="{label}"];')
        lines.append(f"  n{n} -> {name(manager.hi[n])};")
        lines.append(f"  n{n} -> {name(manager.lo[n])} [style=dashed];")
        stack += [manager.hi[n], manager.lo[n]]
    if root < 2:
        lines.append(f"  root -> t{root};")
    lines.append("}")
    return "\n".join(lines) + "\n"
