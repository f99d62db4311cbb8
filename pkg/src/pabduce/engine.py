"""Depth-first proof procedure for programs with probabilistic integrity constraints.

A derivation node holds the resolvent, the abduced atoms, the active
constraints, the explanation built so far, the answer bindings and the
disequality store.  ``step`` picks the first applicable transition in the
order

    simplification > equality rewriting > case analysis > unfolding in a
    constraint > propagation > probabilistic equivalence > unfolding in the
    resolvent > factoring

(leftmost-oldest operand first within a tier) and returns the children.
A node where nothing applies is a success leaf.

The resolvent is worked left to right as in SLD resolution: clause bodies
are pushed on the front, fired constraint heads are queued at the back, and
an abducible is moved into the abduced set only once it is the leftmost
literal.  Instance keys are frozen when a constraint is discharged, so this
order decides how much of an instance is known at that point.

Variables of constraints are universal and local to each constraint
instance; equations binding them are solved inside the constraint.  Only
existential bindings are applied to the whole node.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import syntax
from .explain import AtomicChoice, Explanation, canonical_key
from .syntax import (FALSE, TRUE, Goal, IntegrityConstraint, Program, Struct, Var,
                     rename_apart, term_vars)
from .unify import (EMPTY_STORE, DisequalityStore, UnsupportedQuantifier, _normal, apply,
                    has_universal, mgu, solve_neq, subst)

__all__ = [
    "SearchLimits", "SuccessLeaf", "ResourceExceeded", "Node", "derive", "entails",
    "discover_instances", "initial_node", "step", "instance_key",
]

_uids = itertools.count(1)


@dataclass(frozen=True)
class SearchLimits:
    max_depth: int = 10_000
    max_nodes: int = 10_000_000
    max_leaves: int = 1_000_000

    def __post_init__(self):
        if min(self.max_depth, self.max_nodes, self.max_leaves) <= 0:
            raise ValueError("search limits must be positive")


class ResourceExceeded(RuntimeError):
    """A search limit tripped; ``leaves`` is the partial (non-covering) result."""

    def __init__(self, limit: str, leaves: list):
        super().__init__(f"search limit {limit} exceeded after {len(leaves)} leaves")
        self.limit = limit
        self.leaves = leaves


@dataclass(frozen=True)
class SuccessLeaf:
    delta: tuple[Struct, ...]
    theta: dict
    expl: Explanation
    store: DisequalityStore


class Node:
    __slots__ = ("resolvent", "delta", "psic", "expl", "theta", "store", "tried", "depth")

    def __init__(self, resolvent, delta, psic, expl, theta, store, tried, depth):
        self.resolvent = resolvent    # tuple[Struct]: pending literals, selected left to right
        self.delta = delta            # tuple[(uid, Struct)]: abduced atoms
        self.psic = psic              # tuple[(uid, IntegrityConstraint)]
        self.expl = expl              # tuple[AtomicChoice], in order of addition
        self.theta = theta            # tuple[(Var, Term)] for the goal variables
        self.store = store            # DisequalityStore
        self.tried = tried            # frozenset of propagation / factoring pairs
        self.depth = depth

    def copy(self, **kw) -> "Node":
        n = Node(self.resolvent, self.delta, self.psic, self.expl, self.theta,
                 self.store, self.tried, self.depth + 1)
        for k, v in kw.items():
            setattr(n, k, v)
        return n

    def leaf(self) -> SuccessLeaf:
        theta = {v: t for v, t in self.theta if t != v}
        return SuccessLeaf(tuple(a for _, a in self.delta), theta,
                           Explanation(frozenset(self.expl)), self.store)


def instance_key(ic: IntegrityConstraint) -> tuple[tuple[str, str], ...]:
    return canonical_key([v.name for v in ic.orig_vars], ic.tracked)


def _ic_vars_free(ic: IntegrityConstraint) -> bool:
    return (all(a.ground for a in ic.body) and all(a.ground for c in ic.head for a in c)
            and all(t.ground for t in ic.tracked))


def _apply_ic(m: dict, ic: IntegrityConstraint) -> IntegrityConstraint:
    if _ic_vars_free(ic):
        return ic
    return apply(m, ic)


def initial_node(program: Program, goal: Goal) -> Node:
    n = Node((), (), tuple((next(_uids), ic) for ic in program.ics), (),
             tuple((v, v) for v in goal.free_vars), EMPTY_STORE, frozenset(), 0)
    return _add_atoms(program, n, goal.literals)


def _add_atoms(program: Program, node: Node, atoms, front: bool = False) -> Node:
    """Queue literals on the resolvent (in place); abducibles wait there until selected."""
    atoms = tuple(a for a in atoms if a != TRUE)
    node.resolvent = atoms + node.resolvent if front else node.resolvent + atoms
    return node


def _abduce(node: Node, i: int, atom: Struct) -> Node:
    child = node.copy(resolvent=node.resolvent[:i] + node.resolvent[i + 1:])
    if all(a != atom for _, a in node.delta):
        child.delta = node.delta + ((next(_uids), atom),)
    return child


def _bind(node: Node, m: dict) -> Node | None:
    """Apply an existential substitution to every component of ``node`` (in place)."""
    if not m:
        return node
    store = node.store.apply(m)
    if store is None:
        return None
    node.store = store
    node.resolvent = tuple(a if a.ground else subst(a, m) for a in node.resolvent)
    delta, seen, tried = [], {}, node.tried
    for uid, a in node.delta:
        if not a.ground:
            a = subst(a, m)
        if a in seen:
            kept = seen[a]
            # the surviving copy inherits the propagation pairs of the dropped one
            tried = tried | {(kept, t[1]) for t in tried if len(t) == 2 and t[0] == uid}
            continue
        seen[a] = uid
        delta.append((uid, a))
    node.delta = tuple(delta)
    node.tried = tried
    node.psic = tuple((u, _apply_ic(m, ic)) for u, ic in node.psic)
    node.expl = tuple(c if all(t.ground for t in c.instance) else
                      AtomicChoice(c.ic_id, c.theta, c.k, tuple(subst(t, m) for t in c.instance))
                      for c in node.expl)
    node.theta = tuple((v, subst(t, m)) for v, t in node.theta)
    return node


def _fire_head(program: Program, node: Node, head) -> list[Node]:
    """One child per head disjunct; head-only variables become fresh existentials."""
    if not head:
        return []
    seen: dict = {}
    for conj in head:
        for a in conj:
            term_vars(a, seen)
    ren = {v: Var(syntax.next_id(), v.name, False) for v in seen if v.universal}
    out = []
    for i, conj in enumerate(head):
        child = node if i == len(head) - 1 else node.copy(depth=node.depth)
        atoms = [subst(a, ren) for a in conj] if ren else conj
        out.append(_add_atoms(program, child, atoms))
    return out


def _replace_ic(psic, i, new):
    return psic[:i] + tuple((next(_uids), ic) for ic in new) + psic[i + 1:]


class _Search:
    def __init__(self, program: Program, *, factoring=True, selection=None, discovered=None):
        self.program = program
        self.factoring = factoring
        self.selection = selection      # world mode: instance id -> k
        self.discovered = discovered    # set collecting every instance id discharged

    # -- tiers ---------------------------------------------------------------

    def step(self, node: Node) -> list[Node] | None:
        for tier in (self._simplify, self._rewrite, self._case_analysis, self._unfold_ic,
                     self._propagate, self._prob_equivalence, self._unfold_resolvent,
                     self._factor):
            out = tier(node)
            if out is not None:
                return out
        return None

    def _simplify(self, node: Node):
        for i, a in enumerate(node.resolvent):
            if a == TRUE:
                return [node.copy(resolvent=node.resolvent[:i] + node.resolvent[i + 1:])]
            if a == FALSE:
                return []
        for i, (_, ic) in enumerate(node.psic):
            if ic.body:
                first = ic.body[0]
                if first == TRUE:
                    new = IntegrityConstraint(ic.id, ic.prob, ic.body[1:], ic.head, ic.orig_vars, ic.tracked)
                    return [node.copy(psic=_replace_ic(node.psic, i, [new]))]
                if first == FALSE:
                    return [node.copy(psic=_replace_ic(node.psic, i, []))]
            elif not ic.probabilistic:
                child = node.copy(psic=_replace_ic(node.psic, i, []))
                return _fire_head(self.program, child, ic.head)
        return None

    def _rewrite(self, node: Node):
        for i, a in enumerate(node.resolvent):
            if a.functor == "=" and len(a.args) == 2:
                m = mgu(*a.args)
                if m is None:
                    return []
                child = node.copy(resolvent=node.resolvent[:i] + node.resolvent[i + 1:])
                child = _bind(child, m)
                return [] if child is None else [child]
            if a.functor == "\\=" and len(a.args) == 2:
                status, store = solve_neq(a.args[0], a.args[1], node.store)
                if status is False:
                    return []
                return [node.copy(resolvent=node.resolvent[:i] + node.resolvent[i + 1:], store=store)]
        return None

    def _case_analysis(self, node: Node):
        for i, (_, ic) in enumerate(node.psic):
            if not ic.body:
                continue
            first = ic.body[0]
            if first.functor == "=" and len(first.args) == 2:
                return self._case_eq(node, i, ic, first)
            if first.functor == "\\=" and len(first.args) == 2:
                return self._case_neq(node, i, ic, first)
        return None

    def _case_eq(self, node, i, ic, eq):
        m = mgu(*eq.args)
        if m is None:
            # body false: constraint holds trivially
            return [node.copy(psic=_replace_ic(node.psic, i, []))]
        univ = {v: t for v, t in m.items() if v.universal}
        resid = {v: t for v, t in m.items() if not v.universal}
        if any(has_universal(t) for t in resid.values()):
            raise UnsupportedQuantifier(
                "equation between an existential variable and a term with universal variables")
        rest = IntegrityConstraint(ic.id, ic.prob, ic.body[1:], ic.head, ic.orig_vars, ic.tracked)
        rest = apply(univ, rest)
        if not resid:
            return [node.copy(psic=_replace_ic(node.psic, i, [rest]))]
        out = []
        same = _bind(node.copy(psic=_replace_ic(node.psic, i, [rest])), resid)
        if same is not None:
            out.append(same)
        differ = DisequalityStore(node.store.constraints + (_normal(resid),))
        out.append(node.copy(psic=_replace_ic(node.psic, i, []), store=differ))
        return out

    def _case_neq(self, node, i, ic, neq):
        if has_universal(neq):
            raise UnsupportedQuantifier("disequality over universal variables in a constraint body")
        rest = IntegrityConstraint(ic.id, ic.prob, ic.body[1:], ic.head, ic.orig_vars, ic.tracked)
        m = mgu(*neq.args)
        if m is None:
            return [node.copy(psic=_replace_ic(node.psic, i, [rest]))]
        if not m:
            return [node.copy(psic=_replace_ic(node.psic, i, []))]
        out = []
        same = _bind(node.copy(psic=_replace_ic(node.psic, i, [])), m)
        if same is not None:
            out.append(same)
        differ = DisequalityStore(node.store.constraints + (_normal(m),))
        out.append(node.copy(psic=_replace_ic(node.psic, i, [rest]), store=differ))
        return out

    def _unfold_ic(self, node: Node):
        program = self.program
        for i, (_, ic) in enumerate(node.psic):
            if not ic.body:
                continue
            first = ic.body[0]
            if first.key in syntax.BUILTINS or program.is_abducible(first):
                continue
            new = []
            for clause in program.clauses_for(first):
                c = rename_apart(clause, universal=True)
                if mgu(first, c.head) is None:
                    continue
                body = (Struct("=", (first, c.head)),) + c.body + ic.body[1:]
                new.append(IntegrityConstraint(ic.id, ic.prob, body, ic.head, ic.orig_vars, ic.tracked))
            return [node.copy(psic=_replace_ic(node.psic, i, new))]
        return None

    def _propagate(self, node: Node):
        if not node.delta:
            return None
        program = self.program
        by_key: dict = {}
        for du, a in node.delta:
            by_key.setdefault(a.key, []).append((du, a))
        dead = set()
        tried = node.tried
        for uid, ic in node.psic:
            if not ic.body:
                continue
            first = ic.body[0]
            cands = by_key.get(first.key)
            if not cands or not program.is_abducible(first):
                continue
            for du, a in cands:
                if (du, uid) in tried:
                    continue
                if mgu(a, first) is None:
                    dead.add((du, uid))
                    continue
                copy = rename_apart(ic, only_universal=True)
                body = (Struct("=", (a, copy.body[0])),) + copy.body[1:]
                new = IntegrityConstraint(ic.id, ic.prob, body, copy.head, ic.orig_vars, copy.tracked)
                dead.add((du, uid))
                return [node.copy(psic=node.psic + ((next(_uids), new),), tried=node.tried | dead)]
        if dead:
            return [node.copy(tried=node.tried | dead)]
        return None

    def _prob_equivalence(self, node: Node):
        for i, (_, ic) in enumerate(node.psic):
            if ic.body or not ic.probabilistic:
                continue
            key = instance_key(ic)
            iid = (ic.id, key)
            if self.discovered is not None:
                self.discovered.add(iid)
            rest = _replace_ic(node.psic, i, [])
            if self.selection is not None:
                if iid not in self.selection:
                    raise KeyError(f"instance ic{ic.id} {dict(key)} missing from the selection")
                child = node.copy(psic=rest)
                return _fire_head(self.program, child, ic.head) if self.selection[iid] else [child]
            if any(c.instance_id == iid for c in node.expl):
                return [node.copy(psic=rest)]
            add = node.copy(psic=rest, expl=node.expl + (AtomicChoice(ic.id, key, 1, ic.tracked),))
            remove = node.copy(psic=rest, expl=node.expl + (AtomicChoice(ic.id, key, 0, ic.tracked),))
            return _fire_head(self.program, add, ic.head) + [remove]
        return None

    def _unfold_resolvent(self, node: Node):
        program = self.program
        for i, a in enumerate(node.resolvent):
            if a.key in syntax.BUILTINS:
                continue
            if program.is_abducible(a):
                return [_abduce(node, i, a)]
            rest = node.resolvent[:i] + node.resolvent[i + 1:]
            out = []
            for clause in program.clauses_for(a):
                c = rename_apart(clause, universal=False)
                m = mgu(a, c.head)
                if m is None:
                    continue
                child = node.copy(resolvent=rest)
                child = _add_atoms(program, child, c.body, front=True)
                child = _bind(child, m)
                if child is not None:
                    out.append(child)
            return out
        return None

    def _factor(self, node: Node):
        if not self.factoring:
            return None
        delta = node.delta
        for x in range(len(delta)):
            ux, ax = delta[x]
            for y in range(x + 1, len(delta)):
                uy, ay = delta[y]
                if ax.key != ay.key or ("f", ux, uy) in node.tried:
                    continue
                m = mgu(ax, ay)
                if m is None:
                    continue
                tried = node.tried | {("f", ux, uy)}
                out = []
                merged = _bind(node.copy(tried=tried), m)
                if merged is not None:
                    out.append(merged)
                out.append(node.copy(tried=tried,
                                     store=DisequalityStore(node.store.constraints + (_normal(m),))))
                return out
        return None


def _check_invariants(program: Program, parent: Node, children: list[Node]) -> None:
    before = {(c.ic_id, c.theta, c.k) for c in parent.expl}
    for ch in children:
        after = {(c.ic_id, c.theta, c.k) for c in ch.expl}
        assert before <= after, "explanation shrank along a derivation"
        Explanation(frozenset(ch.expl))  # raises when inconsistent
        assert all(program.is_abducible(a) for _, a in ch.delta)


def _run(search: _Search, roots: list[Node], limits: SearchLimits, *, stop_at_first=False,
         check=False, leaves=None) -> list[SuccessLeaf]:
    leaves = [] if leaves is None else leaves
    stack = list(reversed(roots))
    nodes = 0
    program = search.program
    while stack:
        node = stack.pop()
        nodes += 1
        if nodes > limits.max_nodes:
            raise ResourceExceeded("max_nodes", leaves)
        if node.depth > limits.max_depth:
            raise ResourceExceeded("max_depth", leaves)
        children = search.step(node)
        if children is None:
            leaves.append(node.leaf())
            if stop_at_first:
                return leaves
            if len(leaves) > limits.max_leaves:
                raise ResourceExceeded("max_leaves", leaves)
            continue
        if check:
            _check_invariants(program, node, children)
        stack.extend(reversed(children))
    return leaves


def step(program: Program, node: Node, factoring: bool = True) -> list[Node] | None:
    """One transition from ``node``; ``None`` when it is a leaf."""
    return _Search(program, factoring=factoring).step(node)


def derive(program: Program, goal: Goal, limits: SearchLimits = SearchLimits(), *,
           factoring: bool = True, check: bool = False, workers: int = 1) -> list[SuccessLeaf]:
    """All success leaves of the exhaustive depth-first search, in search order.

    Raises :class:`ResourceExceeded` when a limit trips.
    """
    search = _Search(program, factoring=factoring)
    root = initial_node(program, goal)
    if workers <= 1:
        return _run(search, [root], limits, check=check)
    return _derive_parallel(search, root, limits, check, workers)


def entails(program: Program, goal: Goal, selection: dict, limits: SearchLimits = SearchLimits(),
            *, factoring: bool = True) -> bool:
    """Whether the crisp program of one world proves ``goal``.

    ``selection`` maps every instance id ``(ic_id, key)`` that gets
    discharged to 1 (constraint included) or 0 (excluded).
    """
    search = _Search(program, factoring=factoring, selection=selection)
    return bool(_run(search, [initial_node(program, goal)], limits, stop_at_first=True))


def discover_instances(program: Program, goal: Goal, limits: SearchLimits = SearchLimits(),
                       *, factoring: bool = True) -> set:
    """Every probabilistic instance id discharged anywhere in the search tree."""
    seen: set = set()
    search = _Search(program, factoring=factoring, discovered=seen)
    _run(search, [initial_node(program, goal)], limits)
    return seen


# ---------------------------------------------------------------------------
# branch-parallel search

def _subtree(args):
    program, factoring, node, limits, check, id_base = args
    syntax.reserve_ids(id_base)
    global _uids
    _uids = itertools.count(id_base)
    return _run(_Search(program, factoring=factoring), [node], limits, check=check)


def _derive_parallel(search, root, limits, check, workers):
    # expand breadth-first in place so the frontier keeps depth-first order
    frontier: list = [root]
    while True:
        pending = [x for x in frontier if isinstance(x, Node)]
        if not pending or len(pending) >= 4 * workers:
            break
        nxt = []
        for x in frontier:
            if isinstance(x, Node):
                children = search.step(x)
                if children is None:
                    nxt.append(x.leaf())
                else:
                    if check:
                        _check_invariants(search.program, x, children)
                    nxt.extend(children)
            else:
                nxt.append(x)
        frontier = nxt
    base = syntax.next_id() + 1
    jobs = [(search.program, search.factoring, x, limits, check, base + (i + 1) * 10**12)
            for i, x in enumerate(frontier) if isinstance(x, Node)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = iter(pool.map(_subtree, jobs))
    leaves: list = []
    for x in frontier:
        leaves.extend(next(results) if isinstance(x, Node) else [x])
        if len(leaves) > limits.max_leaves:
            raise ResourceExceeded("max_leaves", leaves)
    return leaves
