"""Bottom-up model checking, independent of the proof procedure.

Two uses:

* ``brute_force_probability`` decides P(G) for small ground programs by
  enumerating every selection of constraint instances and every set of
  abduced atoms, and checking the least model of each candidate.
* ``leaf_violations`` checks a success leaf of the proof procedure: the
  least model of the clauses plus the abduced atoms (remaining variables
  read as fresh constants) must satisfy every crisp constraint and every
  constraint instance the leaf's explanation keeps.
"""

from __future__ import annotations

import itertools
from typing import Iterable

from .syntax import TRUE, Goal, IntegrityConstraint, Program, Struct, Term, Var, term_vars

__all__ = ["least_model", "satisfies", "brute_force_probability", "leaf_violations",
           "NotGround"]


class NotGround(ValueError):
    pass


def _match(pattern: Term, fact: Term, env: dict) -> dict | None:
    """One-way matching of ``pattern`` against a ground term."""
    if isinstance(pattern, Var):
        bound = env.get(pattern)
        if bound is None:
            out = dict(env)
            out[pattern] = fact
            return out
        return env if bound == fact else None
    if pattern.ground:
        return env if pattern == fact else None
    if not isinstance(fact, Struct) or pattern.key != fact.key:
        return None
    for p, f in zip(pattern.args, fact.args):
        env = _match(p, f, env)
        if env is None:
            return None
    return env


def _inst(t: Term, env: dict) -> Term:
    if isinstance(t, Var):
        return env.get(t, t)
    if t.ground:
        return t
    return Struct(t.functor, tuple(_inst(a, env) for a in t.args))


def _solutions(body: Iterable[Struct], model: dict, env: dict) -> Iterable[dict]:
    """All extensions of ``env`` making every body literal true in ``model``."""
    body = tuple(body)
    if not body:
        yield env
        return
    lit, rest = body[0], body[1:]
    if lit == TRUE:
        yield from _solutions(rest, model, env)
        return
    if lit.key == ("false", 0):
        return
    if lit.key in (("=", 2), ("\\=", 2)):
        lhs, rhs = _inst(lit.args[0], env), _inst(lit.args[1], env)
        if lit.functor == "=":
            if lhs.ground and rhs.ground:
                if lhs == rhs:
                    yield from _solutions(rest, model, env)
                return
            if isinstance(lhs, Var) and rhs.ground:
                yield from _solutions(rest, model, {**env, lhs: rhs})
                return
            if isinstance(rhs, Var) and lhs.ground:
                yield from _solutions(rest, model, {**env, rhs: lhs})
                return
        elif lhs.ground and rhs.ground:
            if lhs != rhs:
                yield from _solutions(rest, model, env)
            return
        # unresolved builtin: postpone behind the remaining literals
        if rest:
            for e in _solutions(rest, model, env):
                yield from _solutions((lit,), model, e)
            return
        raise NotGround(f"builtin {lit.functor} over unbound variables")
    for fact in model.get(lit.key, ()):
        e = _match(lit, fact, env)
        if e is not None:
            yield from _solutions(rest, model, e)


def least_model(program: Program, facts: Iterable[Struct]) -> dict:
    """Naive bottom-up fixpoint of the clauses over ``facts``; maps predicate key to atom set."""
    model: dict = {}

    def add(a):
        s = model.setdefault(a.key, set())
        if a in s:
            return False
        s.add(a)
        return True

    for a in facts:
        add(a)
    changed = True
    while changed:
        changed = False
        for c in program.kb:
            for env in list(_solutions(c.body, model, {})):
                head = _inst(c.head, env)
                if not head.ground:
                    raise NotGround(f"clause {c.head} derives a non-ground atom")
                changed |= add(head)
    return model


def satisfies(ic: IntegrityConstraint, model: dict) -> bool:
    """``body -> head`` holds in ``model``; head variables are read existentially."""
    for env in _solutions(ic.body, model, {}):
        if not any(next(iter(_solutions(conj, model, env)), None) is not None for conj in ic.head):
            return False
    return True


def _holds(goal: Goal, model: dict) -> bool:
    return next(iter(_solutions(goal.literals, model, {})), None) is not None


def _abducible_atoms(program: Program, goal: Goal) -> list[Struct]:
    seen: dict = {}

    def visit(a):
        if isinstance(a, Struct) and program.is_abducible(a):
            if not a.ground:
                raise NotGround(f"abducible atom {a} is not ground")
            seen.setdefault(a, None)

    for c in program.kb:
        for a in c.body:
            visit(a)
    for ic in program.ics:
        for a in ic.body:
            visit(a)
        for conj in ic.head:
            for a in conj:
                visit(a)
    for a in goal.literals:
        visit(a)
    return list(seen)


def brute_force_probability(program: Program, goal: Goal, max_atoms: int = 16) -> float:
    """P(G) of a ground program by enumeration of selections and abduced sets.

    A world keeps each probabilistic constraint independently; the goal is
    entailed in a world when some set of abduced atoms makes the goal true
    in the least model while every kept and every crisp constraint holds.
    """
    for ic in program.ics:
        if ic.body and not all(a.ground for a in ic.body):
            raise NotGround(f"constraint ic{ic.id} is not ground")
    atoms = _abducible_atoms(program, goal)
    if len(atoms) > max_atoms:
        raise ValueError(f"{len(atoms)} abducible atoms exceed the bound {max_atoms}")
    pics = program.pics
    crisp = program.crisp_ics
    # satisfied[j][s]: constraint j holds for abduced subset s; good[s]: goal holds and crisp ICs hold
    models = []
    for mask in range(1 << len(atoms)):
        delta = [a for i, a in enumerate(atoms) if mask >> i & 1]
        models.append(least_model(program, delta))
    good = [_holds(goal, m) and all(satisfies(ic, m) for ic in crisp) for m in models]
    holds = [[satisfies(ic, m) for m in models] for ic in pics]
    total = 0.0
    for keep in itertools.product((0, 1), repeat=len(pics)):
        p = 1.0
        for ic, k in zip(pics, keep):
            p *= ic.prob if k else 1.0 - ic.prob
        if any(good[s] and all(holds[j][s] for j, k in enumerate(keep) if k)
               for s in range(len(models))):
            total += p
    return total


def _skolemize(terms: Iterable[Term]) -> dict:
    seen: dict = {}
    for t in terms:
        term_vars(t, seen)
    return {v: Struct(f"$sk{i}") for i, v in enumerate(seen)}


def leaf_violations(program: Program, leaf) -> list[str]:
    """Constraints violated by the least model of a success leaf (empty when sound)."""
    kept = [c for c in leaf.expl if c.k and c.instance]
    sk = _skolemize(list(leaf.delta) + [t for c in kept for t in c.instance])
    model = least_model(program, [_inst(a, sk) for a in leaf.delta])
    out = [f"ic{ic.id}" for ic in program.crisp_ics if not satisfies(ic, model)]
    for c in kept:
        ic = program.pic(c.ic_id)
        env = {v: _inst(t, sk) for v, t in zip(ic.orig_vars, c.instance)}
        inst = IntegrityConstraint(ic.id, ic.prob, tuple(_inst(a, env) for a in ic.body),
                                   tuple(tuple(_inst(a, env) for a in conj) for conj in ic.head),
                                   ic.orig_vars, ic.tracked)
        if not satisfies(inst, model):
            out.append(str(c))
    return out
