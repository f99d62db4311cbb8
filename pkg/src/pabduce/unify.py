"""Quantifier-aware unification, substitution and the disequality store.

A substitution is a plain ``dict`` from :class:`Var` to term, kept
idempotent.  ``solve_eq`` returns ``None`` when the equation rewrites to
false and a (possibly empty) substitution otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .syntax import Clause, IntegrityConstraint, Struct, Term, Var, format_term

Substitution = dict  # Var -> Term


class UnsupportedQuantifier(ValueError):
    """A (dis)equality pattern outside the supported rule table."""


def walk(t: Term, s: dict) -> Term:
    while isinstance(t, Var):
        nxt = s.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def occurs(v: Var, t: Term, s: dict | None = None) -> bool:
    if s:
        t = walk(t, s)
    if isinstance(t, Var):
        return t == v
    if t.ground:
        return False
    return any(occurs(v, a, s) for a in t.args)


def _orient(a: Var, b: Var) -> tuple[Var, Var]:
    """Which of two variables gets bound: universal before existential, else the newer one."""
    if a.universal != b.universal:
        return (a, b) if a.universal else (b, a)
    return (a, b) if a.id > b.id else (b, a)


def unify_into(a: Term, b: Term, s: dict) -> bool:
    """Extend the triangular substitution ``s`` so that ``a`` and ``b`` unify."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = walk(x, s), walk(y, s)
        if x is y or x == y:
            continue
        if isinstance(x, Var) and isinstance(y, Var):
            v, t = _orient(x, y)
            s[v] = t
        elif isinstance(x, Var):
            if occurs(x, y, s):
                return False
            s[x] = y
        elif isinstance(y, Var):
            if occurs(y, x, s):
                return False
            s[y] = x
        else:
            if x.functor != y.functor or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
    return True


def resolve(t: Term, s: dict) -> Term:
    t = walk(t, s)
    if isinstance(t, Var) or t.ground:
        return t
    return Struct(t.functor, tuple(resolve(a, s) for a in t.args))


def mgu(a: Term, b: Term) -> dict | None:
    """Most general unifier in idempotent form, or ``None``."""
    s: dict = {}
    if not unify_into(a, b, s):
        return None
    return {v: resolve(t, s) for v, t in s.items()}


def subst(t: Term, s: dict) -> Term:
    if isinstance(t, Var):
        return s.get(t, t)
    if t.ground:
        return t
    return Struct(t.functor, tuple(subst(a, s) for a in t.args))


def compose(first: dict, second: dict) -> dict:
    """Substitution equivalent to applying ``first`` then ``second``."""
    out = {v: subst(t, second) for v, t in first.items()}
    for v, t in second.items():
        out.setdefault(v, t)
    return {v: t for v, t in out.items() if t != v}


def apply(theta: dict, x):
    """Apply ``theta`` to a term, atom, clause or integrity constraint."""
    if not theta:
        return x
    if isinstance(x, (Var, Struct)):
        return subst(x, theta)
    if isinstance(x, IntegrityConstraint):
        return replace(
            x,
            body=tuple(subst(a, theta) for a in x.body),
            head=tuple(tuple(subst(a, theta) for a in c) for c in x.head),
            tracked=tuple(subst(t, theta) for t in x.tracked),
        )
    if isinstance(x, Clause):
        return Clause(subst(x.head, theta), tuple(subst(a, theta) for a in x.body))
    raise TypeError(f"cannot apply a substitution to {type(x).__name__}")


def has_universal(t: Term) -> bool:
    if isinstance(t, Var):
        return t.universal
    return not t.ground and any(has_universal(a) for a in t.args)


# ---------------------------------------------------------------------------
# disequality store

@dataclass(frozen=True)
class DisequalityStore:
    """Each constraint is a tuple of ``(Var, Term)`` pairs read as ``V1≠t1 ∨ … ∨ Vn≠tn``."""

    constraints: tuple[tuple[tuple[Var, Term], ...], ...] = ()

    def __len__(self):
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def add(self, lhs: Term, rhs: Term) -> "DisequalityStore | None":
        status, store = solve_neq(lhs, rhs, self)
        return None if status is False else store

    def apply(self, theta: dict) -> "DisequalityStore | None":
        """Re-check every constraint under ``theta``; ``None`` if one is violated."""
        if not theta or not self.constraints:
            return self
        kept = []
        for c in self.constraints:
            lhs = tuple(subst(v, theta) for v, _ in c)
            rhs = tuple(subst(t, theta) for _, t in c)
            m = mgu(Struct("", lhs), Struct("", rhs))
            if m is None:
                continue
            if not m:
                return None
            kept.append(_normal(m))
        return DisequalityStore(tuple(kept))

    def format(self) -> list[str]:
        return [" ; ".join(f"{format_term(v)} \\= {format_term(t)}" for v, t in c) for c in self.constraints]


EMPTY_STORE = DisequalityStore()


def _normal(m: dict) -> tuple[tuple[Var, Term], ...]:
    return tuple(sorted(m.items(), key=lambda vt: vt[0].id))


def solve_eq(lhs: Term, rhs: Term, store: DisequalityStore = EMPTY_STORE) -> dict | None:
    """Equality rewriting: a substitution (empty means trivially true) or ``None`` for false."""
    m = mgu(lhs, rhs)
    if m is None:
        return None
    if store.constraints and store.apply(m) is None:
        return None
    return m


def solve_neq(lhs: Term, rhs: Term, store: DisequalityStore = EMPTY_STORE):
    """Disequality rewriting.

    Returns ``(status, store)`` with status ``True`` (entailed), ``False``
    (the terms are identical under every instance) or ``None`` (a residual
    disjunctive constraint was recorded in the returned store).
    """
    m = mgu(lhs, rhs)
    if m is None:
        return True, store
    if any(v.universal and t.universal for v, t in m.items() if isinstance(t, Var)):
        raise UnsupportedQuantifier("disequality between two universal variables")
    # forall A: not(A = t, rest)  ==  not(rest{A/t})
    residual = {v: t for v, t in m.items() if not v.universal}
    if any(has_universal(t) for t in residual.values()):
        raise UnsupportedQuantifier("disequality of an existential against a universally quantified term")
    if not residual:
        return False, store
    return None, DisequalityStore(store.constraints + (_normal(residual),))
