from hypothesis import given, settings
from hypothesis import strategies as st

import pytest

from pabduce.syntax import Struct, Var
from pabduce.unify import (EMPTY_STORE, DisequalityStore, UnsupportedQuantifier, compose, mgu,
                           occurs, solve_eq, solve_neq, subst)

a, b = Struct("a"), Struct("b")


def f(*args):
    return Struct("f", tuple(args))


def g(*args):
    return Struct("g", tuple(args))


X, Y, Z = Var(9001, "X"), Var(9002, "Y"), Var(9003, "Z")
U, W = Var(9004, "U", universal=True), Var(9005, "W", universal=True)


# -- directed tests, one per rewriting rule -----------------------------------

def test_identical_terms_rewrite_to_true():
    assert solve_eq(f(X, a), f(X, a)) == {}
    assert solve_eq(X, X) == {}


def test_term_equals_variable_is_reoriented():
    assert solve_eq(f(a), X) == {X: f(a)}


def test_universal_variable_is_bound_first():
    assert solve_eq(X, U) == {U: X}
    assert solve_eq(U, f(X)) == {U: f(X)}


def test_existential_pair_binds_one_variable():
    m = solve_eq(X, Y)
    assert len(m) == 1
    (v, t), = m.items()
    assert {v, t} == {X, Y}
    # the newer variable is bound to the older one
    assert v == Y


def test_occurs_check_fails():
    assert solve_eq(X, f(X)) is None
    assert solve_eq(f(X, b), f(g(X), b)) is None


def test_decomposition():
    assert solve_eq(f(X, g(Y)), f(a, g(b))) == {X: a, Y: b}


def test_functor_clash_fails():
    assert solve_eq(f(X), g(X)) is None
    assert solve_eq(a, b) is None


def test_arity_clash_fails():
    assert solve_eq(f(X), f(X, Y)) is None


def test_binding_rechecks_store():
    store = DisequalityStore().add(X, a)
    assert solve_eq(X, a, store) is None
    assert solve_eq(X, b, store) == {X: b}


# -- disequalities ----------------------------------------------------------

def test_neq_clash_is_entailed():
    assert solve_neq(a, b)[0] is True
    assert solve_neq(X, f(X))[0] is True


def test_neq_identical_fails():
    assert solve_neq(f(a), f(a))[0] is False


def test_neq_compound_records_one_disjunction():
    status, store = solve_neq(f(X, Y), f(a, b))
    assert status is None
    assert len(store) == 1
    # violated only when both arguments match
    assert store.apply({X: a}) is not None
    assert store.apply({X: a, Y: b}) is None
    assert store.apply({X: b}).constraints == ()


def test_neq_universal_is_quantified_away():
    # forall U: X != f(U) is false only if X is some f(_): here it stays residual on X
    status, store = solve_neq(f(U, X), f(a, b))
    assert status is None and store.constraints == (((X, b),),)
    assert solve_neq(U, a)[0] is False


def test_neq_between_universals_unsupported():
    with pytest.raises(UnsupportedQuantifier):
        solve_neq(U, W)


def test_empty_store_accepts_anything():
    assert EMPTY_STORE.apply({X: a}) is EMPTY_STORE


# -- properties -------------------------------------------------------------

VARS = [Var(9100 + i, f"V{i}") for i in range(4)]
UVARS = [Var(9200 + i, f"A{i}", universal=True) for i in range(2)]

terms = st.recursive(
    st.sampled_from([a, b, Struct("c")] + VARS + UVARS),
    lambda kids: st.builds(lambda fn, args: Struct(fn, tuple(args)),
                           st.sampled_from(["f", "g"]), st.lists(kids, min_size=1, max_size=2)),
    max_leaves=6,
)


@settings(max_examples=400, deadline=None)
@given(terms, terms)
def test_mgu_is_sound_and_idempotent(s, t):
    m = mgu(s, t)
    if m is None:
        return
    assert subst(s, m) == subst(t, m)
    for v, u in m.items():
        assert subst(u, m) == u
        assert not occurs(v, u)


@settings(max_examples=300, deadline=None)
@given(terms, terms)
def test_mgu_succeeds_symmetrically(s, t):
    m1, m2 = mgu(s, t), mgu(t, s)
    assert (m1 is None) == (m2 is None)
    if m1 is not None:
        assert subst(s, m2) == subst(t, m2)


@settings(max_examples=300, deadline=None)
@given(terms, terms, terms)
def test_compose_applies_in_sequence(s, t, u):
    m1 = mgu(s, t)
    if m1 is None:
        return
    m2 = mgu(subst(s, m1), u) or {}
    c = compose(m1, m2)
    assert subst(u, c) == subst(subst(u, m1), m2)
    assert subst(s, c) == subst(subst(s, m1), m2)
