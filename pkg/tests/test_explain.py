import pytest

from pabduce.engine import derive
from pabduce.explain import (AtomicChoice, Explanation, ExplanationSet, InconsistentExplanation,
                             choice_prob, collect, incompatible)

T1 = (("P", "husband"), ("H", "house1"))
T2 = (("P", "husband"), ("H", "house2"))


def E(*choices):
    return Explanation.of(AtomicChoice(1, t, k) for t, k in choices)


def test_choice_probabilities():
    probs = {1: 0.7}
    assert choice_prob(E((T1, 1), (T2, 0)), probs) == pytest.approx(0.21)
    assert choice_prob(E((T1, 0), (T2, 0)), probs) == pytest.approx(0.09)
    assert choice_prob(Explanation(), probs) == 1.0


def test_unknown_constraint_id():
    with pytest.raises(KeyError):
        choice_prob(Explanation.of([AtomicChoice(5, (), 1)]), {1: 0.7})


def test_inconsistent_explanation_rejected():
    with pytest.raises(InconsistentExplanation):
        E((T1, 1), (T1, 0))


def test_incompatibility():
    assert incompatible(E((T1, 1)), E((T1, 0), (T2, 1)))
    assert not incompatible(E((T1, 1)), E((T2, 0)))
    assert ExplanationSet((E((T1, 1)), E((T1, 0), (T2, 1)), E((T1, 0), (T2, 0)))).pairwise_incompatible()


def test_display_uses_instance_terms():
    c = AtomicChoice(1, T1, 1)
    assert str(c) == "(ic1,{P/husband,H/house1},1)"


def test_murder_answer_grouping(murder):
    program, goal = murder
    K, answers = collect(derive(program, goal))
    assert len(K) == 4
    sizes = sorted(len(a.explanations) for a in answers)
    assert sizes == [1, 3]
    husband, = [a for a in answers if a.theta]
    assert husband.theta == {"M": "husband"}
    assert husband.delta == ("enter(husband,house1)", "enter(husband,house2)", "killed(husband,woman)")


def test_duplicate_leaves_collapse(murder):
    program, goal = murder
    leaves = derive(program, goal)
    K, answers = collect(leaves + leaves)
    assert len(K) == 4
    assert sum(len(a.explanations) for a in answers) == 4
    assert sum(len(a.leaves) for a in answers) == 8


def test_grouping_ignores_variable_names():
    from pabduce.syntax import parse_goal, parse_program
    program = parse_program("abducible a/1.\np(X) :- a(X).\np(Y) :- a(Y).\n")
    _, answers = collect(derive(program, parse_goal("p(Z)")))
    assert len(answers) == 1
