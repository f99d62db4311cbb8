"""Atomic/composite choices, explanation sets and grouping of leaves into answers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .syntax import Term, _display_names, format_term, term_vars

__all__ = [
    "AtomicChoice", "Explanation", "ExplanationSet", "Answer", "InconsistentExplanation",
    "choice_prob", "incompatible", "collect", "canonical_key",
]


class InconsistentExplanation(ValueError):
    pass


def canonical_key(names: Iterable[str], terms: Iterable[Term]) -> tuple[tuple[str, str], ...]:
    """Substitution rendered with its variables renumbered ``_0, _1, …`` by first appearance."""
    seen: dict = {}
    for t in terms:
        term_vars(t, seen)
    canon = {v: f"_{i}" for i, v in enumerate(seen)}
    return tuple((n, format_term(t, canon)) for n, t in zip(names, terms))


@dataclass(frozen=True, order=True)
class AtomicChoice:
    """Decision ``k`` (1 keep, 0 drop) about one instance of a probabilistic constraint.

    ``theta`` is the canonical instance key used for identity; ``instance``
    holds the live terms of the instance for display only.
    """

    ic_id: int
    theta: tuple[tuple[str, str], ...]
    k: int
    instance: tuple = field(default=(), compare=False, hash=False, repr=False)

    @property
    def instance_id(self) -> tuple:
        return (self.ic_id, self.theta)

    def describe_theta(self, names: dict | None = None) -> dict[str, str]:
        if self.instance:
            return {n: format_term(t, names) for (n, _), t in zip(self.theta, self.instance)}
        return dict(self.theta)

    def __str__(self):
        inner = ",".join(f"{n}/{t}" for n, t in self.describe_theta().items())
        return f"(ic{self.ic_id},{{{inner}}},{self.k})"


@dataclass(frozen=True)
class Explanation:
    choices: frozenset = frozenset()

    def __post_init__(self):
        seen: dict = {}
        for c in self.choices:
            if seen.setdefault(c.instance_id, c.k) != c.k:
                raise InconsistentExplanation(f"two decisions for ic{c.ic_id} {dict(c.theta)}")

    @classmethod
    def of(cls, choices: Iterable[AtomicChoice]) -> "Explanation":
        return cls(frozenset(choices))

    def __len__(self):
        return len(self.choices)

    def __iter__(self):
        return iter(self.sorted())

    def sorted(self) -> tuple[AtomicChoice, ...]:
        return tuple(sorted(self.choices))

    @property
    def sort_key(self) -> tuple:
        return tuple((c.ic_id, c.theta, c.k) for c in self.sorted())

    def __str__(self):
        return "{" + ", ".join(str(c) for c in self.sorted()) + "}"


def incompatible(e1: Explanation, e2: Explanation) -> bool:
    """True when the union of the two explanations is inconsistent."""
    ks = {c.instance_id: c.k for c in e1.choices}
    return any(ks.get(c.instance_id, c.k) != c.k for c in e2.choices)


def choice_prob(e: Explanation | Iterable[AtomicChoice], probs: Mapping[int, float]) -> float:
    choices = e.choices if isinstance(e, Explanation) else e
    out = 1.0
    for c in choices:
        if c.ic_id not in probs:
            raise KeyError(f"unknown probabilistic constraint ic{c.ic_id}")
        p = probs[c.ic_id]
        out *= p if c.k else 1.0 - p
    return out


@dataclass(frozen=True)
class ExplanationSet:
    explanations: tuple[Explanation, ...] = ()

    def __len__(self):
        return len(self.explanations)

    def __iter__(self):
        return iter(self.explanations)

    def pairwise_incompatible(self) -> bool:
        es = self.explanations
        return all(incompatible(a, b) for i, a in enumerate(es) for b in es[i + 1:])


@dataclass
class Answer:
    """Leaves sharing the same abduced set and answer substitution."""

    delta: tuple[str, ...]
    theta: dict[str, str]
    explanations: ExplanationSet
    leaves: list = field(default_factory=list, repr=False)


def _answer_render(leaf) -> tuple[tuple[str, ...], dict[str, str]]:
    # sort abducibles on a variable-agnostic rendering so equal answers agree on order
    blank: dict = {}
    for a in leaf.delta:
        term_vars(a, blank)
    blanks = {v: "_" for v in blank}
    delta = sorted(leaf.delta, key=lambda a: format_term(a, blanks))
    bound = [(v, t) for v, t in leaf.theta.items()]
    names = _display_names([v for v, _ in bound] + [t for _, t in bound] + delta)
    theta = {v.name: format_term(t, names) for v, t in bound}
    return tuple(format_term(a, names) for a in delta), theta


def _grouping_key(leaf) -> tuple:
    blank: dict = {}
    for a in leaf.delta:
        term_vars(a, blank)
    blanks = {v: "_" for v in blank}
    delta = sorted(leaf.delta, key=lambda a: format_term(a, blanks))
    values = [t for _, t in leaf.theta.items()]
    seen: dict = {}
    for t in (*values, *delta):
        term_vars(t, seen)
    canon = {v: f"_{i}" for i, v in enumerate(seen)}
    return (tuple((v.name, format_term(t, canon)) for v, t in leaf.theta.items()),
            tuple(format_term(a, canon) for a in delta))


def collect(leaves: Iterable) -> tuple[ExplanationSet, list[Answer]]:
    """Deduplicate explanations and group leaves into answers, keeping first-seen order."""
    all_expl: dict[Explanation, None] = {}
    groups: dict[tuple, Answer] = {}
    per_group: dict[tuple, dict] = {}
    for leaf in leaves:
        all_expl.setdefault(leaf.expl, None)
        key = _grouping_key(leaf)
        if key not in groups:
            delta, theta = _answer_render(leaf)
            groups[key] = Answer(delta, theta, ExplanationSet())
            per_group[key] = {}
        groups[key].leaves.append(leaf)
        per_group[key].setdefault(leaf.expl, None)
    answers = []
    for key, ans in groups.items():
        ans.explanations = ExplanationSet(tuple(per_group[key]))
        answers.append(ans)
    return ExplanationSet(tuple(all_expl)), answers

