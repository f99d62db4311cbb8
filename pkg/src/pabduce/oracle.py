"""World enumeration: P(G) by summing the probabilities of the worlds that entail G.

The instance universe is the set of probabilistic constraint instances the
search can discharge (collected by one exhaustive pass).  Every selection
over that universe is a world; entailment in a world is decided by the crisp
proof procedure that keeps exactly the selected instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .engine import SearchLimits, discover_instances, entails
from .syntax import Goal, Program

__all__ = ["World", "UniverseTooLarge", "instance_universe", "enumerate_worlds",
           "oracle_probability", "selection_probabilities", "total_world_mass"]


class UniverseTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class World:
    selection: tuple   # ((ic_id, key), k) pairs in universe order


def instance_universe(program: Program, goal: Goal, limits: SearchLimits = SearchLimits(),
                      *, factoring: bool = True) -> list[tuple]:
    return sorted(discover_instances(program, goal, limits, factoring=factoring))


def selection_probabilities(probs) -> np.ndarray:
    """Probabilities of all ``2**m`` selections; bit ``i`` of the index is the choice for instance ``i``."""
    out = np.ones(1)
    for p in probs:
        out = np.concatenate([out * (1.0 - p), out * p])
    return out


def total_world_mass(probs, block_bits: int = 12) -> float:
    """Sum of the probabilities of all ``2**m`` selections, enumerated block by block."""
    probs = list(probs)
    head, tail = probs[:-block_bits] if len(probs) > block_bits else [], probs[-block_bits:]
    inner = selection_probabilities(tail)
    return float(sum(np.sum(p * inner) for p in selection_probabilities(head)))


def enumerate_worlds(program: Program, goal: Goal, *, max_instances: int = 20,
                     entailment: bool = True, limits: SearchLimits = SearchLimits(),
                     factoring: bool = True) -> list[tuple[World, float, bool | None]]:
    """Every world with its probability and (optionally) whether it entails ``goal``."""
    universe = instance_universe(program, goal, limits, factoring=factoring)
    if len(universe) > max_instances:
        raise UniverseTooLarge(f"{len(universe)} constraint instances exceed the bound {max_instances}")
    probs = [program.pic(ic_id).prob for ic_id, _ in universe]
    out = []
    for bits in itertools.product((0, 1), repeat=len(universe)):
        p = 1.0
        for k, q in zip(bits, probs):
            p *= q if k else 1.0 - q
        sel = dict(zip(universe, bits))
        ok = entails(program, goal, sel, limits, factoring=factoring) if entailment else None
        out.append((World(tuple(zip(universe, bits))), p, ok))
    return out


def oracle_probability(program: Program, goal: Goal, **kw) -> float:
    return sum(p for _, p, ok in enumerate_worlds(program, goal, **kw) if ok)
