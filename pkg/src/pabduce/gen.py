"""Program generators: the exponential benchmark family and small random programs."""

from __future__ import annotations

import random
from dataclasses import dataclass

__all__ = ["gen_bench", "BENCH_GOAL", "RandomProgramConfig", "random_program"]

BENCH_GOAL = "b0(X)"


def gen_bench(n: int) -> str:
    """Chain of ``n`` layers; layer ``i`` splits ``b(i-1)`` into ``p(i)``, ``q(i)`` and rejoins in ``b(i)``."""
    if not isinstance(n, int) or not 1 <= n <= 20:
        raise ValueError(f"benchmark size must be an integer in 1..20, got {n!r}")
    lines = [f"abducible b{i}/1." for i in range(n + 1)]
    lines += [f"abducible p{i}/1.\nabducible q{i}/1." for i in range(1, n + 1)]
    for i in range(1, n + 1):
        lines.append(f"0.6 :: b{i - 1}(X) -> p{i}(X), q{i}(X).")
        lines.append(f"0.6 :: p{i}(X) -> b{i}(X).")
        lines.append(f"0.6 :: q{i}(X) -> b{i}(X).")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RandomProgramConfig:
    max_constants: int = 3
    max_clauses: int = 4
    max_pic_instances: int = 6
    max_crisp: int = 1
    n_defined: int = 2
    n_abducible: int = 2


def _atom(rng, preds, consts):
    name, arity = rng.choice(preds)
    if arity == 0:
        return name
    return f"{name}({','.join(rng.choice(consts) for _ in range(arity))})"


def random_program(seed: int, cfg: RandomProgramConfig = RandomProgramConfig()) -> tuple[str, str]:
    """A ground, non-recursive program with a ground goal; returns ``(program text, goal text)``.

    Atoms are drawn from a small pool so constraints overlap with what the
    goal abduces.  Defined predicates are stratified (``d0`` may call ``d1``
    but not the reverse), so every derivation terminates.
    """
    rng = random.Random(seed)
    consts = [f"c{i}" for i in range(rng.randint(1, cfg.max_constants))]
    abd = [(f"a{i}", rng.randint(0, 1)) for i in range(cfg.n_abducible)]
    defined = [(f"d{i}", rng.randint(0, 1)) for i in range(cfg.n_defined)]
    pool = sorted({_atom(rng, abd, consts) for _ in range(4)})
    levels = [sorted({_atom(rng, [d], consts) for _ in range(2)}) for d in defined]
    lines = [f"abducible {n}/{k}." for n, k in abd]

    for _ in range(rng.randint(1, cfg.max_clauses)):
        level = rng.randrange(len(defined))
        head = rng.choice(levels[level])
        lower = [a for lv in levels[level + 1:] for a in lv]
        body = [rng.choice(pool + lower) for _ in range(rng.randint(0, 2))]
        lines.append(f"{head} :- {', '.join(body)}." if body else f"{head}.")

    defined_atoms = [a for lv in levels for a in lv]
    for _ in range(rng.randint(1, cfg.max_pic_instances)):
        p = rng.choice([0.1, 0.25, 0.5, 0.6, 0.7, 0.9])
        body = [rng.choice(pool) for _ in range(rng.randint(1, 2))]
        r = rng.random()
        if r < 0.3:
            head = "false"
        else:
            disj = [", ".join(rng.choice(pool + defined_atoms) for _ in range(rng.randint(1, 2)))
                    for _ in range(1 if r < 0.75 else 2)]
            head = " ; ".join(disj)
        lines.append(f"{p} :: {', '.join(body)} -> {head}.")

    for _ in range(rng.randint(0, cfg.max_crisp)):
        body = [rng.choice(pool) for _ in range(2)]
        lines.append(f"{', '.join(body)} -> false.")

    goal = ", ".join(rng.choice(pool + defined_atoms) for _ in range(rng.randint(1, 2)))
    return "\n".join(lines) + "\n", goal
