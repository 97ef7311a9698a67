"""Exhaustive and random generation of normal forms for property checks."""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from .assembly import EMPTY, Assembly, EFormula, ef

__all__ = ["by_size", "up_to_size", "by_depth", "random_formula", "random_assembly"]


@lru_cache(maxsize=None)
def by_size(n: int) -> tuple[EFormula, ...]:
    """All normal forms with exactly ``n`` nodes, canonically ordered."""
    if n < 1:
        return ()
    if n == 1:
        return (EMPTY,)
    # members are distinct formulas whose sizes sum to n - 1
    pool = [f for k in range(1, n) for f in by_size(k)]
    out: list[EFormula] = []

    def extend(start: int, remaining: int, chosen: list[EFormula]) -> None:
        if remaining == 0:
            out.append(ef(*chosen))
            return
        for i in range(start, len(pool)):
            f = pool[i]
            if f.desc > remaining:
                break
            chosen.append(f)
            extend(i + 1, remaining - f.desc, chosen)
            chosen.pop()

    extend(0, n - 1, [])
    return tuple(sorted(out, key=lambda f: f.render))


def up_to_size(n: int) -> list[EFormula]:
    return [f for k in range(1, n + 1) for f in by_size(k)]


@lru_cache(maxsize=None)
def by_depth(d: int) -> tuple[EFormula, ...]:
    """All normal forms of depth at most ``d``."""
    if d == 0:
        return (EMPTY,)
    prev = by_depth(d - 1)
    out = [EMPTY]
    for r in range(1, len(prev) + 1):
        out.extend(ef(*combo) for combo in itertools.combinations(prev, r))
    return tuple(out)


def random_formula(rng: random.Random, max_depth: int, max_width: int = 3) -> EFormula:
    """Random normal form of depth at most ``max_depth``; leaves appear with growing odds near the bottom."""
    if max_depth == 0 or rng.random() < 0.25:
        return EMPTY
    width = rng.randint(1, max_width)
    return ef(*(random_formula(rng, max_depth - 1, max_width) for _ in range(width)))


def random_assembly(rng: random.Random, nodes: int) -> Assembly:
    """Random raw ordered tree with exactly ``nodes`` nodes (random recursive attachment)."""
    parents = [-1] + [rng.randrange(i) for i in range(1, nodes)]
    kids: list[list[int]] = [[] for _ in range(nodes)]
    for i in range(1, nodes):
        kids[parents[i]].append(i)

    def build(i: int) -> Assembly:
        return Assembly(tuple(build(k) for k in kids[i]))

    import sys

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * nodes + 100))
    return build(0)
