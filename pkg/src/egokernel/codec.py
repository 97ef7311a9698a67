"""Encodings between external data and formulas.

* Kuratowski pairs and left-folded tuples.
* Attractor encoding of a frequency distribution.
* E-binary numbers: digit atoms wrapped once per position from the right.
"""

from __future__ import annotations

from typing import Sequence

from .assembly import EMPTY, EFormula, ef, normalize, wrap
from .errors import DomainError

__all__ = [
    "ATOM_ONE",
    "ATOM_ZERO",
    "RADIX",
    "attractor_assemblies",
    "attractor_encode",
    "attractor_roles",
    "ebinary_bits",
    "ebinary_decode",
    "ebinary_encode",
    "ebinary_from_int",
    "ebinary_shortcut",
    "ordered_pair",
    "ordered_tuple",
    "unpair",
]

_ONE = ef(EMPTY)  # {0}

# ---------------------------------------------------------------------------
# Ordered pairs


def ordered_pair(x: EFormula, y: EFormula) -> EFormula:
    """``{{x},{x,y}}``."""
    x, y = normalize(x), normalize(y)
    return ef(wrap(x), ef(x, y))


def ordered_tuple(items: Sequence[EFormula]) -> EFormula:
    """Left fold of :func:`ordered_pair`; a single item is returned as is."""
    if not items:
        raise DomainError("empty tuple")
    acc = normalize(items[0])
    for item in items[1:]:
        acc = ordered_pair(acc, item)
    return acc


def unpair(p: EFormula) -> tuple[EFormula, EFormula]:
    """Inverse of :func:`ordered_pair`."""
    p = normalize(p)
    ms = p.children
    if len(ms) == 1:
        # {{x}} is the pair of x with itself
        inner = ms[0]
        if len(inner.members) != 1:
            raise DomainError("not an ordered pair")
        x = inner.only
        return x, x
    if len(ms) != 2:
        raise DomainError("not an ordered pair")
    single = [m for m in ms if len(m.members) == 1]
    double = [m for m in ms if len(m.members) == 2]
    if len(single) != 1 or len(double) != 1:
        raise DomainError("not an ordered pair")
    x = single[0].only
    if x not in double[0].members:
        raise DomainError("not an ordered pair")
    (y,) = double[0].members - {x}
    return x, y


# ---------------------------------------------------------------------------
# Attractor encoding


def _attracts_left(f: Sequence[float], i: int) -> bool:
    return i - 1 >= 0 and f[i] > f[i - 1] and (i - 2 < 0 or f[i] > f[i - 2])


def _attracts_right(f: Sequence[float], i: int) -> bool:
    n = len(f)
    return i + 1 < n and f[i] > f[i + 1] and (i + 2 >= n or f[i] > f[i + 2])


def attractor_roles(freqs: Sequence[float]) -> list[dict[str, bool]]:
    """Per frequency: whether it attracts its neighbours and whether it is a relative maximum."""
    f = list(freqs)
    n = len(f)
    if n < 2:
        raise DomainError("a distribution needs at least two frequencies")
    left = [_attracts_left(f, i) for i in range(n)]
    right = [_attracts_right(f, i) for i in range(n)]
    # f[i] is attracted to f[i+1] when f[i+1] attracts its left side, and vice versa
    attracted = [(i + 1 < n and left[i + 1]) or (i - 1 >= 0 and right[i - 1]) for i in range(n)]
    return [
        {"left": left[i], "right": right[i], "maximum": not attracted[i]} for i in range(n)
    ]


def attractor_assemblies(freqs: Sequence[float]) -> list[EFormula]:
    """Assembly assigned to every frequency of the distribution."""
    f = list(freqs)
    roles = attractor_roles(f)
    n = len(f)
    if all(not r["left"] and not r["right"] for r in roles):
        raise DomainError("flat distribution has no attractor")
    xs: list[EFormula | None] = [None] * n

    def assign(i: int, stack: frozenset[int] = frozenset()) -> EFormula:
        hit = xs[i]
        if hit is not None:
            return hit
        if i in stack:
            raise DomainError("cyclic attractor dependency")
        stack = stack | {i}
        r = roles[i]
        if not r["left"] and not r["right"]:
            out = _ONE
        elif r["left"] and not r["right"]:
            out = ordered_pair(assign(i - 1, stack), EMPTY)
        elif r["right"] and not r["left"]:
            out = ordered_pair(EMPTY, assign(i + 1, stack))
        else:
            lp = ordered_pair(assign(i - 1, stack), EMPTY)
            rp = ordered_pair(EMPTY, assign(i + 1, stack))
            out = ordered_pair(lp, rp) if f[i - 1] >= f[i + 1] else ordered_pair(rp, lp)
        xs[i] = out
        return out

    return [assign(i) for i in range(n)]


def attractor_encode(freqs: Sequence[float]) -> EFormula:
    """Tuple of the assemblies assigned to the relative maxima of the distribution."""
    xs = attractor_assemblies(freqs)
    maxima = [i for i, r in enumerate(attractor_roles(freqs)) if r["maximum"]]
    if not maxima:
        raise DomainError("distribution has no relative maximum")
    return ordered_tuple([xs[i] for i in maxima])


# ---------------------------------------------------------------------------
# E-binary


RADIX = ef(ef(_ONE, EMPTY), EMPTY)  # {{{0},0},0}
ATOM_ZERO = RADIX
ATOM_ONE = ef(ef(_ONE, EMPTY), _ONE)  # {{{0},0},{0}}
_ATOMS = {ATOM_ZERO: 0, ATOM_ONE: 1}


def ebinary_encode(bits: str) -> EFormula:
    """Set of digit atoms, each wrapped once per position counted from the right."""
    if not bits or any(b not in "01" for b in bits):
        raise DomainError(f"not a bit string: {bits!r}")
    n = len(bits)
    return ef(*(wrap(ATOM_ONE if b == "1" else ATOM_ZERO, n - 1 - i) for i, b in enumerate(bits)))


def ebinary_from_int(value: int) -> EFormula:
    """E-binary of a natural without leading zeros."""
    if value < 0:
        raise DomainError("negative numbers are not encodable")
    return ebinary_encode(format(value, "b"))


def _digits(e: EFormula) -> dict[int, int]:
    """Position -> digit map of an E-binary."""
    e = normalize(e)
    if e.is_empty:
        raise DomainError("empty symbol is not an E-binary")
    out: dict[int, int] = {}
    for member in e.members:
        depth, core = 0, member
        while core not in _ATOMS:
            if len(core.members) != 1:
                raise DomainError(f"malformed digit atom {member.render}")
            core = core.only
            depth += 1
        if depth in out:
            raise DomainError(f"two digits at position {depth}")
        out[depth] = _ATOMS[core]
    if sorted(out) != list(range(len(out))):
        raise DomainError("bracket depths are not contiguous")
    return out


def ebinary_bits(e: EFormula) -> str:
    """Bit string of an E-binary, leading zeros included."""
    d = _digits(e)
    return "".join(str(d[k]) for k in range(len(d) - 1, -1, -1))


def ebinary_decode(e: EFormula) -> int:
    """Value by nested loops: a digit at position k runs k+1 loops of ``digit+1`` rounds,
    the innermost adding its counter."""
    loop_value = 0
    for k, loop_number in sorted(_digits(e).items()):

        def run(level: int) -> None:
            nonlocal loop_value
            for i in range(loop_number + 1):
                if level == 0:
                    loop_value += i
                else:
                    run(level - 1)

        run(k)
    return loop_value


def ebinary_shortcut(e: EFormula) -> str:
    """Square-bracket log form, most significant digit first; for logs only."""
    d = _digits(e)
    return ",".join("[" * k + str(d[k]) + "]" * k for k in range(len(d) - 1, -1, -1))
