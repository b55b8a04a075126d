"""Multi-indices ``l`` in Z_+^n and the ``≻`` order used to schedule solves."""
from __future__ import annotations

from functools import lru_cache
from typing import Iterator, Sequence

MultiIndex = tuple  # tuple[int, ...]


def degree(l: Sequence[int]) -> int:
    return sum(l)


def unit(n: int, j: int) -> MultiIndex:
    """``e_j`` with 0-based ``j``."""
    return tuple(1 if m == j else 0 for m in range(n))


def succ_compare(k: Sequence[int], l: Sequence[int]) -> int:
    """Compare under ``≻``: +1 if ``k ≻ l``, -1 if ``l ≻ k``, 0 if equal.

    ``k ≻ l`` when ``|k| < |l|``, or the degrees agree and at the first
    differing position ``k_s < l_s``.
    """
    if len(k) != len(l):
        raise ValueError(f"multi-index length mismatch: {len(k)} != {len(l)}")
    dk, dl = sum(k), sum(l)
    if dk != dl:
        return 1 if dk < dl else -1
    for a, b in zip(k, l):
        if a != b:
            return 1 if a < b else -1
    return 0


def succ_key(l: Sequence[int]) -> tuple:
    """Sort key: ascending order of this key lists ``≻``-greater indices first."""
    return (sum(l), tuple(l))


@lru_cache(maxsize=None)
def multi_indices(n: int, d: int) -> tuple:
    """All ``l`` in Z_+^n with ``|l| = d``, ``≻``-greatest first."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for first in range(remaining + 1):
            rec(prefix + (first,), remaining - first, slots - 1)

    if n == 0:
        return ((),) if d == 0 else ()
    rec((), d, n)
    return tuple(out)


def multi_indices_upto(n: int, lo: int, hi: int) -> Iterator[MultiIndex]:
    for d in range(lo, hi + 1):
        yield from multi_indices(n, d)
