"""First integrals: verification, pushforward, resonant structure and rank."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .algebra.scalars import ExactComplex
from .algebra.series import TaylorFourierSeries, VectorSeries, compose
from .algebra.system import PeriodicSystem
from .resonance import DEFAULT_TOLERANCE, resonant_fn_term

__all__ = [
    "IntegralReport",
    "defect",
    "exact_rank",
    "gradient_matrix",
    "independence_rank",
    "is_first_integral",
    "pushforward",
    "rational_phase",
    "resonant_function_check",
]


@dataclass
class IntegralReport:
    """Order-``N`` statement about a candidate integral.

    ``is_integral_to_N`` holds iff the defect has no term of degree ``<= N``.
    ``resonant_structure`` is ``None`` until :func:`resonant_function_check`
    has run.
    """

    N: int
    is_integral_to_N: bool | None = None
    defect: TaylorFourierSeries | None = None
    resonant_structure: bool | None = None
    offending_terms: list = field(default_factory=list)


def defect(H: TaylorFourierSeries, field_: VectorSeries, N: int) -> TaylorFourierSeries:
    """``∂_t H + ⟨∂_x H, V⟩`` truncated at ``N`` for the vector field ``V``."""
    H = H.with_bound(N)
    total = H.derivative_t()
    for m in range(H.n):
        dH = H.derivative(m)
        if dH and field_[m]:
            total = total + dH * field_[m].with_bound(N)
    return total.with_bound(N)


def is_first_integral(H: TaylorFourierSeries, system: PeriodicSystem, N: int,
                      tol: float | None = None) -> IntegralReport:
    """Check ``∂_t H + ⟨∂_x H, Ax + F⟩ = 0`` through degree ``N``."""
    if H.n != system.n:
        raise ValueError(f"candidate has {H.n} variables, system has {system.n}")
    d = defect(H, system.vector_field(N), N)
    if d.exact:
        ok = d.is_zero
    else:
        tol = DEFAULT_TOLERANCE if tol is None else tol
        ok = all(abs(c) <= tol for c in d.terms.values())
    return IntegralReport(N=N, is_integral_to_N=ok, defect=d)


def pushforward(H: TaylorFourierSeries, Phi: VectorSeries, N: int) -> TaylorFourierSeries:
    """``H̃(y, t) = H(y + Φ(y, t), t)`` truncated at ``N``."""
    return compose(H.with_bound(N), Phi.with_bound(N), N)


def resonant_function_check(Htilde: TaylorFourierSeries, lam, N: int | None = None,
                            tol: float | None = None) -> IntegralReport:
    """Every term must satisfy ``ik + ⟨λ, l⟩ = 0``; offenders are listed."""
    offenders = []
    for (l, k), _ in Htilde.items():
        if not resonant_fn_term(l, k, lam, tol)[0]:
            offenders.append((l, k))
    return IntegralReport(
        N=Htilde.N if N is None else N,
        resonant_structure=not offenders,
        offending_terms=offenders,
    )


# -- functional independence ---------------------------------------------
def rational_phase(u) -> ExactComplex:
    """``e^{it}`` at the rational point of the unit circle with parameter ``u``.

    ``((1 - u^2) + 2u i) / (1 + u^2)``; ``u = 0`` is ``t = 0``.
    """
    u = mpq(u)
    den = 1 + u * u
    return ExactComplex((1 - u * u) / den, 2 * u / den)


def gradient_matrix(H_list: Sequence[TaylorFourierSeries], x: Sequence, phase) -> list:
    """Rows ``∂_x H_i`` evaluated at ``x`` and ``e^{it} = phase``."""
    return [[H.derivative(m).evaluate(x, phase) for m in range(H.n)] for H in H_list]


def exact_rank(rows: list) -> int:
    """Rank over the Gaussian rationals by exact Gaussian elimination."""
    M = [list(r) for r in rows]
    if not M:
        return 0
    rank, ncols = 0, len(M[0])
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(M)) if M[r][col]), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        inv = M[rank][col].reciprocal() if isinstance(M[rank][col], ExactComplex) else 1 / M[rank][col]
        for r in range(rank + 1, len(M)):
            if M[r][col]:
                f = M[r][col] * inv
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def _sample_rational(rng: random.Random, max_den: int):
    q = rng.randint(1, max_den)
    return mpq(rng.randint(-q, q), q)


def independence_rank(H_list: Sequence[TaylorFourierSeries], N: int | None = None,
                      samples: int = 8, seed: int = 0, max_den: int = 16,
                      tol: float = 1e-9) -> int:
    """Maximum Jacobian rank of the candidates over pseudo-random points.

    Exact candidates are evaluated at rational ``x`` in ``[-1, 1]`` (denominator
    at most ``max_den``) and rational points of the unit circle for ``e^{it}``,
    so each sampled rank is exact.
    """
    if not H_list:
        raise ValueError("need at least one candidate")
    if N is not None:
        H_list = [H.with_bound(N) for H in H_list]
    n = H_list[0].n
    rng = random.Random(seed)
    exact = H_list[0].exact
    best = 0
    for _ in range(samples):
        x = [_sample_rational(rng, max_den) for _ in range(n)]
        u = _sample_rational(rng, max_den)
        if exact:
            point = [ExactComplex(v) for v in x]
            r = exact_rank(gradient_matrix(H_list, point, rational_phase(u)))
        else:
            phase = complex(rational_phase(u))
            rows = gradient_matrix(H_list, [complex(v) for v in x], phase)
            r = int(np.linalg.matrix_rank(np.array(rows, dtype=complex), tol=tol))
        best = max(best, r)
    return best
