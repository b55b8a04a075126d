"""Randomized exact band-limited test systems.

Two families:

* ``random_system`` -- sparse random ``F`` over a lower-bidiagonal ``A`` with
  ``λ_j = i ν_j`` (small rational ``ν_j``, ``λ_n = 0``);
* ``planted_system`` -- a resonant normal form ``ẏ = Ay + G`` with a known
  first integral ``K``, pushed through a random near-identity change
  ``x = y + P(y, t)``.  The returned ``H = K(x + Ψ(x, t), t)`` is a first
  integral of the resulting system through the truncation degree.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from gmpy2 import mpq

from .algebra.multiindex import multi_indices, multi_indices_upto, unit
from .algebra.scalars import ExactComplex
from .algebra.series import TaylorFourierSeries, VectorSeries, compose
from .algebra.system import LinearPart, PeriodicSystem
from .normalform import invert_normalization
from .resonance import function_divisor, divisor

__all__ = ["CorpusCase", "build_corpus", "planted_system", "random_system"]

_NU = [mpq(0), mpq(1), mpq(-1), mpq(1, 2), mpq(-1, 2), mpq(2), mpq(1, 3), mpq(3, 2)]
_SIGMA = [mpq(1, 10), mpq(1, 5), mpq(1, 4), mpq(1, 2), mpq(1)]


@dataclass
class CorpusCase:
    name: str
    system: PeriodicSystem
    N: int
    integral: TaylorFourierSeries | None = None
    band: int = 0


def _coefficient(rng: random.Random) -> ExactComplex:
    while True:
        re = mpq(rng.randint(-2, 2), rng.randint(1, 3))
        im = mpq(rng.randint(-2, 2), rng.randint(1, 3))
        if re or im:
            return ExactComplex(re, im)


def _random_index(rng: random.Random, n: int, d: int) -> tuple:
    return rng.choice(multi_indices(n, d))


def _eigenvalues(rng, n, jordan_row=None):
    nus = [rng.choice(_NU) for _ in range(n - 1)] + [mpq(0)]
    if jordan_row is not None:
        nus[jordan_row] = nus[jordan_row - 1]
    return [ExactComplex(0, v) for v in nus]


def random_system(rng: random.Random, n: int, N: int, band: int, jordan: bool = False,
                  n_terms: int | None = None) -> PeriodicSystem:
    """Sparse random system; ``jordan`` adds one small subdiagonal entry."""
    row = rng.randint(1, n - 1) if jordan else None
    lam = _eigenvalues(rng, n, row)
    sigma = [mpq(0)] * (n - 1)
    if row is not None:
        sigma[row - 1] = rng.choice(_SIGMA)
    terms = {}
    for _ in range(n_terms or rng.randint(3, 6)):
        d = rng.randint(2, min(3, N))
        key = (_random_index(rng, n, d), rng.randint(-band, band), rng.randrange(n))
        terms[key] = _coefficient(rng)
    F = VectorSeries.from_terms(n, N, terms)
    return PeriodicSystem(LinearPart(tuple(lam), tuple(sigma)), F)


def planted_system(rng: random.Random, n: int, N: int, band: int, jordan: bool = False):
    """System with a planted first integral; returns ``(system, H)``."""
    frozen = {n - 1}
    if n >= 3 and rng.random() < 0.5:
        frozen.add(rng.randrange(n - 1))
    free_rows = [j for j in range(1, n) if j not in frozen and j - 1 not in frozen]
    row = rng.choice(free_rows) if (jordan and free_rows) else None
    lam = _eigenvalues(rng, n, row)
    sigma = [mpq(0)] * (n - 1)
    if row is not None:
        sigma[row - 1] = rng.choice(_SIGMA)
    linear = LinearPart(tuple(lam), tuple(sigma))

    # K: resonant monomials in the frozen variables (ẏ_z = λ_z y_z there)
    K_terms = {(unit(n, n - 1), 0): ExactComplex(1)}
    candidates = [
        (l, k)
        for l in multi_indices_upto(n, 1, min(3, N))
        if all(l[m] == 0 for m in range(n) if m not in frozen)
        for k in range(-band, band + 1)
        if not function_divisor(l, k, lam)
    ]
    for l, k in rng.sample(candidates, min(2, len(candidates))):
        K_terms[(l, k)] = _coefficient(rng)
    K = TaylorFourierSeries(n, N, K_terms)

    # G: resonant terms in the non-frozen components
    g_candidates = [
        (l, k, j)
        for j in range(n)
        if j not in frozen
        for l in multi_indices_upto(n, 2, min(3, N))
        for k in range(-band, band + 1)
        if not divisor(l, k, j, lam)
    ]
    G_terms = {key: _coefficient(rng) for key in rng.sample(g_candidates, min(3, len(g_candidates)))}
    G = VectorSeries.from_terms(n, N, G_terms)

    P_terms = {}
    for _ in range(rng.randint(2, 4)):
        d = rng.randint(2, min(3, N))
        P_terms[(_random_index(rng, n, d), rng.randint(-band, band), rng.randrange(n))] = _coefficient(rng)
    P = VectorSeries.from_terms(n, N, P_terms)

    # x = y + P(y,t):  ẋ = (I + ∂P)(Ay + G) + ∂_t P, then substitute y = x + Ψ(x,t)
    V0 = linear.as_series(N) + G
    V = V0 + P.jacobian_times(V0) + P.derivative_t()
    Psi = invert_normalization(P, N)
    F = compose(V, Psi, N) - linear.as_series(N)
    H = compose(K, Psi, N)
    return PeriodicSystem(linear, F), H


def build_corpus(seed: int = 0, size: int = 50, planted_fraction: float = 0.4,
                 jordan_fraction: float = 0.25, band: int | None = None) -> list:
    """Deterministic mixed corpus over ``n ∈ {2,3,4}``, ``N ∈ {4,5,6}``."""
    rng = random.Random(seed)
    cases = []
    for idx in range(size):
        n = rng.choice([2, 3, 4])
        N = rng.choice([4, 5, 6])
        b = rng.randint(0, 3) if band is None else band
        jordan = rng.random() < jordan_fraction
        if rng.random() < planted_fraction:
            system, H = planted_system(rng, n, N, b, jordan)
            cases.append(CorpusCase(f"planted-{idx:03d}-n{n}-N{N}-b{b}", system, N, H, b))
        else:
            system = random_system(rng, n, N, b, jordan)
            cases.append(CorpusCase(f"random-{idx:03d}-n{n}-N{N}-b{b}", system, N, None, b))
    return cases
