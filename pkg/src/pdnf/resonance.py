"""Resonance tests, divisor spectra, the resonance lattice and small divisors.

All eigenvalue vectors ``lam`` are sequences of scalars: :class:`ExactComplex`
(exact mode) or ``complex`` (approx mode).  Multi-indices and component
indices are 0-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import gmpy2
from gmpy2 import mpq

from .algebra.multiindex import multi_indices, multi_indices_upto
from .algebra.scalars import ExactComplex, exact_sqrt, modulus

__all__ = [
    "DEFAULT_TOLERANCE",
    "DegenerateRangeError",
    "DivisorReport",
    "MissingToleranceError",
    "RationalityReport",
    "ResonanceLattice",
    "UnsupportedInApproxError",
    "admissible_scale",
    "divisor",
    "divisor_constants",
    "epsilon_bound",
    "exponent_rationality",
    "function_divisor",
    "gamma_slope",
    "lattice_rank",
    "operator_spectrum",
    "resonant_fn_term",
    "resonant_vf_term",
]

DEFAULT_TOLERANCE = 1e-9


class MissingToleranceError(ValueError):
    """Approximate eigenvalues were given without a resonance tolerance."""


class UnsupportedInApproxError(ValueError):
    """The operation is only defined for exact eigenvalues."""


class DegenerateRangeError(ValueError):
    """No nonresonant divisor exists in the enumerated range."""


def _exact(lam: Sequence) -> bool:
    return all(isinstance(v, ExactComplex) for v in lam)


def _require_exact(lam, what: str):
    if not _exact(lam):
        raise UnsupportedInApproxError(f"{what} requires exact (Gaussian rational) eigenvalues")


def function_divisor(l: Sequence[int], k: int, lam: Sequence):
    """``ik + ⟨λ, l⟩``."""
    if _exact(lam):
        re = mpq(0)
        im = mpq(k)
        for e, v in zip(l, lam):
            if e:
                re += e * v.re
                im += e * v.im
        return ExactComplex._raw(re, im)
    return 1j * k + sum(e * complex(v) for e, v in zip(l, lam))


def divisor(l: Sequence[int], k: int, j: int, lam: Sequence):
    """``ik + ⟨l, λ⟩ - λ_j``, the eigenvalue of the homological operator."""
    return function_divisor(l, k, lam) - lam[j]


def _classify(value, tol):
    if isinstance(value, ExactComplex):
        return not value
    if tol is None:
        raise MissingToleranceError("approx-mode resonance test needs a tolerance")
    return abs(value) < tol


def resonant_vf_term(l, k: int, j: int, lam, tol: float | None = None):
    """Is ``y^l e^{ikt} e_j`` resonant in a vector field?

    Returns ``(resonant, divisor)``.  Exact eigenvalues give an exact test;
    approximate ones compare ``|divisor|`` against ``tol``.
    """
    value = divisor(l, k, j, lam)
    return _classify(value, tol), value


def resonant_fn_term(l, k: int, lam, tol: float | None = None):
    """Is ``y^l e^{ikt}`` resonant in a function (``ik + ⟨λ,l⟩ = 0``)?"""
    value = function_divisor(l, k, lam)
    return _classify(value, tol), value


def operator_spectrum(lam, kappa, r: int, modes: Sequence[int] | None = None) -> list:
    """Multiset ``{⟨l,λ⟩ - κ_j : |l| = r}``, optionally ``{ik + ...}`` over ``modes``.

    The Fourier extension uses ``κ = λ`` as in the homological operator.
    Ordered by mode, then ``l`` (``≻``-greatest first), then ``j``.
    """
    if r < 1:
        raise ValueError("degree r must be >= 1")
    n = len(lam)
    if modes is None:
        return [function_divisor(l, 0, lam) - kappa[j] for l in multi_indices(n, r) for j in range(n)]
    return [
        function_divisor(l, k, lam) - lam[j]
        for k in sorted(modes)
        for l in multi_indices(n, r)
        for j in range(n)
    ]


# -- resonance lattice ----------------------------------------------------
@dataclass
class ResonanceLattice:
    """Integer relations ``(k, l)`` with ``ik + ⟨λ, l⟩ = 0``.

    ``generators`` is a maximal independent subset of the enumerated relations
    (first found in canonical order); ``rank`` its size.  ``saturated`` is
    ``True`` when the bounds provably capture the full rank, ``None`` when
    that cannot be certified.
    """

    n: int
    generators: list
    rank: int
    relations_found: int
    max_degree: int
    max_mode: int
    saturated: bool | None = None


class _IntegerEchelon:
    """Incremental fraction-free row echelon form over Z."""

    def __init__(self):
        self.rows: list = []  # (pivot, row)

    def reduce(self, v: list) -> list:
        v = list(v)
        for p, row in self.rows:
            if v[p]:
                a, b = row[p], v[p]
                v = [a * x - b * y for x, y in zip(v, row)]
                g = reduce(math.gcd, v, 0)
                if g > 1:
                    v = [x // g for x in v]
        return v

    def add(self, v) -> bool:
        r = self.reduce(v)
        if not any(r):
            return False
        pivot = next(i for i, x in enumerate(r) if x)
        self.rows.append((pivot, r))
        return True


def integer_rank(vectors) -> int:
    """Rank of integer vectors by fraction-free elimination."""
    ech = _IntegerEchelon()
    return sum(1 for v in vectors if ech.add(v))


def lattice_rank(lam, max_degree: int, max_mode: int) -> ResonanceLattice:
    """Enumerate relations with ``1 <= |l| <= max_degree``, ``|k| <= max_mode``."""
    _require_exact(lam, "lattice_rank")
    n = len(lam)
    ech = _IntegerEchelon()
    generators = []
    found = 0
    for l in multi_indices_upto(n, 1, max_degree):
        # ik + <λ,l> = 0 forces Re<λ,l> = 0 and k = -Im<λ,l> integral
        re = sum((e * v.re for e, v in zip(l, lam)), mpq(0))
        if re:
            continue
        im = sum((e * v.im for e, v in zip(l, lam)), mpq(0))
        if gmpy2.denom(im) != 1:
            continue
        k = -int(im)
        if abs(k) > max_mode:
            continue
        found += 1
        vec = (k,) + tuple(l)
        if ech.add(vec):
            generators.append((k, tuple(l)))
    saturated = None
    if all(not v.re for v in lam):
        dens = [int(gmpy2.denom(v.im)) for v in lam]
        nums = [abs(int(gmpy2.numer(v.im))) for v in lam]
        saturated = max_degree >= max(dens) and max_mode >= max(nums)
    return ResonanceLattice(
        n=n,
        generators=generators,
        rank=len(generators),
        relations_found=found,
        max_degree=max_degree,
        max_mode=max_mode,
        saturated=saturated,
    )


# -- small divisors -------------------------------------------------------
@dataclass
class DivisorReport:
    """Empirical small-divisor data over ``2 <= |l| <= N``, ``|k| <= K``.

    Moduli are exact rationals when they happen to be rational, floats
    otherwise.  ``epsilon_theoretical`` is ``1/ν`` when every eigenvalue is
    ``i`` times a rational (``ν`` the common denominator).
    """

    n: int
    N: int
    K: int
    epsilon: object
    epsilon_theoretical: object = None
    d1: object = None
    d2: object = None
    d: object = None
    sigma_bar: object = None
    gamma_slope: object = None
    slope_positive: bool | None = None
    nonresonant_count: int = 0
    resonant_count: int = 0
    extra: dict = field(default_factory=dict)


def _sqrt_q(q):
    root = exact_sqrt(q)
    return root if root is not None else math.sqrt(float(q))


def _divisor_table(lam, N: int, K: int, lo: int = 2):
    """Yield ``(l, k, j, |divisor|^2)`` over the range (exact)."""
    n = len(lam)
    for l in multi_indices_upto(n, lo, N):
        base_re = sum((e * v.re for e, v in zip(l, lam)), mpq(0))
        base_im = sum((e * v.im for e, v in zip(l, lam)), mpq(0))
        for j in range(n):
            re = base_re - lam[j].re
            im0 = base_im - lam[j].im
            re2 = re * re
            for k in range(-K, K + 1):
                im = im0 + k
                yield l, k, j, re2 + im * im


def _theoretical_epsilon(lam):
    if any(v.re for v in lam):
        return None
    nu = reduce(gmpy2.lcm, (gmpy2.denom(v.im) for v in lam), gmpy2.mpz(1))
    return mpq(1, nu)


def epsilon_bound(lam, N: int, K: int) -> DivisorReport:
    """Infimum of nonzero ``|ik + ⟨m,λ⟩ - λ_i|`` over ``2 <= |m| <= N``, ``|k| <= K``."""
    _require_exact(lam, "epsilon_bound")
    if N < 2 or K < 0:
        raise ValueError("need N >= 2 and K >= 0")
    best = None
    nonres = res = 0
    for _, _, _, m2 in _divisor_table(lam, N, K):
        if not m2:
            res += 1
            continue
        nonres += 1
        if best is None or m2 < best:
            best = m2
    if best is None:
        raise DegenerateRangeError("no nonresonant divisor in the enumerated range")
    return DivisorReport(
        n=len(lam),
        N=N,
        K=K,
        epsilon=_sqrt_q(best),
        epsilon_theoretical=_theoretical_epsilon(lam),
        nonresonant_count=nonres,
        resonant_count=res,
        extra={"epsilon_squared": best},
    )


def gamma_slope(epsilon, d, sigma_bar, n: int):
    """``1 - σ̄/ε - d σ̄ (n-1)``, the ``h``-derivative of the majorant equation at 0."""
    if not sigma_bar:
        return mpq(1)
    return 1 - sigma_bar / epsilon - d * sigma_bar * (n - 1)


def _d2_square(lam, N: int, K: int):
    """max ``k_j^2 / |div(k, m1, s)|^2`` over couplings with a resonant partner.

    A product ``φ^k_{s,m1} g^{r}_{j,m2}`` with ``r = l - k + e_j`` resonant
    makes the divisor at ``(l, m1 + m2, s)`` equal to the one at
    ``(k, m1, s)``; the partner must fit into ``|l| <= N``, ``|m| <= K``.
    """
    n = len(lam)
    # resonant vector-field triples (r, m2, j) with |r| >= 2
    partners = {}
    for r, m2, j, m2sq in _divisor_table(lam, N - 1, K):
        if not m2sq:
            d = sum(r)
            partners.setdefault(j, []).append((d, m2))
    best = None
    for k_idx, m1, s, dsq in _divisor_table(lam, N - 1, K):
        if not dsq:
            continue
        dk = sum(k_idx)
        for j in range(n):
            kj = k_idx[j]
            if not kj:
                continue
            ok = any(dk + dr - 1 <= N and abs(m1 + m2) <= K for dr, m2 in partners.get(j, ()))
            if not ok:
                continue
            val = mpq(kj * kj) / dsq
            if best is None or val > best:
                best = val
    return best


def divisor_constants(lam, sigma, N: int, K: int) -> DivisorReport:
    """``ε``, ``d1``, ``d2``, ``d`` and the ``Γ``-slope over the degree-N range."""
    _require_exact(lam, "divisor_constants")
    report = epsilon_bound(lam, N, K)
    n = len(lam)
    d1sq = mpq(0)
    for l, _, _, m2 in _divisor_table(lam, N, K):
        if not m2:
            continue
        for j in range(1, n):
            val = mpq((1 + l[j]) ** 2) / m2
            if val > d1sq:
                d1sq = val
    d2sq = _d2_square(lam, N, K) if N >= 3 else None
    d1 = _sqrt_q(d1sq)
    d2 = _sqrt_q(d2sq) if d2sq is not None else mpq(0)
    d = _sqrt_q(max(d1sq, d2sq or mpq(0)))
    sigma_bar = max((modulus(s) for s in sigma), default=mpq(0))
    slope = gamma_slope(report.epsilon, d, sigma_bar, n)
    report.d1, report.d2, report.d = d1, d2, d
    report.sigma_bar = sigma_bar
    report.gamma_slope = slope
    report.slope_positive = bool(slope > 0)
    report.extra.update(d1_squared=d1sq, d2_squared=d2sq)
    return report


def admissible_scale(report: DivisorReport, safety=mpq(1, 2)) -> mpq:
    """A rational ``c`` such that scaling ``σ ↦ cσ`` makes the slope positive.

    The slope is affine in ``σ̄``; ``c = safety / (σ̄/ε + d σ̄ (n-1))`` keeps it
    at ``1 - safety``.  Returns 1 when the slope is already positive.
    """
    if report.slope_positive:
        return mpq(1)
    load = report.sigma_bar / report.epsilon + report.d * report.sigma_bar * (report.n - 1)
    c = safety / load
    if not isinstance(c, type(mpq(0))):
        # float load: take a power of two below the bound
        c = mpq(1, 2 ** math.ceil(math.log2(1 / float(c))))
    return c


# -- exponent rationality -------------------------------------------------
@dataclass
class RationalityReport:
    rational_imaginary: bool
    nu: list | None
    rank: int | None
    n: int
    consistent: bool | None


def exponent_rationality(lam, rank: int | None = None) -> RationalityReport:
    """Check ``λ_j = i ν_j`` with rational ``ν_j``; pair with ``R_λ >= n-1``."""
    _require_exact(lam, "exponent_rationality")
    ok = all(not v.re for v in lam)
    nu = [v.im for v in lam] if ok else None
    consistent = None
    if rank is not None:
        consistent = ok and rank >= len(lam) - 1
    return RationalityReport(ok, nu, rank, len(lam), consistent)
