"""Distinguished Poincaré-Dulac normalization of ``ẋ = A x + F(x, t)``.

The transform ``x = y + Φ(y, t)`` and the normal form ``ẏ = A y + G(y, t)``
are built degree by degree.  At degree ``s`` the homological equation

    ∂_t Φ_s + ⟨∂_y Φ_s, A y⟩ - A Φ_s = W_s - G_s,
    W_s = [F]_s - Σ_{j=2}^{s-1} ∂_y Φ_j · G_{s+1-j},

is solved coefficient by coefficient.  Resonant coefficients go entirely to
``G`` (``Φ`` coefficient 0); nonresonant ones go to ``Φ`` (``G`` coefficient
0), so ``Φ`` is distinguished.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .algebra.multiindex import multi_indices
from .algebra.scalars import ExactComplex, as_exact
from .algebra.series import TaylorFourierSeries, VectorSeries, compose
from .algebra.system import LinearPart, PeriodicSystem
from .resonance import DEFAULT_TOLERANCE, function_divisor, resonant_vf_term

__all__ = [
    "DiagonalScaling",
    "IncompletePrefixError",
    "InvalidScaleError",
    "NormalizationResult",
    "ResidualReport",
    "compute_W",
    "distinguished_violations",
    "invert_normalization",
    "normalize",
    "rescale_subdiagonal",
    "rescale_system",
    "residual_check",
    "solve_degree",
    "solve_degree_split",
    "truncate_result",
]

log = logging.getLogger(__name__)


class IncompletePrefixError(ValueError):
    """Lower-degree parts of Φ or G are missing."""


class InvalidScaleError(ValueError):
    pass


@dataclass
class NormalizationResult:
    """Output of :func:`normalize`.

    ``Phi`` and ``G`` hold degrees ``2..N``.  ``near_resonances`` lists
    approx-mode coefficients whose divisor fell below the tolerance and were
    routed to ``G``.
    """

    Phi: VectorSeries
    G: VectorSeries
    N: int
    linear: LinearPart
    residual_max_degree_checked: int = -1
    near_resonances: list = field(default_factory=list)
    tol: float | None = None

    @property
    def normal_form(self) -> PeriodicSystem:
        return PeriodicSystem(self.linear, self.G)


def _parts_sum(parts: dict, n: int, N: int, exact: bool) -> VectorSeries:
    total = VectorSeries.zero(n, N, exact)
    for d in sorted(parts):
        total = total + parts[d].with_bound(N)
    return total


def compute_W(s: int, F: VectorSeries, Phi_parts: dict, G_parts: dict) -> VectorSeries:
    """Right-hand side ``W_s`` of the degree-``s`` homological equation.

    ``Phi_parts`` and ``G_parts`` map each degree ``2..s-1`` to its
    homogeneous vector series.
    """
    missing = [d for d in range(2, s) if d not in Phi_parts or d not in G_parts]
    if missing:
        raise IncompletePrefixError(f"degrees {missing} unresolved before degree {s}")
    n, exact = F.n, F.exact
    Phi_low = _parts_sum({d: Phi_parts[d] for d in range(2, s)}, n, s, exact)
    W = compose(F.with_bound(s), Phi_low, s).degree_part(s)
    for j in range(2, s):
        if Phi_parts[j].is_zero or G_parts[s + 1 - j].is_zero:
            continue
        W = W - Phi_parts[j].with_bound(s).jacobian_times(G_parts[s + 1 - j].with_bound(s))
    return W.degree_part(s)


def _is_resonant(div, tol):
    if isinstance(div, ExactComplex):
        return not div
    return abs(div) < tol


def solve_degree(s: int, W: VectorSeries, linear: LinearPart, tol: float | None = None):
    """Solve the degree-``s`` equation by the coefficient recursion.

    Coefficients are resolved with modes in ascending order, multi-indices
    ``≻``-greatest first and components ascending, so every coupling term
    (``φ^{l-e_{j-1}+e_j}`` of the same component and ``φ^l`` of the previous
    component) is already known.

    Returns ``(Phi_s, G_s, near)`` where ``near`` lists approx-mode
    near-resonances.
    """
    n, exact = linear.n, linear.exact
    lam, sigma = linear.lam, linear.sigma
    if not exact and tol is None:
        tol = DEFAULT_TOLERANCE
    phi: dict = {}
    g: dict = {}
    near = []
    w_terms = [comp.terms for comp in W]
    coupled = [(j, sigma[j - 1]) for j in range(1, n) if sigma[j - 1]]
    for m in sorted(W.modes()):
        for l in multi_indices(n, s):
            base = function_divisor(l, m, lam)
            for c in range(n):
                rhs = w_terms[c].get((l, m))
                for j, sj in coupled:
                    if l[j - 1]:
                        lp = l[: j - 1] + (l[j - 1] - 1, l[j] + 1) + l[j + 1 :]
                        v = phi.get((lp, m, c))
                        if v is not None:
                            term = v * sj * (1 + l[j])
                            rhs = -term if rhs is None else rhs - term
                if c and sigma[c - 1]:
                    v = phi.get((l, m, c - 1))
                    if v is not None:
                        term = v * sigma[c - 1]
                        rhs = term if rhs is None else rhs + term
                if rhs is None or not rhs:
                    continue
                div = base - lam[c]
                if _is_resonant(div, tol):
                    if div:
                        near.append((l, m, c, div))
                        log.warning(
                            "near-resonance routed to G: l=%s k=%d j=%d |divisor|=%.3e",
                            l, m, c + 1, abs(div),
                        )
                    g[(l, m, c)] = rhs
                else:
                    phi[(l, m, c)] = rhs / div
    Phi_s = VectorSeries.from_terms(n, s, phi, exact=exact)
    G_s = VectorSeries.from_terms(n, s, g, exact=exact)
    return Phi_s, G_s, near


def solve_degree_split(s: int, W: VectorSeries, linear: LinearPart, tol: float | None = None):
    """Diagonal ``A`` only: ``G = W_res`` and ``Φ = L^{-1} W_nonres`` termwise."""
    if not linear.is_diagonal:
        raise ValueError("basis-split solve requires a diagonal linear part")
    if not linear.exact and tol is None:
        tol = DEFAULT_TOLERANCE
    phi, g, near = {}, {}, []
    for (l, k, j), c in W.items():
        res, div = resonant_vf_term(l, k, j, linear.lam, tol)
        if res:
            if div:
                near.append((l, k, j, div))
            g[(l, k, j)] = c
        else:
            phi[(l, k, j)] = c / div
    n = linear.n
    return (
        VectorSeries.from_terms(n, s, phi, exact=linear.exact),
        VectorSeries.from_terms(n, s, g, exact=linear.exact),
        near,
    )


def normalize(system: PeriodicSystem, N: int, method: str = "recursion", tol: float | None = None):
    """Distinguished normalization of ``system`` through degree ``N``.

    Parameters
    ----------
    system : PeriodicSystem
        Lower-bidiagonal linear part; exact mode needs Gaussian-rational data.
    N : int
        Truncation degree (``>= 2``).
    method : {"recursion", "split"}
        ``"split"`` is the diagonal-only basis-split solver.
    tol : float, optional
        Approx-mode resonance tolerance (default ``1e-9``).
    """
    if N < 2:
        raise ValueError("truncation degree must be >= 2")
    solver = {"recursion": solve_degree, "split": solve_degree_split}[method]
    linear = system.linear
    n, exact = system.n, system.exact
    if not exact and tol is None:
        tol = DEFAULT_TOLERANCE
    F = system.F.with_bound(N)
    Phi_parts: dict = {}
    G_parts: dict = {}
    near_all = []
    for s in range(2, N + 1):
        W = compute_W(s, F, Phi_parts, G_parts)
        Phi_s, G_s, near = solver(s, W, linear, tol)
        Phi_parts[s], G_parts[s] = Phi_s, G_s
        near_all.extend(near)
    result = NormalizationResult(
        Phi=_parts_sum(Phi_parts, n, N, exact),
        G=_parts_sum(G_parts, n, N, exact),
        N=N,
        linear=linear,
        near_resonances=near_all,
        tol=tol,
    )
    report = residual_check(system, result, N, tol=tol)
    result.residual_max_degree_checked = report.max_degree_verified
    return result


@dataclass
class ResidualReport:
    N: int
    max_degree_verified: int
    residual: VectorSeries

    @property
    def is_zero(self) -> bool:
        return self.residual.is_zero


def conjugacy_residual(system: PeriodicSystem, Phi: VectorSeries, G: VectorSeries, N: int) -> VectorSeries:
    """``∂_tΦ + ⟨∂_yΦ, Ay⟩ - AΦ - F(y+Φ,t) + ⟨∂_yΦ, G⟩ + G`` through degree ``N``."""
    linear = system.linear
    Phi = Phi.with_bound(N)
    G = G.with_bound(N)
    Ay = linear.as_series(N)
    lhs = Phi.derivative_t() + Phi.jacobian_times(Ay) - linear.apply(Phi)
    rhs = compose(system.F.with_bound(N), Phi, N) - Phi.jacobian_times(G) - G
    return (lhs - rhs).with_bound(N)


def residual_check(system: PeriodicSystem, result: NormalizationResult, N: int | None = None,
                   tol: float | None = None) -> ResidualReport:
    """Evaluate the conjugacy identity through degree ``N``.

    ``max_degree_verified`` is the largest degree through which the residual
    vanishes (exactly, or below ``tol`` in approx mode).
    """
    N = result.N if N is None else N
    residual = conjugacy_residual(system, result.Phi, result.G, N)
    if not residual.exact:
        tol = DEFAULT_TOLERANCE if tol is None else tol
        bad = [sum(l) for (l, _, _), c in residual.items() if abs(c) > tol]
    else:
        bad = [sum(l) for (l, _, _), _ in residual.items()]
    verified = N if not bad else min(bad) - 1
    return ResidualReport(N=N, max_degree_verified=verified, residual=residual)


def distinguished_violations(result: NormalizationResult, tol: float | None = None) -> list:
    """Φ terms that are resonant and G terms that are nonresonant."""
    lam = result.linear.lam
    if not result.linear.exact and tol is None:
        tol = result.tol or DEFAULT_TOLERANCE
    bad = []
    for (l, k, j), _ in result.Phi.items():
        if resonant_vf_term(l, k, j, lam, tol)[0]:
            bad.append(("Phi", l, k, j))
    for (l, k, j), _ in result.G.items():
        if not resonant_vf_term(l, k, j, lam, tol)[0]:
            bad.append(("G", l, k, j))
    return bad


def invert_normalization(Phi: VectorSeries, N: int) -> VectorSeries:
    """``Ψ`` with ``y = x + Ψ(x, t)`` inverting ``x = y + Φ(y, t)`` through degree ``N``.

    Fixed point of ``Ψ = -Φ(x + Ψ)``; each pass fixes one more degree.
    """
    Phi = Phi.with_bound(N)
    Psi = VectorSeries.zero(Phi.n, N, Phi.exact)
    for _ in range(max(N - 1, 0)):
        nxt = -compose(Phi, Psi, N)
        if nxt == Psi:
            break
        Psi = nxt
    return Psi


def truncate_result(result: NormalizationResult, N: int) -> NormalizationResult:
    return NormalizationResult(
        Phi=result.Phi.with_bound(N),
        G=result.G.with_bound(N),
        N=N,
        linear=result.linear,
        residual_max_degree_checked=min(result.residual_max_degree_checked, N),
        near_resonances=[r for r in result.near_resonances if sum(r[0]) <= N],
        tol=result.tol,
    )


# -- subdiagonal rescaling ------------------------------------------------
@dataclass(frozen=True)
class DiagonalScaling:
    """New coordinates ``x̃_s = w_s x_s``.

    Vector fields and transforms map as ``V ↦ D V(D^{-1} x̃)``; scalar
    functions as ``H ↦ H(D^{-1} x̃)``.
    """

    weights: tuple

    def inverse(self) -> "DiagonalScaling":
        return DiagonalScaling(tuple(1 / w for w in self.weights))

    def _monomial_factor(self, l):
        f = self.weights[0] ** 0
        for w, e in zip(self.weights, l):
            if e:
                f = f / w**e
        return f

    def apply_scalar(self, H: TaylorFourierSeries) -> TaylorFourierSeries:
        return TaylorFourierSeries(
            H.n, H.N, {(l, k): c * self._monomial_factor(l) for (l, k), c in H.terms.items()},
            exact=H.exact,
        )

    def apply(self, V: VectorSeries) -> VectorSeries:
        return VectorSeries(
            [self.apply_scalar(comp).scale(self.weights[s]) for s, comp in enumerate(V)]
        )

    def apply_linear(self, linear: LinearPart) -> LinearPart:
        sigma = tuple(
            linear.sigma[j - 1] * self.weights[j] / self.weights[j - 1] for j in range(1, linear.n)
        )
        return LinearPart(linear.lam, sigma)

    def apply_system(self, system: PeriodicSystem) -> PeriodicSystem:
        return PeriodicSystem(self.apply_linear(system.linear), self.apply(system.F), system.period)

    def apply_result(self, result: NormalizationResult) -> NormalizationResult:
        return NormalizationResult(
            Phi=self.apply(result.Phi),
            G=self.apply(result.G),
            N=result.N,
            linear=self.apply_linear(result.linear),
            residual_max_degree_checked=result.residual_max_degree_checked,
            near_resonances=list(result.near_resonances),
            tol=result.tol,
        )


def rescale_subdiagonal(linear: LinearPart, c):
    """Conjugate by ``diag(1, c, c^2, ...)``: ``σ_j ↦ c σ_j``, eigenvalues fixed.

    Returns the new linear part and the :class:`DiagonalScaling` to apply to
    ``F`` (and to invert on outputs).
    """
    if linear.exact:
        if isinstance(c, float):
            raise InvalidScaleError("exact mode needs a rational scale")
        c = as_exact(c)
        if c.im or c.re <= 0:
            raise InvalidScaleError(f"scale must be a positive rational, got {c}")
    else:
        c = complex(c)
        if c.imag or c.real <= 0:
            raise InvalidScaleError(f"scale must be positive, got {c}")
    weights = tuple(c**s for s in range(linear.n))
    scaling = DiagonalScaling(weights)
    return scaling.apply_linear(linear), scaling


def rescale_system(system: PeriodicSystem, c):
    new_linear, scaling = rescale_subdiagonal(system.linear, c)
    return PeriodicSystem(new_linear, scaling.apply(system.F), system.period), scaling
