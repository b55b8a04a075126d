"""Numerical Floquet reduction of an autonomous field near a periodic orbit.

Pipeline: :func:`refine_orbit` (Newton shooting with a phase condition),
:func:`monodromy_and_exponents` (variational equation over one period) and
:func:`floquet_transform`, which builds ``A = Log(M)/T``, the periodic
periodic ``Q(t)`` (columns of ``X(t) exp(-At) V``, integrated stably) and the pulled-back nonlinearity ``h``.  The
result is a :class:`PeriodicSystem` in approx mode with time rescaled to
period ``2*pi``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import logm, schur

from .algebra.multiindex import unit
from .algebra.scalars import ExactComplex
from .algebra.series import TaylorFourierSeries, VectorSeries, substitute
from .algebra.system import TWO_PI, LinearPart, PeriodicSystem
from .numeric import CompiledJacobian, CompiledSeries, IntegrationError, integrate

__all__ = [
    "AutonomousField",
    "FloquetError",
    "FloquetReduction",
    "Monodromy",
    "Orbit",
    "OrbitNotFoundError",
    "TrigPolynomial",
    "floquet_transform",
    "monodromy_and_exponents",
    "rationalize_system",
    "reduce_field",
    "refine_orbit",
    "round_trip_error",
]

log = logging.getLogger(__name__)


class OrbitNotFoundError(RuntimeError):
    pass


class FloquetError(RuntimeError):
    pass


class AutonomousField:
    """Polynomial right-hand side ``ẋ = f(x)`` with approx coefficients."""

    def __init__(self, f: VectorSeries):
        if len(f) != f.n:
            raise ValueError("field must have one component per variable")
        if any(k for (_, k, _), _ in f.items()):
            raise ValueError("an autonomous field cannot carry Fourier modes")
        self.f = f.to_approx() if f.exact else f
        self._eval = CompiledSeries(self.f)
        self._jac = CompiledJacobian(self.f)

    @classmethod
    def from_terms(cls, n: int, terms: dict) -> "AutonomousField":
        """``terms`` maps ``(j, l)`` (0-based ``j``) to a coefficient."""
        N = max((sum(l) for (_, l) in terms), default=1)
        return cls(VectorSeries.from_terms(n, N, {(l, 0, j): c for (j, l), c in terms.items()}, exact=False))

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def degree(self) -> int:
        return self.f.max_degree() or 1

    def __call__(self, x) -> np.ndarray:
        return self._eval(x).real

    def jacobian(self, x) -> np.ndarray:
        return self._jac(x).real


class TrigPolynomial:
    """``Σ_{|k|<=K} c_k e^{2πikt/T}`` with array-valued coefficients."""

    def __init__(self, coefficients: np.ndarray, period: float):
        self.coefficients = np.asarray(coefficients)
        self.period = float(period)
        self.band = (len(self.coefficients) - 1) // 2

    @classmethod
    def fit(cls, samples: np.ndarray, period: float, band: int) -> "TrigPolynomial":
        """Least-squares fit from samples at ``t_i = i T / M``; needs ``M > 2 band``."""
        samples = np.asarray(samples)
        M = len(samples)
        if M <= 2 * band:
            raise ValueError(f"{M} samples cannot resolve band {band}")
        c = np.fft.fft(samples, axis=0) / M
        idx = [k % M for k in range(-band, band + 1)]
        return cls(c[idx], period)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.band, self.band + 1)

    def _phases(self, t):
        return np.exp(2j * np.pi * np.multiply.outer(np.atleast_1d(t), self.modes) / self.period)

    def __call__(self, t):
        out = np.tensordot(self._phases(t), self.coefficients, axes=1)
        return out[0] if np.ndim(t) == 0 else out

    def derivative(self, t):
        w = 2j * np.pi * self.modes / self.period
        out = np.tensordot(self._phases(t) * w, self.coefficients, axes=1)
        return out[0] if np.ndim(t) == 0 else out


@dataclass
class Orbit:
    x0: np.ndarray
    period: float
    times: np.ndarray
    samples: np.ndarray
    fit: TrigPolynomial
    defect: float
    iterations: int


@dataclass
class Monodromy:
    matrix: np.ndarray
    multipliers: np.ndarray
    exponents: np.ndarray
    period: float


@dataclass
class FloquetReduction:
    orbit: Orbit
    monodromy: Monodromy
    A: np.ndarray
    V: np.ndarray
    Q: TrigPolynomial
    reduced: PeriodicSystem
    band: int
    residuals: dict = field(default_factory=dict)

    @property
    def phi(self) -> TrigPolynomial:
        return self.orbit.fit

    @property
    def exponents(self) -> np.ndarray:
        return self.monodromy.exponents


def _variational_rhs(field_: AutonomousField):
    n = field_.n

    def rhs(_t, z):
        x = z[:n]
        X = z[n:].reshape(n, n)
        return np.concatenate([field_(x), (field_.jacobian(x) @ X).ravel()])

    return rhs


def _flow(field_, x0, T, t_eval=None, rtol=1e-10, atol=1e-12):
    n = field_.n
    z0 = np.concatenate([np.asarray(x0, float), np.eye(n).ravel()])
    sol = integrate(_variational_rhs(field_), (0.0, T), z0, t_eval=t_eval, rtol=rtol, atol=atol)
    return sol


def refine_orbit(field_: AutonomousField, seed, period_guess: float, tol: float = 1e-10,
                 max_iter: int = 40, rtol: float = 1e-10, atol: float = 1e-12,
                 samples: int = 128, band: int = 16) -> Orbit:
    """Newton shooting on ``(x0, T)`` with the phase condition ``⟨x0 - seed, f(seed)⟩ = 0``."""
    n = field_.n
    seed = np.asarray(seed, dtype=float)
    if seed.shape != (n,):
        raise ValueError(f"seed must have {n} entries")
    f_seed = field_(seed)
    if not np.linalg.norm(f_seed) > 0:
        raise OrbitNotFoundError("seed is an equilibrium; no transversal section")
    x0, T = seed.copy(), float(period_guess)
    if not T > 0:
        raise ValueError("period guess must be positive")
    # a shrinking period makes the return defect vanish trivially
    T_min = 1e-3 * T
    defect = np.inf
    for it in range(1, max_iter + 1):
        if not (np.isfinite(T) and T > T_min) or not np.all(np.isfinite(x0)):
            raise OrbitNotFoundError(f"Newton iterate left the admissible region at step {it}")
        try:
            sol = _flow(field_, x0, T, rtol=rtol, atol=atol)
        except IntegrationError as exc:
            raise OrbitNotFoundError(str(exc)) from exc
        xT = sol.y[:n, -1]
        M = sol.y[n:, -1].reshape(n, n)
        r = xT - x0
        defect = float(np.linalg.norm(r))
        if defect < tol:
            break
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = M - np.eye(n)
        J[:n, n] = field_(xT)
        J[n, :n] = f_seed
        rhs = -np.concatenate([r, [np.dot(x0 - seed, f_seed)]])
        step = np.linalg.lstsq(J, rhs, rcond=None)[0]
        x0 = x0 + step[:n]
        T = T + step[n]
    else:
        raise OrbitNotFoundError(f"no convergence after {max_iter} iterations (defect {defect:.3e})")
    if np.linalg.norm(field_(x0)) < 1e-6 * np.linalg.norm(f_seed):
        raise OrbitNotFoundError("Newton collapsed onto an equilibrium")

    M_samp = max(samples, 2 * band + 2)
    times = np.arange(M_samp) * T / M_samp
    try:
        sol = integrate(lambda _t, x: field_(x), (0.0, T), x0, t_eval=times, rtol=rtol, atol=atol)
    except IntegrationError as exc:
        raise OrbitNotFoundError(str(exc)) from exc
    pts = sol.y.T
    return Orbit(x0, float(T), times, pts, TrigPolynomial.fit(pts, T, band), defect, it)


def _principal_exponents(multipliers, T):
    return np.log(multipliers.astype(complex)) / T


def monodromy_and_exponents(field_: AutonomousField, orbit: Orbit, rtol: float = 1e-10,
                            atol: float = 1e-12) -> Monodromy:
    """Monodromy from the variational equation; exponents on the principal branch.

    Ordered by decreasing real part, ties by imaginary part.
    """
    n = field_.n
    sol = _flow(field_, orbit.x0, orbit.period, rtol=rtol, atol=atol)
    M = sol.y[n:, -1].reshape(n, n)
    mult = np.linalg.eigvals(M).astype(complex)
    mu = _principal_exponents(mult, orbit.period)
    order = np.lexsort((mu.imag, -mu.real))
    return Monodromy(M, mult[order], mu[order], orbit.period)


def _bidiagonal_basis(A: np.ndarray, cond_limit: float):
    """Basis ``V`` with ``V^{-1} A V`` lower bidiagonal; returns ``(V, lam, sigma)``."""
    n = len(A)
    w, V = np.linalg.eig(A)
    # keep the eigenvalue nearest zero last, others by decreasing real part
    zero = int(np.argmin(np.abs(w)))
    rest = sorted((i for i in range(n) if i != zero), key=lambda i: (-w[i].real, w[i].imag))
    order = rest + [zero]
    w, V = w[order], V[:, order]
    if np.linalg.cond(V) < cond_limit:
        return V, w, np.zeros(n - 1, dtype=complex)
    # defective: complex Schur, reversed to lower-triangular
    Tm, Z = schur(A.astype(complex), output="complex")
    P = np.eye(n)[::-1]
    L = P @ Tm @ P
    Z = Z @ P
    scale = max(1.0, np.abs(L).max())
    if n > 2 and np.abs(np.tril(L, -2)).max() > 1e-8 * scale:
        raise FloquetError("log-monodromy is not numerically reducible to lower-bidiagonal form")
    return Z, np.diag(L).copy(), np.diag(L, -1).copy()


def _pullback_nonlinearity(field_: AutonomousField, p: np.ndarray, Qi: np.ndarray,
                           Qinv: np.ndarray, N: int) -> dict:
    """Degree ``2..N`` Taylor coefficients of ``Q^{-1}[f(p + QZ) - f(p) - Df(p)QZ]``."""
    n = field_.n
    X = VectorSeries([
        TaylorFourierSeries(
            n, N,
            {((0,) * n, 0): complex(p[m]), **{(unit(n, r), 0): complex(Qi[m, r]) for r in range(n)}},
            exact=False,
        )
        for m in range(n)
    ])
    g = substitute(field_.f.with_bound(N), X, N).degree_range(2, N)
    out: dict = {}
    for b in range(n):
        for (l, _), c in g[b].terms.items():
            for a in range(n):
                if Qinv[a, b]:
                    out[(l, a)] = out.get((l, a), 0j) + Qinv[a, b] * c
    return out


def _periodic_column(field_, phi, lam, sigma, V, j, T, rtol, atol):
    """Column ``j`` of ``Q`` from ``q_j' = (Df(φ) - λ_j) q_j - σ_j q_{j+1}``, ``q_j(0) = q_j(T) = V e_j``.

    Integrated in whichever time direction contracts the other Floquet modes,
    so stable directions are not amplified.  Columns chained to ``j`` through
    nonzero subdiagonal entries are carried along.
    """
    n = len(lam)
    group = [j]
    while group[-1] < n - 1 and sigma[group[-1]] != 0:
        group.append(group[-1] + 1)
    m = len(group)
    others = [lam[i].real - lam[j].real for i in range(n) if i != j]
    backward = max(others, default=0.0) > max((-v for v in others), default=0.0)

    def rhs(t, z):
        Qg = z.reshape(n, m)
        J = field_.jacobian(phi(t))
        out = J @ Qg - Qg * lam[group]
        out[:, :-1] -= Qg[:, 1:] * sigma[group[:-1]]
        return out.ravel()

    z0 = V[:, group].astype(complex).ravel()
    span = (T, 0.0) if backward else (0.0, T)
    sol = integrate(rhs, span, z0, rtol=rtol, atol=atol, dense=True)
    return lambda t: sol.sol(t).reshape(n, m, *np.shape(t))[:, 0]


def _q_equation_defect(field_, orbit_fit: TrigPolynomial, Q: TrigPolynomial, Lmat: np.ndarray,
                       M: int) -> float:
    t = np.arange(M) * Q.period / M + Q.period / (2 * M)
    phi, Qv, dQ = orbit_fit(t), Q(t), Q.derivative(t)
    worst = 0.0
    for i in range(M):
        J = field_.jacobian(phi[i].real)
        worst = max(worst, float(np.abs(dQ[i] - (J @ Qv[i] - Qv[i] @ Lmat)).max()))
    return worst


def floquet_transform(field_: AutonomousField, orbit: Orbit, monodromy: Monodromy, N: int | None = None,
                      band: int = 16, band_cap: int = 64, q_tol: float = 1e-8, rtol: float = 1e-10,
                      atol: float = 1e-12, coeff_floor: float = 1e-9,
                      cond_warning: float = 1e8) -> FloquetReduction:
    """Reduce to ``Ẏ = ΛY + h(Y, τ)`` with ``τ = 2πt/T``.

    ``N`` defaults to the polynomial degree of the field, in which case the
    Taylor expansion of the nonlinearity is exact.  The Fourier band doubles
    until the Q-equation defect drops below ``q_tol`` or exceeds ``band_cap``.
    Coefficients of ``h`` below ``coeff_floor`` are at the noise level of
    the integration and are dropped.
    """
    n, T = field_.n, orbit.period
    N = max(2, field_.degree if N is None else N)
    A = logm(monodromy.matrix.astype(complex)) / T
    A = np.asarray(A, dtype=complex)
    V, lam, sigma = _bidiagonal_basis(A, cond_limit=1e10)
    Lmat = np.diag(lam) + np.diag(sigma, -1)
    Vinv = np.linalg.inv(V)

    K = band
    orbit_sol = integrate(lambda _t, x: field_(x), (0.0, T), orbit.x0, rtol=rtol, atol=atol, dense=True)
    Q_cols = [_periodic_column(field_, orbit_sol.sol, lam, sigma, V, j, T, rtol, atol) for j in range(n)]
    while True:
        M = 4 * K
        grid = np.append(np.arange(M) * T / M, T)
        phis = orbit_sol.sol(grid).T
        Qs = np.stack([col(grid).T for col in Q_cols], axis=2)
        phi_fit = TrigPolynomial.fit(phis[:-1], T, K)
        Q = TrigPolynomial.fit(Qs[:-1], T, K)
        q_defect = _q_equation_defect(field_, phi_fit, Q, Lmat, 2 * M)
        if q_defect < q_tol or 2 * K > band_cap:
            break
        K *= 2
    if q_defect >= q_tol:
        log.warning("Q-equation defect %.3e above %.1e at band cap %d", q_defect, q_tol, K)

    conds = [np.linalg.cond(Qi) for Qi in Qs[:-1]]
    worst = float(max(conds))
    if worst > cond_warning:
        warnings.warn(f"ill-conditioned Q(t): worst condition number {worst:.3e}", RuntimeWarning)

    # h sampled on the grid, Fourier-analysed in τ
    per_sample = [_pullback_nonlinearity(field_, phis[i], Qs[i], np.linalg.inv(Qs[i]), N) for i in range(M)]
    keys = sorted({key for d in per_sample for key in d})
    scale = T / TWO_PI
    terms = {}
    for key in keys:
        vals = np.array([d.get(key, 0j) for d in per_sample])
        c = np.fft.fft(vals) / M
        for k in range(-K, K + 1):
            v = c[k % M] * scale
            if abs(v) > coeff_floor:
                l, j = key
                terms[(l, k, j)] = complex(v)
    h = VectorSeries.from_terms(n, N, terms, exact=False)
    linear = LinearPart(tuple(complex(v) * scale for v in lam), tuple(complex(v) * scale for v in sigma))
    reduced = PeriodicSystem(linear, h, period=T)
    residuals = {
        "orbit_defect": orbit.defect,
        "q_equation_defect": q_defect,
        "q_periodicity": float(np.abs(Qs[-1] - Qs[0]).max()),
        "worst_condition": worst,
        "reconstruction": float(np.abs(V @ Lmat @ Vinv - A).max()),
    }
    return FloquetReduction(orbit, monodromy, A, V, Q, reduced, K, residuals)


def reduce_field(field_: AutonomousField, seed, period_guess: float, N: int | None = None,
                 tol: float = 1e-10, rtol: float = 1e-10, atol: float = 1e-12,
                 band: int = 16, band_cap: int = 64) -> FloquetReduction:
    """Orbit refinement, monodromy and reduction in one call."""
    orbit = refine_orbit(field_, seed, period_guess, tol=tol, rtol=rtol, atol=atol, band=band)
    mono = monodromy_and_exponents(field_, orbit, rtol=rtol, atol=atol)
    return floquet_transform(field_, orbit, mono, N=N, band=band, band_cap=band_cap, rtol=rtol, atol=atol)


def round_trip_error(field_: AutonomousField, reduction: FloquetReduction, Z0, samples: int = 64,
                     rtol: float = 1e-11, atol: float = 1e-13) -> float:
    """Max deviation of ``φ(t) + Q(t) Z(τ)`` from the true trajectory over one period."""
    T = reduction.orbit.period
    Z0 = np.asarray(Z0, dtype=complex)
    sys_ = reduction.reduced
    rhs_h = CompiledSeries(sys_.F)
    Lmat = sys_.linear.to_numpy()

    def reduced_rhs(tau, z):
        Z = z[: len(Z0)] + 1j * z[len(Z0):]
        dZ = Lmat @ Z + rhs_h(Z, tau)
        return np.concatenate([dZ.real, dZ.imag])

    taus = np.linspace(0.0, TWO_PI, samples)
    solZ = integrate(reduced_rhs, (0.0, TWO_PI), np.concatenate([Z0.real, Z0.imag]), t_eval=taus,
                     rtol=rtol, atol=atol)
    Zs = solZ.y[: len(Z0)].T + 1j * solZ.y[len(Z0):].T
    ts = np.minimum(taus * T / TWO_PI, T)
    phi, Q = reduction.phi, reduction.Q
    x0 = (phi(0.0) + Q(0.0) @ Z0).real
    solX = integrate(lambda _t, x: field_(x), (0.0, T), x0, t_eval=ts, rtol=rtol, atol=atol)
    recon = phi(ts) + np.einsum("tij,tj->ti", Q(ts), Zs)
    return float(np.abs(solX.y.T - recon).max())


def rationalize_system(system: PeriodicSystem, snap_tol: float = 1e-9, max_den: int = 64):
    """Snap every real and imaginary part to ``p/q`` with ``q <= max_den``.

    Returns ``(exact_system_or_None, log_lines)``; ``None`` when some value
    has no rational within ``snap_tol``.
    """
    lines, failed = [], []

    def snap(x: float, where: str):
        q = Fraction(x).limit_denominator(max_den)
        if abs(x - float(q)) < snap_tol:
            if float(q) != x:
                lines.append(f"snap {where}: {x!r} -> {q}")
            return q
        failed.append(f"{where}: {x!r}")
        return None

    def snap_complex(c, where):
        c = complex(c)
        re, im = snap(c.real, where + ".re"), snap(c.imag, where + ".im")
        if re is None or im is None:
            return None
        return ExactComplex(re, im)

    lam = [snap_complex(v, f"lambda[{j + 1}]") for j, v in enumerate(system.linear.lam)]
    sig = [snap_complex(v, f"sigma[{j + 1}]") for j, v in enumerate(system.linear.sigma)]
    terms = {}
    for (l, k, j), c in system.F.items():
        v = snap_complex(c, f"term(j={j + 1}, l={list(l)}, k={k})")
        if v is not None:
            terms[(l, k, j)] = v
    for where in failed:
        lines.append(f"no snap {where}")
    for line in lines:
        log.info(line)
    if failed:
        return None, lines
    F = VectorSeries.from_terms(system.n, system.N, terms, exact=True)
    return PeriodicSystem(LinearPart(tuple(lam), tuple(sig)), F, period=system.period), lines
