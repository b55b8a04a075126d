"""Trajectory-level checks of a normalization and coefficient-growth diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra.system import TWO_PI, PeriodicSystem
from .normalform import NormalizationResult
from .numeric import CompiledSeries, integrate

__all__ = [
    "DEFAULT_RADII",
    "GrowthReport",
    "ScalingReport",
    "coefficient_growth",
    "conjugacy_scaling_check",
]

DEFAULT_RADII = (0.2, 0.1, 0.05, 0.025)


@dataclass
class ScalingReport:
    """Trajectory mismatch per initial radius.

    ``fitted_slope`` is the least-squares slope of ``log error`` against
    ``log radius`` over the points above ``floor``; with fewer than two such
    points the check passes vacuously and the slope is ``None``.
    """

    radii: list
    errors: list
    fitted_slope: float | None
    N: int
    passed: bool
    vacuous: bool
    floor: float
    local_slopes: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"N = {self.N}", f"floor = {self.floor:.3e}", "radius        error          local_slope"]
        for i, (r, e) in enumerate(zip(self.radii, self.errors)):
            ls = "-" if i == 0 or self.local_slopes[i - 1] is None else f"{self.local_slopes[i - 1]:.4f}"
            lines.append(f"{r:<13.6g} {e:<14.6e} {ls}")
        slope = "none" if self.fitted_slope is None else f"{self.fitted_slope:.4f}"
        lines.append(f"fitted_slope = {slope}")
        lines.append(f"threshold = {self.N + 0.5}")
        verdict = "pass (vacuous: errors at integrator floor)" if self.vacuous else (
            "pass" if self.passed else "fail")
        lines.append(f"verdict = {verdict}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def _complex_rhs(V: CompiledSeries, A: np.ndarray):
    def rhs(t, z):
        return A @ z + V(z, t)
    return rhs


def _unit_direction(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return u / np.linalg.norm(u)


def conjugacy_scaling_check(system: PeriodicSystem, result: NormalizationResult, radii=DEFAULT_RADII,
                            T_span: float = TWO_PI, rtol: float = 1e-12, atol: float = 1e-14,
                            samples: int = 64, seed: int = 0, floor_factor: float = 100.0) -> ScalingReport:
    """Integrate ``ẋ = Ax + F`` from ``y0 + Φ(y0, 0)`` and ``ẏ = Ay + G`` from ``y0``.

    The error at radius ``ρ = |y0|`` is the maximum over components and
    ``samples`` equispaced times in ``[0, T_span]`` of ``|x - y - Φ(y, t)|``.
    Passing requires a fitted slope of at least ``N + 0.5``.
    """
    radii = [float(r) for r in radii]
    if len(radii) < 2 or any(b >= a for a, b in zip(radii, radii[1:])) or radii[-1] <= 0:
        raise ValueError("radii must be positive and strictly decreasing, at least two of them")
    N = result.N
    A = system.linear.to_numpy()
    F = CompiledSeries(system.F.to_approx() if system.exact else system.F)
    G = CompiledSeries(result.G.to_approx() if result.G.exact else result.G)
    Phi = CompiledSeries(result.Phi.to_approx() if result.Phi.exact else result.Phi)
    u = _unit_direction(system.n, seed)
    times = np.linspace(0.0, T_span, samples)

    errors = []
    for rho in radii:
        y0 = rho * u
        x0 = y0 + Phi(y0, 0.0)
        xs = integrate(_complex_rhs(F, A), (0.0, T_span), x0.astype(complex), t_eval=times, rtol=rtol, atol=atol).y.T
        ys = integrate(_complex_rhs(G, A), (0.0, T_span), y0.astype(complex), t_eval=times, rtol=rtol, atol=atol).y.T
        mismatch = max(float(np.abs(x - y - Phi(y, t)).max()) for x, y, t in zip(xs, ys, times))
        errors.append(mismatch)

    floor = floor_factor * (atol + rtol * radii[0])
    local = []
    for (r1, e1), (r2, e2) in zip(zip(radii, errors), zip(radii[1:], errors[1:])):
        local.append(math.log(e1 / e2) / math.log(r1 / r2) if e1 > floor and e2 > floor else None)
    above = [(r, e) for r, e in zip(radii, errors) if e > floor]
    notes = []
    if len(above) < 2:
        return ScalingReport(radii, errors, None, N, True, True, floor, local, notes)
    x = np.log([r for r, _ in above])
    y = np.log([e for _, e in above])
    slope = float(np.polyfit(x, y, 1)[0])
    finite = [s for s in local if s is not None]
    if len(finite) >= 2 and abs(finite[0] - finite[-1]) > 1.0:
        notes.append("local slopes drift by more than 1; largest radii may be outside the asymptotic regime")
    return ScalingReport(radii, errors, slope, N, slope >= N + 0.5, False, floor, local, notes)


@dataclass
class GrowthReport:
    """``norms[s] = ‖Φ_s‖₁`` and ``ratios[s] = norms[s+1] / norms[s]``."""

    norms: dict
    ratios: dict

    def to_text(self) -> str:
        lines = ["degree  norm            ratio_to_next"]
        for s, v in self.norms.items():
            r = self.ratios.get(s)
            lines.append(f"{s:<7d} {v:<15.6e} {'-' if r is None else f'{r:.6e}'}")
        return "\n".join(lines)


def coefficient_growth(result: NormalizationResult) -> GrowthReport:
    """Per-degree ℓ¹ norms of ``Φ`` and their successive ratios (diagnostic only)."""
    if result.N < 3:
        raise ValueError("coefficient growth needs N >= 3")
    norms = {s: 0.0 for s in range(2, result.N + 1)}
    for (l, _, _), c in result.Phi.items():
        norms[sum(l)] += abs(complex(c))
    ratios = {}
    for s in range(2, result.N):
        a, b = norms[s], norms[s + 1]
        ratios[s] = 0.0 if b == 0 else (math.inf if a == 0 else b / a)
    return GrowthReport(norms, ratios)
