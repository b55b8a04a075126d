"""Numerical evaluation of series and a thin ODE-integration wrapper."""
from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .algebra.series import TaylorFourierSeries, VectorSeries

__all__ = ["CompiledJacobian", "CompiledSeries", "IntegrationError", "integrate"]


class IntegrationError(RuntimeError):
    pass


class CompiledSeries:
    """Vectorized evaluator for a vector series ``V(y, t)`` (complex output)."""

    def __init__(self, V: VectorSeries | TaylorFourierSeries):
        comps = [V] if isinstance(V, TaylorFourierSeries) else list(V)
        self.dim = len(comps)
        self.n = comps[0].n
        rows = [(l, k, j, complex(c)) for j, comp in enumerate(comps) for (l, k), c in comp.terms.items()]
        self.exps = np.array([r[0] for r in rows], dtype=int).reshape(len(rows), self.n)
        self.modes = np.array([r[1] for r in rows], dtype=float)
        self.comps = np.array([r[2] for r in rows], dtype=int)
        self.coeffs = np.array([r[3] for r in rows], dtype=complex)
        self.autonomous = not np.any(self.modes)

    def __call__(self, y, t: float = 0.0) -> np.ndarray:
        if not len(self.coeffs):
            return np.zeros(self.dim, dtype=complex)
        y = np.asarray(y, dtype=complex)
        mono = np.prod(y[None, :] ** self.exps, axis=1)
        vals = self.coeffs * mono
        if not self.autonomous:
            vals = vals * np.exp(1j * self.modes * t)
        out = np.zeros(self.dim, dtype=complex)
        np.add.at(out, self.comps, vals)
        return out


class CompiledJacobian:
    """``∂V/∂y`` evaluated as a ``(dim, n)`` complex matrix."""

    def __init__(self, V: VectorSeries):
        self.columns = [CompiledSeries(VectorSeries([c.derivative(m) for c in V])) for m in range(V.n)]

    def __call__(self, y, t: float = 0.0) -> np.ndarray:
        return np.stack([col(y, t) for col in self.columns], axis=1)


def integrate(rhs, t_span, y0, t_eval=None, rtol=1e-10, atol=1e-12, method="DOP853", dense=False):
    """``solve_ivp`` with failure turned into :class:`IntegrationError`."""
    sol = solve_ivp(rhs, t_span, y0, t_eval=t_eval, rtol=rtol, atol=atol,
                    method=method, dense_output=dense)
    if not sol.success or not np.all(np.isfinite(sol.y)):
        raise IntegrationError(f"integration failed: {sol.message}")
    return sol
