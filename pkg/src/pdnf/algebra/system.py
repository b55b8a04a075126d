"""Linear parts and periodic systems ``ẋ = A x + F(x, t)``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scalars import ExactComplex, as_exact, parse_exact
from .series import VectorSeries

__all__ = ["InvariantViolation", "LinearPart", "PeriodicSystem", "TWO_PI"]

TWO_PI = 2 * math.pi


class InvariantViolation(ValueError):
    """A domain invariant (e.g. no linear terms in ``F``) does not hold."""


def _is_inexact(x) -> bool:
    return isinstance(x, (float, complex, np.floating, np.complexfloating))


@dataclass(frozen=True)
class LinearPart:
    """Lower-bidiagonal ``A`` with diagonal ``lam`` and subdiagonal ``sigma``.

    ``sigma[j-1]`` is the entry ``A[j, j-1]`` (0-based rows), i.e. the
    coupling of component ``j`` to component ``j-1``.
    """

    lam: tuple
    sigma: tuple = ()

    def __post_init__(self):
        lam = tuple(self.lam)
        n = len(lam)
        if n == 0:
            raise ValueError("empty eigenvalue vector")
        sigma = tuple(self.sigma) if self.sigma else (0,) * (n - 1)
        if len(sigma) != n - 1:
            raise ValueError(f"expected {n - 1} subdiagonal entries, got {len(sigma)}")
        if any(_is_inexact(v) for v in lam + sigma):
            conv = lambda v: complex(v)
        else:
            conv = lambda v: parse_exact(v) if isinstance(v, str) else as_exact(v)
        object.__setattr__(self, "lam", tuple(conv(v) for v in lam))
        object.__setattr__(self, "sigma", tuple(conv(v) for v in sigma))

    @property
    def n(self) -> int:
        return len(self.lam)

    @property
    def exact(self) -> bool:
        return isinstance(self.lam[0], ExactComplex)

    @property
    def is_diagonal(self) -> bool:
        return not any(self.sigma)

    def matrix(self) -> list:
        zero = self.lam[0] * 0
        rows = [[zero] * self.n for _ in range(self.n)]
        for j in range(self.n):
            rows[j][j] = self.lam[j]
            if j:
                rows[j][j - 1] = self.sigma[j - 1]
        return rows

    def to_numpy(self) -> np.ndarray:
        return np.array([[complex(v) for v in row] for row in self.matrix()], dtype=complex)

    def apply(self, Y: VectorSeries) -> VectorSeries:
        """``A · Y`` for a vector series ``Y``."""
        out = []
        for j in range(self.n):
            comp = Y[j].scale(self.lam[j])
            if j and self.sigma[j - 1]:
                comp = comp + Y[j - 1].scale(self.sigma[j - 1])
            out.append(comp)
        return VectorSeries(out)

    def as_series(self, N: int) -> VectorSeries:
        """The linear field ``A y``."""
        return self.apply(VectorSeries.identity(self.n, N, self.exact))

    def to_approx(self) -> "LinearPart":
        return LinearPart(tuple(complex(v) for v in self.lam), tuple(complex(v) for v in self.sigma))


@dataclass(frozen=True)
class PeriodicSystem:
    """``ẋ = A x + F(x, t)`` with time normalized to period ``2*pi``.

    ``period`` records the original period before normalization; all series
    data (modes, eigenvalues, coefficients) refer to the normalized time.
    """

    linear: LinearPart
    F: VectorSeries
    period: float = TWO_PI
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = self.linear.n
        if len(self.F) != n or self.F.n != n:
            raise InvariantViolation(f"F must be an {n}-vector series in {n} variables")
        if self.F.exact != self.linear.exact:
            raise InvariantViolation("F and the linear part use different scalar modes")
        for (l, k, j), _ in self.F.items():
            if sum(l) < 2:
                raise InvariantViolation(
                    f"F contains a term of degree {sum(l)} at (j={j + 1}, l={list(l)}, k={k})"
                )

    @property
    def n(self) -> int:
        return self.linear.n

    @property
    def N(self) -> int:
        return self.F.N

    @property
    def exact(self) -> bool:
        return self.linear.exact

    def vector_field(self, N: int | None = None) -> VectorSeries:
        """``A x + F`` as one vector series."""
        N = self.N if N is None else N
        return self.linear.as_series(N) + self.F.with_bound(N)

    def with_F(self, F: VectorSeries) -> "PeriodicSystem":
        return PeriodicSystem(self.linear, F, self.period)

    def to_approx(self) -> "PeriodicSystem":
        return PeriodicSystem(self.linear.to_approx(), self.F.to_approx(), self.period)

