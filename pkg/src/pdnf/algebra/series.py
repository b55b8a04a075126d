"""Sparse truncated Taylor-Fourier series.

A scalar series is a finite sum ``sum c_{l,k} y^l e^{ikt}`` with ``|l| <= N``,
stored as a dict ``{(l, k): c}`` without zero entries.  Time is normalized so
that the period is ``2*pi``; Fourier modes are integers.

Vector-valued series are tuples of scalar series (:class:`VectorSeries`);
their term keys are ``(l, k, j)`` with a 0-based component index ``j``.
"""
from __future__ import annotations

import operator
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .multiindex import unit
from .scalars import ONE, ZERO, ExactComplex, I, as_exact

__all__ = [
    "IncompatibleOperandsError",
    "TaylorFourierSeries",
    "VectorSeries",
    "compose",
    "derive",
    "series_arith",
    "substitute",
]

_add = operator.add


class IncompatibleOperandsError(ValueError):
    """Operands differ in dimension or scalar mode."""


def _promote(c, exact: bool):
    if exact:
        return as_exact(c)
    if isinstance(c, ExactComplex):
        return complex(c)
    return complex(c)


def _zero(exact: bool):
    return ZERO if exact else 0j


def _one(exact: bool):
    return ONE if exact else 1 + 0j


def _imag_unit(exact: bool):
    return I if exact else 1j


class TaylorFourierSeries:
    """Scalar series in ``n`` variables truncated at Taylor degree ``N``.

    Parameters
    ----------
    n : int
        Number of variables.
    N : int
        Truncation degree; every stored term has ``|l| <= N``.
    terms : mapping, optional
        ``{(l, k): coefficient}``.  Zero coefficients are dropped.
    exact : bool
        Coefficient domain: :class:`ExactComplex` when true, ``complex`` when
        false.
    """

    __slots__ = ("n", "N", "exact", "terms")

    def __init__(self, n: int, N: int, terms: Mapping | None = None, exact: bool = True):
        if n < 0 or N < 0:
            raise ValueError("dimension and truncation degree must be nonnegative")
        clean = {}
        for (l, k), c in (terms or {}).items():
            l = tuple(int(v) for v in l)
            if len(l) != n:
                raise IncompatibleOperandsError(f"multi-index {l} has length != {n}")
            if any(v < 0 for v in l):
                raise ValueError(f"negative exponent in {l}")
            if sum(l) > N:
                raise ValueError(f"term {l} exceeds truncation degree {N}")
            c = _promote(c, exact)
            if c:
                key = (l, int(k))
                if key in clean:
                    c = clean[key] + c
                    if not c:
                        del clean[key]
                        continue
                clean[key] = c
        self.n = n
        self.N = N
        self.exact = exact
        self.terms = clean

    @classmethod
    def _new(cls, n, N, exact, terms) -> "TaylorFourierSeries":
        obj = object.__new__(cls)
        obj.n = n
        obj.N = N
        obj.exact = exact
        obj.terms = terms
        return obj

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, n: int, N: int, exact: bool = True) -> "TaylorFourierSeries":
        return cls._new(n, N, exact, {})

    @classmethod
    def monomial(cls, n, N, l, k=0, coeff=1, exact=True) -> "TaylorFourierSeries":
        return cls(n, N, {(tuple(l), k): coeff}, exact=exact)

    @classmethod
    def variable(cls, n, N, m, exact=True) -> "TaylorFourierSeries":
        """The coordinate function ``y_m`` (0-based)."""
        return cls._new(n, N, exact, {(unit(n, m), 0): _one(exact)})

    # -- inspection -------------------------------------------------------
    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __getitem__(self, key):
        l, k = key
        return self.terms.get((tuple(l), k), _zero(self.exact))

    def items(self) -> list:
        """Terms in canonical order: degree, ``≻`` on ``l``, mode."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0][0]), kv[0][0], kv[0][1]))

    def modes(self) -> set:
        return {k for (_, k) in self.terms}

    def min_degree(self):
        return min((sum(l) for (l, _) in self.terms), default=None)

    def max_degree(self):
        return max((sum(l) for (l, _) in self.terms), default=None)

    def __eq__(self, other):
        if not isinstance(other, TaylorFourierSeries):
            return NotImplemented
        return self.n == other.n and self.exact == other.exact and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        from .scalars import format_scalar

        body = " + ".join(
            f"({format_scalar(c)})*y^{list(l)}*e^({k}it)" for (l, k), c in self.items()
        )
        return f"TaylorFourierSeries(n={self.n}, N={self.N}, {body or '0'})"

    # -- structural ops ---------------------------------------------------
    def _check(self, other: "TaylorFourierSeries"):
        if self.n != other.n:
            raise IncompatibleOperandsError(f"dimension mismatch: {self.n} != {other.n}")
        if self.exact != other.exact:
            raise IncompatibleOperandsError("scalar mode mismatch (exact vs approx)")

    def truncate(self, N: int) -> "TaylorFourierSeries":
        if N >= self.N:
            return TaylorFourierSeries._new(self.n, self.N, self.exact, dict(self.terms))
        return TaylorFourierSeries._new(
            self.n, N, self.exact, {key: c for key, c in self.terms.items() if sum(key[0]) <= N}
        )

    def with_bound(self, N: int) -> "TaylorFourierSeries":
        """Same terms with truncation bound ``N`` (terms above ``N`` dropped)."""
        return TaylorFourierSeries._new(
            self.n, N, self.exact, {key: c for key, c in self.terms.items() if sum(key[0]) <= N}
        )

    def degree_part(self, d: int) -> "TaylorFourierSeries":
        return TaylorFourierSeries._new(
            self.n, self.N, self.exact, {key: c for key, c in self.terms.items() if sum(key[0]) == d}
        )

    def degree_range(self, lo: int, hi: int) -> "TaylorFourierSeries":
        return TaylorFourierSeries._new(
            self.n,
            self.N,
            self.exact,
            {key: c for key, c in self.terms.items() if lo <= sum(key[0]) <= hi},
        )

    def map_coefficients(self, fn: Callable, exact: bool | None = None) -> "TaylorFourierSeries":
        exact = self.exact if exact is None else exact
        return TaylorFourierSeries(
            self.n, self.N, {key: fn(key, c) for key, c in self.terms.items()}, exact=exact
        )

    def to_approx(self) -> "TaylorFourierSeries":
        if not self.exact:
            return self
        return TaylorFourierSeries._new(
            self.n, self.N, False, {key: complex(c) for key, c in self.terms.items()}
        )

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TaylorFourierSeries):
            return NotImplemented
        self._check(other)
        N = min(self.N, other.N)
        out = {key: c for key, c in self.terms.items() if sum(key[0]) <= N}
        for key, c in other.terms.items():
            if sum(key[0]) > N:
                continue
            if key in out:
                s = out[key] + c
                if s:
                    out[key] = s
                else:
                    del out[key]
            else:
                out[key] = c
        return TaylorFourierSeries._new(self.n, N, self.exact, out)

    def __neg__(self):
        return TaylorFourierSeries._new(
            self.n, self.N, self.exact, {key: -c for key, c in self.terms.items()}
        )

    def __sub__(self, other):
        if not isinstance(other, TaylorFourierSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "TaylorFourierSeries":
        c = _promote(c, self.exact)
        if not c:
            return TaylorFourierSeries.zero(self.n, self.N, self.exact)
        return TaylorFourierSeries._new(
            self.n, self.N, self.exact, {key: v * c for key, v in self.terms.items()}
        )

    def __mul__(self, other):
        if isinstance(other, TaylorFourierSeries):
            return _mul(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def shift(self, k: int) -> "TaylorFourierSeries":
        """Multiply by ``e^{ikt}``."""
        if not k:
            return self
        return TaylorFourierSeries._new(
            self.n, self.N, self.exact, {(l, m + k): c for (l, m), c in self.terms.items()}
        )

    # -- calculus ---------------------------------------------------------
    def derivative_t(self) -> "TaylorFourierSeries":
        """``∂_t``: each term is multiplied by ``ik``."""
        iu = _imag_unit(self.exact)
        return TaylorFourierSeries._new(
            self.n,
            self.N,
            self.exact,
            {(l, k): c * (iu * k) for (l, k), c in self.terms.items() if k},
        )

    def derivative(self, m: int) -> "TaylorFourierSeries":
        """``∂/∂y_m`` (0-based ``m``)."""
        out = {}
        for (l, k), c in self.terms.items():
            e = l[m]
            if e:
                nl = l[:m] + (e - 1,) + l[m + 1 :]
                out[(nl, k)] = c * e
        return TaylorFourierSeries._new(self.n, self.N, self.exact, out)

    def gradient(self) -> list:
        return [self.derivative(m) for m in range(self.n)]

    # -- evaluation -------------------------------------------------------
    def evaluate(self, y: Sequence, phase):
        """Evaluate at ``y`` with ``phase = e^{it}`` (exact or complex).

        Exact evaluation needs ``|phase| = 1`` so that ``e^{-it}`` is the
        conjugate; the caller provides such a point.
        """
        total = _zero(self.exact)
        conj = phase.conjugate()
        for (l, k), c in self.terms.items():
            v = c
            for ym, e in zip(y, l):
                if e:
                    v = v * ym**e
            if k > 0:
                v = v * phase**k
            elif k < 0:
                v = v * conj ** (-k)
            total = total + v
        return total


def _mul(a: TaylorFourierSeries, b: TaylorFourierSeries) -> TaylorFourierSeries:
    a._check(b)
    N = min(a.N, b.N)
    if not a.terms or not b.terms:
        return TaylorFourierSeries._new(a.n, N, a.exact, {})
    by_deg_b: dict = {}
    for (l, k), c in b.terms.items():
        by_deg_b.setdefault(sum(l), []).append((l, k, c))
    degs_b = sorted(by_deg_b)
    out: dict = {}
    get = out.get
    for (l1, k1), c1 in a.terms.items():
        d1 = sum(l1)
        for d2 in degs_b:
            if d1 + d2 > N:
                break
            for l2, k2, c2 in by_deg_b[d2]:
                key = (tuple(map(_add, l1, l2)), k1 + k2)
                prev = get(key)
                out[key] = c1 * c2 if prev is None else prev + c1 * c2
    return TaylorFourierSeries._new(a.n, N, a.exact, {k: v for k, v in out.items() if v})


class VectorSeries:
    """Tuple of scalar series sharing ``n``, ``N`` and scalar mode."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[TaylorFourierSeries]):
        comps = tuple(components)
        if not comps:
            raise ValueError("vector series needs at least one component")
        first = comps[0]
        for c in comps[1:]:
            first._check(c)
        self.components = comps

    @classmethod
    def zero(cls, n: int, N: int, exact: bool = True, dim: int | None = None) -> "VectorSeries":
        return cls([TaylorFourierSeries.zero(n, N, exact) for _ in range(n if dim is None else dim)])

    @classmethod
    def from_terms(cls, n: int, N: int, terms: Mapping, exact: bool = True, dim: int | None = None):
        """Build from ``{(l, k, j): c}`` with 0-based ``j``."""
        dim = n if dim is None else dim
        buckets: list = [{} for _ in range(dim)]
        for (l, k, j), c in terms.items():
            if not 0 <= j < dim:
                raise IncompatibleOperandsError(f"component index {j} out of range")
            buckets[j][(tuple(l), k)] = c
        return cls([TaylorFourierSeries(n, N, b, exact=exact) for b in buckets])

    @classmethod
    def identity(cls, n: int, N: int, exact: bool = True) -> "VectorSeries":
        return cls([TaylorFourierSeries.variable(n, N, m, exact) for m in range(n)])

    # -- inspection -------------------------------------------------------
    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def N(self) -> int:
        return min(c.N for c in self.components)

    @property
    def exact(self) -> bool:
        return self.components[0].exact

    def __len__(self):
        return len(self.components)

    def __iter__(self) -> Iterator[TaylorFourierSeries]:
        return iter(self.components)

    def __getitem__(self, j) -> TaylorFourierSeries:
        return self.components[j]

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)

    def term_count(self) -> int:
        return sum(len(c) for c in self.components)

    def items(self) -> list:
        """``((l, k, j), c)`` in canonical order: degree, ``≻`` on l, k, j."""
        flat = [
            ((l, k, j), c)
            for j, comp in enumerate(self.components)
            for (l, k), c in comp.terms.items()
        ]
        flat.sort(key=lambda kv: (sum(kv[0][0]), kv[0][0], kv[0][1], kv[0][2]))
        return flat

    def coefficient(self, l, k, j):
        return self.components[j][(l, k)]

    def modes(self) -> set:
        return set().union(*(c.modes() for c in self.components))

    def min_degree(self):
        return min((d for d in (c.min_degree() for c in self.components) if d is not None), default=None)

    def max_degree(self):
        return max((d for d in (c.max_degree() for c in self.components) if d is not None), default=None)

    def __eq__(self, other):
        if not isinstance(other, VectorSeries):
            return NotImplemented
        return len(self) == len(other) and all(a == b for a, b in zip(self, other))

    __hash__ = None

    def __repr__(self):
        return "VectorSeries(" + ", ".join(repr(c) for c in self.components) + ")"

    # -- algebra ----------------------------------------------------------
    def _zip(self, other, op):
        if not isinstance(other, VectorSeries):
            return NotImplemented
        if len(self) != len(other):
            raise IncompatibleOperandsError("vector length mismatch")
        return VectorSeries([op(a, b) for a, b in zip(self, other)])

    def __add__(self, other):
        return self._zip(other, operator.add)

    def __sub__(self, other):
        return self._zip(other, operator.sub)

    def __neg__(self):
        return VectorSeries([-c for c in self.components])

    def scale(self, c) -> "VectorSeries":
        return VectorSeries([comp.scale(c) for comp in self.components])

    def map(self, fn: Callable[[TaylorFourierSeries], TaylorFourierSeries]) -> "VectorSeries":
        return VectorSeries([fn(c) for c in self.components])

    def truncate(self, N: int) -> "VectorSeries":
        return self.map(lambda c: c.truncate(N))

    def with_bound(self, N: int) -> "VectorSeries":
        return self.map(lambda c: c.with_bound(N))

    def degree_part(self, d: int) -> "VectorSeries":
        return self.map(lambda c: c.degree_part(d))

    def degree_range(self, lo: int, hi: int) -> "VectorSeries":
        return self.map(lambda c: c.degree_range(lo, hi))

    def to_approx(self) -> "VectorSeries":
        return self.map(TaylorFourierSeries.to_approx)

    def derivative_t(self) -> "VectorSeries":
        return self.map(TaylorFourierSeries.derivative_t)

    def jacobian(self) -> list:
        """Matrix ``[[∂ self_i / ∂ y_m]]`` of scalar series."""
        return [c.gradient() for c in self.components]

    def jacobian_times(self, other: "VectorSeries") -> "VectorSeries":
        """``∂_y self · other`` (the ``⟨∂_yΦ, G⟩`` product)."""
        if len(other) != self.n:
            raise IncompatibleOperandsError("jacobian product: length mismatch")
        out = []
        for comp in self.components:
            acc = TaylorFourierSeries.zero(comp.n, min(comp.N, other.N), comp.exact)
            for m in range(comp.n):
                d = comp.derivative(m)
                if d and other[m]:
                    acc = acc + d * other[m]
            out.append(acc)
        return VectorSeries(out)

    def evaluate(self, y, phase) -> list:
        return [c.evaluate(y, phase) for c in self.components]


# -- composition ----------------------------------------------------------
class _PowerCache:
    """Memoized products ``X^l`` truncated at ``N``."""

    def __init__(self, X: VectorSeries, N: int):
        self.X = [x.with_bound(N) for x in X]
        self.N = N
        self.n_new = X.n
        self.exact = X.exact
        self.cache: dict = {}
        self.min_deg = [x.min_degree() for x in self.X]

    def lowest_degree(self, l) -> int | None:
        total = 0
        for e, d in zip(l, self.min_deg):
            if e:
                if d is None:
                    return None
                total += e * d
        return total

    def get(self, l: tuple) -> TaylorFourierSeries:
        hit = self.cache.get(l)
        if hit is not None:
            return hit
        if not any(l):
            res = TaylorFourierSeries._new(
                self.n_new, self.N, self.exact, {((0,) * self.n_new, 0): _one(self.exact)}
            )
        else:
            m = max(i for i, e in enumerate(l) if e)
            prev = l[:m] + (l[m] - 1,) + l[m + 1 :]
            res = _mul(self.get(prev), self.X[m])
        self.cache[l] = res
        return res


def _substitute_scalar(F: TaylorFourierSeries, powers: _PowerCache, N: int) -> TaylorFourierSeries:
    out: dict = {}
    get = out.get
    for (l, k), c in F.terms.items():
        low = powers.lowest_degree(l)
        if low is None or low > N:
            continue
        for (l2, k2), c2 in powers.get(l).terms.items():
            key = (l2, k + k2)
            prev = get(key)
            out[key] = c * c2 if prev is None else prev + c * c2
    return TaylorFourierSeries._new(powers.n_new, N, F.exact, {k: v for k, v in out.items() if v})


def substitute(F, X: VectorSeries, N: int):
    """``F(X(y, t), t)`` truncated at degree ``N``.

    ``F`` is a scalar or vector series in ``len(X)`` variables; ``X`` may
    contain terms of any degree, including constants.
    """
    comps = [F] if isinstance(F, TaylorFourierSeries) else list(F)
    if comps[0].n != len(X):
        raise IncompatibleOperandsError(
            f"substitution expects {comps[0].n} components, got {len(X)}"
        )
    if comps[0].exact != X.exact:
        raise IncompatibleOperandsError("scalar mode mismatch (exact vs approx)")
    powers = _PowerCache(X, N)
    out = [_substitute_scalar(c, powers, N) for c in comps]
    return out[0] if isinstance(F, TaylorFourierSeries) else VectorSeries(out)


def compose(F, Phi: VectorSeries, N: int):
    """``F(y + Φ(y, t), t)`` truncated at degree ``N``.

    The degree-``s`` part depends only on ``Φ_2 .. Φ_{s-1}`` because ``F``
    has no constant term in the intended use and ``Φ`` starts at degree 2.
    """
    n = Phi.n
    if len(Phi) != n:
        raise IncompatibleOperandsError("Φ must have one component per variable")
    low = Phi.min_degree()
    if low is not None and low < 2:
        raise ValueError("Φ must contain only terms of degree >= 2")
    X = VectorSeries(
        [TaylorFourierSeries.variable(n, N, m, Phi.exact) + Phi[m].with_bound(N) for m in range(n)]
    )
    return substitute(F, X, N)


def series_arith(a, b, op: str):
    """Dispatch for ``add``, ``sub``, ``mul`` and ``scale`` (``b`` a scalar)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        if not isinstance(b, TaylorFourierSeries):
            raise IncompatibleOperandsError("mul expects two series")
        return _mul(a, b)
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown operation {op!r}")


def derive(S, which: str):
    """``which='time'`` gives ``∂_t S``; ``which='jacobian'`` the partials matrix."""
    if which == "time":
        return S.derivative_t()
    if which == "jacobian":
        if isinstance(S, TaylorFourierSeries):
            return S.gradient()
        return S.jacobian()
    raise ValueError(f"unknown derivative kind {which!r}")
