"""Coefficient scalars.

Two coefficient domains are supported:

* exact -- :class:`ExactComplex`, a Gaussian rational ``a + b i`` whose parts
  are arbitrary-precision rationals (``gmpy2.mpq``);
* approx -- the builtin :class:`complex` (double precision).

The literal grammar shared by the file format lives here as well.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

import gmpy2
from gmpy2 import mpq

__all__ = [
    "ExactComplex",
    "I",
    "ONE",
    "ZERO",
    "as_exact",
    "exact_sqrt",
    "format_scalar",
    "is_exact",
    "modulus",
    "modulus_squared",
    "parse_approx",
    "parse_exact",
    "to_complex",
]

_MPQ = type(mpq(0))


def _q(x) -> mpq:
    if isinstance(x, _MPQ):
        return x
    if isinstance(x, float):
        raise TypeError("refusing to build an exact rational from a float")
    return mpq(x)


class ExactComplex:
    """Gaussian rational ``re + im*i``.

    Parts are stored as ``mpq`` values, which gmpy2 keeps in lowest terms with
    a positive denominator.  Instances are treated as immutable.

    >>> ExactComplex(1, 2) * ExactComplex(1, -2)
    ExactComplex('5')
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @classmethod
    def _raw(cls, re: mpq, im: mpq) -> "ExactComplex":
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    # -- coercion ----------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, ExactComplex):
            return other
        if isinstance(other, (int, _MPQ, Fraction)) or isinstance(other, Rational):
            return ExactComplex._raw(_q(other), _ZQ)
        return None

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex._raw(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self.re, self.im, o.re, o.im
        if not b and not d:
            return ExactComplex._raw(a * c, _ZQ)
        return ExactComplex._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.reciprocal()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.reciprocal() ** (-e)
        result = ONE
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __neg__(self):
        return ExactComplex._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def reciprocal(self) -> "ExactComplex":
        den = self.re * self.re + self.im * self.im
        if not den:
            raise ZeroDivisionError("ExactComplex division by zero")
        return ExactComplex._raw(self.re / den, -self.im / den)

    def conjugate(self) -> "ExactComplex":
        return ExactComplex._raw(self.re, -self.im)

    def abs2(self) -> mpq:
        """Squared modulus, exact."""
        return self.re * self.re + self.im * self.im

    # -- comparisons / protocol -------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, complex):
                return False
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"ExactComplex('{format_scalar(self)}')"

    def __str__(self):
        return format_scalar(self)


_ZQ = mpq(0)
ZERO = ExactComplex._raw(mpq(0), mpq(0))
ONE = ExactComplex._raw(mpq(1), mpq(0))
I = ExactComplex._raw(mpq(0), mpq(1))


def is_exact(x) -> bool:
    return isinstance(x, ExactComplex)


def as_exact(x) -> ExactComplex:
    """Promote an int/rational (or ExactComplex) to :class:`ExactComplex`."""
    if isinstance(x, ExactComplex):
        return x
    if isinstance(x, str):
        return parse_exact(x)
    o = ExactComplex._coerce(x)
    if o is None:
        raise TypeError(f"cannot represent {x!r} exactly")
    return o


def to_complex(x) -> complex:
    return complex(x)


def modulus_squared(x):
    if isinstance(x, ExactComplex):
        return x.abs2()
    if isinstance(x, (int, _MPQ, Fraction)):
        return _q(x) * _q(x)
    return abs(x) ** 2


def exact_sqrt(q):
    """Square root of a nonnegative rational if it is rational, else ``None``."""
    q = _q(q)
    if q < 0:
        raise ValueError("negative argument")
    num, den = gmpy2.numer(q), gmpy2.denom(q)
    if gmpy2.is_square(num) and gmpy2.is_square(den):
        return mpq(gmpy2.isqrt(num), gmpy2.isqrt(den))
    return None


def modulus(x):
    """|x|: an ``mpq`` when exactly rational, a float otherwise."""
    if isinstance(x, (ExactComplex, int, _MPQ, Fraction)):
        m2 = modulus_squared(x)
        root = exact_sqrt(m2)
        return root if root is not None else math.sqrt(float(m2))
    return abs(x)


# -- literal grammar ------------------------------------------------------
_RAT = r"\d+(?:/\d+)?"
_EXACT_IMAG = re.compile(rf"(?P<sign>[+-]?)(?P<im>{_RAT})?i")
_EXACT_FULL = re.compile(rf"(?P<re>[+-]?{_RAT})(?:(?P<sign>[+-])(?P<im>{_RAT})?i)?")

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?"
_APPROX_IMAG = re.compile(rf"(?P<sign>[+-]?)(?P<im>{_NUM})?i")
_APPROX_FULL = re.compile(rf"(?P<re>[+-]?{_NUM})(?:(?P<sign>[+-])(?P<im>{_NUM})?i)?")


def _rational(text: str) -> mpq:
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise ValueError("zero denominator")
        return mpq(int(num), int(den))
    return mpq(int(text))


def _approx_number(text: str) -> float:
    if "/" in text:
        num, den = text.split("/")
        value = float(num) / float(den)
    else:
        value = float(text)
    if not math.isfinite(value):
        raise ValueError("non-finite coefficient")
    return value


def _split(text, imag_re, full_re, convert):
    s = "".join(text.split())
    if not s:
        raise ValueError("empty coefficient literal")
    m = imag_re.fullmatch(s)
    if m:
        im = convert(m["im"]) if m["im"] else convert("1")
        return convert("0"), (-im if m["sign"] == "-" else im)
    m = full_re.fullmatch(s)
    if not m:
        raise ValueError(f"malformed coefficient literal {text!r}")
    re_part = convert(m["re"].lstrip("+"))
    if m["sign"] is None:
        return re_part, convert("0")
    im = convert(m["im"]) if m["im"] else convert("1")
    return re_part, (-im if m["sign"] == "-" else im)


def parse_exact(text: str) -> ExactComplex:
    """Parse ``[sign] rational [(+|-) rational i] | [sign] rational i``.

    >>> parse_exact("1/2+3/4i")
    ExactComplex('1/2+3/4i')
    >>> parse_exact("-i")
    ExactComplex('-i')
    """
    re_part, im_part = _split(text, _EXACT_IMAG, _EXACT_FULL, _rational)
    return ExactComplex._raw(re_part, im_part)


def parse_approx(text: str) -> complex:
    re_part, im_part = _split(text, _APPROX_IMAG, _APPROX_FULL, _approx_number)
    return complex(re_part, im_part)


def _fmt_q(q) -> str:
    return str(q)


def _fmt_float(x: float) -> str:
    return repr(float(x))


def format_scalar(x) -> str:
    """Canonical literal for a coefficient; inverse of the parsers."""
    if isinstance(x, ExactComplex):
        re_part, im_part, fmt = x.re, x.im, _fmt_q
        one = mpq(1)
    elif isinstance(x, (int, _MPQ, Fraction)):
        return _fmt_q(_q(x))
    else:
        x = complex(x)
        re_part, im_part, fmt = x.real, x.imag, _fmt_float
        one = 1.0
    if not im_part:
        return fmt(re_part)
    if im_part == one:
        im_txt = "i"
    elif im_part == -one:
        im_txt = "-i"
    else:
        im_txt = fmt(im_part) + "i"
    if not re_part:
        return im_txt
    if not im_txt.startswith("-"):
        im_txt = "+" + im_txt
    return fmt(re_part) + im_txt
