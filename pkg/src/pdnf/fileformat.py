"""Sectioned text format for systems, transforms, fields and integral candidates.

Example::

    [system]
    kind = system
    dimension = 2
    mode = exact
    degree = 5
    period = 6.283185307179586
    lambda = i; 0
    sigma = 0

    [terms]
    # j  l_1 .. l_n  k  coefficient
    1  0 2  0  1

    [integral H]
    # l_1 .. l_n  k  coefficient
    0 1  0  1

    [orbit]
    seed = 1.1; 0
    period_guess = 6.3

``kind`` is ``system`` (needs ``lambda``), ``transform`` (a bare vector
series such as ``Φ``) or ``field`` (an autonomous polynomial field for the
Floquet front end; linear and constant terms allowed, ``k`` must be 0).
Component indices ``j`` are 1-based.  ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .algebra.scalars import format_scalar, parse_approx, parse_exact
from .algebra.series import TaylorFourierSeries, VectorSeries
from .algebra.system import TWO_PI, LinearPart, PeriodicSystem

__all__ = ["FormatError", "SystemFile", "emit", "parse_file", "parse_system", "parse_text", "write_file"]

KINDS = ("system", "transform", "field")
_TOKEN = re.compile(r"\S+")


class FormatError(ValueError):
    """Syntax or schema error with a 1-based source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = "<text>"):
        self.message, self.line, self.column, self.source = message, line, column, source
        super().__init__(f"{source}:{line}:{column}: {message}")


@dataclass
class SystemFile:
    kind: str
    n: int
    exact: bool
    degree: int
    terms: VectorSeries
    period: float = TWO_PI
    linear: LinearPart | None = None
    integrals: dict = field(default_factory=dict)
    orbit: dict | None = None

    def system(self) -> PeriodicSystem:
        if self.linear is None:
            raise FormatError(f"a {self.kind} file has no linear part")
        return PeriodicSystem(self.linear, self.terms, period=self.period)

    def field(self):
        from .floquet import AutonomousField
        return AutonomousField(self.terms)

    @classmethod
    def from_system(cls, system: PeriodicSystem, integrals: dict | None = None) -> "SystemFile":
        return cls("system", system.n, system.exact, system.N, system.F, system.period, system.linear,
                   dict(integrals or {}))

    @classmethod
    def from_transform(cls, V: VectorSeries, period: float = TWO_PI) -> "SystemFile":
        return cls("transform", V.n, V.exact, V.N, V, period)


# -- parsing ---------------------------------------------------------------
def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


class _Parser:
    def __init__(self, text: str, source: str):
        self.lines = text.splitlines()
        self.source = source

    def err(self, msg, line, col=1):
        return FormatError(msg, line, col, self.source)

    def sections(self):
        current, out = None, []
        for no, raw in enumerate(self.lines, 1):
            body = _strip_comment(raw)
            if not body.strip():
                continue
            s = body.strip()
            if s.startswith("["):
                if not s.endswith("]"):
                    raise self.err("unterminated section header", no, body.index("[") + 1)
                name = s[1:-1].strip()
                current = [name, no, []]
                out.append(current)
                continue
            if current is None:
                raise self.err("content before the first section header", no, len(body) - len(body.lstrip()) + 1)
            current[2].append((no, body))
        return out

    def scalar(self, text, exact, line, col):
        try:
            return parse_exact(text) if exact else parse_approx(text)
        except ValueError as exc:
            raise self.err(f"bad coefficient {text.strip()!r}: {exc}", line, col) from None

    def integer(self, tok, line, col, what):
        try:
            return int(tok)
        except ValueError:
            raise self.err(f"expected integer {what}, got {tok!r}", line, col) from None

    def term_line(self, no, body, n, with_j):
        toks = list(_TOKEN.finditer(body))
        need = n + 1 + (1 if with_j else 0)
        if len(toks) <= need:
            col = toks[-1].end() + 1 if toks else 1
            raise self.err(f"expected {need} integers and a coefficient", no, col)
        ints = [self.integer(t.group(), no, t.start() + 1, "field") for t in toks[:need]]
        rest = toks[need].start()
        return ints, body[rest:], rest + 1


def parse_text(text: str, source: str = "<text>") -> SystemFile:
    p = _Parser(text, source)
    secs = p.sections()
    if not secs or secs[0][0] != "system":
        raise p.err("the first section must be [system]", secs[0][1] if secs else 1)
    header = {}
    for no, body in secs[0][2]:
        if "=" not in body:
            raise p.err("expected 'key = value'", no, len(body) - len(body.lstrip()) + 1)
        key, _, val = body.partition("=")
        key = key.strip()
        if key in header:
            raise p.err(f"duplicate key {key!r}", no, body.index(key) + 1)
        header[key] = (val.strip(), no, body.index("=") + 2)
    hline = secs[0][1]

    def get(key, default=None, required=False):
        if key not in header:
            if required:
                raise p.err(f"missing key {key!r}", hline)
            return default, hline, 1
        return header[key]

    kind, no, col = get("kind", "system")
    if kind not in KINDS:
        raise p.err(f"kind must be one of {', '.join(KINDS)}", no, col)
    n_txt, no, col = get("dimension", required=True)
    n = p.integer(n_txt, no, col, "dimension")
    if n < 1:
        raise p.err("dimension must be positive", no, col)
    mode, no, col = get("mode", "approx" if kind == "field" else "exact")
    if mode not in ("exact", "approx"):
        raise p.err("mode must be exact or approx", no, col)
    exact = mode == "exact"
    deg_txt, dno, dcol = get("degree", None)
    degree = None if deg_txt is None else p.integer(deg_txt, dno, dcol, "degree")
    per_txt, no, col = get("period", None)
    period = TWO_PI
    if per_txt is not None:
        try:
            period = float(per_txt)
        except ValueError:
            raise p.err(f"bad period {per_txt!r}", no, col) from None
        if not period > 0:
            raise p.err("period must be positive", no, col)

    linear = None
    lam_txt, lno, lcol = get("lambda", None)
    if kind == "system" and lam_txt is None:
        raise p.err("missing key 'lambda'", hline)
    if lam_txt is not None:
        lam = [p.scalar(v, exact, lno, lcol) for v in lam_txt.split(";")]
        if len(lam) != n:
            raise p.err(f"lambda has {len(lam)} entries, dimension is {n}", lno, lcol)
        sig_txt, sno, scol = get("sigma", None)
        sig = [p.scalar(v, exact, sno, scol) for v in sig_txt.split(";")] if sig_txt else [p.scalar("0", exact, sno, scol)] * (n - 1)
        if n == 1 and sig_txt and sig_txt.strip() in ("", "-"):
            sig = []
        if len(sig) != n - 1:
            raise p.err(f"sigma needs {n - 1} entries", sno, scol)
        linear = LinearPart(tuple(lam), tuple(sig))
    unknown = set(header) - {"kind", "dimension", "mode", "degree", "period", "lambda", "sigma"}
    if unknown:
        key = sorted(unknown)[0]
        raise p.err(f"unknown key {key!r}", header[key][1])

    raw_terms, integrals, orbit = [], {}, None
    seen = set()
    for name, sno, body_lines in secs[1:]:
        if name in seen:
            raise p.err(f"duplicate section [{name}]", sno)
        seen.add(name)
        if name == "terms":
            for no, body in body_lines:
                ints, coeff, ccol = p.term_line(no, body, n, True)
                j, l, k = ints[0], tuple(ints[1:n + 1]), ints[n + 1]
                if not 1 <= j <= n:
                    raise p.err(f"component {j} outside 1..{n}", no, _TOKEN.search(body).start() + 1)
                if any(v < 0 for v in l):
                    raise p.err("negative exponent", no, 1)
                if kind == "field" and k:
                    raise p.err("field terms must have mode 0", no, 1)
                raw_terms.append((no, (l, k, j - 1), p.scalar(coeff, exact, no, ccol)))
        elif name.startswith("integral"):
            label = name[len("integral"):].strip() or f"H{len(integrals) + 1}"
            terms = {}
            for no, body in body_lines:
                ints, coeff, ccol = p.term_line(no, body, n, False)
                key = (tuple(ints[:n]), ints[n])
                if any(v < 0 for v in key[0]):
                    raise p.err("negative exponent", no, 1)
                terms[key] = terms.get(key, 0) + p.scalar(coeff, exact, no, ccol)
            integrals[label] = terms
        elif name == "orbit":
            orbit = {}
            for no, body in body_lines:
                key, eq, val = body.partition("=")
                key = key.strip()
                if not eq or key not in ("seed", "period_guess"):
                    raise p.err("orbit block takes 'seed = ...' and 'period_guess = ...'", no)
                try:
                    nums = [float(v) for v in val.split(";")]
                except ValueError:
                    raise p.err(f"bad number in {key}", no, body.index("=") + 2) from None
                orbit[key] = nums if key == "seed" else nums[0]
            if "seed" in orbit and len(orbit["seed"]) != n:
                raise p.err(f"seed needs {n} entries", sno)
        else:
            raise p.err(f"unknown section [{name}]", sno)

    max_deg = max((sum(key[0]) for _, key, _ in raw_terms), default=0)
    for terms in integrals.values():
        max_deg = max([max_deg] + [sum(l) for (l, _) in terms])
    if degree is None:
        degree = max(max_deg, 2)
    for no, (l, k, j), _ in raw_terms:
        if sum(l) > degree:
            raise p.err(f"term of degree {sum(l)} exceeds degree = {degree}", no)
        if kind == "system" and sum(l) < 2:
            raise p.err(f"F contains a term of degree {sum(l)} at (j={j + 1}, l={list(l)}, k={k})", no)
    merged: dict = {}
    for _, key, c in raw_terms:
        merged[key] = merged[key] + c if key in merged else c
    V = VectorSeries.from_terms(n, degree, merged, exact=exact)
    H = {}
    for label, terms in integrals.items():
        if any(sum(l) > degree for (l, _) in terms):
            raise p.err(f"integral {label} exceeds degree = {degree}", hline)
        H[label] = TaylorFourierSeries(n, degree, terms, exact=exact)
    return SystemFile(kind, n, exact, degree, V, period, linear, H, orbit)


def parse_file(path) -> SystemFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror}", 0, 0, str(path)) from None
    return parse_text(text, str(path))


def parse_system(path) -> PeriodicSystem:
    """Load and validate a ``kind = system`` file."""
    sf = parse_file(path)
    if sf.kind != "system":
        raise FormatError(f"expected kind = system, got {sf.kind}", 1, 1, str(path))
    return sf.system()


# -- emission --------------------------------------------------------------
def _fmt_ints(ints) -> str:
    return " ".join(str(v) for v in ints)


def emit(sf: SystemFile) -> str:
    """Canonical text: terms ordered by degree, then ``≻`` on ``l``, then ``k``, then ``j``."""
    out = ["[system]", f"kind = {sf.kind}", f"dimension = {sf.n}",
           f"mode = {'exact' if sf.exact else 'approx'}", f"degree = {sf.degree}", f"period = {float(sf.period)!r}"]
    if sf.linear is not None:
        out.append("lambda = " + "; ".join(format_scalar(v) for v in sf.linear.lam))
        if sf.n > 1:
            out.append("sigma = " + "; ".join(format_scalar(v) for v in sf.linear.sigma))
    out += ["", "[terms]"]
    for (l, k, j), c in sf.terms.items():
        out.append(f"{j + 1} {_fmt_ints(l)} {k} {format_scalar(c)}")
    for label in sorted(sf.integrals):
        out += ["", f"[integral {label}]"]
        for (l, k), c in sf.integrals[label].items():
            out.append(f"{_fmt_ints(l)} {k} {format_scalar(c)}")
    if sf.orbit:
        out += ["", "[orbit]"]
        if "seed" in sf.orbit:
            out.append("seed = " + "; ".join(repr(float(v)) for v in sf.orbit["seed"]))
        if "period_guess" in sf.orbit:
            out.append(f"period_guess = {float(sf.orbit['period_guess'])!r}")
    return "\n".join(out) + "\n"


def write_file(sf: SystemFile, path) -> None:
    Path(path).write_text(emit(sf))
