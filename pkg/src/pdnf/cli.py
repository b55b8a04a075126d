"""Command-line interface: ``pdnf <command> [options]``.

Exit codes: 0 success (including a verification that fails, which is data),
1 validation or parse failure, 2 computation failure.  Every report echoes
its effective configuration and ends with a footer carrying ``status`` and
``error_code``.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra.scalars import format_scalar
from .algebra.system import InvariantViolation, PeriodicSystem
from .fileformat import FormatError, SystemFile, parse_file, parse_text, write_file
from .floquet import (
    AutonomousField,
    FloquetError,
    OrbitNotFoundError,
    floquet_transform,
    monodromy_and_exponents,
    rationalize_system,
    refine_orbit,
)
from .integrals import independence_rank, is_first_integral, pushforward, resonant_function_check
from .normalform import conjugacy_residual, distinguished_violations, normalize, NormalizationResult
from .numeric import IntegrationError
from .resonance import (
    DEFAULT_TOLERANCE,
    DegenerateRangeError,
    MissingToleranceError,
    UnsupportedInApproxError,
    divisor_constants,
    exponent_rationality,
    lattice_rank,
)
from .verify import DEFAULT_RADII, coefficient_growth, conjugacy_scaling_check

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE = 0, 1, 2


class CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int):
        super().__init__(message)
        self.code, self.exit_code = code, exit_code


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower() if v is not None else "none"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        return format_scalar(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


class Report:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = dict(config)
        self.lines = []

    def effective(self, key, value):
        """Record a default resolved while running the command."""
        self.config[key] = value

    def section(self, name: str):
        self.lines += ["", f"[{name}]"]

    def kv(self, key, value):
        self.lines.append(f"{key} = {_fmt(value)}")

    def text(self, block: str):
        self.lines.extend(block.splitlines())

    def render(self, status: str, code: str = "NONE", message: str | None = None) -> str:
        foot = ["", "[footer]", f"status = {status}", f"error_code = {code}"]
        if message:
            foot.append(f"message = {message}")
        head = [f"# pdnf {__version__} report", f"command = {self.command}", "", "[config]"]
        head += [f"{k} = {_fmt(v)}" for k, v in sorted(self.config.items())]
        return "\n".join(head + self.lines + foot) + "\n"


# -- helpers ---------------------------------------------------------------
def _load(path, kind=None) -> SystemFile:
    sf = parse_file(path)
    if kind and sf.kind != kind:
        raise CliError("E_KIND", f"{path}: expected kind = {kind}, got {sf.kind}", EXIT_INVALID)
    return sf


def _system(args, sf: SystemFile, rep: Report):
    system = sf.system()
    if args.mode == "approx" and system.exact:
        system = system.to_approx()
    elif args.mode == "exact" and not system.exact:
        if not args.rationalize:
            raise CliError("E_MODE", "approx input needs --rationalize for exact mode", EXIT_INVALID)
        snapped, _ = rationalize_system(system, args.snap_tol)
        if snapped is None:
            raise CliError("E_RATIONALIZE", "some coefficient has no rational within snap-tol", EXIT_INVALID)
        system = snapped
    rep.effective("mode", "exact" if system.exact else "approx")
    if not system.exact and args.tol is None:
        args.tol = DEFAULT_TOLERANCE
        rep.effective("tol", args.tol)
    return system


def _degree(args, sf: SystemFile, rep: Report) -> int:
    N = args.degree if args.degree is not None else sf.degree
    rep.effective("degree", N)
    return N


def _out_path(args, default_dir: Path, name: str) -> Path:
    base = Path(args.out) if args.out else default_dir
    base.mkdir(parents=True, exist_ok=True)
    return base / name


# -- commands --------------------------------------------------------------
def cmd_normalize(args, rep: Report):
    sf = _load(args.file, "system")
    system = _system(args, sf, rep)
    N = _degree(args, sf, rep)
    result = normalize(system, N, method=args.method, tol=args.tol)
    stem = Path(args.file).stem
    phi_path = _out_path(args, Path(args.file).parent, f"{stem}.phi.txt")
    g_path = _out_path(args, Path(args.file).parent, f"{stem}.G.txt")
    write_file(SystemFile.from_transform(result.Phi, system.period), phi_path)
    write_file(SystemFile.from_system(PeriodicSystem(system.linear, result.G, system.period)), g_path)
    rep.section("result")
    rep.kv("phi_file", str(phi_path))
    rep.kv("g_file", str(g_path))
    rep.kv("phi_terms", result.Phi.term_count())
    rep.kv("g_terms", result.G.term_count())
    ok = result.residual_max_degree_checked >= N
    rep.kv("residual", f"0 through degree {N}" if ok else
           f"nonzero at degree {result.residual_max_degree_checked + 1}")
    rep.kv("distinguished_violations", len(distinguished_violations(result)))
    rep.kv("near_resonances", len(result.near_resonances))
    for l, k, j, div in result.near_resonances:
        rep.kv(f"near_resonance(j={j + 1}, l={list(l)}, k={k})", abs(complex(div)))
    return EXIT_OK


def _lam_from(args):
    if args.lam:
        sf = parse_text(f"[system]\ndimension = {len(args.lam.split(';'))}\nlambda = {args.lam}\n", "--lambda")
        return sf.linear
    if not args.file:
        raise CliError("E_USAGE", "give a system file or --lambda", EXIT_INVALID)
    return _load(args.file, "system").linear


def cmd_resonance(args, rep: Report):
    linear = _lam_from(args)
    N = args.degree if args.degree is not None else 4
    K = args.fourier_cap if args.fourier_cap is not None else 4
    rep.effective("degree", N)
    rep.effective("fourier_cap", K)
    r = divisor_constants(linear.lam, linear.sigma, N, K)
    rep.section("result")
    for key in ("n", "N", "K", "epsilon", "epsilon_theoretical", "d1", "d2", "d", "sigma_bar",
                "gamma_slope", "slope_positive", "nonresonant_count", "resonant_count"):
        rep.kv(key, getattr(r, key))
    return EXIT_OK


def cmd_lattice(args, rep: Report):
    linear = _lam_from(args)
    N = args.degree if args.degree is not None else 6
    K = args.fourier_cap if args.fourier_cap is not None else 8
    rep.effective("degree", N)
    rep.effective("fourier_cap", K)
    lat = lattice_rank(linear.lam, N, K)
    rat = exponent_rationality(linear.lam, lat.rank)
    rep.section("result")
    rep.kv("R_lambda", lat.rank)
    rep.kv("relations_found", lat.relations_found)
    rep.kv("saturated", lat.saturated)
    for i, (k, l) in enumerate(lat.generators, 1):
        rep.kv(f"generator_{i}", f"k={k} l={list(l)}")
    rep.kv("rational_imaginary", rat.rational_imaginary)
    rep.kv("rank_consistent", rat.consistent)
    return EXIT_OK


def cmd_check_integral(args, rep: Report):
    sf = _load(args.file, "system")
    system = _system(args, sf, rep)
    N = _degree(args, sf, rep)
    if not sf.integrals:
        raise CliError("E_NO_INTEGRAL", "file has no [integral ...] section", EXIT_INVALID)
    names = [args.integral] if args.integral else sorted(sf.integrals)
    for name in names:
        if name not in sf.integrals:
            raise CliError("E_NO_INTEGRAL", f"no integral named {name!r}", EXIT_INVALID)
    cands = {k: (v.to_approx() if not system.exact else v) for k, v in sf.integrals.items()}
    result = normalize(system, N, tol=args.tol)
    rep.section("result")
    # formal integrals are only certified to the truncation order
    rep.kv("certified_through_degree", N)
    for name in names:
        H = cands[name]
        ir = is_first_integral(H, system, N, tol=args.tol)
        Ht = pushforward(H, result.Phi, N)
        rr = resonant_function_check(Ht, system.linear.lam, N, tol=args.tol)
        rep.kv(f"{name}.is_integral_to_N", ir.is_integral_to_N)
        rep.kv(f"{name}.defect_terms", len(ir.defect))
        rep.kv(f"{name}.pushforward_resonant", rr.resonant_structure)
        for l, k in rr.offending_terms:
            rep.kv(f"{name}.offending", f"l={list(l)} k={k}")
    rep.kv("independence_rank", independence_rank([cands[n] for n in names], N, seed=args.seed))
    return EXIT_OK


def cmd_floquet(args, rep: Report):
    sf = _load(args.file, "field")
    if not sf.orbit or "seed" not in sf.orbit or "period_guess" not in sf.orbit:
        raise CliError("E_NO_ORBIT", "field file needs an [orbit] block with seed and period_guess", EXIT_INVALID)
    field_ = AutonomousField(sf.terms)
    orbit = refine_orbit(field_, sf.orbit["seed"], sf.orbit["period_guess"], tol=args.orbit_tol,
                         rtol=args.rtol, atol=args.atol, band=args.fourier_band)
    mono = monodromy_and_exponents(field_, orbit, rtol=args.rtol, atol=args.atol)
    red = floquet_transform(field_, orbit, mono, N=args.degree, band=args.fourier_band,
                            band_cap=args.fourier_cap or 64, rtol=args.rtol, atol=args.atol)
    reduced = red.reduced
    snaps = []
    if args.rationalize:
        snapped, snaps = rationalize_system(reduced, args.snap_tol)
        if snapped is not None:
            reduced = snapped
    out = _out_path(args, Path(args.file).parent, f"{Path(args.file).stem}.reduced.txt")
    write_file(SystemFile.from_system(reduced), out)
    rep.section("result")
    rep.kv("reduced_file", str(out))
    rep.kv("period", orbit.period)
    rep.kv("newton_iterations", orbit.iterations)
    rep.kv("orbit_point", [float(v) for v in orbit.x0])
    rep.kv("fourier_band", red.band)
    for key, val in red.residuals.items():
        rep.kv(key, float(val))
    rep.kv("rationalized", bool(args.rationalize and reduced.exact))
    rep.section("exponents")
    rep.lines.append("index  multiplier                      exponent")
    for i, (m, mu) in enumerate(zip(mono.multipliers, mono.exponents), 1):
        rep.lines.append(f"{i:<6d} {format_scalar(complex(m)):<31s} {format_scalar(complex(mu))}")
    if snaps:
        rep.section("snaps")
        rep.lines.extend(snaps)
    return EXIT_OK


def cmd_verify(args, rep: Report):
    sf = _load(args.file, "system")
    system = _system(args, sf, rep)
    N = _degree(args, sf, rep)
    if args.phi:
        Phi = _load(args.phi, "transform").terms
        if args.normal_form:
            G = _load(args.normal_form, "system").terms
        else:
            G = normalize(system, N, tol=args.tol).G
        if Phi.exact != system.exact:
            Phi = Phi.to_approx()
            G = G.to_approx()
            system = system.to_approx()
        N = min(N, Phi.N)
        result = NormalizationResult(Phi.with_bound(N), G.with_bound(N), N, system.linear, tol=args.tol)
    else:
        result = normalize(system, N, tol=args.tol)
    res = conjugacy_residual(system, result.Phi, result.G, N)
    if res.exact:
        res_terms = res.term_count()
    else:
        res_terms = sum(1 for _, c in res.items() if abs(c) > (args.tol or DEFAULT_TOLERANCE))
    radii = [float(r) for r in args.radii.split(",")] if args.radii else list(DEFAULT_RADII)
    sc = conjugacy_scaling_check(system, result, radii, T_span=args.t_span, rtol=args.rtol,
                                 atol=args.atol, seed=args.seed)
    rep.section("residual")
    rep.kv("nonzero_terms_through_N", res_terms)
    rep.kv("residual", f"0 through degree {N}" if not res_terms else "nonzero")
    rep.section("scaling")
    rep.text(sc.to_text())
    if N >= 3:
        rep.section("growth")
        rep.text(coefficient_growth(result).to_text())
    verdict = not res_terms and sc.passed
    rep.section("result")
    rep.kv("verification", "pass" if verdict else "fail")
    return EXIT_OK


COMMANDS = {
    "normalize": cmd_normalize,
    "resonance": cmd_resonance,
    "lattice": cmd_lattice,
    "check-integral": cmd_check_integral,
    "floquet": cmd_floquet,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--degree", type=int, help="truncation degree N")
    common.add_argument("--mode", choices=("exact", "approx"), help="scalar mode (default: from file)")
    common.add_argument("--fourier-cap", type=int, help="mode bound K (resonance, lattice) or band cap (floquet)")
    common.add_argument("--tol", type=float, help=f"approx-mode resonance tolerance (default {DEFAULT_TOLERANCE})")
    common.add_argument("--seed", type=int, default=0, help="seed for sampling (default 0)")
    common.add_argument("--rationalize", action="store_true", help="snap approx coefficients to p/q, q <= 64")
    common.add_argument("--snap-tol", type=float, default=1e-9, help="rationalize tolerance (default 1e-9)")
    common.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--out", metavar="DIR", help="directory for emitted series files")
    common.add_argument("-v", "--verbose", action="store_true", help="log to stderr")

    p = argparse.ArgumentParser(prog="pdnf", description="Distinguished normal forms of periodic systems.")
    p.add_argument("--version", action="version", version=f"pdnf {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("normalize", parents=[common], help="compute Φ and G through degree N")
    s.add_argument("file")
    s.add_argument("--method", choices=("recursion", "split"), default="recursion")

    for name, hlp in (("resonance", "small-divisor constants"), ("lattice", "resonance lattice rank")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("file", nargs="?")
        s.add_argument("--lambda", dest="lam", metavar="LIST", help="eigenvalues, ';'-separated")

    s = sub.add_parser("check-integral", parents=[common], help="check integral candidates")
    s.add_argument("file")
    s.add_argument("--integral", metavar="NAME")

    s = sub.add_parser("floquet", parents=[common], help="reduce a field near a periodic orbit")
    s.add_argument("file")
    s.add_argument("--rtol", type=float, default=1e-10)
    s.add_argument("--atol", type=float, default=1e-12)
    s.add_argument("--orbit-tol", type=float, default=1e-10)
    s.add_argument("--fourier-band", type=int, default=16)

    s = sub.add_parser("verify", parents=[common], help="trajectory check of a normalization")
    s.add_argument("file")
    s.add_argument("--phi", metavar="PATH", help="transform file to check (default: computed)")
    s.add_argument("--normal-form", metavar="PATH", help="normal-form file paired with --phi")
    s.add_argument("--radii", metavar="LIST", help="comma-separated decreasing radii")
    s.add_argument("--t-span", type=float, default=2 * np.pi)
    s.add_argument("--rtol", type=float, default=1e-12)
    s.add_argument("--atol", type=float, default=1e-14)
    return p


def _config(args) -> dict:
    skip = {"command", "report", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    rep = Report(args.command, _config(args))
    try:
        code = COMMANDS[args.command](args, rep)
        text = rep.render("ok")
    except CliError as exc:
        code, text = exc.exit_code, rep.render("error", exc.code, str(exc))
    except FormatError as exc:
        code, text = EXIT_INVALID, rep.render("error", "E_PARSE", str(exc))
    except InvariantViolation as exc:
        code, text = EXIT_INVALID, rep.render("error", "E_INVARIANT", str(exc))
    except (MissingToleranceError, UnsupportedInApproxError) as exc:
        code, text = EXIT_INVALID, rep.render("error", "E_MODE", str(exc))
    except OrbitNotFoundError as exc:
        code, text = EXIT_COMPUTE, rep.render("error", "E_ORBIT_NOT_FOUND", str(exc))
    except IntegrationError as exc:
        code, text = EXIT_COMPUTE, rep.render("error", "E_INTEGRATION", str(exc))
    except (FloquetError, DegenerateRangeError) as exc:
        code, text = EXIT_COMPUTE, rep.render("error", "E_COMPUTE", str(exc))
    except ValueError as exc:
        code, text = EXIT_INVALID, rep.render("error", "E_VALIDATION", str(exc))
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        code, text = EXIT_COMPUTE, rep.render("error", "E_COMPUTE", str(exc))
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
