"""Acceptance suite: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""
import math
import time
from functools import lru_cache

import pytest
from gmpy2 import mpq

from pdnf.algebra import ExactComplex, LinearPart, PeriodicSystem, VectorSeries, parse_exact
from pdnf.corpus import build_corpus
from pdnf.floquet import AutonomousField, reduce_field, round_trip_error
from pdnf.integrals import is_first_integral, pushforward, resonant_function_check
from pdnf.normalform import distinguished_violations, normalize, rescale_system, residual_check, truncate_result
from pdnf.resonance import admissible_scale, divisor_constants, epsilon_bound, exponent_rationality, lattice_rank
from pdnf.verify import conjugacy_scaling_check

CORPUS_SIZE = 50
CORPUS_SECONDS = 300.0
FLOQUET_SECONDS = 30.0
PERIOD_TOL = 1e-8
EXPONENT_TOL = 1e-6
ROUND_TRIP_TOL = 1e-6
SCALING_RADII = (0.2, 0.1, 0.05, 0.025)
SCALING_SLOPE = 3.5
TRUNCATION = 3


@lru_cache(maxsize=None)
def corpus():
    return tuple(build_corpus(seed=0, size=CORPUS_SIZE))


def _emit(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    return ok, line


# -- individual criteria -----------------------------------------------------------
def criterion_1():
    cases = corpus()
    t0 = time.perf_counter()
    bad = []
    for c in cases:
        lam = c.system.linear.lam
        shape_ok = (c.system.n in (2, 3, 4) and c.N in (4, 5, 6) and c.band <= 3
                    and all(isinstance(v, ExactComplex) and not v.re for v in lam))
        r = normalize(c.system, c.N)
        if not (shape_ok and residual_check(c.system, r).is_zero and not distinguished_violations(r)):
            bad.append(c.name)
    dt = time.perf_counter() - t0
    ok = len(cases) >= CORPUS_SIZE and not bad and dt < CORPUS_SECONDS
    return _emit(1, ok, f"{len(cases)} systems, {len(bad)} failing, {dt:.1f}s (limit {CORPUS_SECONDS:.0f}s)")


def criterion_2():
    lin = LinearPart(("i", "0"))
    expected = [
        (0, parse_exact("i"), None),
        (-1, parse_exact("1/2i"), None),
        (1, None, ExactComplex(1)),
    ]
    got = []
    for k, phi, g in expected:
        sys_ = PeriodicSystem(lin, VectorSeries.from_terms(2, 5, {((0, 2), k, 0): 1}))
        r = normalize(sys_, 5)
        want_phi = VectorSeries.from_terms(2, 5, {((0, 2), k, 0): phi} if phi else {})
        want_g = VectorSeries.from_terms(2, 5, {((0, 2), k, 0): g} if g else {})
        got.append(r.Phi == want_phi and r.G == want_g and residual_check(sys_, r).is_zero)
    return _emit(2, all(got), "x2^2, e^{-it}x2^2, e^{it}x2^2: " + ", ".join("exact" if g else "MISMATCH" for g in got))


def criterion_3():
    planted = [c for c in corpus() if c.integral is not None]
    bad = []
    for c in planted:
        r = normalize(c.system, c.N)
        Ht = pushforward(c.integral, r.Phi, c.N)
        defect_ok = is_first_integral(Ht, r.normal_form, c.N).is_integral_to_N
        rc = resonant_function_check(Ht, c.system.linear.lam)
        if not (defect_ok and rc.resonant_structure and not rc.offending_terms):
            bad.append(c.name)
    ok = bool(planted) and not bad
    return _emit(3, ok, f"{len(planted)} planted integrals, {len(bad)} failing")


def criterion_4():
    lam = lambda *t: [parse_exact(x) for x in t]
    checks = {}
    checks["rank(i,0)=2"] = lattice_rank(lam("i", "0"), 6, 8).rank == 2
    checks["rank(1,i,0)=2"] = lattice_rank(lam("1", "i", "0"), 6, 8).rank == 2
    e = epsilon_bound(lam("i", "0"), 6, 8)
    checks["eps(i,0)=1=1/nu"] = e.epsilon == 1 and e.epsilon_theoretical == 1
    h = epsilon_bound(lam("1/2i", "0"), 6, 8)
    checks["eps(i/2,0)=1/2"] = h.epsilon == mpq(1, 2) and h.epsilon_theoretical == mpq(1, 2)
    rep = exponent_rationality(lam("1", "i", "0"), 2)
    checks["(1,i,0) not rational-imaginary"] = not rep.rational_imaginary and rep.consistent is False
    failed = [k for k, v in checks.items() if not v]
    return _emit(4, not failed, "all instances exact" if not failed else "failed: " + "; ".join(failed))


def criterion_5():
    mismatched = []
    for c in corpus():
        lin = c.system.linear
        diag = LinearPart(lin.lam, tuple(ExactComplex(0) for _ in range(lin.n - 1)))
        sys_ = PeriodicSystem(diag, c.system.F)
        a = normalize(sys_, c.N)
        b = normalize(sys_, c.N, method="split")
        if not (a.Phi == b.Phi and a.G == b.G):
            mismatched.append(c.name)
    return _emit(5, not mismatched, f"{len(corpus())} systems with sigma=0, {len(mismatched)} mismatched")


LIMIT_CYCLE = {
    (0, (1, 0)): 1, (0, (0, 1)): -1, (0, (3, 0)): -1, (0, (1, 2)): -1,
    (1, (1, 0)): 1, (1, (0, 1)): 1, (1, (2, 1)): -1, (1, (0, 3)): -1,
}


def criterion_6():
    t0 = time.perf_counter()
    f = AutonomousField.from_terms(2, LIMIT_CYCLE)
    red = reduce_field(f, (1.1, 0.0), 6.0)
    period_err = abs(red.orbit.period - 2 * math.pi)
    mu = sorted(red.exponents, key=lambda z: -z.real)
    exp_err = max(abs(mu[0] - 0), abs(mu[1] + 2))
    rt = max(round_trip_error(f, red, z) for z in [(0.05, 0.05), (0.1, -0.2)])
    dt = time.perf_counter() - t0
    ok = period_err < PERIOD_TOL and exp_err < EXPONENT_TOL and rt < ROUND_TRIP_TOL and dt < FLOQUET_SECONDS
    return _emit(6, ok, f"|T-2pi|={period_err:.2e} (<{PERIOD_TOL:g}), exponent err={exp_err:.2e} "
                        f"(<{EXPONENT_TOL:g}), round trip={rt:.2e} (<{ROUND_TRIP_TOL:g}), {dt:.2f}s")


def criterion_7():
    case = next(c for c in corpus() if not normalize(c.system, TRUNCATION).Phi.is_zero)
    r = truncate_result(normalize(case.system, case.N), TRUNCATION)
    rep = conjugacy_scaling_check(case.system, r, radii=SCALING_RADII)
    slope = rep.fitted_slope
    ok = slope is not None and slope >= SCALING_SLOPE
    shown = "none" if slope is None else f"{slope:.3f}"
    return _emit(7, ok, f"{case.name} N'={TRUNCATION}: fitted slope {shown} (>= {SCALING_SLOPE})")


def criterion_8():
    diag = divisor_constants([parse_exact("i"), parse_exact("0")], [ExactComplex(0)], 6, 8)
    unit_ok = diag.gamma_slope == 1 and isinstance(diag.gamma_slope, type(mpq(1)))
    jordan = [c for c in corpus() if any(s for s in c.system.linear.sigma)]
    chosen, before, after = None, None, None
    for c in jordan:
        K = max(c.band, 1)
        rep = divisor_constants(c.system.linear.lam, c.system.linear.sigma, c.N, K)
        if rep.slope_positive:
            continue
        scaled, _ = rescale_system(c.system, admissible_scale(rep))
        rep2 = divisor_constants(scaled.linear.lam, scaled.linear.sigma, c.N, K)
        chosen, before, after = c, rep, rep2
        break
    ok = unit_ok and chosen is not None and after.slope_positive
    detail = f"sigma=0 slope={diag.gamma_slope}; "
    detail += ("no sigma!=0 member with nonpositive slope" if chosen is None else
               f"{chosen.name}: slope {float(before.gamma_slope):.3f} -> {float(after.gamma_slope):.3f}")
    return _emit(8, ok, detail)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 9)])
def test_criterion(check, capsys):
    with capsys.disabled():
        ok, line = check()
    assert ok, line


if __name__ == "__main__":
    results = [check()[0] for check in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    raise SystemExit(0 if all(results) else 1)
