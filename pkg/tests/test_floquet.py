import math

import numpy as np
import pytest
from scipy.linalg import expm

from pdnf.floquet import (
    AutonomousField,
    OrbitNotFoundError,
    TrigPolynomial,
    _bidiagonal_basis,
    floquet_transform,
    monodromy_and_exponents,
    rationalize_system,
    reduce_field,
    refine_orbit,
    round_trip_error,
)

LIMIT_CYCLE = {
    (0, (1, 0)): 1, (0, (0, 1)): -1, (0, (3, 0)): -1, (0, (1, 2)): -1,
    (1, (1, 0)): 1, (1, (0, 1)): 1, (1, (2, 1)): -1, (1, (0, 3)): -1,
}


@pytest.fixture(scope="module")
def cycle():
    f = AutonomousField.from_terms(2, LIMIT_CYCLE)
    return f, reduce_field(f, (1.1, 0.0), 6.0)


def test_field_evaluation():
    f = AutonomousField.from_terms(2, LIMIT_CYCLE)
    x = np.array([0.3, -0.7])
    r2 = x @ x
    assert np.allclose(f(x), [x[0] - x[1] - x[0] * r2, x[0] + x[1] - x[1] * r2])
    h = 1e-6
    num = np.column_stack([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(2)])
    assert np.allclose(f.jacobian(x), num, atol=1e-8)


def test_limit_cycle_orbit(cycle):
    _, red = cycle
    assert abs(red.orbit.period - 2 * math.pi) < 1e-8
    radii = np.linalg.norm(red.orbit.samples, axis=1)
    assert np.abs(radii - 1).max() < 1e-8


def test_limit_cycle_exponents(cycle):
    _, red = cycle
    mu = red.exponents
    assert abs(mu[0]) < 1e-6 and abs(mu[1] + 2) < 1e-6
    mult = red.monodromy.multipliers
    assert abs(mult[0] - 1) < 1e-7
    assert abs(mult[1] / math.exp(-4 * math.pi) - 1) < 1e-5
    # branch consistency and principal strip
    T = red.orbit.period
    assert np.allclose(np.exp(mu * T), mult, rtol=1e-12, atol=1e-15)
    assert np.all(np.abs(mu.imag) <= math.pi / T + 1e-15)


def test_limit_cycle_reduction(cycle):
    f, red = cycle
    lam = sorted(complex(v).real for v in red.reduced.linear.lam)
    assert abs(lam[0] + 2) < 1e-6 and abs(lam[1]) < 1e-6
    assert red.residuals["q_equation_defect"] < 1e-8
    assert red.residuals["q_periodicity"] < 1e-7
    assert red.residuals["worst_condition"] < 10
    for Z0 in [(0.05, 0.05), (0.1, -0.2)]:
        assert round_trip_error(f, red, Z0) < 1e-6


def test_rationalize_limit_cycle(cycle):
    _, red = cycle
    exact, log_lines = rationalize_system(red.reduced, snap_tol=1e-6)
    assert exact is not None and exact.exact
    assert any(line.startswith("snap") for line in log_lines)
    none, lines = rationalize_system(red.reduced, snap_tol=1e-15)
    assert none is None and any(line.startswith("no snap") for line in lines)


def test_rotation():
    f = AutonomousField.from_terms(2, {(0, (0, 1)): -1, (1, (1, 0)): 1})
    orbit = refine_orbit(f, (1.0, 0.0), 2 * math.pi)
    assert abs(orbit.period - 2 * math.pi) < 1e-8
    mono = monodromy_and_exponents(f, orbit)
    assert np.allclose(mono.matrix, np.eye(2), atol=1e-8)
    assert np.allclose(mono.exponents, 0, atol=1e-8)


def test_constant_coefficient_monodromy():
    # orbit in the plane z = 0 with constant Jacobian A0
    f = AutonomousField.from_terms(3, {(0, (0, 1, 0)): -1, (1, (1, 0, 0)): 1, (2, (0, 0, 1)): -1})
    orbit = refine_orbit(f, (1.0, 0.0, 0.0), 2 * math.pi)
    A0 = np.array([[0, -1, 0], [1, 0, 0], [0, 0, -1]], dtype=float)
    mono = monodromy_and_exponents(f, orbit)
    assert np.allclose(mono.matrix, expm(orbit.period * A0), atol=1e-8)
    red = floquet_transform(f, orbit, mono)
    assert red.reduced.F.is_zero


def test_orbit_not_found_expanding():
    f = AutonomousField.from_terms(2, {(0, (1, 0)): 1, (1, (0, 1)): 1})
    with pytest.raises(OrbitNotFoundError):
        refine_orbit(f, (1.0, 0.0), 1.0)


def test_orbit_not_found_equilibrium_seed():
    f = AutonomousField.from_terms(2, LIMIT_CYCLE)
    with pytest.raises(OrbitNotFoundError):
        refine_orbit(f, (0.0, 0.0), 6.0)


def test_isochronous_center_wrong_period_collapses():
    f = AutonomousField.from_terms(2, {(0, (0, 1)): -1, (1, (1, 0)): 1})
    with pytest.raises(OrbitNotFoundError, match="equilibrium"):
        refine_orbit(f, (1.0, 0.0), 6.0)


def test_orbit_not_found_blowup():
    f = AutonomousField.from_terms(2, {(0, (2, 0)): 1, (1, (0, 0)): 1})
    with pytest.raises(OrbitNotFoundError):
        refine_orbit(f, (1.0, 0.0), 5.0, max_iter=5)


def test_defective_log_monodromy():
    A = np.array([[0.0, 0.0], [1.0, 0.0]])
    V, lam, sigma = _bidiagonal_basis(A, cond_limit=1e10)
    L = np.diag(lam) + np.diag(sigma, -1)
    assert np.allclose(V @ L @ np.linalg.inv(V), A)
    assert abs(sigma[0]) > 0.5


def test_trig_fit_exact_on_band():
    T = 3.0
    t = np.arange(16) * T / 16
    vals = 1 + 2 * np.cos(2 * np.pi * t / T) - 0.5j * np.sin(4 * np.pi * t / T)
    p = TrigPolynomial.fit(vals, T, 3)
    s = np.linspace(0, T, 7)
    assert np.allclose(p(s), 1 + 2 * np.cos(2 * np.pi * s / T) - 0.5j * np.sin(4 * np.pi * s / T))
    d = p.derivative(s)
    assert np.allclose(d, -2 * (2 * np.pi / T) * np.sin(2 * np.pi * s / T)
                       - 0.5j * (4 * np.pi / T) * np.cos(4 * np.pi * s / T))
    with pytest.raises(ValueError):
        TrigPolynomial.fit(vals[:6], T, 3)
