import pytest

from pdnf.algebra import I, ExactComplex, LinearPart, PeriodicSystem, TaylorFourierSeries, VectorSeries
from pdnf.corpus import build_corpus
from pdnf.integrals import (
    exact_rank,
    gradient_matrix,
    independence_rank,
    is_first_integral,
    pushforward,
    rational_phase,
    resonant_function_check,
)
from pdnf.normalform import normalize

LAM = LinearPart(("i", "0"))
X2SQ = PeriodicSystem(LAM, VectorSeries.from_terms(2, 4, {((0, 2), 0, 0): 1}))
PHI = VectorSeries.from_terms(2, 4, {((0, 2), 0, 0): I})


def H(terms, N=4, n=2):
    return TaylorFourierSeries(n, N, terms)


def test_x2_is_integral():
    r = is_first_integral(H({((0, 1), 0): 1}), X2SQ, 4)
    assert r.is_integral_to_N and r.defect.is_zero


def test_rotating_coordinate_is_integral():
    linear_only = PeriodicSystem(LAM, VectorSeries.zero(2, 3))
    assert is_first_integral(H({((1, 0), -1): 1}, N=3), linear_only, 3).is_integral_to_N


def test_x1_is_not_integral():
    r = is_first_integral(H({((1, 0), 0): 1}, N=3), PeriodicSystem(LAM, VectorSeries.zero(2, 3)), 3)
    assert not r.is_integral_to_N
    assert r.defect.terms == {((1, 0), 0): I}


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        is_first_integral(H({((1, 0, 0), 0): 1}, n=3), X2SQ, 3)


def test_pushforward_examples():
    assert pushforward(H({((0, 1), 0): 1}), PHI, 4) == H({((0, 1), 0): 1})
    assert pushforward(H({((1, 0), 0): 1}), PHI, 4) == H({((1, 0), 0): 1, ((0, 2), 0): I})
    got = pushforward(H({((1, 1), -1): 1}), PHI, 3)
    assert got == H({((1, 1), -1): 1, ((0, 3), -1): I}, N=3)


def test_resonant_check_examples():
    lam = LAM.lam
    assert resonant_function_check(H({((0, 1), 0): 1}), lam).resonant_structure
    assert resonant_function_check(H({((1, 0), -1): 1}), lam).resonant_structure
    r = resonant_function_check(H({((1, 0), 0): 1}), lam)
    assert not r.resonant_structure and r.offending_terms == [((1, 0), 0)]


def test_independence_examples():
    assert independence_rank([H({((0, 1), 0): 1})]) == 1
    assert independence_rank([H({((0, 1), 0): 1}), H({((0, 2), 0): 1})]) == 1
    pair = [H({((1, 0), -1): 1}), H({((0, 1), 0): 1})]
    one = [ExactComplex(1), ExactComplex(1)]
    assert exact_rank(gradient_matrix(pair, one, rational_phase(0))) == 2
    assert independence_rank(pair) == 2
    with pytest.raises(ValueError):
        independence_rank([])


def test_independence_approx_path():
    pair = [H({((1, 0), -1): 1}).to_approx(), H({((0, 1), 0): 1}).to_approx()]
    assert independence_rank(pair) == 2


def test_rational_phase_on_unit_circle():
    for u in ("0", "1/3", "-5/7", "2"):
        z = rational_phase(u)
        assert z * z.conjugate() == ExactComplex(1)


def test_planted_integrals_pushforward_resonant():
    planted = [c for c in build_corpus(seed=11, size=25) if c.integral is not None]
    assert planted
    for case in planted:
        assert is_first_integral(case.integral, case.system, case.N).is_integral_to_N
        r = normalize(case.system, case.N)
        Ht = pushforward(case.integral, r.Phi, case.N)
        assert is_first_integral(Ht, r.normal_form, case.N).is_integral_to_N
        assert resonant_function_check(Ht, case.system.linear.lam).resonant_structure
