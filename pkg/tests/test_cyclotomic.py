import math

import mpmath
import pytest

from qvol.cyclotomic import CyclotomicElement, habiro_bracket_exact, rt_sum_exact
from qvol.exceptions import DomainError
from qvol.qinv import habiro_bracket, rt_invariant


def test_monomial_half_turn_is_minus_one():
    for r in (5, 7, 11):
        assert abs(CyclotomicElement.monomial(r, r).evaluate() + 1) < 1e-40


def test_bracket_value():
    r = 7
    for n in range(1, r):
        value = complex(CyclotomicElement.bracket(r, n).evaluate())
        assert abs(value - 2j * math.sin(2 * math.pi * n / r)) < 1e-14


def test_ring_arithmetic():
    """(1 - zeta^2)(1 + zeta^2) = 1 - zeta^4, and exponents wrap modulo 2r."""
    r = 5
    one = CyclotomicElement.one(r)
    z2 = CyclotomicElement.monomial(r, 2)
    assert ((one - z2) * (one + z2) - (one - CyclotomicElement.monomial(r, 4))).is_zero()
    assert (CyclotomicElement.monomial(r, 3).shift(2 * r - 3) - one).is_zero()
    assert (z2 * 3 - (z2 + z2 + z2)).is_zero()


def test_levels_do_not_mix():
    with pytest.raises(DomainError):
        CyclotomicElement.one(5) + CyclotomicElement.one(7)


def test_habiro_bracket_trivial_color():
    for r in (5, 7, 9):
        assert abs(habiro_bracket_exact(r, 0) - 1) < 1e-30


@pytest.mark.parametrize("r", [5, 7, 9])
def test_habiro_bracket_matches_floating_point(r):
    for n in range(r - 1):
        exact = complex(habiro_bracket_exact(r, n))
        assert abs(exact - habiro_bracket(r, n)) < 1e-12 * max(1.0, abs(exact))


def test_habiro_bracket_index_range():
    with pytest.raises(DomainError):
        habiro_bracket_exact(5, 4)


@pytest.mark.parametrize("slope", [(5, 1), (5, 2)])
@pytest.mark.parametrize("r", [5, 7])
def test_exact_sum_matches_both_float_forms(slope, r):
    """Every color agrees with the exact sum to 1e-12, relative or absolute near zero."""
    from qvol.cfrac import SurgeryPresentation

    pres = SurgeryPresentation.from_slope(*slope)
    for m0 in range(r - 1):
        exact = complex(rt_sum_exact(r, pres, m0))
        for mode in ("raw", "symmetrized"):
            value = rt_invariant(r, pres, m0, mode=mode).value
            assert abs(value - exact) <= 1e-12 * max(abs(exact), 1.0)


def test_exact_sum_rejects_even_level(pres51):
    with pytest.raises(DomainError):
        rt_sum_exact(6, pres51, 0)


def test_evaluation_precision():
    r = 5
    value = CyclotomicElement.bracket(r, 1).evaluate(dps=60)
    with mpmath.workdps(60):
        assert abs(value - 2j * mpmath.sinpi(mpmath.mpf(2) / r)) < mpmath.mpf(10) ** -55
