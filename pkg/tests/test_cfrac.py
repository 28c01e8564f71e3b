import math
from fractions import Fraction

import numpy as np
import pytest

from qvol.cfrac import (
    SurgeryPresentation,
    b_sequence,
    c_sequence,
    fold_back,
    hj_expand,
    inverse_pair,
    k0_of,
    lattice_point,
    linking_signature,
)
from qvol.exceptions import DomainError, SingularLinkingMatrixError


@pytest.mark.parametrize("p, q, expected", [(5, 1, [5]), (5, 2, [2, 3]), (7, 3, [2, 2, 3])])
def test_hj_expand_examples(p, q, expected):
    assert hj_expand(p, q) == expected


def test_hj_expand_rejects_excluded_slopes():
    with pytest.raises(DomainError, match="excluded"):
        hj_expand(1, 0)
    with pytest.raises(DomainError):
        hj_expand(4, 2)


def test_reconstruction_and_arithmetic_identity():
    """Every coprime slope folds back exactly, and sum 1/(c_{j-1} c_j) = -p'/q."""
    for p in range(-50, 51):
        for q in range(1, 51):
            if math.gcd(p, q) != 1:
                continue
            a = hj_expand(p, q)
            assert fold_back(a) == Fraction(p, q)
            assert all(ai >= 2 for ai in a[:-1])
            c = c_sequence(b_sequence(a))
            assert c[len(a) - 1] == q
            p_prime, q_prime = inverse_pair(p, q)
            assert p * p_prime + q * q_prime == 1
            assert -q < p_prime <= 0
            total = sum(Fraction(1) / (c[j - 1] * c[j]) for j in range(1, len(a)))
            assert total == Fraction(-p_prime, q)


@pytest.mark.parametrize("p, q, expected", [(5, 1, (0, 1)), (5, 2, (-1, 3)), (1, 1, (0, 1))])
def test_inverse_pair_examples(p, q, expected):
    assert inverse_pair(p, q) == expected


def test_linking_signature_examples():
    assert linking_signature([5]) == 1
    assert linking_signature([2, 3]) == 2
    assert linking_signature([-2]) == -1
    assert linking_signature([2, -3]) == 0


def test_linking_signature_singular():
    """[1, 1] has determinant 0."""
    with pytest.raises(SingularLinkingMatrixError):
        linking_signature([1, 1])
    assert linking_signature([1, 1], allow_singular=True) == 1


def test_presentation_fields(pres52):
    assert pres52.k == 2
    assert pres52.a == (2, 3)
    assert pres52.all_a == (0, 2, 3)
    assert pres52.b[-1] == Fraction(5, 2)
    assert pres52.c[0] == 1
    assert (pres52.p_prime, pres52.q_prime) == (-1, 3)
    assert pres52.slope == Fraction(5, 2)


def test_presentation_normalises_negative_q():
    pres = SurgeryPresentation.from_slope(-5, -2)
    assert (pres.p, pres.q) == (5, 2)


def test_lattice_point_k1_is_empty(pres51):
    assert lattice_point(pres51, 1, 0.3, 0.5).shape == (0,)


def test_lattice_point_closed_form(pres52):
    """x_1 = ((-1)^{k-1} x + sign p' x0) / q."""
    x = np.linspace(-2.0, 2.0, 9)
    x0 = 0.7
    for sign in (1, -1):
        expected = (-x + sign * pres52.p_prime * x0) / pres52.q
        assert np.allclose(lattice_point(pres52, sign, x, x0, i=1), expected, atol=1e-14)


def test_lattice_points_stay_inside():
    """For 7/3 and |x| < pi - q pi / r the interior points stay in (-pi + 2pi/r, pi - 2pi/r)."""
    pres = SurgeryPresentation.from_slope(7, 3)
    r = 21
    xs = np.linspace(-math.pi + 3 * math.pi / r, math.pi - 3 * math.pi / r, 1000)[1:-1]
    for m0 in range(r - 1):
        x0 = math.pi - 2 * math.pi / r - 2 * math.pi * m0 / r
        for sign in (1, -1):
            pts = lattice_point(pres, sign, xs, x0)
            assert np.all(np.abs(pts) < math.pi - 2 * math.pi / r)


def test_large_shift_pushes_last_point_out(pres52):
    """|k0| >= q forces |x_{k-1}| >= pi."""
    xs = np.linspace(-math.pi, math.pi, 201)[1:-1]
    for n1 in (-3, -2, 2, 3):
        assert abs(k0_of(pres52, [n1])) >= pres52.q
        for x0 in np.linspace(-3.0, 3.0, 7):
            for sign in (1, -1):
                pts = lattice_point(pres52, sign, xs, x0, n=[n1], i=1)
                assert np.all(np.abs(pts) >= math.pi)


def test_balanced_shift_pushes_some_point_out():
    """A non-zero shift with k0 = 0 still puts one interior point outside (-pi, pi)."""
    pres = SurgeryPresentation.from_slope(7, 3)
    xs = np.linspace(-math.pi, math.pi, 201)[1:-1]
    for n in ([2, 1], [-2, -1], [4, 2]):
        assert k0_of(pres, n) == 0
        for x0 in np.linspace(-math.pi, math.pi, 9):
            for sign in (1, -1):
                pts = lattice_point(pres, sign, xs, x0, n=n)
                assert np.all(np.abs(pts).max(axis=0) >= math.pi)


def test_k0_examples(pres52):
    assert k0_of(pres52, [0]) == 0
    assert k0_of(pres52, [1]) == -1
    assert k0_of(SurgeryPresentation.from_slope(7, 3), [1, 1]) == -1


def test_lattice_point_validates_arguments(pres52):
    with pytest.raises(DomainError):
        lattice_point(pres52, 2, 0.1, 0.1)
    with pytest.raises(DomainError):
        lattice_point(pres52, 1, 0.1, 0.1, n=[1, 2])
