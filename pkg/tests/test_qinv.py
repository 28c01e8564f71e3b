import math

import pytest

from qvol.cfrac import SurgeryPresentation
import qvol.qinv
from qvol.cyclotomic import rt_sum_exact
from qvol.exceptions import DomainError, PrecisionError
from qvol.qinv import (
    ColorParameters,
    choose_color,
    effective_kappa,
    epsilon_region,
    factorial_via_qdilog,
    habiro_bracket,
    kappa,
    lattice_summands,
    pochhammer_via_qdilog,
    q_pochhammer,
    quantum_bracket,
    quantum_factorial,
    quantum_integer,
    rt_invariant,
    summand_ratio_bound,
)
from qvol.specfun import PrecisionMode, lobachevsky


def test_quantum_integer_values():
    r = 7
    assert quantum_integer(r, 1) == pytest.approx(1.0)
    assert quantum_integer(r, 0) == 0.0
    assert quantum_integer(r, r - 1) == pytest.approx(-1.0)
    assert quantum_bracket(r, 1) == pytest.approx(2j * math.sin(2 * math.pi / r))


def test_quantum_factorial_definition():
    r = 9
    q = complex(math.cos(2 * math.pi / r), math.sin(2 * math.pi / r))
    expected = 1.0 + 0j
    for n in range(1, r - 1):
        expected *= q**n - q**-n
        assert quantum_factorial(r, n) == pytest.approx(expected, rel=1e-12)


def test_habiro_bracket_values():
    """<e_0> = 1, and at r = 5 the first two brackets have moduli 2 and 1/golden ratio."""
    for r in (5, 7, 11):
        assert abs(habiro_bracket(r, 0) - 1) < 1e-13
    assert abs(habiro_bracket(5, 1)) == pytest.approx(2.0, rel=1e-12)
    assert abs(habiro_bracket(5, 2)) == pytest.approx((math.sqrt(5) - 1) / 2, rel=1e-12)


@pytest.mark.parametrize("slope", [(5, 1), (5, 2)])
@pytest.mark.parametrize("r", [5, 7])
def test_raw_and_symmetrized_agree(slope, r):
    pres = SurgeryPresentation.from_slope(*slope)
    for m0 in range(r - 1):
        exact = complex(rt_sum_exact(r, pres, m0))
        raw = rt_invariant(r, pres, m0, mode="raw")
        sym = rt_invariant(r, pres, m0, mode="symmetrized")
        assert abs(raw.value - sym.value) <= 1e-12 * max(abs(exact), 1.0)
        assert raw.term_count > 0 and sym.term_count > 0


def test_factorials_from_quantum_dilog():
    r = 11
    for n in range(r - 1):
        assert factorial_via_qdilog(r, n) == pytest.approx(quantum_factorial(r, n), rel=1e-9)
        assert pochhammer_via_qdilog(r, n) == pytest.approx(q_pochhammer(r, n), rel=1e-9)
    for n in range((r - 1) // 2, r - 1):
        shifted = pochhammer_via_qdilog(r, n, shifted=True)
        assert shifted == pytest.approx(q_pochhammer(r, n), rel=1e-9)
    with pytest.raises(DomainError):
        pochhammer_via_qdilog(r, 1, shifted=True)


def test_choose_color_near_pi():
    r = 51
    m0 = choose_color(r, math.pi)
    assert m0 == 12
    theta_r = ColorParameters(r, m0).theta
    assert abs(theta_r - math.pi) <= 2 * math.pi / r


def test_choose_color_branches_are_mirror_images():
    r = 31
    for theta in (0.3, 1.0, 2.5, 5.0):
        lo = choose_color(r, theta, "minus")
        hi = choose_color(r, theta, "plus")
        assert lo + hi == r - 2
        assert ColorParameters(r, lo).theta == pytest.approx(ColorParameters(r, hi).theta)


def test_color_parameters():
    colors = ColorParameters(7, 2)
    assert colors.shifted_color == 1
    assert colors.x0 == pytest.approx(math.pi - 2 * math.pi / 7 - 4 * math.pi / 7)


@pytest.mark.parametrize("x, y, expected", [
    (0.0, math.pi / 2, 2),
    (-0.6 * math.pi, 0.65 * math.pi, 1),
    (0.6 * math.pi, 0.65 * math.pi, 1),
    (-3 * math.pi / 5, 3 * math.pi / 5, 0),
    (0.0, 1.5 * math.pi, 0),
])
def test_epsilon_region(x, y, expected):
    assert epsilon_region(x, y) == expected


@pytest.mark.parametrize("slope", [(5, 1), (5, 2), (7, 3)])
def test_effective_kappa_modulus(slope):
    pres = SurgeryPresentation.from_slope(*slope)
    k = pres.k
    for r in (7, 51):
        expected = 2.0 ** ((k - 3) / 2) * r ** (-(k + 1) / 2)
        assert abs(effective_kappa(r, pres)) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("slope", [(5, 1), (5, 2), (7, 3)])
def test_displayed_kappa_modulus(slope):
    pres = SurgeryPresentation.from_slope(*slope)
    k = pres.k
    for r in (7, 51):
        s = math.sin(2 * math.pi / r)
        expected = 2.0 ** (k - 3) * r ** (-(k + 1) / 2) * s ** (k - 1)
        assert abs(kappa(r, pres)) == pytest.approx(expected, rel=1e-12)
        ratio = abs(effective_kappa(r, pres)) / abs(kappa(r, pres))
        assert ratio == pytest.approx(2.0 ** ((3 - k) / 2) / s ** (k - 1), rel=1e-12)


def test_factorial_growth_follows_lobachevsky():
    """|log|{n}!| + (r / 2 pi) Lambda(2 pi n / r)| <= 3 log r."""
    r = 101
    for n in range(1, r):
        excess = math.log(abs(quantum_factorial(r, n))) + r / (2 * math.pi) * lobachevsky(2 * math.pi * n / r)
        assert abs(excess) <= 3 * math.log(r)


def test_summands_respect_ratio_bound(pres51):
    """The largest summand has the size exp((r / 2 pi) 2 Lambda(pi / 6)) up to a factor r."""
    r = 51
    bound = summand_ratio_bound(r)
    largest = max(abs(value) for value in lattice_summands(r, pres51, 12, 1).values())
    assert bound / r <= largest <= bound * r


@pytest.mark.parametrize("mode", ["raw", "symmetrized"])
def test_worker_count_does_not_change_value(pres52, mode):
    values = [rt_invariant(11, pres52, 3, mode=mode, workers=workers) for workers in (1, 4, 8)]
    assert all(v.to_dict() == values[0].to_dict() for v in values)


def test_extended_precision_agrees(pres51):
    standard = rt_invariant(9, pres51, 2)
    extended = rt_invariant(9, pres51, 2, precision=PrecisionMode.from_bits(96))
    assert extended.extended_value is not None
    assert abs(extended.value - standard.value) <= 1e-11 * abs(standard.value)
    assert extended.to_dict()["precisionBits"] == 96


@pytest.mark.parametrize("mode", ["raw", "symmetrized"])
def test_extended_precision_skips_binary64_sum(mocker, pres52, mode):
    raw = mocker.spy(qvol.qinv, "_raw_sum")
    sym = mocker.spy(qvol.qinv, "_symmetrized_sum")
    value = rt_invariant(9, pres52, 2, mode=mode, precision=PrecisionMode.from_bits(96))
    assert raw.call_count == 0 and sym.call_count == 0
    assert value.extended_value is not None
    assert abs(value.value - rt_invariant(9, pres52, 2, mode=mode).value) <= 1e-11 * abs(value.value)


def test_cancellation_raises_precision_error(mocker, pres51):
    mocker.patch("qvol.qinv._symmetrized_sum", return_value=1e-20 + 0j)
    mocker.patch("qvol.qinv._term_bounds", return_value=(1.0, 10))
    with pytest.raises(PrecisionError) as excinfo:
        rt_invariant(7, pres51, 2)
    assert excinfo.value.cancellation_estimate == pytest.approx(20.0)


def test_invalid_arguments(pres51):
    with pytest.raises(DomainError):
        rt_invariant(8, pres51, 0)
    with pytest.raises(DomainError):
        rt_invariant(7, pres51, 6)
    with pytest.raises(DomainError):
        rt_invariant(7, pres51, 0, mode="fast")


def test_invariant_value_dict(pres51):
    data = rt_invariant(7, pres51, 2).to_dict()
    assert set(data) == {
        "r", "m0", "mode", "re", "im", "abs", "precisionBits", "termCount", "cancellationEstimate",
    }
    assert data["abs"] == pytest.approx(math.hypot(data["re"], data["im"]))


def test_lattice_summands_cover_odd_lattice(pres51):
    r = 7
    values = lattice_summands(r, pres51, 2, 1)
    assert all(mk % 2 == 1 and m % 2 == 1 for mk, m in values)
    expected = sum((r - 2 - abs(mk)) // 2 + 1 for mk in range(-(r - 2), r - 1, 2))
    assert len(values) == expected
    with pytest.raises(DomainError):
        lattice_summands(r, pres51, 2, 0)
    with pytest.raises(DomainError):
        lattice_summands(r, SurgeryPresentation.from_slope(5, 2), 2, 1)
