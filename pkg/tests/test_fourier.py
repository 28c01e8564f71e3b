import math
from types import SimpleNamespace

import numpy as np
import pytest

from qvol.exceptions import DomainError, HypothesisError, ResolutionError
from qvol.fourier import (
    BumpSpec,
    QuadratureSpec,
    coefficient_saddle_estimate,
    Vr_correction,
    Vr_potential,
    bump_psi,
    coefficient_set,
    fourier_coefficient,
    lattice_g,
    poisson_check,
    predict_leading,
    smooth_step,
    verify_volume_conjecture,
    window,
)
from qvol.geom import RegionSpec, potential_V, solve_critical
from qvol.qinv import ColorParameters, lattice_summands


def test_smooth_step():
    assert smooth_step(0.0) == 0.0
    assert smooth_step(-1.0) == 0.0
    assert smooth_step(1.0) == 1.0
    assert smooth_step(0.5) == pytest.approx(0.5)
    t = np.linspace(0.0, 1.0, 101)
    assert np.all(np.diff(smooth_step(t)) >= 0)


def test_window():
    values = window(np.array([-0.1, 0.05, 0.5, 0.95, 1.1]), 0.0, 1.0, 0.1)
    assert values[0] == 0.0 and values[-1] == 0.0
    assert values[2] == 1.0
    assert 0.0 < values[1] < 1.0 and 0.0 < values[3] < 1.0


def test_bump_psi():
    spec = BumpSpec(0.15, 21)
    assert bump_psi(spec, (0.0, math.pi / 4)) == 1.0
    assert bump_psi(spec, (0.0, 1.0)) == 1.0
    assert 0.0 < bump_psi(spec, (0.0, 0.02)) < 1.0
    assert bump_psi(spec, (0.0, 2.0)) == 0.0
    assert bump_psi(spec, (0.0, 0.0, math.pi / 4)) == 1.0
    assert 0.0 < bump_psi(spec, (3.1, 0.0, math.pi / 4)) < 1.0
    assert bump_psi(BumpSpec(0.15, 21, "indicator"), (3.1, 0.0, math.pi / 4)) == 0.0
    with pytest.raises(DomainError):
        bump_psi(spec, (0.1,))
    with pytest.raises(DomainError):
        BumpSpec(0.5, 21)
    with pytest.raises(DomainError):
        BumpSpec(0.15, 20)


def test_quantum_potential_converges(pres51):
    """V_r - V - c / r shrinks like 1/r^2."""
    x, y, theta = 0.1, 0.6, 2.0
    v = potential_V(1, pres51, theta, x, y)
    c = Vr_correction(x, y)

    def remainder(r):
        return abs(Vr_potential(1, pres51, theta, r, x, y) - v - c / r)

    assert 3.3 <= remainder(51) / remainder(101) <= 4.5
    assert abs(Vr_potential(1, pres51, theta, 101, x, y) - v) < 0.5


def test_quantum_potential_sign_difference(pres52):
    x, y, theta, r = 0.1, 0.6, 1.7, 31
    plus = Vr_potential(1, pres52, theta, r, x, y)
    minus = Vr_potential(-1, pres52, theta, r, x, y)
    assert abs(plus - minus - 2 * theta * x / pres52.q) < 1e-12


@pytest.mark.parametrize("r", [7, 9])
@pytest.mark.parametrize("t", [1, -1])
def test_lattice_function_reproduces_summands(pres51, r, t):
    """Every summand with non-zero multiplicity is one fixed multiple of g_r at its lattice point."""
    m0 = 2
    x0 = ColorParameters(r, m0).x0
    theta = abs(2 * x0)
    sign = -t * (1 if x0 > 0 else -1)
    ratios = []
    for (mk, m), summand in lattice_summands(r, pres51, m0, t).items():
        g = lattice_g(sign, pres51, theta, r, math.pi * mk / r, math.pi * m / r)
        if g != 0:
            ratios.append(summand / g)
    assert len(ratios) > 3
    assert np.allclose(ratios, ratios[0], rtol=1e-9, atol=0)


def test_prediction_grows_with_volume(pres51):
    g = solve_critical(pres51, math.pi)
    r1, r2 = 51, 101
    p1 = predict_leading(pres51, math.pi, r1, g)
    p2 = predict_leading(pres51, math.pi, r2, g)
    assert math.log(abs(p2) / abs(p1)) == pytest.approx((r2 - r1) * g.vol / (4 * math.pi), abs=1e-9)
    with pytest.raises(DomainError):
        predict_leading(pres51, math.pi, r1, g, normalization="other")


def test_literal_normalization_has_same_growth(pres51):
    g = solve_critical(pres51, math.pi)
    a = predict_leading(pres51, math.pi, 51, g, "literal")
    b = predict_leading(pres51, math.pi, 101, g, "literal")
    assert math.log(abs(b) / abs(a)) == pytest.approx(50 * g.vol / (4 * math.pi), rel=1e-2)


def test_panel_budget(pres51):
    with pytest.raises(ResolutionError):
        fourier_coefficient(pres51, 2.0, 21, quad=QuadratureSpec(max_panels=3))


def test_quadrature_needs_single_component(pres52):
    with pytest.raises(DomainError):
        fourier_coefficient(pres52, 2.0, 21)


def test_quadrature_is_independent_of_workers(pres51):
    values = [
        fourier_coefficient(pres51, 2.0, 11, (0, 1, 0), quad=QuadratureSpec(workers=workers))
        for workers in (1, 3, 4, 8)
    ]
    assert all(value == values[0] for value in values)


def test_coefficient_follows_saddle_estimate(pres51):
    """The (0, 0, 0) coefficient over D has the stationary-phase size at r = 31."""
    theta, r = math.pi, 31
    g = solve_critical(pres51, theta)
    quad = QuadratureSpec(regions=("D",))
    coefficient = fourier_coefficient(pres51, theta, r, quad=quad)
    estimate = coefficient_saddle_estimate(g, pres51, r)
    assert math.log(abs(estimate)) > 1.0
    assert math.log(abs(coefficient)) == pytest.approx(math.log(abs(estimate)), rel=0.1)


def test_coefficient_set():
    pairs = coefficient_set(1)
    assert len(pairs) == 9
    assert (0, 0) in pairs and (-1, 1) in pairs


def test_poisson_check_level_limit(pres51):
    with pytest.raises(DomainError):
        poisson_check(pres51, 2.0, 53, coefficient_set(0))


def test_verify_rejects_small_volume(mocker, pres51):
    g = solve_critical(pres51, 1.0)
    mocker.patch("qvol.fourier.cone_family", return_value=SimpleNamespace(geometries=[g], above_half=[False]))
    with pytest.raises(HypothesisError):
        verify_volume_conjecture(pres51, 1.0, [21])


def test_verify_rejects_bad_levels(pres51):
    with pytest.raises(DomainError):
        verify_volume_conjecture(pres51, math.pi, [21, 15])
    with pytest.raises(DomainError):
        verify_volume_conjecture(pres51, math.pi, [20])
    with pytest.raises(DomainError):
        verify_volume_conjecture(pres51, math.pi, [])


def test_verify_report_shape(pres51):
    report = verify_volume_conjecture(pres51, math.pi, [15, 21], workers=1)
    assert [row.r for row in report.rows] == [15, 21]
    assert report.fit.vol == pytest.approx(solve_critical(pres51, math.pi).vol)
    assert report.fit.vol_fit is not None
    assert all(math.isfinite(row.ratio_err) for row in report.rows)


def test_verify_records_critical_region(pres51):
    g = solve_critical(pres51, math.pi)
    for delta in (0.01, 0.3):
        report = verify_volume_conjecture(pres51, math.pi, [15], delta=delta)
        assert report.fit.delta == delta
        assert report.fit.critical_in_region == RegionSpec("D", delta).contains(g.x0c, g.y0c)
    with pytest.raises(DomainError):
        verify_volume_conjecture(pres51, math.pi, [15], delta=1.0)


@pytest.mark.slow
def test_poisson_summation_with_few_coefficients(pres51):
    _, _, gap_two = poisson_check(pres51, 2.0, 21, coefficient_set(2))
    _, _, gap_indicator = poisson_check(pres51, 2.0, 21, coefficient_set(2), bump="indicator")
    assert gap_two < 0.05
    assert gap_indicator > gap_two


@pytest.mark.slow
def test_poisson_gap_shrinks_in_trend(pres51):
    """Single steps may overshoot, but two more coefficient shells always help."""
    gaps = [poisson_check(pres51, 2.0, 21, coefficient_set(n))[2] for n in range(6)]
    assert all(gap <= gaps[0] for gap in gaps)
    assert all(later < earlier for earlier, later in zip(gaps, gaps[2:]))
    assert gaps[-1] < gaps[0] / 10
    assert gaps[-1] < 0.05


def test_volume_conjecture_sweep(pres51):
    report = verify_volume_conjecture(pres51, math.pi, list(range(51, 352, 50)))
    errors = {row.r: row.ratio_err for row in report.rows}
    assert errors[351] < 0.2
    levels = sorted(errors)
    assert sum(1 for a, b in zip(levels, levels[1:]) if errors[b] > errors[a]) <= 1
    for r in (51, 101, 151):
        assert 0.3 <= errors[2 * r - 1] / errors[r] <= 1.0
    assert min(report.fit.vol_gap, report.fit.richardson_gap) < 1e-3
