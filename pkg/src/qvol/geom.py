"""Hyperbolic cone structures on fillings of the figure-eight knot complement.

The potential V^+- (x, y) of a p/q filling has a unique critical point on the
geometric branch; at that point the shapes A = exp(2i(y+x)) and
B = exp(2i(y-x)) of the two ideal tetrahedra solve the gluing equations, and
the critical value is i (Vol + i CS) of the cone manifold with cone angle
theta.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .cfrac import SurgeryPresentation
from .config import settings
from .exceptions import ContinuationError, ConvergenceError, DomainError, RegionError
from .specfun import VOL_FIGURE_EIGHT, dilog

logger = logging.getLogger(__name__)

PI2 = math.pi**2

# Slopes whose cone manifolds are only known to stay above half the
# figure-eight volume up to cone angle pi.
SMALL_SLOPES = {(0, 1)} | {(n, 1) for n in range(-5, 6) if n != 0}


@dataclass(frozen=True)
class RegionSpec:
    """One of the regions D_delta, D'_delta, D''_delta in the (x, y) plane.

    Membership is decided on real parts in the coordinates u = y + x and
    v = y - x.
    """

    which: Literal["D", "Dprime", "Dsecond"] = "D"
    delta: float = 0.0

    def __post_init__(self) -> None:
        if self.which not in ("D", "Dprime", "Dsecond"):
            raise DomainError(f"unknown region '{self.which}'")
        if not 0.0 <= self.delta < math.pi / 4:
            raise DomainError(f"region delta must lie in [0, pi/4), got {self.delta}")

    @property
    def u_range(self) -> Tuple[float, float]:
        lo = math.pi if self.which == "Dsecond" else 0.0
        return lo + self.delta, lo + math.pi / 2 - self.delta

    @property
    def v_range(self) -> Tuple[float, float]:
        lo = math.pi if self.which == "Dprime" else 0.0
        return lo + self.delta, lo + math.pi / 2 - self.delta

    def contains(self, x, y):
        """Whether (Re x, Re y) lies in the open region."""
        u = np.real(np.asarray(y) + np.asarray(x))
        v = np.real(np.asarray(y) - np.asarray(x))
        (ulo, uhi), (vlo, vhi) = self.u_range, self.v_range
        inside = (ulo < u) & (u < uhi) & (vlo < v) & (v < vhi)
        return bool(inside) if np.ndim(inside) == 0 else inside


D_COMPLEX = RegionSpec("D", 0.0)


def _check_sign(sign: int) -> None:
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")


def _constant(pres: SurgeryPresentation, theta: float) -> float:
    return (pres.p_prime / pres.q + pres.a0) * theta**2 / 4


def potential_V(
    sign: int,
    pres: SurgeryPresentation,
    theta: float,
    x,
    y,
    region: Optional[RegionSpec] = D_COMPLEX,
):
    """V^+-(x, y) in its defining form.

    (-p x^2 +- theta x)/q - 2 pi x + 4xy - Li2(e^{-2i(y+x)}) + Li2(e^{2i(y-x)})
    - (p'/q + a0) theta^2 / 4

    Raises:
        RegionError: If a point is outside ``region`` (skipped when region is None)
    """
    _check_sign(sign)
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if region is not None and not np.all(region.contains(x, y)):
        raise RegionError(f"potential_V: point outside region {region.which} (delta={region.delta})")
    p, q = pres.p, pres.q
    value = ((-p * x**2 + sign * theta * x) / q - 2 * math.pi * x + 4 * x * y
             - np.asarray(dilog(np.exp(-2j * (y + x)))) + np.asarray(dilog(np.exp(2j * (y - x))))
             - _constant(pres, theta))
    return complex(value) if value.ndim == 0 else value


def potential_V_symmetric(sign: int, pres: SurgeryPresentation, theta: float, x, y):
    """Symmetric form of V^+-, equal to ``potential_V`` on D.

    (-p/q - 2) x^2 +- theta x / q - 2y^2 + 2 pi y - pi^2/3 + Li2(A) + Li2(B)
    - (p'/q + a0) theta^2 / 4
    """
    _check_sign(sign)
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    p, q = pres.p, pres.q
    value = ((-p / q - 2) * x**2 + sign * theta * x / q - 2 * y**2 + 2 * math.pi * y - PI2 / 3
             + np.asarray(dilog(np.exp(2j * (y + x)))) + np.asarray(dilog(np.exp(2j * (y - x))))
             - _constant(pres, theta))
    return complex(value) if value.ndim == 0 else value


def grad_V(sign: int, pres: SurgeryPresentation, theta: float, x: complex, y: complex) -> np.ndarray:
    """Gradient (dV/dx, dV/dy)."""
    _check_sign(sign)
    p, q = pres.p, pres.q
    la = np.log(1 - np.exp(2j * (y + x)))
    lb = np.log(1 - np.exp(2j * (y - x)))
    return np.array([
        2 * (-p / q - 2) * x + sign * theta / q - 2j * la + 2j * lb,
        -4 * y + 2 * math.pi - 2j * la - 2j * lb,
    ])


def hess_V(sign: int, pres: SurgeryPresentation, theta: float, x: complex, y: complex) -> np.ndarray:
    """Hessian of V^+-; independent of sign and theta."""
    _check_sign(sign)
    a = np.exp(2j * (y + x))
    b = np.exp(2j * (y - x))
    alpha = -4 * a / (1 - a)
    beta = -4 * b / (1 - b)
    return np.array([
        [-2 * pres.p / pres.q - 4 + alpha + beta, alpha - beta],
        [alpha - beta, -4 + alpha + beta],
    ])


@dataclass
class ConeGeometry:
    """Critical point data of V^+ and the cone manifold it describes."""

    p: int
    q: int
    a0: int
    theta: float
    x0c: complex
    y0c: complex
    A: complex
    B: complex
    critical_value: complex
    vol: float
    cs: float
    cs_unreduced: float
    hess: np.ndarray
    hess_det: complex
    Hm: complex
    Hl: complex
    Hgamma: complex
    core_length: float
    gluing_residual: float
    grad_residual: float
    sign: int = 1
    meta: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Flat JSON-friendly view."""
        return {
            "p": self.p,
            "q": self.q,
            "a0": self.a0,
            "theta": self.theta,
            "x0_re": self.x0c.real,
            "x0_im": self.x0c.imag,
            "y0_re": self.y0c.real,
            "y0_im": self.y0c.imag,
            "vol": self.vol,
            "cs": self.cs,
            "hess_det_re": self.hess_det.real,
            "hess_det_im": self.hess_det.imag,
            "core_length": self.core_length,
            "grad_residual": self.grad_residual,
            "gluing_residual": self.gluing_residual,
        }


def gluing_residual(A: complex, B: complex) -> float:
    """|log A + 2 log A'' + log B + 2 log B'' - 2 pi i| with A'' = 1 - 1/A."""
    value = np.log(A) + 2 * np.log(1 - 1 / A) + np.log(B) + 2 * np.log(1 - 1 / B) - 2j * math.pi
    return float(abs(value))


def _newton(
    sign: int, pres: SurgeryPresentation, theta: float, z: np.ndarray
) -> Optional[np.ndarray]:
    z = z.astype(complex)
    for _ in range(settings.NEWTON_MAX_ITER):
        if not D_COMPLEX.contains(z[0], z[1]):
            return None
        f = grad_V(sign, pres, theta, z[0], z[1])
        if not np.all(np.isfinite(f)):
            return None
        if np.max(np.abs(f)) < settings.NEWTON_TOL:
            return z
        try:
            dz = np.linalg.solve(hess_V(sign, pres, theta, z[0], z[1]), -f)
        except np.linalg.LinAlgError:
            return None
        z = z + dz
        if np.max(np.abs(dz)) < 1e-15 * (1 + np.max(np.abs(z))):
            break
    if not D_COMPLEX.contains(z[0], z[1]):
        return None
    f = grad_V(sign, pres, theta, z[0], z[1])
    return z if np.max(np.abs(f)) < 10 * settings.NEWTON_TOL else None


def _continue(
    sign: int,
    pres: SurgeryPresentation,
    theta_from: float,
    z_from: np.ndarray,
    theta_to: float,
) -> np.ndarray:
    """Follow the critical point from theta_from to theta_to with an Euler predictor."""
    theta_c, z_c = theta_from, z_from
    step = max((theta_to - theta_c) / settings.CONTINUATION_STEPS, settings.CONTINUATION_MIN_STEP)
    while theta_c < theta_to:
        h = min(step, theta_to - theta_c, max(0.25 * theta_c, settings.CONTINUATION_MIN_STEP))
        hess = hess_V(sign, pres, theta_c, z_c[0], z_c[1])
        dz = np.linalg.solve(hess, -np.array([sign / pres.q, 0.0]))
        z_new = _newton(sign, pres, theta_c + h, z_c + h * dz)
        if z_new is None:
            step = h / 2
            if step < settings.CONTINUATION_MIN_STEP:
                raise ContinuationError(
                    f"continuation for slope {pres.p}/{pres.q} stalled at theta={theta_c:.12g}",
                    last_good_theta=theta_c,
                )
            continue
        theta_c, z_c = theta_c + h, z_new
        step = 1.5 * h
    return z_c


def _start_point(sign: int, pres: SurgeryPresentation) -> Tuple[float, np.ndarray]:
    start = settings.CONTINUATION_START
    z = _newton(sign, pres, start, np.array([0.0, math.pi / 6], dtype=complex))
    if z is None:
        raise ContinuationError(f"no critical point near (0, pi/6) at theta={start}", last_good_theta=None)
    return start, z


def _build(sign: int, pres: SurgeryPresentation, theta: float, z: np.ndarray) -> ConeGeometry:
    x0, y0 = complex(z[0]), complex(z[1])
    A = complex(np.exp(2j * (y0 + x0)))
    B = complex(np.exp(2j * (y0 - x0)))
    if A.imag <= 0 or B.imag <= 0:
        raise ContinuationError(
            f"critical point left the geometric branch at theta={theta} (A={A}, B={B})",
            last_good_theta=None,
        )
    value = potential_V(sign, pres, theta, x0, y0)
    hess = hess_V(sign, pres, theta, x0, y0)
    det = complex(np.linalg.det(hess))
    if det == 0:
        raise ConvergenceError(f"degenerate Hessian at theta={theta}")
    Hm = 2j * x0
    Hl = (theta * 1j - pres.p * Hm) / pres.q
    Hgamma = -pres.q_prime * Hm + pres.p_prime * Hl + pres.a0 * theta * 1j
    return ConeGeometry(
        p=pres.p,
        q=pres.q,
        a0=pres.a0,
        theta=theta,
        x0c=x0,
        y0c=y0,
        A=A,
        B=B,
        critical_value=value,
        vol=value.imag,
        cs=(-value.real) % PI2,
        cs_unreduced=-value.real,
        hess=hess,
        hess_det=det,
        Hm=Hm,
        Hl=Hl,
        Hgamma=Hgamma,
        core_length=abs(Hgamma.real),
        gluing_residual=gluing_residual(A, B),
        grad_residual=float(np.max(np.abs(grad_V(sign, pres, theta, x0, y0)))),
        sign=sign,
    )


def solve_critical(
    pres: SurgeryPresentation,
    theta: float,
    sign: int = 1,
    start: Optional[Tuple[float, complex, complex]] = None,
) -> ConeGeometry:
    """Critical point of V^sign on the geometric branch.

    Continues in theta from the complete structure (0, pi/6) at
    ``settings.CONTINUATION_START``, or from ``start = (theta, x, y)``.

    Raises:
        DomainError: If theta is outside (0, 2 pi)
        ContinuationError: If continuation breaks down; carries the last good theta
    """
    _check_sign(sign)
    if not 0.0 < theta < 2 * math.pi:
        raise DomainError(f"theta must lie in (0, 2pi), got {theta}")
    if start is not None:
        theta_from, z_from = start[0], np.array([start[1], start[2]], dtype=complex)
    else:
        theta_from, z_from = _start_point(sign, pres)
    if theta <= theta_from:
        z = _newton(sign, pres, theta, z_from)
        if z is None:
            raise ContinuationError(f"Newton failed at theta={theta}", last_good_theta=None)
    else:
        z = _continue(sign, pres, theta_from, z_from, theta)
    geometry = _build(sign, pres, theta, z)
    logger.debug(f"slope {pres.p}/{pres.q}, theta={theta:.6g}: vol={geometry.vol:.12f}")
    return geometry


def holonomies(g: ConeGeometry) -> Tuple[complex, complex, complex, float]:
    """(H(m), H(l), H(gamma), core length) of a solved geometry."""
    return g.Hm, g.Hl, g.Hgamma, g.core_length


def nz_derivative(g: ConeGeometry) -> complex:
    """dH(l)/dH(m) from the Hessian of the unfilled potential at the critical point."""
    hess_u = g.hess + np.diag([2 * g.p / g.q, 0.0])
    return complex(-np.linalg.det(hess_u) / (2 * hess_u[1, 1]))


def nz_closed_form(Hm: complex, reference: Optional[complex] = None) -> complex:
    """dH(l)/dH(m) = 2(1 - 2t)/sqrt(t^2 - 2t - 3) with t = e^{H(m)} + e^{-H(m)}.

    The square root branch closest to ``reference`` is returned when one is given.
    """
    t = np.exp(Hm) + np.exp(-Hm)
    value = complex(2 * (1 - 2 * t) / np.sqrt(t * t - 2 * t - 3))
    if reference is not None and abs(-value - reference) < abs(value - reference):
        value = -value
    return value


def hypothesis_guaranteed(p: int, q: int, theta: float) -> bool:
    """Whether Vol(M_theta) > Vol(S^3 - 4_1)/2 is known for this slope and angle.

    Every slope other than (±1, 0), (0, ±1) and (±1..±5, ±1) qualifies up to
    2 pi; those small slopes qualify up to pi.
    """
    if q < 0:
        p, q = -p, -q
    if q == 0:
        return False
    if (p, q) in SMALL_SLOPES:
        return theta <= math.pi
    return theta <= 2 * math.pi


# ---------------------------------------------------------------------------
# Independent gluing-equation solver


def _gluing_system(p: int, q: int, theta: float, A: complex, B: complex) -> Tuple[np.ndarray, np.ndarray]:
    la2 = np.log(1 - 1 / A)
    lb2 = np.log(1 - 1 / B)
    e1 = np.log(A) + 2 * la2 + np.log(B) + 2 * lb2 - 2j * math.pi
    e2 = p * (-np.log(1 - B) - la2) + q * (2j * math.pi - 2 * np.log(A) - 4 * la2) - theta * 1j
    da2 = 1 / (A * (A - 1))
    db2 = 1 / (B * (B - 1))
    jac = np.array([
        [1 / A + 2 * da2, 1 / B + 2 * db2],
        [-p * da2 + q * (-2 / A - 4 * da2), p / (1 - B)],
    ])
    return np.array([e1, e2]), jac


def solve_gluing(p: int, q: int, theta: float, steps: int = 64) -> Tuple[complex, complex]:
    """Shapes (A, B) solving the gluing and filling equations.

    Newton's method in the shape variables, continued linearly in theta from the
    complete structure A = B = e^{i pi / 3}.
    """
    z = np.array([np.exp(1j * math.pi / 3)] * 2)
    for j in range(1, steps + 1):
        t = theta * j / steps
        for _ in range(settings.NEWTON_MAX_ITER):
            f, jac = _gluing_system(p, q, t, z[0], z[1])
            if np.max(np.abs(f)) < 1e-14:
                break
            z = z - np.linalg.solve(jac, f)
        else:
            f, _ = _gluing_system(p, q, t, z[0], z[1])
            if np.max(np.abs(f)) > 1e-11:
                raise ConvergenceError(f"gluing equations did not converge at theta={t}")
    return complex(z[0]), complex(z[1])


def gluing_volume(A: complex, B: complex, dps: int = 30) -> float:
    """Sum of the ideal tetrahedron volumes D(A) + D(B), evaluated with mpmath."""
    with mpmath.workdps(dps):
        total = mpmath.mpf(0)
        for z in (mpmath.mpc(A), mpmath.mpc(B)):
            total += mpmath.im(mpmath.polylog(2, z)) + mpmath.arg(1 - z) * mpmath.log(abs(z))
        return float(total)


def shapes_to_point(A: complex, B: complex) -> Tuple[complex, complex]:
    """(x, y) with A = e^{2i(y+x)} and B = e^{2i(y-x)}."""
    la, lb = np.log(A), np.log(B)
    return complex((la - lb) / 4j), complex((la + lb) / 4j)


# ---------------------------------------------------------------------------
# Families


@dataclass
class FamilyTable:
    """Cone geometries along a grid of cone angles with shape diagnostics."""

    geometries: List[ConeGeometry]
    decreasing: bool
    concave: bool
    second_differences: np.ndarray
    above_half: List[bool]
    nz_derivatives: List[complex]

    @property
    def thetas(self) -> np.ndarray:
        return np.array([g.theta for g in self.geometries])

    @property
    def vols(self) -> np.ndarray:
        return np.array([g.vol for g in self.geometries])


def cone_family(pres: SurgeryPresentation, theta_grid: Sequence[float]) -> FamilyTable:
    """Solve along an increasing grid, continuing from each solution to the next.

    Raises:
        DomainError: If the grid is not increasing inside (0, 2 pi)
        ContinuationError: At the first angle where continuation fails
    """
    grid = np.asarray(theta_grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise DomainError("theta grid must be non-empty and strictly increasing")
    geometries: List[ConeGeometry] = []
    start = None
    for theta in grid:
        g = solve_critical(pres, float(theta), start=start)
        geometries.append(g)
        start = (g.theta, g.x0c, g.y0c)
        logger.info(f"theta={theta:.6f}: vol={g.vol:.10f}, cs={g.cs:.10f}")

    vols = np.array([g.vol for g in geometries])
    if grid.size >= 3:
        slopes = np.diff(vols) / np.diff(grid)
        second = 2 * np.diff(slopes) / (grid[2:] - grid[:-2])
    else:
        second = np.zeros(0)
    return FamilyTable(
        geometries=geometries,
        decreasing=bool(np.all(np.diff(vols) < 0)),
        concave=bool(np.all(second <= 1e-10)),
        second_differences=second,
        above_half=[bool(v > VOL_FIGURE_EIGHT / 2) for v in vols],
        nz_derivatives=[nz_derivative(g) for g in geometries],
    )


# ---------------------------------------------------------------------------
# Deformation surfaces


def shifted_potential(
    sign: int, pres: SurgeryPresentation, theta: float, x, y, k0: int = 0, k1: int = 0, k2: int = 0
):
    """V^{(k0,k1,k2)} = V - 4 pi k0 x / q - 4 pi k1 x - 4 pi k2 y, without region checks."""
    base = np.asarray(potential_V(sign, pres, theta, x, y, region=None))
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    value = base - 4 * math.pi * k0 * x / pres.q - 4 * math.pi * k1 * x - 4 * math.pi * k2 * y
    return complex(value) if value.ndim == 0 else value


def surface_for_shift(g: ConeGeometry, k0: int, k1: int) -> int:
    """Sign of the surface S^+- on which Im V^{(k0,k1,0)} stays below the volume.

    With K = k0/q + k1 this is + when Im x0 and K have the same sign and -
    otherwise.
    """
    big_k = k0 / g.q + k1
    if big_k == 0:
        raise DomainError("k0/q + k1 must be non-zero")
    return 1 if (g.x0c.imag > 0) == (big_k > 0) else -1


def deformed_surface(
    g: ConeGeometry,
    sign: int,
    part: Literal["top", "side"] = "top",
    n: int = 50,
    delta: float = 0.0,
    region: Optional[RegionSpec] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Sample points of S^sign_top or S^sign_side over a region.

    The top surface is {(t1 + i sign Im x0, t2 + i Im y0)} over the region; the
    side surface joins its boundary to the real slice,
    {(t1 + i s sign Im x0, t2 + i s Im y0) : (t1, t2) on the boundary, 0 <= s <= 1}.
    """
    _check_sign(sign)
    region = region or RegionSpec("D", delta)
    (ulo, uhi), (vlo, vhi) = region.u_range, region.v_range
    ix, iy = sign * g.x0c.imag, g.y0c.imag
    if part == "top":
        u, v = np.meshgrid(np.linspace(ulo, uhi, n + 2)[1:-1], np.linspace(vlo, vhi, n + 2)[1:-1])
        return (u - v) / 2 + 1j * ix, (u + v) / 2 + 1j * iy
    if part != "side":
        raise DomainError(f"part must be 'top' or 'side', got {part}")
    t = np.linspace(0.0, 1.0, n)
    edge = np.linspace(0.0, 1.0, n)
    u = np.concatenate([ulo + (uhi - ulo) * edge, np.full(n, uhi), uhi - (uhi - ulo) * edge, np.full(n, ulo)])
    v = np.concatenate([np.full(n, vlo), vlo + (vhi - vlo) * edge, np.full(n, vhi), vhi - (vhi - vlo) * edge])
    s, uu = np.meshgrid(t, u)
    _, vv = np.meshgrid(t, v)
    return (uu - vv) / 2 + 1j * s * ix, (uu + vv) / 2 + 1j * s * iy


def top_surface_maximum(g: ConeGeometry, pres: SurgeryPresentation, n: int = 50) -> Tuple[float, complex, complex]:
    """Largest Im V^+ over a sample of S^+_top and the sample point attaining it."""
    x, y = deformed_surface(g, 1, "top", n=n)
    values = np.imag(np.asarray(potential_V(1, pres, g.theta, x, y, region=None)))
    i = np.unravel_index(np.argmax(values), values.shape)
    return float(values[i]), complex(x[i]), complex(y[i])
