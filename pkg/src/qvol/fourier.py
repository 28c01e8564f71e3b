"""Poisson summation and the asymptotics of the invariants.

For k = 1 presentations the symmetrized summands are lattice values of
g(x, y) = eps(x, y) e^{-ix} e^{(r / 4 pi i) V_r(x, y)} at x = pi M_1 / r,
y = pi M / r with M_1, M odd. Cutting g off with a smooth bump supported in
the three squares D, D', D'' and applying Poisson summation turns the sum
into Fourier coefficients, each an oscillatory integral that is evaluated
here with tensor Gauss-Legendre panels.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np

from .cfrac import SurgeryPresentation
from .config import settings
from .exceptions import DomainError, HypothesisError, RegionError, ResolutionError
from .geom import ConeGeometry, RegionSpec, cone_family, solve_critical
from .qinv import ColorParameters, choose_color, effective_kappa, kappa, rt_invariant
from .reports import AsymptoticReport, FitSummary, ReportRow
from .specfun import VOL_FIGURE_EIGHT, PrecisionMode, gauss_legendre, quantum_dilog
from .utils.summation import combine_partials, pairwise_sum, parallel_map, partial_sum

logger = logging.getLogger(__name__)

SQUARES = ("D", "Dprime", "Dsecond")
Normalization = Literal["effective", "literal"]

# u-panels evaluated per work item
_BLOCK_PANELS = 8


# ---------------------------------------------------------------------------
# Bump function


def smooth_step(t):
    """C-infinity step, 0 for t <= 0 and 1 for t >= 1, built from e^{-1/t}."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        g = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    out = f / (f + g)
    return float(out) if out.ndim == 0 else out


def window(t, lo: float, hi: float, collar: float):
    """1 on [lo + collar, hi - collar], 0 outside (lo, hi), smooth in between."""
    t = np.asarray(t, dtype=float)
    return smooth_step((t - lo) / collar) * smooth_step((hi - t) / collar)


@dataclass(frozen=True)
class BumpSpec:
    """Cut-off psi for the lattice sum.

    psi is 1 on [-pi + 2pi/r, pi - 2pi/r]^{k-1} x closure(D_{delta/2}) and 0
    outside (-pi, pi)^{k-1} x (D u D' u D''). ``kind="indicator"`` replaces it by
    the indicator of the inner set.
    """

    delta: float
    r: int
    kind: Literal["smooth", "indicator"] = "smooth"

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < math.pi / 8:
            raise DomainError(f"bump delta must lie in (0, pi/8), got {self.delta}")
        if not isinstance(self.r, (int, np.integer)) or self.r < 3 or self.r % 2 == 0:
            raise DomainError(f"level r must be an odd integer >= 3, got {self.r}")
        if self.kind not in ("smooth", "indicator"):
            raise DomainError(f"unknown bump kind '{self.kind}'")

    @property
    def collar(self) -> float:
        return self.delta / 2

    def factor(self, t, lo: float, hi: float):
        """One-dimensional factor of psi on the interval (lo, hi)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "indicator":
            return ((lo + self.collar <= t) & (t <= hi - self.collar)).astype(float)
        return window(t, lo, hi, self.collar)

    def square(self, x, y):
        """The (x, y) part of psi."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u, v = y + x, y - x
        total = np.zeros(np.broadcast(u, v).shape)
        for which in SQUARES:
            region = RegionSpec(which, 0.0)
            total = total + self.factor(u, *region.u_range) * self.factor(v, *region.v_range)
        return total


def bump_psi(spec: BumpSpec, point: Sequence[float]) -> float:
    """psi(x_1, ..., x_{k-1}, x, y) for a point whose last two entries are (x, y)."""
    if len(point) < 2:
        raise DomainError("a point needs at least the coordinates (x, y)")
    value = float(spec.square(point[-2], point[-1]))
    c = 2 * math.pi / spec.r
    for xi in point[:-2]:
        if spec.kind == "indicator":
            value *= float(-math.pi + c <= xi <= math.pi - c)
        else:
            value *= float(window(xi, -math.pi, math.pi, c))
    return value


# ---------------------------------------------------------------------------
# Potentials


def _polynomial(sign: int, pres: SurgeryPresentation, theta: float, x, y):
    return ((-pres.p * x * x + sign * theta * x) / pres.q - 2 * math.pi * x + 4 * x * y
            - (pres.p_prime / pres.q + pres.a0) * theta**2 / 4)


def _u_argument(which: str, r: int, u):
    shift = 2 * math.pi if which == "Dsecond" else math.pi
    return shift - u - math.pi / r


def _v_argument(which: str, r: int, v):
    shift = math.pi if which == "Dprime" else 0.0
    return v - shift + math.pi / r


def Vr_potential(
    sign: int,
    pres: SurgeryPresentation,
    theta: float,
    r: int,
    x,
    y,
    region: Optional[RegionSpec] = RegionSpec("D", 0.0),
):
    """Quantum potential V_r^+- on one of the squares.

    On D it is (-p x^2 +- theta x)/q - 2 pi x + 4xy - phi_r(pi - (y+x) - pi/r)
    + phi_r((y-x) + pi/r) - (p'/q + a0) theta^2 / 4. On D' the second quantum
    dilogarithm is taken at (y-x) - pi + pi/r, on D'' the first at
    2 pi - (y+x) - pi/r. With ``region=None`` the D form is used without a
    membership check.

    Raises:
        RegionError: If a point lies outside ``region``
        PoleProximityError: If an argument is too close to a pole of phi_r
    """
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    which = "D" if region is None else region.which
    if region is not None and not np.all(region.contains(x, y)):
        raise RegionError(f"Vr_potential: point outside region {region.which} (delta={region.delta})")
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    u, v = y + x, y - x
    value = (_polynomial(sign, pres, theta, x, y)
             - np.asarray(quantum_dilog(r, _u_argument(which, r, u)))
             + np.asarray(quantum_dilog(r, _v_argument(which, r, v))))
    return complex(value) if value.ndim == 0 else value


def Vr_correction(x, y):
    """First-order term c with V_r = V + c / r + O(1/r^2) on D."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    value = -2j * math.pi * (np.log(1 - np.exp(-2j * (y + x))) + np.log(1 - np.exp(2j * (y - x))))
    return complex(value) if value.ndim == 0 else value


def _lattice_square(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # labels 0 = (0, pi)^2, 1 = v in (pi, 2pi), 2 = u in (pi, 2pi)
    out = np.full(u.shape, -1)
    inner_u = (0 < u) & (u < math.pi)
    inner_v = (0 < v) & (v < math.pi)
    out[inner_u & inner_v] = 0
    out[inner_u & (math.pi < v) & (v < 2 * math.pi)] = 1
    out[(math.pi < u) & (u < 2 * math.pi) & inner_v] = 2
    return out


def lattice_g(sign: int, pres: SurgeryPresentation, theta: float, r: int, x, y):
    """g_r(x, y) = eps(x, y) e^{-ix} e^{(r / 4 pi i) V_r(x, y)}, zero where eps vanishes."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    xs, ys = np.broadcast_arrays(xs, ys)
    labels = _lattice_square(ys + xs, ys - xs)
    out = np.zeros(xs.shape, dtype=complex)
    for label, which in enumerate(SQUARES):
        mask = labels == label
        if not np.any(mask):
            continue
        xm, ym = xs[mask], ys[mask]
        u, v = ym + xm, ym - xm
        potential = (_polynomial(sign, pres, theta, xm, ym)
                     - np.asarray(quantum_dilog(r, _u_argument(which, r, u)))
                     + np.asarray(quantum_dilog(r, _v_argument(which, r, v))))
        eps = 2.0 if label == 0 else 1.0
        out[mask] = eps * np.exp(-1j * xm) * np.exp(r / (4j * math.pi) * potential)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return complex(out[0])
    return out


# ---------------------------------------------------------------------------
# Fourier coefficients


@dataclass(frozen=True)
class QuadratureSpec:
    """How a Fourier coefficient integral is evaluated.

    ``weighted`` selects the coefficient of psi * g used by Poisson summation,
    (r / 2 pi)^2 int psi eps e^{-ix} e^{(r / 4 pi i) V_r^{(k)}} over the squares;
    otherwise the plain integral of e^{(r / 4 pi i) V_r^{(k)}} over the squares
    shrunk by delta / 2 is returned.
    """

    delta: float = field(default_factory=lambda: settings.DELTA)
    order: int = field(default_factory=lambda: settings.FOURIER_ORDER)
    max_panels: int = field(default_factory=lambda: settings.FOURIER_MAX_PANELS)
    phase_tol: float = field(default_factory=lambda: settings.FOURIER_PHASE_TOL)
    weighted: bool = False
    bump: Literal["smooth", "indicator"] = "smooth"
    regions: Tuple[str, ...] = SQUARES
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        for which in self.regions:
            if which not in SQUARES:
                raise DomainError(f"unknown region '{which}'")
        if self.order < 2:
            raise DomainError("quadrature order must be at least 2")


def _check_quadrature(pres: SurgeryPresentation, r: int) -> None:
    if pres.k != 1:
        raise DomainError(f"Fourier quadrature is provided for k = 1 presentations, got k = {pres.k}")
    if not isinstance(r, (int, np.integer)) or r < 3 or r % 2 == 0:
        raise DomainError(f"level r must be an odd integer >= 3, got {r}")


def _shift_frequency(pres: SurgeryPresentation, indices: Tuple[int, int, int]) -> Tuple[float, int]:
    k0, k1, k2 = indices
    return k0 / pres.q + k1, k2


def _real_phase(sign, pres, theta, x, y, big_k: float, k2: int, weighted: bool, r: int):
    # Re V on the real slice, from Re Li2(e^{2it}) = pi^2/6 + t(t - pi) for t in [0, pi]
    u = np.mod(y + x, math.pi)
    v = np.mod(y - x, math.pi)
    value = (_polynomial(sign, pres, theta, x, y) - u * (u - math.pi) + v * (v - math.pi)
             - 4 * math.pi * big_k * x - 4 * math.pi * k2 * y)
    if weighted:
        value = value + 4 * math.pi * x / r
    return value


def _panel_count(
    sign: int,
    pres: SurgeryPresentation,
    theta: float,
    r: int,
    quad: QuadratureSpec,
    shifts: Sequence[Tuple[float, int]],
    lo: float,
    hi: float,
    which: str,
) -> int:
    """Panels per axis: the first power of two bringing every panel's phase change under tolerance."""
    region = RegionSpec(which, 0.0)
    (ulo, uhi), (vlo, vhi) = region.u_range, region.v_range
    side = hi - lo
    n = 4
    if quad.weighted and quad.bump == "smooth":
        while side / n > quad.delta / 2:
            n *= 2
    while True:
        if len(quad.regions) * n * n > quad.max_panels:
            raise ResolutionError(
                f"Fourier quadrature at r={r} needs more than {quad.max_panels} panels"
            )
        uc = ulo + lo + side * np.arange(n + 1) / n
        vc = vlo + lo + side * np.arange(n + 1) / n
        U, V = np.meshgrid(uc, vc, indexing="ij")
        X, Y = (U - V) / 2, (U + V) / 2
        worst = 0.0
        for big_k, k2 in shifts:
            phase = _real_phase(sign, pres, theta, X, Y, big_k, k2, quad.weighted, r)
            corners = np.stack([phase[:-1, :-1], phase[1:, :-1], phase[:-1, 1:], phase[1:, 1:]])
            worst = max(worst, float((corners.max(axis=0) - corners.min(axis=0)).max()))
        if r / (4 * math.pi) * worst <= quad.phase_tol:
            return n
        n *= 2


@dataclass
class _SquareGrid:
    which: str
    u: np.ndarray
    uw: np.ndarray
    v: np.ndarray
    vw: np.ndarray
    a_u: np.ndarray
    b_v: np.ndarray
    psi_u: np.ndarray
    psi_v: np.ndarray
    eps: float
    panels: int


def _square_grid(
    sign: int,
    pres: SurgeryPresentation,
    theta: float,
    r: int,
    quad: QuadratureSpec,
    shifts: Sequence[Tuple[float, int]],
    which: str,
) -> _SquareGrid:
    region = RegionSpec(which, 0.0)
    (ulo, uhi), (vlo, vhi) = region.u_range, region.v_range
    smooth = quad.weighted and quad.bump == "smooth"
    inset = 0.0 if smooth else quad.delta / 2
    lo, hi = inset, math.pi / 2 - inset
    n = _panel_count(sign, pres, theta, r, quad, shifts, lo, hi, which)
    nodes, weights = gauss_legendre(quad.order)
    width = (hi - lo) / n
    offsets = (lo + width * np.arange(n))[:, None] + 0.5 * width * (nodes + 1.0)
    w = np.tile(0.5 * width * weights, n)
    u = (ulo + offsets).ravel()
    v = (vlo + offsets).ravel()
    if smooth:
        bump = BumpSpec(quad.delta, r)
        psi_u, psi_v = bump.factor(u, ulo, uhi), bump.factor(v, vlo, vhi)
    else:
        psi_u, psi_v = np.ones_like(u), np.ones_like(v)
    a_u = -np.asarray(quantum_dilog(r, _u_argument(which, r, u)))
    b_v = np.asarray(quantum_dilog(r, _v_argument(which, r, v)))
    logger.debug(f"{which}: {n}x{n} panels of order {quad.order} at r={r}")
    return _SquareGrid(which, u, w, v, w, a_u, b_v, psi_u, psi_v, 2.0 if which == "D" else 1.0, n)


def _integrate(
    sign: int,
    pres: SurgeryPresentation,
    theta: float,
    r: int,
    quad: QuadratureSpec,
    indices: Sequence[Tuple[int, int, int]],
) -> List[complex]:
    _check_quadrature(pres, r)
    shifts = [_shift_frequency(pres, idx) for idx in indices]
    grids = [_square_grid(sign, pres, theta, r, quad, shifts, which) for which in quad.regions]
    scale = r / (4j * math.pi)

    work = []
    for grid in grids:
        step = _BLOCK_PANELS * quad.order
        for start in range(0, grid.u.size, step):
            work.append((grid, slice(start, start + step)))

    def evaluate(item) -> List[Tuple[complex, complex]]:
        grid, sl = item
        U = grid.u[sl][:, None]
        V = grid.v[None, :]
        X, Y = (U - V) / 2, (U + V) / 2
        expo = scale * (_polynomial(sign, pres, theta, X, Y) + grid.a_u[sl][:, None] + grid.b_v[None, :])
        base = np.exp(expo) * 0.5 * (grid.uw[sl] * grid.psi_u[sl])[:, None] * (grid.vw * grid.psi_v)[None, :]
        if quad.weighted:
            base = base * grid.eps * np.exp(-1j * X)
        out = []
        for big_k, k2 in shifts:
            # K x + k2 y = (K + k2) u / 2 + (k2 - K) v / 2
            ev = np.exp(0.5j * r * (k2 - big_k) * grid.v)
            eu = np.exp(0.5j * r * (big_k + k2) * grid.u[sl])
            out.append(partial_sum((base @ ev) * eu))
        return out

    partials = parallel_map(evaluate, work, quad.workers)
    factor = (r / (2 * math.pi)) ** 2 if quad.weighted else 1.0
    return [factor * combine_partials([p[i] for p in partials]) for i in range(len(shifts))]


def fourier_coefficient(
    pres: SurgeryPresentation,
    theta: float,
    r: int,
    indices: Tuple[int, int, int] = (0, 0, 0),
    sign: int = 1,
    quad: Optional[QuadratureSpec] = None,
) -> complex:
    """Fourier coefficient with shift (k0, k1, k2).

    The exponent is V_r^{sign} - 4 pi k0 x / q - 4 pi k1 x - 4 pi k2 y; the real
    constant of the shifted potential only changes a global phase and is left
    out.

    Raises:
        DomainError: For presentations with k != 1
        ResolutionError: If more than ``quad.max_panels`` panels are needed
    """
    quad = quad or QuadratureSpec()
    return _integrate(sign, pres, theta, r, quad, [tuple(indices)])[0]


def fourier_coefficients(
    pres: SurgeryPresentation,
    theta: float,
    r: int,
    index_set: Sequence[Tuple[int, int, int]],
    sign: int = 1,
    quad: Optional[QuadratureSpec] = None,
) -> List[complex]:
    """Several coefficients from one quadrature grid."""
    quad = quad or QuadratureSpec()
    return _integrate(sign, pres, theta, r, quad, [tuple(i) for i in index_set])


def coefficient_saddle_estimate(g: ConeGeometry, pres: SurgeryPresentation, r: int) -> complex:
    """Stationary-phase value (8 pi^2 / r) e^{(r / 4 pi i) V_r(x0, y0)} / sqrt(-det Hess V)."""
    value = Vr_potential(g.sign, pres, g.theta, r, g.x0c, g.y0c)
    return complex(8 * math.pi**2 / r * np.exp(r / (4j * math.pi) * value) / np.sqrt(-g.hess_det))


def coefficient_set(n: int) -> List[Tuple[int, int]]:
    """All (k1, k2) with |k1|, |k2| <= n."""
    return [(k1, k2) for k1 in range(-n, n + 1) for k2 in range(-n, n + 1)]


def lattice_sum(
    pres: SurgeryPresentation, theta: float, r: int, sign: int = 1, bump: Optional[BumpSpec] = None
) -> complex:
    """Sum of psi * g over the half-integer lattice (pi M_1 / r, pi M / r), M_1 and M odd."""
    _check_quadrature(pres, r)
    bump = bump or BumpSpec(settings.DELTA, r)
    odd = np.arange(-2 * r - 1, 2 * r + 2, 2)
    M1, M = np.meshgrid(odd, odd, indexing="ij")
    x = (math.pi * M1 / r).ravel()
    y = (math.pi * M / r).ravel()
    psi = bump.square(x, y)
    keep = psi > 0
    values = psi[keep] * lattice_g(sign, pres, theta, r, x[keep], y[keep])
    return pairwise_sum(values)


def poisson_check(
    pres: SurgeryPresentation,
    theta: float,
    r: int,
    coeff_set: Iterable[Tuple[int, int]],
    sign: int = 1,
    bump: Literal["smooth", "indicator"] = "smooth",
    quad: Optional[QuadratureSpec] = None,
) -> Tuple[complex, complex, float]:
    """Compare the cut-off lattice sum with the sum of its Fourier coefficients.

    rhs = sum over (k1, k2) of (-1)^{k1 + k2} times the weighted coefficient;
    the sign comes from the half-integer lattice.

    Returns:
        (lhs, rhs, |lhs - rhs| / |lhs|)
    """
    if r > 51:
        raise DomainError(f"Poisson checks are limited to r <= 51, got {r}")
    quad = quad or QuadratureSpec()
    quad = QuadratureSpec(
        delta=quad.delta, order=quad.order, max_panels=quad.max_panels, phase_tol=quad.phase_tol,
        weighted=True, bump=bump, regions=SQUARES, workers=quad.workers,
    )
    pairs = list(coeff_set)
    lhs = lattice_sum(pres, theta, r, sign, BumpSpec(quad.delta, r, bump))
    coeffs = fourier_coefficients(pres, theta, r, [(0, k1, k2) for k1, k2 in pairs], sign, quad)
    rhs = pairwise_sum([(-1) ** (k1 + k2) * c for (k1, k2), c in zip(pairs, coeffs)])
    gap = abs(lhs - rhs) / abs(lhs)
    logger.info(f"Poisson check r={r}, {len(pairs)} coefficients: gap={gap:.3e}")
    return lhs, rhs, gap


# ---------------------------------------------------------------------------
# Asymptotics


def predict_leading(
    pres: SurgeryPresentation,
    theta: float,
    r: int,
    g: ConeGeometry,
    normalization: Normalization = "effective",
) -> complex:
    """Leading-order value of RT_r(M, K, m0) from the critical point of V^+.

    ``effective``: 8 K' e^{i pi (k-1)/4} r^{(k+1)/2} / (sqrt(q) sqrt(-det Hess))
    e^{(r / 4 pi i) V^+(x0, y0)} with K' = ``effective_kappa``.
    ``literal``: kappa_r (-2 i^{-(k-3)/2} r^{(k+1)/2} / (pi sqrt(q) sqrt(-det Hess)))
    e^{(r / 4 pi i) V^+(x0, y0)}.
    The square root is the principal one.
    """
    k = pres.k
    root = np.sqrt(-g.hess_det)
    exponential = np.exp(r / (4j * math.pi) * g.critical_value)
    if normalization == "effective":
        pre = 8 * effective_kappa(r, pres) * np.exp(1j * math.pi * (k - 1) / 4)
        value = pre * r ** ((k + 1) / 2) / (math.sqrt(pres.q) * root) * exponential
    elif normalization == "literal":
        pre = kappa(r, pres) * -2 * np.exp(-1j * math.pi * (k - 3) / 4)
        value = pre * r ** ((k + 1) / 2) / (math.pi * math.sqrt(pres.q) * root) * exponential
    else:
        raise DomainError(f"unknown normalization '{normalization}'")
    return complex(value)


def _prefactor(pres: SurgeryPresentation, r: int, g: ConeGeometry, normalization: Normalization) -> complex:
    """predict_leading without its exponential growth factor."""
    return predict_leading(pres, g.theta, r, g, normalization) / np.exp(r / (4j * math.pi) * g.critical_value)


def _check_levels(r_list: Sequence[int]) -> List[int]:
    levels = [int(r) for r in r_list]
    if not levels:
        raise DomainError("no levels requested")
    for r in levels:
        if r < 3 or r % 2 == 0:
            raise DomainError(f"levels must be odd integers >= 3, got {r}")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise DomainError("levels must be strictly increasing")
    return levels


def verify_volume_conjecture(
    pres: SurgeryPresentation,
    theta: float,
    r_list: Sequence[int],
    branch: Literal["minus", "plus"] = "minus",
    mode: Literal["raw", "symmetrized"] = "symmetrized",
    precision: Optional[PrecisionMode] = None,
    normalization: Normalization = "effective",
    workers: Optional[int] = None,
    delta: Optional[float] = None,
) -> AsymptoticReport:
    """Compare RT_r with its predicted leading term over a sweep of levels.

    Each level uses the color m0 = choose_color(r, theta, branch) and the cone
    geometry at the angle theta_r = |2 x0| that color realises. The fit block
    records whether the critical point lies in D_delta, where the stationary
    phase estimate of the leading coefficient applies (``delta`` defaults to
    ``settings.DELTA``).

    Raises:
        HypothesisError: If Vol(M_theta) does not exceed half the figure-eight volume
        PrecisionError: If an invariant cannot be evaluated to enough digits
    """
    levels = _check_levels(r_list)
    if not 0.0 < theta < 2 * math.pi:
        raise DomainError(f"theta must lie in (0, 2pi), got {theta}")
    family = cone_family(pres, np.linspace(theta / 8, theta, 8))
    g = family.geometries[-1]
    if not family.above_half[-1]:
        raise HypothesisError(
            f"Vol(M_theta) = {g.vol:.10f} does not exceed half the figure-eight volume "
            f"{VOL_FIGURE_EIGHT / 2:.10f} at theta={theta}"
        )
    delta = settings.DELTA if delta is None else delta
    in_region = RegionSpec("D", delta).contains(g.x0c, g.y0c)
    if not in_region:
        logger.warning(
            f"critical point ({g.x0c.real:.6f}, {g.y0c.real:.6f}) lies outside D_delta for delta={delta}"
        )

    def row(r: int):
        m0 = choose_color(r, theta, branch)
        theta_r = ColorParameters(r, m0).theta
        start = (g.theta, g.x0c, g.y0c) if theta_r >= g.theta else None
        g_r = solve_critical(pres, theta_r, start=start)
        inv = rt_invariant(r, pres, m0, mode=mode, precision=precision, workers=1)
        pred = predict_leading(pres, theta_r, r, g_r, normalization)
        return m0, g_r, inv.value, pred

    results = parallel_map(row, levels, workers)

    first_ratio = results[0][2] / results[0][3]
    flipped = abs(first_ratio + 1) < abs(first_ratio - 1)
    if flipped:
        logger.info(f"Flipping the square-root branch: RT/prediction = {first_ratio:.6g} at r={levels[0]}")

    rows = []
    for r, (m0, g_r, rt, pred) in zip(levels, results):
        if flipped:
            pred = -pred
        rows.append(ReportRow(
            r=r,
            m0=m0,
            theta_r=g_r.theta,
            rt_re=rt.real,
            rt_im=rt.imag,
            pred_re=pred.real,
            pred_im=pred.imag,
            ratio_err=abs(rt / pred - 1),
            log_growth=4 * math.pi / r * math.log(abs(rt)),
            residual_growth=4 * math.pi / r * math.log(abs(rt - pred)) if rt != pred else None,
        ))
        logger.info(f"r={r}, m0={m0}: ratio error {rows[-1].ratio_err:.4e}")

    fit = _fit(pres, g, levels, results, normalization, flipped)
    fit.delta = delta
    fit.critical_in_region = in_region
    return AsymptoticReport(
        p=pres.p, q=pres.q, a0=pres.a0, theta=theta, branch=branch, mode=mode, rows=rows, fit=fit,
    )


def _fit(pres, g: ConeGeometry, levels, results, normalization, flipped) -> FitSummary:
    xs = np.array([r / (4 * math.pi) for r in levels])
    corrected = []
    prefactor_terms = []
    for r, (m0, g_r, rt, pred) in zip(levels, results):
        p_r = abs(_prefactor(pres, r, g_r, normalization))
        corrected.append(math.log(abs(rt) / p_r) - r / (4 * math.pi) * (g_r.vol - g.vol))
        kappa_r = abs(effective_kappa(r, pres) if normalization == "effective" else kappa(r, pres))
        prefactor_terms.append(math.log(abs(rt) / kappa_r) - r / (4 * math.pi) * g_r.vol
                               + 0.5 * math.log(abs(g_r.hess_det)))
    fit = FitSummary(vol=g.vol, cs=g.cs, branch_flipped=flipped, normalization=normalization)
    if len(levels) >= 2:
        corrected = np.array(corrected)
        fit.vol_fit = float(np.polyfit(xs, corrected, 1)[0])
        fit.vol_gap = abs(fit.vol_fit - g.vol)
        fit.prefactor_exponent_fit = float(np.polyfit(np.log(levels), prefactor_terms, 1)[0])
        growth = corrected / xs
        r1, r2 = levels[-2], levels[-1]
        fit.richardson_vol = float((r2 * growth[-1] - r1 * growth[-2]) / (r2 - r1))
        fit.richardson_gap = abs(fit.richardson_vol - g.vol)
    return fit
