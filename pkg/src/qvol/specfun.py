"""Complex special functions.

Principal logarithm, dilogarithm, Lobachevsky function, Bloch-Wigner function
and the quantum dilogarithm at odd level ``r`` with its derivative.

All functions accept Python scalars or numpy arrays. Scalars in give Python
``complex`` (or ``float``) out; arrays in give arrays out.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Optional, Tuple, Union

import mpmath
import numpy as np
from numpy.polynomial import legendre
from scipy.special import bernoulli, factorial

from .config import settings
from .exceptions import ConvergenceError, DomainError, PoleProximityError

logger = logging.getLogger(__name__)

ArrayLike = Union[complex, float, np.ndarray]

PI2_6 = math.pi**2 / 6

# Terms kept in the series expansions.
_DILOG_SERIES_TERMS = 60
_DILOG_BERNOULLI_TERMS = 40
_CLAUSEN_TERMS = 30

_QDILOG_BLOCK = 32


@dataclass(frozen=True)
class PrecisionMode:
    """Floating point precision used by a computation.

    ``standard`` is binary64 (53 mantissa bits); ``extended`` runs through
    mpmath with a user-set mantissa of at least 64 bits.
    """

    kind: Literal["standard", "extended"] = "standard"
    bits: int = 53

    def __post_init__(self) -> None:
        if self.kind == "standard" and self.bits != 53:
            raise DomainError("standard precision has 53 mantissa bits")
        if self.kind == "extended" and self.bits < 64:
            raise DomainError(f"extended precision needs at least 64 bits, got {self.bits}")

    @classmethod
    def from_bits(cls, bits: int) -> "PrecisionMode":
        """Standard mode for 53 bits, extended mode otherwise."""
        return cls() if bits == 53 else cls("extended", bits)

    @property
    def mantissa_digits(self) -> float:
        """Number of significant decimal digits."""
        return self.bits * math.log10(2.0)

    @property
    def is_extended(self) -> bool:
        return self.kind == "extended"


STANDARD = PrecisionMode()


def _as_array(z: ArrayLike, dtype=complex) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=dtype)
    return arr, arr.ndim == 0


def _out(arr: np.ndarray, scalar: bool):
    if scalar:
        value = arr.reshape(()).item()
        return value
    return arr


def _check_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: non-finite argument")


def principal_log(z: ArrayLike) -> ArrayLike:
    """Principal logarithm with argument in (-pi, pi).

    Raises:
        DomainError: If any argument lies on the cut (-inf, 0]
    """
    arr, scalar = _as_array(z)
    _check_finite(arr, "principal_log")
    on_cut = (arr.imag == 0) & (arr.real <= 0)
    if np.any(on_cut):
        raise DomainError(f"principal_log: argument on the cut (-inf, 0]: {arr[on_cut].ravel()[0]}")
    return _out(np.log(arr), scalar)


@lru_cache(maxsize=None)
def _bernoulli_dilog_coeffs() -> np.ndarray:
    # Li2(z) = sum_{n>=0} B_n u^{n+1}/(n+1)!, u = -log(1-z)
    n = np.arange(_DILOG_BERNOULLI_TERMS)
    b = bernoulli(_DILOG_BERNOULLI_TERMS - 1)
    coeffs = np.zeros(_DILOG_BERNOULLI_TERMS + 1)
    coeffs[1:] = b / factorial(n + 1)
    return coeffs


def _dilog_series(z: np.ndarray) -> np.ndarray:
    n = np.arange(1, _DILOG_SERIES_TERMS + 1)
    coeffs = np.concatenate(([0.0], 1.0 / n**2))
    return _polyval(z, coeffs)


def _polyval(z: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Evaluate sum coeffs[j] z**j by Horner's scheme."""
    return np.polynomial.polynomial.polyval(z, coeffs)


def _dilog_disk(w: np.ndarray) -> np.ndarray:
    """Li2 on the closed unit disk."""
    out = np.empty_like(w)
    one = w == 1.0
    out[one] = PI2_6
    rest = ~one
    wr = w[rest]
    refl = wr.real > 0.5
    v = np.where(refl, 1.0 - wr, wr)
    lv = np.empty_like(v)
    small = np.abs(v) <= 0.5
    lv[small] = _dilog_series(v[small])
    big = ~small
    lv[big] = _polyval(-np.log1p(-v[big]), _bernoulli_dilog_coeffs())
    res = lv.copy()
    if np.any(refl):
        wf = wr[refl]
        res[refl] = -lv[refl] + PI2_6 - np.log(wf) * np.log1p(-wf)
    out[rest] = res
    return out


def dilog(z: ArrayLike, precision: Optional[PrecisionMode] = None):
    """Dilogarithm Li2(z) = -int_0^z log(1-u)/u du.

    Uses the power series on |z| <= 1/2, the reflection z -> 1-z for Re z > 1/2,
    a Bernoulli series in -log(1-z) on the remaining part of the unit disk and the
    inversion relation outside it.

    Args:
        z: Argument(s), off the cut (1, inf)
        precision: Extended precision evaluates a scalar with mpmath

    Returns:
        Li2(z)

    Raises:
        DomainError: On the cut (1, inf)
    """
    arr, scalar = _as_array(z)
    _check_finite(arr, "dilog")
    on_cut = (arr.imag == 0) & (arr.real > 1)
    if np.any(on_cut):
        raise DomainError(f"dilog: argument on the cut (1, inf): {arr[on_cut].ravel()[0]}")
    if precision is not None and precision.is_extended:
        if not scalar:
            raise DomainError("extended precision dilog takes a scalar argument")
        with mpmath.workprec(precision.bits):
            return mpmath.polylog(2, mpmath.mpc(arr.real.item(), arr.imag.item()))

    flat = arr.ravel()
    out = np.empty_like(flat)
    outside = np.abs(flat) > 1.0
    inside = ~outside
    out[inside] = _dilog_disk(flat[inside])
    if np.any(outside):
        zo = flat[outside]
        out[outside] = -_dilog_disk(1.0 / zo) - PI2_6 - 0.5 * np.log(-zo) ** 2
    return _out(out.reshape(arr.shape), scalar)


@lru_cache(maxsize=None)
def _clausen_coeffs() -> np.ndarray:
    k = np.arange(1, _CLAUSEN_TERMS + 1)
    b = np.abs(bernoulli(2 * _CLAUSEN_TERMS)[2::2])
    coeffs = np.zeros(_CLAUSEN_TERMS + 1)
    coeffs[1:] = b / (2 * k * factorial(2 * k + 1))
    return coeffs


def clausen(phi: ArrayLike) -> ArrayLike:
    """Clausen function Cl2(phi) = -int_0^phi log|2 sin(t/2)| dt."""
    arr = np.asarray(phi, dtype=float)
    scalar = arr.ndim == 0
    _check_finite(arr, "clausen")
    red = arr - 2 * np.pi * np.round(arr / (2 * np.pi))
    absr = np.abs(red)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(absr > 0, red * np.log(np.where(absr > 0, absr, 1.0)), 0.0)
    series = red * _polyval(red**2, _clausen_coeffs())
    out = red - log_term + series
    return float(out) if scalar else out


def lobachevsky(theta: ArrayLike) -> ArrayLike:
    """Lobachevsky function, odd and pi-periodic.

    Args:
        theta: Angle(s) in radians

    Returns:
        Lambda(theta) = -int_0^theta log|2 sin t| dt = Cl2(2 theta)/2
    """
    arr = np.asarray(theta, dtype=float)
    out = 0.5 * np.asarray(clausen(2.0 * arr))
    return float(out) if arr.ndim == 0 else out


VOL_FIGURE_EIGHT = 6.0 * float(lobachevsky(math.pi / 3))


def bloch_wigner(z: ArrayLike) -> ArrayLike:
    """Bloch-Wigner dilogarithm, the volume of the ideal tetrahedron with shape z."""
    arr, scalar = _as_array(z)
    out = np.zeros(arr.shape)
    # D vanishes on the real axis
    mask = arr.imag != 0
    zm = arr[mask]
    out[mask] = np.imag(np.asarray(dilog(zm))) + np.angle(1.0 - zm) * np.log(np.abs(zm))
    return float(out) if scalar else out


def _check_level(r: int) -> None:
    if not isinstance(r, (int, np.integer)) or r < 3 or r % 2 == 0:
        raise DomainError(f"level r must be an odd integer >= 3, got {r}")


def _in_pole_index_set(n: np.ndarray, r: int) -> np.ndarray:
    # pole offsets n = a r + b with a >= 0 and b odd positive
    return (n >= 1) & ((n % 2 == 1) | (n > r))


def pole_distance(r: int, z: ArrayLike) -> ArrayLike:
    """Distance from z to the pole set of the quantum dilogarithm.

    The poles are (a+1)pi + b pi/r and -a pi - b pi/r for integers a >= 0 and
    odd b > 0.
    """
    _check_level(r)
    arr, scalar = _as_array(z)
    best = np.full(arr.shape, np.inf)
    offsets = np.arange(-2, 3)
    for base, direction in ((math.pi, 1.0), (0.0, -1.0)):
        nf = direction * (arr.real - base) * r / math.pi
        cand = np.floor(nf)[..., None] + offsets
        cand = np.maximum(cand, 1.0)
        valid = _in_pole_index_set(cand.astype(np.int64), r)
        poles = base + direction * cand * math.pi / r
        dist = np.abs(arr[..., None] - poles)
        dist = np.where(valid, dist, np.inf)
        best = np.minimum(best, dist.min(axis=-1))
    return float(best) if scalar else best


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    return legendre.leggauss(order)


def _semicircle(r: int, z: np.ndarray, deriv: bool) -> np.ndarray:
    eps = settings.QUAD_SEMICIRCLE_RADIUS
    nodes, weights = gauss_legendre(2 * settings.QUAD_ORDER)
    alpha = 0.5 * math.pi * (nodes + 1.0)
    w = 0.5 * math.pi * weights
    x = eps * np.exp(1j * alpha)
    dx = 1j * x
    denom = 4.0 * x * np.sinh(math.pi * x) * np.sinh(2.0 * math.pi * x / r)
    integrand = np.exp((2.0 * z[:, None] - math.pi) * x) / denom
    if deriv:
        integrand = integrand * 2.0 * x
    # the contour runs from -eps to +eps above the origin
    return -(integrand * dx * w).sum(axis=1)


def _tail_length(r: int, z: np.ndarray) -> float:
    eps = settings.QUAD_SEMICIRCLE_RADIUS
    c = math.pi + 2.0 * math.pi / r - np.abs(2.0 * z.real - math.pi)
    c_min = float(c.min())
    length = eps + (-math.log(settings.QUAD_TOL) + 2.0) / c_min
    if length > settings.QUAD_MAX_TAIL:
        raise ConvergenceError(
            f"quantum dilogarithm tail bound not met: needs |x| up to {length:.1f} "
            f"(limit {settings.QUAD_MAX_TAIL}) for decay rate {c_min:.3e}"
        )
    return length


def _tails(r: int, z: np.ndarray, deriv: bool) -> np.ndarray:
    eps = settings.QUAD_SEMICIRCLE_RADIUS
    width = settings.QUAD_PANEL_WIDTH
    length = _tail_length(r, z)
    n_panels = int(math.ceil((length - eps) / width))
    nodes, weights = gauss_legendre(settings.QUAD_ORDER)
    left = eps + width * np.arange(n_panels)
    s = (left[:, None] + 0.5 * width * (nodes + 1.0)).ravel()
    w = np.tile(0.5 * width * weights, n_panels)
    denom = s * (-np.expm1(-2.0 * math.pi * s)) * (-np.expm1(-4.0 * math.pi * s / r))
    a = 2.0 * z[:, None] - 2.0 * math.pi - 2.0 * math.pi / r
    b = -2.0 * z[:, None] - 2.0 * math.pi / r
    ea = np.exp(a * s)
    eb = np.exp(b * s)
    numer = 2.0 * s * (ea + eb) if deriv else ea - eb
    return (numer / denom * w).sum(axis=1)


def _strip_integral(r: int, z: np.ndarray, deriv: bool) -> np.ndarray:
    out = np.empty(z.shape, dtype=complex)
    for start in range(0, z.size, _QDILOG_BLOCK):
        block = z[start:start + _QDILOG_BLOCK]
        out[start:start + _QDILOG_BLOCK] = _semicircle(r, block, deriv) + _tails(r, block, deriv)
    return 4j * math.pi / r * out


def _log_factor(u: np.ndarray, deriv: bool) -> np.ndarray:
    e = np.exp(2j * u)
    if deriv:
        return -2j * e / (1.0 - e)
    return np.log(1.0 - e)


def _evaluate(r: int, z: ArrayLike, deriv: bool):
    _check_level(r)
    arr, scalar = _as_array(z)
    _check_finite(arr, "quantum_dilog")
    flat = arr.ravel()
    dist = np.asarray(pole_distance(r, flat))
    if np.any(dist < settings.POLE_GUARD):
        i = int(np.argmin(dist))
        raise PoleProximityError(
            f"quantum_dilog(r={r}): argument {flat[i]} within {dist[i]:.3e} of a pole",
            float(dist[i]),
        )
    step = 2.0 * math.pi / r
    # shift counts bringing Re z into [0, pi]
    right = np.where(flat.real > math.pi, np.ceil((flat.real - math.pi) / step), 0).astype(np.int64)
    left = np.where(flat.real < 0.0, np.ceil(-flat.real / step), 0).astype(np.int64)
    base = flat - right * step + left * step
    out = _strip_integral(r, base, deriv)

    for k in range(1, int(right.max(initial=0)) + 1):
        mask = right >= k
        u = base[mask] + (2 * k - 1) * math.pi / r
        out[mask] -= 4j * math.pi / r * _log_factor(u, deriv)
    for k in range(1, int(left.max(initial=0)) + 1):
        mask = left >= k
        u = base[mask] - (2 * k - 1) * math.pi / r
        out[mask] += 4j * math.pi / r * _log_factor(u, deriv)
    return _out(out.reshape(arr.shape), scalar)


def quantum_dilog(r: int, z: ArrayLike):
    """Quantum dilogarithm phi_r(z) at odd level r.

    Inside 0 <= Re z <= pi the contour integral
    ``(4 pi i / r) int e^{(2z-pi)x} / (4x sinh(pi x) sinh(2 pi x / r)) dx``
    over the real line indented above 0 is computed with Gauss-Legendre panels.
    Other arguments are moved into that strip with the functional equation
    ``phi(z - pi/r) - phi(z + pi/r) = (4 pi i / r) log(1 - e^{2iz})``; outside the
    strip the value is therefore defined up to multiples of 8 pi^2 / r.

    Args:
        r: Odd level >= 3
        z: Argument(s)

    Returns:
        phi_r(z)

    Raises:
        PoleProximityError: If z is within ``settings.POLE_GUARD`` of a pole
        ConvergenceError: If the tails cannot be truncated within ``QUAD_MAX_TAIL``
    """
    return _evaluate(r, z, deriv=False)


def quantum_dilog_prime(r: int, z: ArrayLike):
    """Derivative of ``quantum_dilog`` in z, continued with the same relation."""
    return _evaluate(r, z, deriv=True)
