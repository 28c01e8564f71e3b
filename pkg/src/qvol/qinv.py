"""Relative Reshetikhin-Turaev invariants of fillings of the figure-eight knot.

The invariant RT_r(M, K, m0) at q = exp(2 pi i / r) is a finite sum. It is
evaluated either in its raw form (summation variables m_1..m_k, m in
[0, r-2]) or in the symmetrized form (half-integer variables
m_i' = (r-2)/2 - m_i), whose summands are the lattice values of the
potential functions used by the asymptotic analysis.

Phases are always built from integer exponents reduced modulo the order of the
root of unity involved, and factorial ratios are accumulated as products, so no
summand is formed by dividing large quantities.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import mpmath
import numpy as np

from .cfrac import SurgeryPresentation
from .exceptions import DomainError, PrecisionError
from .specfun import STANDARD, PrecisionMode, lobachevsky, quantum_dilog
from .utils.summation import combine_partials, pairwise_sum, parallel_map, partial_sum

logger = logging.getLogger(__name__)

Mode = Literal["raw", "symmetrized"]

# Digits kept free of cancellation
PRECISION_MARGIN = 6.0


def _check_level(r: int) -> None:
    if not isinstance(r, (int, np.integer)) or r < 3 or r % 2 == 0:
        raise DomainError(f"level r must be an odd integer >= 3, got {r}")


@dataclass(frozen=True)
class ColorParameters:
    """Level r and color m0 of the knot K."""

    r: int
    m0: int

    def __post_init__(self) -> None:
        _check_level(self.r)
        if not 0 <= self.m0 <= self.r - 2:
            raise DomainError(f"color m0 must lie in [0, {self.r - 2}], got {self.m0}")

    @property
    def x0(self) -> float:
        """x0 = pi - 2 pi / r - 2 pi m0 / r."""
        return 2.0 * math.pi * ((self.r - 2) / 2 - self.m0) / self.r

    @property
    def theta(self) -> float:
        """Cone angle |2 x0| seen at this level."""
        return abs(2.0 * self.x0)

    @property
    def shifted_color(self) -> int:
        """M0 = 2 m0' = r - 2 - 2 m0 (an odd integer)."""
        return self.r - 2 - 2 * self.m0


@dataclass
class InvariantValue:
    """Value of RT_r(M, K, m0) with precision metadata."""

    value: complex
    r: int
    m0: int
    mode: str
    precision: PrecisionMode
    term_count: int
    cancellation_estimate: float
    extended_value: Optional[Any] = field(default=None, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a JSON-friendly dictionary."""
        return {
            "r": self.r,
            "m0": self.m0,
            "mode": self.mode,
            "re": self.value.real,
            "im": self.value.imag,
            "abs": abs(self.value),
            "precisionBits": self.precision.bits,
            "termCount": self.term_count,
            "cancellationEstimate": self.cancellation_estimate,
        }


def _zeta(r: int, n: int) -> np.ndarray:
    """exp(2 pi i j / n) for j = 0..n-1, n a multiple of r."""
    return np.exp(2j * math.pi * np.arange(n) / n)


def _one_minus_q2(r: int) -> np.ndarray:
    """u_j = 1 - q^{2j} for j = 0..2r."""
    j = np.arange(2 * r + 1)
    return 1.0 - np.exp(2j * math.pi * ((2 * j) % r) / r)


def quantum_integer(r: int, n):
    """[n] = sin(2 pi n / r) / sin(2 pi / r)."""
    _check_level(r)
    n_arr = np.asarray(n, dtype=np.int64)
    out = np.sin(2.0 * math.pi * (n_arr % r) / r) / math.sin(2.0 * math.pi / r)
    return float(out) if out.ndim == 0 else out


def quantum_bracket(r: int, n: int = 1) -> complex:
    """{n} = q^n - q^{-n} = 2i sin(2 pi n / r)."""
    return 2j * math.sin(2.0 * math.pi * (n % r) / r)


def q_pochhammer(r: int, n: int) -> complex:
    """(q)_n = prod_{k=1}^n (1 - q^{2k})."""
    _check_level(r)
    if not 0 <= n <= r - 1:
        raise DomainError(f"(q)_n needs 0 <= n <= {r - 1}, got {n}")
    return complex(np.prod(_one_minus_q2(r)[1:n + 1]))


def quantum_factorial(r: int, n: int) -> complex:
    """{n}! = (-1)^n q^{-n(n+1)/2} (q)_n."""
    phase = np.exp(-2j * math.pi * ((n * (n + 1) // 2) % r) / r)
    return complex((-1) ** n * phase * q_pochhammer(r, n))


def pochhammer_via_qdilog(r: int, n: int, shifted: bool = False) -> complex:
    """(q)_n from the quantum dilogarithm.

    For 0 <= n <= r-2, (q)_n = exp((r/4 pi i)(phi(pi/r) - phi(2 pi n/r + pi/r))).
    With ``shifted`` (only for (r-1)/2 <= n <= r-2) the second argument is moved
    back by pi, which keeps it inside the strip and produces a factor 2.
    """
    _check_level(r)
    if not 0 <= n <= r - 2:
        raise DomainError(f"n must lie in [0, {r - 2}], got {n}")
    if shifted and 2 * n < r - 1:
        raise DomainError(f"the shifted form needs n >= {(r - 1) // 2}, got {n}")
    z = 2 * math.pi * n / r + math.pi / r - (math.pi if shifted else 0.0)
    phi = quantum_dilog(r, np.array([math.pi / r, z]))
    value = np.exp(r / (4j * math.pi) * (phi[0] - phi[1]))
    return complex(2.0 * value if shifted else value)


def factorial_via_qdilog(r: int, n: int) -> complex:
    """{n}! from the quantum dilogarithm, for 0 <= n <= r-2."""
    _check_level(r)
    if not 0 <= n <= r - 2:
        raise DomainError(f"n must lie in [0, {r - 2}], got {n}")
    t = 2 * math.pi * n / r
    phi = quantum_dilog(r, np.array([math.pi / r, t + math.pi / r]))
    exponent = -2 * math.pi * t + (2 * math.pi / r) ** 2 * (n * n + n) + phi[0] - phi[1]
    return complex(np.exp(r / (4j * math.pi) * exponent))


def summand_ratio_bound(r: int) -> float:
    """Upper bound exp((r / 2 pi) 2 Lambda(pi/6)) for |(q)_a / (q)_b| up to powers of r."""
    return math.exp(r / (2 * math.pi) * 2 * lobachevsky(math.pi / 6))


def kappa_prime(r: int, pres: SurgeryPresentation) -> complex:
    """mu_r^{k+1} <mu_r omega_r>^{-sigma} with mu_r = sqrt(2) sin(2 pi / r) / sqrt(r)."""
    _check_level(r)
    mu = math.sqrt(2.0) * math.sin(2 * math.pi / r) / math.sqrt(r)
    phase = -pres.sigma * (-3.0 / r - (r + 1) / 4.0)
    return mu ** (pres.k + 1) * np.exp(1j * math.pi * (phase % 2.0))


def kappa(r: int, pres: SurgeryPresentation) -> complex:
    """Normalisation constant of the symmetrized sum in its displayed closed form.

    See ``effective_kappa`` for the constant that reproduces the raw sum.
    """
    _check_level(r)
    k = pres.k
    sum_a = sum(pres.all_a)
    sigma = pres.sigma
    modulus = 2.0 ** (k - 3) / math.sqrt(float(r) ** (k + 1)) * math.sin(2 * math.pi / r) ** (k - 1)
    # the exponent is an integer multiple of pi i / (4r)
    num = (3 * sum_a + sigma + 2 * k - 2) * r * r - 4 * sum_a * (r + 1) + 12 * sigma + sigma * r
    return modulus * np.exp(1j * math.pi * (num % (8 * r)) / (4 * r))


def effective_kappa(r: int, pres: SurgeryPresentation) -> complex:
    """Constant K' with RT_r = K' * sum of the symmetrized summands.

    K' = 2^{k-1} kappa' / {1}^{k+1} (-1)^k e^{pi i r (k-1)/2} e^{pi i (3r/4 - 1/r) sum a_i}.
    """
    k = pres.k
    sum_a = sum(pres.all_a)
    one = quantum_bracket(r, 1)
    # (3r/4 - 1/r) sum_a in units of pi i / (4r)
    num = (3 * r * r - 4) * sum_a + 2 * r * r * (k - 1) + 4 * r * k
    phase = np.exp(1j * math.pi * (num % (8 * r)) / (4 * r))
    return 2.0 ** (k - 1) * kappa_prime(r, pres) / one ** (k + 1) * phase


def epsilon_region(x: float, y: float) -> int:
    """Multiplicity of a symmetrized summand: 2 if 0 < y +- x < pi, 1 on the two
    side regions, 0 elsewhere (boundaries included)."""
    u = y + x
    v = y - x
    if 0 < u < math.pi and 0 < v < math.pi:
        return 2
    if 0 < u < math.pi and math.pi < v < 2 * math.pi:
        return 1
    if math.pi < u < 2 * math.pi and 0 < v < math.pi:
        return 1
    return 0


def choose_color(r: int, theta: float, branch: Literal["minus", "plus"] = "minus") -> int:
    """Color m0 whose cone angle |2 pi - 4 pi m0 / r| approximates theta.

    Nearest integer in [0, r-2] to (r-2)/2 -+ theta r / (4 pi); ties are broken
    toward (r-2)/2.
    """
    _check_level(r)
    if not 0 < theta < 2 * math.pi:
        raise DomainError(f"theta must lie in (0, 2pi), got {theta}")
    if branch not in ("minus", "plus"):
        raise DomainError(f"branch must be 'minus' or 'plus', got {branch}")
    center = (r - 2) / 2
    target = center - theta * r / (4 * math.pi) if branch == "minus" else center + theta * r / (4 * math.pi)
    lo = math.floor(target)
    hi = lo + 1
    if target - lo < hi - target:
        m0 = lo
    elif target - lo > hi - target:
        m0 = hi
    else:
        m0 = lo if abs(lo - center) < abs(hi - center) else hi
    return int(min(max(m0, 0), r - 2))


# ---------------------------------------------------------------------------
# Raw sum


def _raw_inner(r: int) -> Tuple[np.ndarray, np.ndarray]:
    """Inner sums over m for each m_k, and the largest inner summand."""
    zeta = _zeta(r, 2 * r)
    u = _one_minus_q2(r)
    inner = np.empty(r - 1, dtype=complex)
    largest = np.empty(r - 1)
    for n in range(r - 1):
        m = np.arange(min(n, r - 2 - n) + 1)
        factors = np.empty(m.size, dtype=complex)
        factors[0] = u[n + 1]
        factors[1:] = u[n - m[1:] + 1] * u[n + 1 + m[1:]]
        ratio = np.cumprod(factors)
        phase = zeta[(-2 * (n + 1) * (2 * m + 1)) % (2 * r)]
        inner[n] = pairwise_sum(phase * ratio)
        largest[n] = np.abs(ratio).max()
    return inner, largest


def habiro_bracket(r: int, n: int) -> complex:
    """Colored bracket <e_n> of the figure-eight knot, 0 <= n <= r-2."""
    _check_level(r)
    if not 0 <= n <= r - 2:
        raise DomainError(f"bracket index must lie in [0, {r - 2}], got {n}")
    inner, _ = _raw_inner(r)
    return complex((-1) ** (n + 1) * inner[n] / quantum_bracket(r, 1))


def _raw_constant(r: int, pres: SurgeryPresentation, m0: int) -> complex:
    return (-1) ** (m0 + 1) * kappa_prime(r, pres) / quantum_bracket(r, 1)


def _raw_brackets(r: int, k: int, ms: Tuple[int, ...], mk: np.ndarray) -> np.ndarray:
    """[(m_1+1)(m_2+1)] ... [(m_{k-1}+1)(m_k+1)] for fixed m_0..m_{k-1} and every m_k."""
    scale = 1.0
    for i in range(k - 1):
        scale *= quantum_integer(r, (ms[i] + 1) * (ms[i + 1] + 1))
    return scale * quantum_integer(r, (ms[k - 1] + 1) * (mk + 1))


def _raw_sum(r: int, pres: SurgeryPresentation, m0: int, workers: Optional[int]) -> complex:
    k = pres.k
    a = pres.all_a
    zeta = _zeta(r, 2 * r)
    inner, _ = _raw_inner(r)
    mk = np.arange(r - 1)
    last = (a[k] * mk * (mk + 2) + r * a[k] * mk)
    chunks = list(itertools.product(range(r - 1), repeat=k - 1))

    def evaluate(chunk: Tuple[int, ...]):
        ms = (m0,) + chunk
        exponent = sum(a[i] * ms[i] * (ms[i] + 2) + r * a[i] * ms[i] for i in range(k))
        terms = zeta[(exponent + last) % (2 * r)] * _raw_brackets(r, k, ms, mk) * inner
        return partial_sum(terms)

    total = combine_partials(parallel_map(evaluate, chunks, workers))
    return _raw_constant(r, pres, m0) * total


# ---------------------------------------------------------------------------
# Symmetrized sum


def _symmetrized_inner(r: int) -> Tuple[Dict[int, complex], float]:
    """H(M_k) = sum over M of zeta8^{2r M_k - 4 M_k M - 4 M_k} (q)_{n1}/(q)_{n2}."""
    zeta8 = _zeta(r, 8 * r)
    u = _one_minus_q2(r)
    table = {}
    largest = 0.0
    for big_mk in range(-(r - 2), r - 1, 2):
        count = (r - 2 - abs(big_mk)) // 2 + 1
        t = np.arange(count)
        big_m = r - 2 - 2 * t
        n1_top = r - 1 - (r - 2 + big_mk) // 2
        n2_top = (r - 2 - big_mk) // 2
        factors = np.empty(count, dtype=complex)
        factors[0] = u[n1_top]
        factors[1:] = u[n1_top + t[1:]] * u[n2_top - t[1:] + 1]
        ratio = np.cumprod(factors)
        phase = zeta8[(2 * r * big_mk - 4 * big_mk * big_m - 4 * big_mk) % (8 * r)]
        table[big_mk] = pairwise_sum(phase * ratio)
        largest = max(largest, float(np.abs(ratio).max()))
    return table, largest


def _symmetrized_sum(r: int, pres: SurgeryPresentation, m0: int, workers: Optional[int]) -> complex:
    k = pres.k
    a = pres.all_a
    zeta8 = _zeta(r, 8 * r)
    table, _ = _symmetrized_inner(r)
    odd = np.arange(-(r - 2), r - 1, 2)
    h = np.array([table[int(v)] for v in odd])
    big_m0 = r - 2 - 2 * m0
    chunks = list(itertools.product(odd.tolist(), repeat=k - 1))

    def evaluate(chunk: Tuple[int, ...]):
        ms = (big_m0,) + chunk
        base = sum(a[i] * ms[i] ** 2 for i in range(k))
        base += sum(2 * ms[i] * ms[i + 1] for i in range(1, k - 1))
        exponent = base + a[k] * odd**2
        if k >= 2:
            exponent = exponent + 2 * ms[k - 1] * odd
            cross = 2 * big_m0 * ms[1]
        else:
            cross = 2 * big_m0 * odd
        terms = (zeta8[(exponent + cross) % (8 * r)] + zeta8[(exponent - cross) % (8 * r)]) * h
        return partial_sum(terms)

    total = combine_partials(parallel_map(evaluate, chunks, workers))
    return effective_kappa(r, pres) * total


def _term_bounds(r: int, pres: SurgeryPresentation, m0: int, mode: Mode) -> Tuple[float, int]:
    """Modulus of the largest normalised summand, and the number of summands."""
    k = pres.k
    if mode == "symmetrized":
        _, largest = _symmetrized_inner(r)
        inner_count = sum((r - 2 - abs(v)) // 2 + 1 for v in range(-(r - 2), r - 1, 2))
        return abs(effective_kappa(r, pres)) * largest, 2 * inner_count * (r - 1) ** (k - 1)
    _, largest = _raw_inner(r)
    mk = np.arange(r - 1)
    max_term = 0.0
    for chunk in itertools.product(range(r - 1), repeat=k - 1):
        brackets = _raw_brackets(r, k, (m0,) + chunk, mk)
        max_term = max(max_term, float(np.max(np.abs(brackets) * largest)))
    inner_count = sum(min(n, r - 2 - n) + 1 for n in range(r - 1))
    return abs(_raw_constant(r, pres, m0)) * max_term, inner_count * (r - 1) ** (k - 1)


# ---------------------------------------------------------------------------
# Extended precision


def _raw_sum_mp(r: int, pres: SurgeryPresentation, m0: int) -> mpmath.mpc:
    k = pres.k
    a = pres.all_a
    zeta = [mpmath.expjpi(mpmath.mpf(j) / r) for j in range(2 * r)]
    u = [1 - zeta[(4 * j) % (2 * r)] for j in range(2 * r + 1)]
    qint = [mpmath.sinpi(mpmath.mpf(2 * j) / r) / mpmath.sinpi(mpmath.mpf(2) / r) for j in range(r)]
    inner = []
    for n in range(r - 1):
        ratio = u[n + 1]
        total = zeta[(-2 * (n + 1)) % (2 * r)] * ratio
        for m in range(1, min(n, r - 2 - n) + 1):
            ratio *= u[n - m + 1] * u[n + 1 + m]
            total += zeta[(-2 * (n + 1) * (2 * m + 1)) % (2 * r)] * ratio
        inner.append(total)
    total = mpmath.mpc(0)
    for tail in itertools.product(range(r - 1), repeat=k):
        ms = (m0,) + tail
        exponent = sum(a[i] * ms[i] * (ms[i] + 2) + r * a[i] * ms[i] for i in range(k + 1))
        term = zeta[exponent % (2 * r)] * inner[ms[k]]
        for i in range(k):
            term *= qint[((ms[i] + 1) * (ms[i + 1] + 1)) % r]
        total += term
    mu = mpmath.sqrt(2) * mpmath.sinpi(mpmath.mpf(2) / r) / mpmath.sqrt(r)
    kp = mu ** (k + 1) * mpmath.expjpi(-pres.sigma * (mpmath.mpf(-3) / r - mpmath.mpf(r + 1) / 4))
    one = 2j * mpmath.sinpi(mpmath.mpf(2) / r)
    return (-1) ** (m0 + 1) * kp / one * total


def _symmetrized_sum_mp(r: int, pres: SurgeryPresentation, m0: int) -> mpmath.mpc:
    k = pres.k
    a = pres.all_a
    zeta8 = [mpmath.expjpi(mpmath.mpf(2 * j) / (8 * r)) for j in range(8 * r)]
    u = [1 - zeta8[(16 * j) % (8 * r)] for j in range(2 * r + 1)]
    odd = list(range(-(r - 2), r - 1, 2))
    table = {}
    for big_mk in odd:
        n1 = r - 1 - (r - 2 + big_mk) // 2
        n2 = (r - 2 - big_mk) // 2
        ratio = u[n1]
        big_m = r - 2
        total = zeta8[(2 * r * big_mk - 4 * big_mk * big_m - 4 * big_mk) % (8 * r)] * ratio
        for t in range(1, (r - 2 - abs(big_mk)) // 2 + 1):
            ratio *= u[n1 + t] * u[n2 - t + 1]
            big_m = r - 2 - 2 * t
            total += zeta8[(2 * r * big_mk - 4 * big_mk * big_m - 4 * big_mk) % (8 * r)] * ratio
        table[big_mk] = total
    big_m0 = r - 2 - 2 * m0
    total = mpmath.mpc(0)
    for tail in itertools.product(odd, repeat=k):
        ms = (big_m0,) + tail
        exponent = sum(a[i] * ms[i] ** 2 for i in range(k + 1))
        exponent += sum(2 * ms[i] * ms[i + 1] for i in range(1, k))
        cross = 2 * ms[0] * ms[1]
        total += (zeta8[(exponent + cross) % (8 * r)] + zeta8[(exponent - cross) % (8 * r)]) * table[ms[k]]
    one = 2j * mpmath.sinpi(mpmath.mpf(2) / r)
    mu = mpmath.sqrt(2) * mpmath.sinpi(mpmath.mpf(2) / r) / mpmath.sqrt(r)
    kp = mu ** (k + 1) * mpmath.expjpi(-pres.sigma * (mpmath.mpf(-3) / r - mpmath.mpf(r + 1) / 4))
    sum_a = sum(a)
    phase = mpmath.expjpi(mpmath.mpf((3 * r * r - 4) * sum_a + 2 * r * r * (k - 1) + 4 * r * k) / (4 * r))
    return 2 ** (k - 1) * kp / one ** (k + 1) * phase * total


# ---------------------------------------------------------------------------


def rt_invariant(
    r: int,
    pres: SurgeryPresentation,
    m0: int,
    mode: Mode = "symmetrized",
    precision: Optional[PrecisionMode] = None,
    workers: Optional[int] = None,
) -> InvariantValue:
    """Evaluate RT_r(M, K, m0).

    Args:
        r: Odd level >= 3
        pres: Surgery presentation of the filling
        m0: Color of K in [0, r-2]
        mode: ``raw`` or ``symmetrized`` summation
        precision: ``None`` or standard runs in binary64, extended runs through mpmath
        workers: Thread count for the chunked sum; never changes the value

    Returns:
        The invariant with its term count and cancellation estimate

    Raises:
        PrecisionError: If cancellation leaves fewer than 6 significant digits
    """
    colors = ColorParameters(r, m0)
    if mode not in ("raw", "symmetrized"):
        raise DomainError(f"mode must be 'raw' or 'symmetrized', got {mode}")
    precision = precision or STANDARD

    if mode == "symmetrized" and logger.isEnabledFor(logging.DEBUG):
        ratio = effective_kappa(r, pres) / kappa(r, pres)
        logger.debug(f"effective/displayed normalisation at r={r}: {ratio:.6g}")

    extended_value = None
    if precision.is_extended:
        with mpmath.workprec(precision.bits):
            extended_value = _raw_sum_mp(r, pres, m0) if mode == "raw" else _symmetrized_sum_mp(r, pres, m0)
        value = complex(extended_value)
    elif mode == "raw":
        value = _raw_sum(r, pres, m0, workers)
    else:
        value = _symmetrized_sum(r, pres, m0, workers)

    max_term, term_count = _term_bounds(r, pres, m0, mode)
    if value == 0:
        raise PrecisionError(f"RT_{r} evaluated to zero at m0={m0}: no significant digits", math.inf)
    cancellation = math.log10(max_term / abs(value))
    needed = cancellation + 0.5 * math.log10(term_count)
    digits = precision.mantissa_digits
    if needed > digits - PRECISION_MARGIN:
        raise PrecisionError(
            f"RT_{r}(m0={m0}) loses {needed:.1f} digits to cancellation; "
            f"{digits:.1f} available, use more precision bits",
            cancellation,
        )
    if needed > digits - PRECISION_MARGIN - 2:
        logger.warning(f"RT_{r}(m0={m0}): only {digits - needed:.1f} digits of headroom")

    logger.debug(f"RT_{r}(m0={colors.m0}, {mode}) = {value} from {term_count} terms")
    return InvariantValue(
        value=complex(value),
        r=r,
        m0=m0,
        mode=mode,
        precision=precision,
        term_count=term_count,
        cancellation_estimate=cancellation,
        extended_value=extended_value,
    )


def lattice_summands(
    r: int, pres: SurgeryPresentation, m0: int, t: int
) -> Dict[Tuple[int, int], complex]:
    """Symmetrized summands of a k = 1 presentation, indexed by (M_1, M) = (2 m_1', 2 m').

    ``t`` selects the q^{t m0' m1'} part. Each value is the summand without the
    normalisation constant.
    """
    if pres.k != 1:
        raise DomainError("lattice summands are provided for k = 1 presentations")
    if t not in (1, -1):
        raise DomainError(f"t must be +1 or -1, got {t}")
    ColorParameters(r, m0)
    zeta8 = _zeta(r, 8 * r)
    u = _one_minus_q2(r)
    a0, a1 = pres.all_a
    big_m0 = r - 2 - 2 * m0
    out = {}
    for big_mk in range(-(r - 2), r - 1, 2):
        n1_top = r - 1 - (r - 2 + big_mk) // 2
        n2_top = (r - 2 - big_mk) // 2
        ratio = 1.0 + 0j
        for step in range((r - 2 - abs(big_mk)) // 2 + 1):
            ratio *= u[n1_top] if step == 0 else u[n1_top + step] * u[n2_top - step + 1]
            big_m = r - 2 - 2 * step
            n = (a0 * big_m0**2 + a1 * big_mk**2 + 2 * t * big_m0 * big_mk
                 + 2 * r * big_mk - 4 * big_mk * big_m - 4 * big_mk)
            out[(big_mk, big_m)] = zeta8[n % (8 * r)] * ratio
    return out
