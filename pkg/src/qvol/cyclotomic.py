"""Exact arithmetic in Z[zeta] with zeta = exp(pi i / r).

Elements are integer coefficient vectors modulo x^{2r} - 1, which is enough
to carry every summand of the invariant exactly; only the final value is
evaluated numerically (with mpmath). This gives an evaluation path that shares
no floating point code with ``qinv``.
"""
import itertools
import logging
from typing import Dict, Union

import mpmath
import numpy as np

from .cfrac import SurgeryPresentation
from .exceptions import DomainError

logger = logging.getLogger(__name__)


class CyclotomicElement:
    """An element sum_j c_j zeta^j of Z[zeta], zeta = exp(pi i / r)."""

    def __init__(self, r: int, coeffs=None):
        self.r = r
        self.n = 2 * r
        if coeffs is None:
            coeffs = np.zeros(self.n, dtype=object)
            coeffs[:] = 0
        self.coeffs = np.asarray(coeffs, dtype=object)
        if self.coeffs.shape != (self.n,):
            raise DomainError(f"expected {self.n} coefficients, got {self.coeffs.shape}")

    @classmethod
    def zero(cls, r: int) -> "CyclotomicElement":
        return cls(r)

    @classmethod
    def monomial(cls, r: int, exponent: int, coeff: int = 1) -> "CyclotomicElement":
        """coeff * zeta**exponent."""
        el = cls(r)
        el.coeffs[exponent % (2 * r)] = coeff
        return el

    @classmethod
    def one(cls, r: int) -> "CyclotomicElement":
        return cls.monomial(r, 0)

    @classmethod
    def bracket(cls, r: int, n: int) -> "CyclotomicElement":
        """{n} = q^n - q^{-n} with q = zeta^2."""
        return cls.monomial(r, 2 * n) - cls.monomial(r, -2 * n)

    @classmethod
    def one_minus_q2(cls, r: int, j: int) -> "CyclotomicElement":
        """1 - q^{2j}."""
        return cls.one(r) - cls.monomial(r, 4 * j)

    def _check(self, other: "CyclotomicElement") -> None:
        if self.r != other.r:
            raise DomainError(f"cannot combine levels {self.r} and {other.r}")

    def shift(self, exponent: int) -> "CyclotomicElement":
        """Multiply by zeta**exponent."""
        return CyclotomicElement(self.r, np.roll(self.coeffs, exponent % self.n))

    def __add__(self, other: "CyclotomicElement") -> "CyclotomicElement":
        self._check(other)
        return CyclotomicElement(self.r, self.coeffs + other.coeffs)

    def __sub__(self, other: "CyclotomicElement") -> "CyclotomicElement":
        self._check(other)
        return CyclotomicElement(self.r, self.coeffs - other.coeffs)

    def __neg__(self) -> "CyclotomicElement":
        return CyclotomicElement(self.r, -self.coeffs)

    def __mul__(self, other: Union["CyclotomicElement", int]) -> "CyclotomicElement":
        if isinstance(other, (int, np.integer)):
            return CyclotomicElement(self.r, self.coeffs * int(other))
        self._check(other)
        out = np.zeros(self.n, dtype=object)
        out[:] = 0
        for j in np.nonzero(self.coeffs)[0]:
            out = out + self.coeffs[j] * np.roll(other.coeffs, int(j))
        return CyclotomicElement(self.r, out)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def evaluate(self, dps: int = 50) -> mpmath.mpc:
        """Numerical value with ``dps`` decimal digits."""
        with mpmath.workdps(dps):
            total = mpmath.mpc(0)
            for j, c in enumerate(self.coeffs):
                if c:
                    total += c * mpmath.expjpi(mpmath.mpf(j) / self.r)
            return +total

    def __repr__(self) -> str:
        terms = {int(j): int(c) for j, c in enumerate(self.coeffs) if c}
        return f"CyclotomicElement(r={self.r}, {terms})"


def _inner_sums(r: int) -> Dict[int, CyclotomicElement]:
    """sum_m q^{-2(n+1)(m+1/2)} (q)_{n+1+m}/(q)_{n-m} for n = 0..r-2."""
    inner = {}
    for n in range(r - 1):
        total = CyclotomicElement.zero(r)
        for m in range(min(n, r - 2 - n) + 1):
            ratio = CyclotomicElement.one(r)
            for j in range(n - m + 1, n + m + 2):
                ratio = ratio * CyclotomicElement.one_minus_q2(r, j)
            total = total + ratio.shift(-2 * (n + 1) * (2 * m + 1))
        inner[n] = total
    return inner


def _kappa_prime(r: int, pres: SurgeryPresentation) -> mpmath.mpc:
    mu = mpmath.sqrt(2) * mpmath.sinpi(mpmath.mpf(2) / r) / mpmath.sqrt(r)
    phase = -pres.sigma * (mpmath.mpf(-3) / r - mpmath.mpf(r + 1) / 4)
    return mu ** (pres.k + 1) * mpmath.expjpi(phase)


def habiro_bracket_exact(r: int, n: int, dps: int = 50) -> mpmath.mpc:
    """((-1)^{n+1}/{1}) times the exact inner sum, evaluated with mpmath."""
    if not 0 <= n <= r - 2:
        raise DomainError(f"bracket index must lie in [0, {r - 2}], got {n}")
    inner = _inner_sums(r)[n]
    with mpmath.workdps(dps):
        value = inner.evaluate(dps) / CyclotomicElement.bracket(r, 1).evaluate(dps)
        return (-1) ** (n + 1) * value


def rt_sum_exact(r: int, pres: SurgeryPresentation, m0: int, dps: int = 50) -> mpmath.mpc:
    """Exhaustive evaluation of the raw invariant sum in Z[zeta].

    Every summand (sign, twist, quantum integers and factorial ratio) is built
    exactly; the normalisation (-1)^{m0+1} kappa' / {1}^{k+1} is applied to the
    evaluated total.
    """
    if r < 3 or r % 2 == 0:
        raise DomainError(f"level r must be an odd integer >= 3, got {r}")
    if not 0 <= m0 <= r - 2:
        raise DomainError(f"color m0 must lie in [0, {r - 2}], got {m0}")
    k = pres.k
    a = pres.all_a
    inner = _inner_sums(r)
    total = CyclotomicElement.zero(r)
    for tail in itertools.product(range(r - 1), repeat=k):
        ms = (m0,) + tail
        exponent = sum(a[i] * ms[i] * (ms[i] + 2) + r * a[i] * ms[i] for i in range(k + 1))
        term = inner[ms[k]].shift(exponent)
        for i in range(k):
            term = term * CyclotomicElement.bracket(r, (ms[i] + 1) * (ms[i + 1] + 1))
        total = total + term
    logger.debug(f"exact sum for r={r}, m0={m0}: {total}")
    with mpmath.workdps(dps):
        one = CyclotomicElement.bracket(r, 1).evaluate(dps)
        return (-1) ** (m0 + 1) * _kappa_prime(r, pres) * total.evaluate(dps) / one ** (k + 1)
