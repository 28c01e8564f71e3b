"""Surgery presentation combinatorics.

Hirzebruch-Jung continued fractions of the filling slope p/q, the b and c
sequences, the inverse pair (p', q'), the signature of the chain linking matrix
and the lattice critical points x_i of the interior summation variables.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal, solve_banded

from .exceptions import DomainError, SingularLinkingMatrixError

logger = logging.getLogger(__name__)

EIGEN_TOL = 1e-10


def _check_slope(p: int, q: int) -> None:
    if q == 0:
        if abs(p) == 1:
            raise DomainError("the slope (p, q) = (±1, 0) is excluded: it gives back the 3-sphere")
        raise DomainError(f"(p, q) = ({p}, 0) is not a primitive slope")
    if q < 0:
        raise DomainError(f"q must be positive, got {q}")
    if math.gcd(p, q) != 1:
        raise DomainError(f"p and q must be coprime, got ({p}, {q})")


def hj_expand(p: int, q: int) -> List[int]:
    """Hirzebruch-Jung expansion p/q = a_k - 1/(a_{k-1} - 1/(... - 1/a_1)).

    Args:
        p: Numerator
        q: Positive denominator, coprime to p

    Returns:
        The sequence [a_1, ..., a_k] with a_i >= 2 for i < k

    Raises:
        DomainError: For (±1, 0) or a non-coprime pair
    """
    _check_slope(p, q)
    x = Fraction(p, q)
    out = []
    while True:
        a = math.ceil(x)
        out.append(a)
        if x == a:
            break
        x = 1 / (a - x)
    out.reverse()
    return out


def fold_back(a: Sequence[int]) -> Fraction:
    """Rational value of the continued fraction [a_1, ..., a_k]."""
    return b_sequence(a)[-1]


def b_sequence(a: Sequence[int]) -> List[Fraction]:
    """b_1 = a_1 and b_i = a_i - 1/b_{i-1}."""
    if not a:
        raise DomainError("empty continued fraction")
    b = [Fraction(a[0])]
    for ai in a[1:]:
        if b[-1] == 0:
            raise DomainError(f"continued fraction {list(a)} has a zero partial quotient")
        b.append(ai - 1 / b[-1])
    return b


def c_sequence(b: Sequence[Fraction]) -> List[Fraction]:
    """c_0 = 1 and c_i = b_1 ... b_i."""
    c = [Fraction(1)]
    for bi in b:
        c.append(c[-1] * bi)
    return c


def inverse_pair(p: int, q: int) -> Tuple[int, int]:
    """The unique (p', q') with p p' + q q' = 1 and -q < p' <= 0."""
    if q < 1:
        raise DomainError(f"q must be positive, got {q}")
    if math.gcd(p, q) != 1:
        raise DomainError(f"p and q must be coprime, got ({p}, {q})")
    p_prime = pow(p, -1, q) if q > 1 else 0
    if p_prime > 0:
        p_prime -= q
    q_prime, rem = divmod(1 - p * p_prime, q)
    assert rem == 0
    return p_prime, q_prime


def linking_signature(a: Sequence[int], allow_singular: bool = False) -> int:
    """Signature of the tridiagonal matrix with diagonal a and off-diagonal 1.

    Pivots of the LDL^T factorisation are computed exactly; their signs give the
    inertia. An intermediate zero pivot falls back to eigenvalues with tolerance
    ``EIGEN_TOL``.

    Raises:
        SingularLinkingMatrixError: If the matrix is singular and ``allow_singular`` is False
    """
    if len(a) == 0:
        raise DomainError("linking matrix needs at least one component")
    pivots = [Fraction(a[0])]
    for ai in a[1:]:
        if pivots[-1] == 0:
            pivots = None
            break
        pivots.append(ai - 1 / pivots[-1])

    if pivots is not None:
        singular = pivots[-1] == 0
        signature = sum(1 for d in pivots if d > 0) - sum(1 for d in pivots if d < 0)
    else:
        eig = eigvalsh_tridiagonal(np.asarray(a, dtype=float), np.ones(len(a) - 1))
        singular = bool(np.any(np.abs(eig) < EIGEN_TOL))
        signature = int(np.sum(eig > EIGEN_TOL) - np.sum(eig < -EIGEN_TOL))
    if singular and not allow_singular:
        raise SingularLinkingMatrixError(f"linking matrix with diagonal {list(a)} is singular")
    return signature


@dataclass(frozen=True)
class SurgeryPresentation:
    """Chain-link surgery presentation of the p/q filling of the figure-eight knot.

    ``b`` holds b_1..b_k (b_k = p/q) and ``c`` holds c_0..c_k (c_0 = 1,
    c_{k-1} = q, c_k = p).
    """

    p: int
    q: int
    a0: int
    a: Tuple[int, ...]
    b: Tuple[Fraction, ...]
    c: Tuple[Fraction, ...]
    p_prime: int
    q_prime: int
    sigma: int
    singular: bool = field(default=False)

    @classmethod
    def from_slope(cls, p: int, q: int, a0: int = 0) -> "SurgeryPresentation":
        """Build the presentation of the (p, q) filling with framing a0 on the knot."""
        if q < 0:
            p, q = -p, -q
        a = hj_expand(p, q)
        b = b_sequence(a)
        c = c_sequence(b)
        p_prime, q_prime = inverse_pair(p, q)
        try:
            sigma = linking_signature(a)
            singular = False
        except SingularLinkingMatrixError:
            sigma = linking_signature(a, allow_singular=True)
            singular = True
            logger.warning(f"Slope {p}/{q} has a singular linking matrix; using signature {sigma}")
        return cls(p, q, a0, tuple(a), tuple(b), tuple(c), p_prime, q_prime, sigma, singular)

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def all_a(self) -> Tuple[int, ...]:
        """Framings a_0, a_1, ..., a_k."""
        return (self.a0,) + self.a

    @property
    def slope(self) -> Fraction:
        return Fraction(self.p, self.q)


def lattice_point(
    pres: SurgeryPresentation,
    sign: int,
    x: Union[float, np.ndarray],
    x0: float,
    n: Optional[Sequence[int]] = None,
    i: Optional[int] = None,
) -> np.ndarray:
    """Critical values x_1, ..., x_{k-1} of the interior variables.

    Solves a_i x_i + x_{i-1} + x_{i+1} = -sign x0 [i = 1] - 2 pi n_i for
    i = 1..k-1 with x_k = x. For n = 0 this gives
    x_1 = ((-1)^{k-1} x + sign p' x0) / q.

    Args:
        pres: Surgery presentation
        sign: +1 or -1
        x: Value(s) of x_k
        x0: Fixed color variable
        n: Integer shifts n_1..n_{k-1} (zero when omitted)
        i: If given, return only x_i (1-based)

    Returns:
        Array of shape (k-1,) + shape(x), or shape(x) when ``i`` is given; empty for k = 1
    """
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    k = pres.k
    xs = np.asarray(x, dtype=float)
    m = k - 1
    if m == 0:
        if i is not None:
            raise DomainError("k = 1 presentations have no interior variables")
        return np.empty((0,) + xs.shape)
    shifts = np.zeros(m) if n is None else np.asarray(n, dtype=float)
    if shifts.shape != (m,):
        raise DomainError(f"expected {m} shifts, got {len(shifts)}")

    rhs = np.zeros((m,) + xs.shape)
    rhs += (-2.0 * math.pi * shifts).reshape((m,) + (1,) * xs.ndim)
    rhs[0] -= sign * x0
    rhs[m - 1] -= xs
    banded = np.zeros((3, m))
    banded[0, 1:] = 1.0
    banded[1] = pres.a[:m]
    banded[2, :-1] = 1.0
    sol = solve_banded((1, 1), banded, rhs.reshape(m, -1)).reshape(rhs.shape)
    if i is None:
        return sol
    if not 1 <= i <= m:
        raise DomainError(f"index i must lie in 1..{m}, got {i}")
    return sol[i - 1]


def k0_of(pres: SurgeryPresentation, n: Sequence[int]) -> int:
    """k_0 = sum_j (-1)^{k-j} n_j c_{j-1}."""
    k = pres.k
    if len(n) != k - 1:
        raise DomainError(f"expected {k - 1} shifts, got {len(n)}")
    total = sum((-1) ** (k - j) * n[j - 1] * pres.c[j - 1] for j in range(1, k))
    assert total.denominator == 1
    return int(total)
