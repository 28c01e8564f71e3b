"""Deterministic compensated summation and ordered parallel maps.

Every reduction in this module has a shape fixed by the number of inputs only,
so results are bit-identical whatever the number of workers used to produce the
inputs.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from ..config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def two_sum(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Error-free transformation ``a + b = s + e``.

    Works elementwise on real or complex arrays; complex addition rounds the
    real and imaginary parts independently so the identity holds per component.
    """
    s = a + b
    bp = s - a
    e = (a - (s - bp)) + (b - bp)
    return s, e


def _tree(values: np.ndarray, errors: np.ndarray) -> Tuple[complex, complex]:
    while values.shape[0] > 1:
        if values.shape[0] % 2:
            values = np.append(values, 0.0)
            errors = np.append(errors, 0.0)
        s, e = two_sum(values[0::2], values[1::2])
        errors = errors[0::2] + errors[1::2] + e
        values = s
    return values[0], errors[0]


def pairwise_sum(values: Iterable) -> complex:
    """Sum values along a fixed binary tree with compensation.

    Args:
        values: Real or complex numbers (any iterable or array)

    Returns:
        The compensated sum as a complex number
    """
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                     dtype=complex).ravel()
    if arr.size == 0:
        return 0j
    s, e = _tree(arr, np.zeros_like(arr))
    return complex(s + e)


def partial_sum(values: np.ndarray) -> Tuple[complex, complex]:
    """Compensated sum of one chunk, returned as an unevaluated (sum, error) pair."""
    arr = np.asarray(values, dtype=complex).ravel()
    if arr.size == 0:
        return 0j, 0j
    s, e = _tree(arr, np.zeros_like(arr))
    return complex(s), complex(e)


def combine_partials(partials: Sequence[Tuple[complex, complex]]) -> complex:
    """Reduce chunk partials with the same fixed tree as ``pairwise_sum``."""
    if not partials:
        return 0j
    sums = np.array([p[0] for p in partials], dtype=complex)
    errs = np.array([p[1] for p in partials], dtype=complex)
    s, e = _tree(sums, errs)
    return complex(s + e)


def resolve_workers(workers: Optional[int] = None) -> int:
    """Number of worker threads, capped by ``settings.THREADS``."""
    if workers is None:
        return settings.THREADS
    return max(1, min(int(workers), settings.THREADS))


def parallel_map(fn: Callable[[T], R], chunks: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """Apply ``fn`` to every chunk, preserving chunk order in the result.

    Args:
        fn: Function evaluated on each chunk
        chunks: Work items in their canonical order
        workers: Requested worker count (``None`` uses the configured cap)

    Returns:
        Results in the order of ``chunks``
    """
    n_workers = resolve_workers(workers)
    if n_workers == 1 or len(chunks) <= 1:
        return [fn(chunk) for chunk in chunks]
    logger.debug(f"Mapping {len(chunks)} chunks on {n_workers} workers")
    with ThreadPoolExecutor(max_workers=n_workers) as executor:
        return list(executor.map(fn, chunks))
