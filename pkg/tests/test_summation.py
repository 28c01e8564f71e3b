import numpy as np

from qvol.utils.summation import combine_partials, pairwise_sum, parallel_map, partial_sum, resolve_workers


def test_pairwise_sum_recovers_cancelled_unit():
    assert pairwise_sum([1e16, 1.0, -1e16]) == 1.0


def test_pairwise_sum_empty_and_complex():
    assert pairwise_sum([]) == 0j
    assert pairwise_sum(np.array([1 + 2j, 3 - 1j])) == 4 + 1j


def test_partials_combine_like_a_single_sum():
    rng = np.random.default_rng(7)
    values = rng.normal(size=64) + 1j * rng.normal(size=64)
    chunks = [values[i:i + 16] for i in range(0, 64, 16)]
    total = combine_partials([partial_sum(c) for c in chunks])
    assert abs(total - values.sum()) < 1e-12


def test_parallel_map_preserves_order():
    chunks = list(range(40))
    assert parallel_map(lambda x: x * x, chunks, workers=4) == [x * x for x in chunks]


def test_parallel_map_is_independent_of_worker_count():
    rng = np.random.default_rng(3)
    blocks = [rng.normal(size=33) for _ in range(25)]

    def reduce(workers):
        return combine_partials(parallel_map(partial_sum, blocks, workers=workers))

    assert reduce(1) == reduce(2) == reduce(8)


def test_resolve_workers_is_positive():
    assert resolve_workers(0) == 1
    assert resolve_workers(None) >= 1
