import random

import pytest

from errors import TableRangeError
from goldbach import (IntervalPairQuery, exceptional_set, goldbach_count,
                      goldbach_counts_upto, hardy_littlewood_ratio,
                      short_interval_pair_count, z_count)
from sieve import count_primes, sieve_range


def brute_pairs(n, is_prime):
    return sum(1 for p in range(2, n - 1) if is_prime(p) and is_prime(n - p))


@pytest.mark.parametrize("n,expected", [(4, 1), (10, 3), (100, 12)])
def test_goldbach_count(n, expected, small_table):
    assert goldbach_count(n, small_table) == expected


def test_goldbach_count_rejects_odd(small_table):
    with pytest.raises(ValueError):
        goldbach_count(11, small_table)


def test_fft_counts_match_direct(small_table, is_prime_oracle):
    counts = goldbach_counts_upto(2000, small_table)
    for n in range(4, 2001, 2):
        assert counts[n] == goldbach_count(n, small_table)
    assert counts[300] == brute_pairs(300, is_prime_oracle)


def test_hardy_littlewood_ratio_is_order_one(small_table):
    ratio = hardy_littlewood_ratio(10_000, small_table)
    assert 0.5 < ratio < 2.0


def test_interval_query_validation():
    with pytest.raises(ValueError):
        IntervalPairQuery(x=100, M=0, y=40)
    with pytest.raises(ValueError):
        IntervalPairQuery(x=100, M=8, y=95)
    with pytest.raises(ValueError):
        IntervalPairQuery(x=100, M=8, y=40, cstar=-1)


def test_short_interval_pair_count(small_table):
    query = IntervalPairQuery(x=96, M=8, y=40)
    assert short_interval_pair_count(100, query, small_table) == 2
    with pytest.raises(ValueError):
        short_interval_pair_count(200, query, small_table)


def test_short_interval_matches_brute_force(is_prime_oracle):
    x, M = 10 ** 6, 10 ** 4
    y = x // 2
    query = IntervalPairQuery(x=x, M=M, y=y)
    n = x + 2
    expected = sum(1 for p in range(y, y + M + 1)
                   if is_prime_oracle(p) and x - y - M <= n - p <= x - y + M
                   and is_prime_oracle(n - p))
    assert short_interval_pair_count(n, query, sieve_range(0, x + M)) == expected


def test_z_count(small_table, is_prime_oracle):
    assert z_count(10, 3, 7, small_table) == 3
    assert z_count(11, 3, 7, small_table) == 0
    n = 10 ** 6 + 1
    expected = sum(1 for p in range(500, 601) if is_prime_oracle(p) and is_prime_oracle(n - p))
    assert z_count(n, 500, 600, sieve_range(0, n)) == expected


def test_exceptional_set_with_zero_cstar(small_table):
    query = IntervalPairQuery(x=10_000, M=1_000, y=5_000, cstar=0.0)
    report = exceptional_set(query, small_table)
    assert report.exceptional == []
    assert report.tested == 501


def test_exceptional_set_counts(small_table):
    query = IntervalPairQuery(x=10_000, M=1_000, y=5_000, cstar=0.5)
    report = exceptional_set(query, small_table, threads=3)
    assert report.tested == 501
    assert report.exceptional_count <= report.tested
    for n in (10_000, 10_500, 11_000):
        assert report.counts[n] == short_interval_pair_count(n, query, small_table)
    data = report.to_dict()
    assert data["window"]["M"] == 1_000
    assert data["ratio"] == report.exceptional_count / 501


def test_exceptional_set_same_for_any_thread_count(small_table):
    query = IntervalPairQuery(x=10_000, M=1_000, y=5_000, cstar=2.0)
    one = exceptional_set(query, small_table, threads=1)
    many = exceptional_set(query, small_table, threads=4)
    assert one.exceptional == many.exceptional
    assert one.counts == many.counts


def test_exceptional_set_needs_table(small_table):
    query = IntervalPairQuery(x=19_500, M=1_000, y=5_000)
    with pytest.raises(TableRangeError):
        exceptional_set(query, small_table)


@pytest.mark.slow
def test_exceptional_fraction_at_desk_scale():
    query = IntervalPairQuery(x=10 ** 6, M=10 ** 4, y=5 * 10 ** 5, cstar=0.5)
    table = sieve_range(0, query.x + query.M)
    report = exceptional_set(query, table)
    assert report.exceptional_count <= 0.1 * report.tested
    assert report.empirical_constant is not None and report.empirical_constant > 0


@pytest.mark.slow
def test_every_even_number_has_a_representation(table_1e6):
    counts = goldbach_counts_upto(10 ** 6, table_1e6)
    assert counts[4::2].min() >= 1
    assert counts[1::2][3:].max() <= 2


@pytest.mark.parametrize("y", [0, 1234, 4500, 5000, 9000])
def test_short_interval_count_mirrors_at_n_equal_x(y, small_table):
    x, M = 10_000, 1_000
    query = IntervalPairQuery(x=x, M=M, y=y)
    mirrored = IntervalPairQuery(x=x, M=M, y=x - y - M)
    assert short_interval_pair_count(x, query, small_table) == \
        short_interval_pair_count(x, mirrored, small_table)


def test_z_count_bounded_by_band_primes(small_table):
    rng = random.Random(9)
    for _ in range(200):
        n = rng.randrange(100, 20_000)
        I_lo = rng.randrange(2, n - 2)
        I_hi = rng.randrange(I_lo, n)
        band = count_primes(small_table, I_hi) - count_primes(small_table, I_lo - 1)
        assert 0 <= z_count(n, I_lo, I_hi, small_table) <= band


@pytest.mark.slow
def test_hardy_littlewood_ratio_band(table_1e6):
    rng = random.Random(4)
    for _ in range(1000):
        n = 2 * rng.randrange(5 * 10 ** 4, 5 * 10 ** 5 + 1)
        assert 0.5 <= hardy_littlewood_ratio(n, table_1e6) <= 2.5
