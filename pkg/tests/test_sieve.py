import random

import numpy as np
import pytest
from sympy import primerange

import sieve
from errors import RangeTooLargeError, TableRangeError
from sieve import (count_primes, primes_in_ap, sieve_range, simple_sieve,
                   smallest_prime_factor_table)
from numtheory import brun_titchmarsh_bound


def test_simple_sieve_matches_sympy():
    assert simple_sieve(1000).tolist() == list(primerange(2, 1001))
    assert simple_sieve(1).size == 0


def test_table_without_primes():
    table = sieve_range(0, 1)
    assert table.primes().size == 0
    assert not table.is_prime(0) and not table.is_prime(1)


def test_first_hundred(is_prime_oracle):
    table = sieve_range(1, 100)
    assert len(table.primes()) == 25
    assert all(table.is_prime(n) == is_prime_oracle(n) for n in range(1, 101))


def test_offset_window_matches_trial_division(is_prime_oracle):
    lo = 10 ** 6
    table = sieve_range(lo, lo + 1000, segment_size=97)
    assert all((n in table) == is_prime_oracle(n) for n in range(lo, lo + 1001))


def test_segmented_tables_agree_across_threads():
    one = sieve_range(0, 500_000, segment_size=1 << 14, threads=1)
    many = sieve_range(0, 500_000, segment_size=1 << 14, threads=4)
    assert one.same_membership(many)


def test_flags_are_read_only(small_table):
    with pytest.raises(ValueError):
        small_table.flags[3] = False


def test_bad_bounds():
    with pytest.raises(ValueError):
        sieve_range(10, 5)
    with pytest.raises(ValueError):
        sieve_range(-5, 5)


def test_memory_ceiling(monkeypatch):
    monkeypatch.setattr(sieve, "MEMORY_CEILING", 1000)
    with pytest.raises(RangeTooLargeError):
        sieve_range(0, 5000)


def test_count_primes(table_1e6):
    small = sieve_range(1, 100)
    assert count_primes(small, 100) == 25
    assert count_primes(small, 1) == 0
    assert count_primes(table_1e6, 10 ** 6) == 78498
    with pytest.raises(TableRangeError):
        count_primes(small, 101)


def test_primes_in_ap(table_1e6):
    small = sieve_range(1, 100)
    assert primes_in_ap(small, 100, 1, 0) == 25
    assert primes_in_ap(small, 100, 4, 1) == 11
    assert primes_in_ap(table_1e6, 10 ** 6, 7, 3) <= brun_titchmarsh_bound(10 ** 6, 7)
    with pytest.raises(ValueError):
        primes_in_ap(small, 100, 4, 4)


def test_window_outside_table(small_table):
    with pytest.raises(TableRangeError):
        small_table.window(0, 20_001)


def test_smallest_prime_factor_table():
    spf = smallest_prime_factor_table(100)
    assert spf[97] == 97
    assert spf[91] == 7
    assert spf[64] == 2
    assert np.all(spf[2:] >= 2)


def test_sub_range_matches_fresh_sieve(small_table):
    rng = random.Random(11)
    for _ in range(25):
        lo = rng.randrange(0, 19_000)
        hi = rng.randrange(lo, 20_001)
        fresh = sieve_range(lo, hi, segment_size=rng.choice([64, 1000, 1 << 14]))
        assert np.array_equal(small_table.window(lo, hi), fresh.flags)


def test_count_primes_is_monotone(small_table):
    counts = [count_primes(small_table, x) for x in range(0, 20_001, 7)]
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert count_primes(small_table, 20_000) == 2262
