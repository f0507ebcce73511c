import math

import pytest

from sieve import sieve_range


def trial_division(n):
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


@pytest.fixture
def is_prime_oracle():
    return trial_division


@pytest.fixture(scope="session")
def small_table():
    return sieve_range(0, 20_000)


@pytest.fixture(scope="session")
def table_1e6():
    return sieve_range(0, 10 ** 6)
