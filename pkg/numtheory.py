"""
Arithmetic functions and the Goldbach singular series C(n).

Factorizations go through a cached smallest-prime-factor table (grown on
demand up to SPF_LIMIT); larger arguments fall back to trial division.
"""

import logging
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict

import numpy as np

from config import MEMORY_CEILING, SPF_LIMIT
from sieve import simple_sieve, smallest_prime_factor_table

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 20_000_000
DEFAULT_TOLERANCE = 1e-9

_spf_lock = threading.Lock()
_spf_cache = {"table": None}


def _require_positive(d: int, name: str = "d"):
    if int(d) < 1:
        raise ValueError(f"{name} must be a positive integer, got {d}")


def _spf(n: int):
    """SPF table covering n, or None when n is above SPF_LIMIT."""
    if n > SPF_LIMIT:
        return None
    table = _spf_cache["table"]
    if table is None or len(table) <= n:
        with _spf_lock:
            table = _spf_cache["table"]
            if table is None or len(table) <= n:
                limit = min(SPF_LIMIT, max(2 * n, 1 << 16))
                table = smallest_prime_factor_table(limit)
                _spf_cache["table"] = table
    return table


def factorize(n: int) -> Dict[int, int]:
    """Prime factorization {p: exponent}; factorize(1) == {}."""
    n = int(n)
    _require_positive(n, "n")
    factors: Dict[int, int] = {}
    spf = _spf(n)
    if spf is not None:
        while n > 1:
            p = int(spf[n])
            factors[p] = factors.get(p, 0) + 1
            n //= p
        return factors
    p = 2
    while p * p <= n:
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def omega(d: int) -> int:
    """Number of distinct prime factors."""
    return len(factorize(d))


def tau(d: int) -> int:
    """Number of divisors."""
    result = 1
    for e in factorize(d).values():
        result *= e + 1
    return result


def phi(d: int) -> int:
    """Euler's totient."""
    d = int(d)
    result = d
    for p in factorize(d):
        result -= result // p
    return result


def is_squarefree(d: int) -> bool:
    return all(e == 1 for e in factorize(d).values())


def squarefree_divisor_weight(m: int) -> float:
    """Σ_{d|m, d square-free} 2^ω(d)/d, i.e. ∏_{p|m}(1 + 2/p)."""
    weight = 1.0
    for p in factorize(m):
        weight *= 1.0 + 2.0 / p
    return weight


def brun_titchmarsh_bound(x: float, d: int) -> float:
    """Upper bound 2x/(φ(d) log(x/d)) for primes <= x in a residue class mod d."""
    _require_positive(d)
    if x <= d:
        raise ValueError("Brun-Titchmarsh bound needs x > d")
    return 2.0 * x / (phi(d) * math.log(x / d))


# ---------------------
# Singular series
# ---------------------

@dataclass(frozen=True)
class SingularSeriesParams:
    truncation_bound: int = DEFAULT_TRUNCATION
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.truncation_bound < 3:
            raise ValueError("truncation_bound must be at least 3")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


def tail_sum_estimate(bound: int) -> float:
    """First-order estimate of Σ_{p > bound} 1/(p-1)^2."""
    return 1.0 / (bound * math.log(bound))


def residual_error(bound: int) -> float:
    """Relative error left after the first-order tail correction."""
    return 1.0 / (bound * math.log(bound) ** 2)


@lru_cache(maxsize=8)
def universal_product(bound: int) -> float:
    """∏_{p >= 3} (1 - 1/(p-1)^2), truncated at bound and tail-corrected."""
    primes = simple_sieve(int(bound))
    odd = primes[primes >= 3].astype(np.float64)
    log_product = math.fsum(np.log1p(-1.0 / (odd - 1.0) ** 2).tolist())
    logger.debug(f"universal product over {len(odd)} odd primes <= {bound}")
    return math.exp(log_product - tail_sum_estimate(bound))


def _series_value(n: int, bound: int) -> float:
    value = 2.0 * universal_product(bound)
    for p in factorize(n):
        if p > 2:
            value *= (p - 1) / (p - 2)
    return value


def singular_series(n: int, params: SingularSeriesParams = SingularSeriesParams()) -> float:
    """
    C(n) = ∏_{p∤n}(1 - 1/(p-1)^2) ∏_{p|n}(1 + 1/(p-1)); exactly 0 for odd n.
    The truncation bound doubles, up to the memory ceiling, until the error
    estimate meets the tolerance.
    """
    n = int(n)
    if n < 2:
        raise ValueError("singular series needs n >= 2")
    if n % 2:
        return 0.0
    bound = params.truncation_bound
    value = _series_value(n, bound)
    while value * residual_error(bound) > params.tolerance and 2 * bound <= MEMORY_CEILING:
        bound *= 2
    if bound != params.truncation_bound:
        logger.debug(f"truncation bound raised to {bound} for n={n} at tolerance {params.tolerance:g}")
        value = _series_value(n, bound)
    error = value * residual_error(bound)
    if error > params.tolerance:
        raise ValueError(
            f"tolerance {params.tolerance:g} is unattainable below the memory ceiling "
            f"{MEMORY_CEILING} (estimated error {error:.3g} at n={n}, truncation bound {bound})"
        )
    return value


# ---------------------
# Auxiliary sums
# ---------------------

def phi_table(x: int) -> np.ndarray:
    """φ(k) for 0 <= k <= x (entry 0 is 0)."""
    values = np.arange(x + 1, dtype=np.int64)
    for p in simple_sieve(x):
        p = int(p)
        values[p::p] -= values[p::p] // p
    return values


def tau_table(x: int) -> np.ndarray:
    """τ(k) for 0 <= k <= x (entry 0 is 0)."""
    values = np.zeros(x + 1, dtype=np.int64)
    for d in range(1, x + 1):
        values[d::d] += 1
    return values


def phi_reciprocal_sum(x: int) -> float:
    """Σ_{k<=x} 1/φ(k), summed exactly in floating point."""
    x = int(x)
    if x < 1:
        raise ValueError("x must be at least 1")
    return math.fsum((1.0 / phi_table(x)[1:]).tolist())


def divisor_sum_over_shifted_primes(n: int) -> int:
    """Σ_{i < n, i prime} τ(n - i)."""
    n = int(n)
    if n < 3:
        raise ValueError("n must be at least 3")
    primes = simple_sieve(n - 1)
    taus = tau_table(n - 2)
    return int(taus[n - primes].sum())
