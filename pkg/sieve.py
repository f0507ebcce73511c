#!/usr/bin/env python3
"""
Segmented sieve of Eratosthenes over arbitrary integer intervals.

PrimeTable is the shared membership structure consumed by every other module.
Tables are built segment by segment (optionally on a thread pool, numpy slice
assignment releases the GIL) and frozen once complete.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from config import MEMORY_CEILING, SEGMENT_SIZE, resolve_threads
from errors import RangeTooLargeError, TableRangeError

logger = logging.getLogger(__name__)


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (plain sieve, for base primes)."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p: limit + 1: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """Prime membership over the closed interval [lo, hi]."""
    lo: int
    hi: int
    flags: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.flags.setflags(write=False)

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, n) -> bool:
        return self.is_prime(n)

    def covers(self, a: int, b: int) -> bool:
        return self.lo <= a and b <= self.hi

    def require(self, a: int, b: int):
        if not self.covers(a, b):
            raise TableRangeError(
                f"range [{a}, {b}] is outside the table [{self.lo}, {self.hi}]"
            )

    def is_prime(self, n: int) -> bool:
        n = int(n)
        self.require(n, n)
        return bool(self.flags[n - self.lo])

    def window(self, a: int, b: int) -> np.ndarray:
        """Read-only boolean view of membership for a..b inclusive."""
        self.require(a, b)
        return self.flags[a - self.lo: b - self.lo + 1]

    def primes(self, a: Optional[int] = None, b: Optional[int] = None) -> np.ndarray:
        """Primes in [a, b] (clipped to the table) as an int64 array."""
        a = self.lo if a is None else max(int(a), self.lo)
        b = self.hi if b is None else min(int(b), self.hi)
        if a > b:
            return np.array([], dtype=np.int64)
        return np.flatnonzero(self.window(a, b)).astype(np.int64) + a

    def same_membership(self, other: "PrimeTable") -> bool:
        return (self.lo == other.lo and self.hi == other.hi
                and bool(np.array_equal(self.flags, other.flags)))


def _segments(lo: int, hi: int, segment_size: int) -> List[Tuple[int, int]]:
    bounds = []
    start = lo
    while start <= hi:
        end = min(start + segment_size - 1, hi)
        bounds.append((start, end))
        start = end + 1
    return bounds


def _sieve_segment(flags: np.ndarray, lo: int, seg_lo: int, seg_hi: int, base: np.ndarray):
    """Strike composites of [seg_lo, seg_hi] inside the shared flag array."""
    for p in base:
        p = int(p)
        p2 = p * p
        if p2 > seg_hi:
            break
        start = max(p2, ((seg_lo + p - 1) // p) * p)
        if start > seg_hi:
            continue
        flags[start - lo: seg_hi - lo + 1: p] = False


def sieve_range(lo: int, hi: int, segment_size: Optional[int] = None,
                threads: Optional[int] = None) -> PrimeTable:
    """Build the PrimeTable for [lo, hi]; identical for any thread count."""
    lo, hi = int(lo), int(hi)
    if lo < 0 or hi < 0:
        raise ValueError("negative bounds are not accepted")
    if lo > hi:
        raise ValueError(f"lo ({lo}) must not exceed hi ({hi})")
    size = hi - lo + 1
    if size > MEMORY_CEILING:
        raise RangeTooLargeError(
            f"table of {size} integers exceeds the memory ceiling {MEMORY_CEILING}"
        )

    segment_size = int(segment_size or SEGMENT_SIZE)
    workers = resolve_threads(threads)
    base = simple_sieve(math.isqrt(hi))

    flags = np.ones(size, dtype=bool)
    for n in (0, 1):
        if lo <= n <= hi:
            flags[n - lo] = False

    segments = _segments(lo, hi, segment_size)
    if workers == 1 or len(segments) == 1:
        for seg_lo, seg_hi in segments:
            _sieve_segment(flags, lo, seg_lo, seg_hi, base)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_sieve_segment, flags, lo, s, e, base)
                       for s, e in segments]
            for future in futures:
                future.result()

    logger.debug(f"sieved [{lo}, {hi}] in {len(segments)} segments on {workers} workers")
    return PrimeTable(lo=lo, hi=hi, flags=flags)


def count_primes(table: PrimeTable, x: int) -> int:
    """|{p prime : table.lo <= p <= x}|."""
    x = int(x)
    if x > table.hi:
        raise TableRangeError(f"x = {x} is beyond the table end {table.hi}")
    if x < table.lo:
        return 0
    return int(np.count_nonzero(table.window(table.lo, x)))


def primes_in_ap(table: PrimeTable, x: int, d: int, r: int) -> int:
    """Count primes p in [table.lo, x] with p ≡ r (mod d)."""
    d, r = int(d), int(r)
    if d < 1:
        raise ValueError("modulus d must be at least 1")
    if not 0 <= r < d:
        raise ValueError(f"residue r must lie in [0, {d})")
    x = int(x)
    if x > table.hi:
        raise TableRangeError(f"x = {x} is beyond the table end {table.hi}")
    primes = table.primes(table.lo, x)
    return int(np.count_nonzero(primes % d == r))


def smallest_prime_factor_table(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n for 2 <= n <= limit (spf[0]=0, spf[1]=1)."""
    limit = int(limit)
    if limit + 1 > MEMORY_CEILING:
        raise RangeTooLargeError(f"SPF table up to {limit} exceeds the memory ceiling")
    spf = np.zeros(max(limit, 1) + 1, dtype=np.int32)
    for p in simple_sieve(math.isqrt(limit)):
        p = int(p)
        tail = spf[p * p::p]
        tail[tail == 0] = p
    untouched = np.flatnonzero(spf == 0)
    spf[untouched] = untouched
    spf[0] = 0
    spf[1] = 1
    return spf
