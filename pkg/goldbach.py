"""
Goldbach representation counts: r(n) over all primes, pairs confined to the
windows [y, y+M] and [x-y-M, x-y+M], z(n) for a prime band, and
exceptional-set scans.

Representations are ordered pairs (p1, p2) throughout, so r(10) = 3 via
(3, 7), (5, 5), (7, 3). log is the natural logarithm.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from config import DEFAULT_C0, EXCEPTIONAL_CAP, resolve_threads
from errors import TableRangeError
from numtheory import SingularSeriesParams, singular_series
from sieve import PrimeTable

logger = logging.getLogger(__name__)

# C(n) enters thresholds only; a looser tolerance keeps it valid for highly composite n
WINDOW_SERIES_PARAMS = SingularSeriesParams(tolerance=1e-7)


def _require_even(n: int):
    if n < 4 or n % 2:
        raise ValueError(f"n must be an even integer >= 4, got {n}")


@dataclass(frozen=True)
class IntervalPairQuery:
    """Window parameters x, M, y and the candidate constant C*."""
    x: int
    M: int
    y: int
    cstar: float = 0.5
    c0: float = DEFAULT_C0

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("window length M must be at least 1")
        if not 0 <= self.y <= self.x - self.M:
            raise ValueError(f"y must satisfy 0 <= y <= x - M (got y={self.y})")
        if self.cstar < 0:
            raise ValueError("cstar must be non-negative")
        if not self.x ** (1 - self.c0) <= self.M <= self.x:
            logger.warning(
                f"M={self.M} outside [x^(1-c0), x] = [{self.x ** (1 - self.c0):.1f}, {self.x}]"
            )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ExceptionalReport:
    window: IntervalPairQuery
    tested: int
    exceptional: List[int]
    exceptional_count: int
    predicted_cap: float
    empirical_constant: Optional[float] = None
    counts: Dict[int, int] = field(default_factory=dict, repr=False)

    @property
    def ratio(self) -> float:
        return self.exceptional_count / self.tested if self.tested else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "window": self.window.to_dict(),
            "tested": self.tested,
            "exceptional_count": self.exceptional_count,
            "exceptional_sample": self.exceptional[:EXCEPTIONAL_CAP],
            "predicted_cap": self.predicted_cap,
            "ratio": self.ratio,
            "empirical_constant": self.empirical_constant,
        }


def goldbach_count(n: int, table: PrimeTable) -> int:
    """Number of ordered prime pairs (p1, p2) with p1 + p2 = n."""
    n = int(n)
    _require_even(n)
    table.require(2, n - 2)
    forward = table.window(2, n - 2)
    return int(np.count_nonzero(forward & forward[::-1]))


def goldbach_counts_upto(limit: int, table: PrimeTable) -> np.ndarray:
    """r(n) for every 0 <= n <= limit, by FFT self-convolution of the prime indicator."""
    limit = int(limit)
    table.require(2, limit)
    indicator = np.zeros(limit + 1, dtype=np.float64)
    indicator[2:] = table.window(2, limit)
    size = 1 << int(2 * (limit + 1) - 1).bit_length()
    spectrum = np.fft.rfft(indicator, size)
    counts = np.fft.irfft(spectrum * spectrum, size)[: limit + 1]
    return np.rint(counts).astype(np.int64)


def hardy_littlewood_ratio(n: int, table: PrimeTable) -> float:
    """r(n) (log n)^2 / (C(n) n)."""
    r = goldbach_count(n, table)
    return r * math.log(n) ** 2 / (singular_series(n, WINDOW_SERIES_PARAMS) * n)


def _pair_window(n: int, query: IntervalPairQuery):
    """p1 range after intersecting both window constraints."""
    lo = max(query.y, n - (query.x - query.y + query.M), 2)
    hi = min(query.y + query.M, n - (query.x - query.y - query.M), n - 2)
    return lo, hi


def short_interval_pair_count(n: int, query: IntervalPairQuery, table: PrimeTable) -> int:
    """Ordered pairs with y <= p1 <= y+M and x-y-M <= p2 <= x-y+M."""
    n = int(n)
    if not query.x <= n <= query.x + query.M:
        raise ValueError(f"n={n} lies outside [x, x+M] = [{query.x}, {query.x + query.M}]")
    if n % 2:
        raise ValueError("n must be even")
    table.require(2, query.x + query.M)
    lo, hi = _pair_window(n, query)
    if lo > hi:
        return 0
    first = table.window(lo, hi)
    second = table.window(n - hi, n - lo)[::-1]
    return int(np.count_nonzero(first & second))


def z_count(n: int, I_lo: int, I_hi: int, table: PrimeTable) -> int:
    """|{p1 prime in [I_lo, I_hi] : n - p1 prime}|."""
    n = int(n)
    if n <= I_lo + 1:
        raise ValueError(f"n={n} leaves no room for p2 >= 2 above I_lo={I_lo}")
    lo = max(int(I_lo), 2)
    hi = min(int(I_hi), n - 2)
    if lo > hi:
        return 0
    table.require(2, n - lo)
    first = table.window(lo, hi)
    second = table.window(n - hi, n - lo)[::-1]
    return int(np.count_nonzero(first & second))


def _scan_chunk(evens: List[int], query: IntervalPairQuery, table: PrimeTable):
    rows = []
    for n in evens:
        count = short_interval_pair_count(n, query, table)
        c_n = singular_series(n, WINDOW_SERIES_PARAMS)
        log2 = math.log(n) ** 2
        threshold = query.cstar * c_n * query.M / (3 * log2)
        rows.append((n, count, count < threshold, count * log2 / (c_n * query.M)))
    return rows


def exceptional_set(query: IntervalPairQuery, table: PrimeTable,
                    threads: Optional[int] = None) -> ExceptionalReport:
    """Even n in [x, x+M] whose window count is below C* C(n) M / (3 log^2 n)."""
    if not table.covers(2, query.x + query.M):
        raise TableRangeError(f"table must cover [2, {query.x + query.M}]")
    start = query.x + (query.x % 2)
    evens = list(range(max(start, 4), query.x + query.M + 1, 2))

    workers = resolve_threads(threads)
    chunk = max(1, -(-len(evens) // workers))
    parts = [evens[i:i + chunk] for i in range(0, len(evens), chunk)]
    if workers == 1 or len(parts) <= 1:
        results = [_scan_chunk(part, query, table) for part in parts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(lambda part: _scan_chunk(part, query, table), parts))

    exceptional, counts, normalized = [], {}, []
    for rows in results:
        for n, count, failed, scaled in rows:
            counts[n] = count
            if failed:
                exceptional.append(n)
            else:
                normalized.append(scaled)

    report = ExceptionalReport(
        window=query,
        tested=len(evens),
        exceptional=exceptional[:EXCEPTIONAL_CAP],
        exceptional_count=len(exceptional),
        predicted_cap=query.M / math.log(query.x) ** 2,
        empirical_constant=min(normalized) if normalized else None,
        counts=counts,
    )
    logger.info(
        f"window [{query.x}, {query.x + query.M}]: {report.exceptional_count}/{report.tested} "
        f"exceptional (predicted cap {report.predicted_cap:.1f})"
    )
    return report
