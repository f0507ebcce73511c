"""
Exhaustive desk-scale checks of the two constructions.

verify_thm1 counts Y_n = #{(a1, a2, p) : a1 + a2 + p = n} (a1, a2 ordered) for
every odd n of a window; verify_thm2_density and density_grid measure how much
of [1, x] the sumset P + B reaches.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from config import FAILURE_CAP, resolve_threads
from errors import InvariantViolation
from randcomplement import (KIND_B_ASSEMBLED, KIND_B_BLOCK, KIND_B_CHAIN, ScaleSchedule,
                            SparseComplement, w_values)
from sieve import PrimeTable, count_primes

logger = logging.getLogger(__name__)

# Above this many (distinct sum x window) operations the pair method hands over to FFT
PAIR_WORK_LIMIT = 20_000_000
# Pair histograms of larger sets are built by convolution instead of outer sums
OUTER_SUM_LIMIT = 4_000_000


@dataclass
class CoverageReport:
    n_lo: int
    n_hi: int
    parity: str
    covered: int
    tested: int
    failures: List[int]
    failure_count: int
    min_reps: int
    threshold_n0: int
    even_covered: Optional[int] = None
    even_tested: Optional[int] = None
    counts: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def density(self) -> float:
        return self.covered / self.tested if self.tested else 0.0

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "n_lo": self.n_lo,
            "n_hi": self.n_hi,
            "parity": self.parity,
            "covered": self.covered,
            "tested": self.tested,
            "density": self.density,
            "failure_count": self.failure_count,
            "failures": self.failures,
            "min_reps": self.min_reps,
            "threshold_n0": self.threshold_n0,
        }
        if self.even_tested is not None:
            data["even_covered"] = self.even_covered
            data["even_tested"] = self.even_tested
        return data


@dataclass
class DensityGrid:
    N: int
    eps: float
    c1: float
    eta: float
    x_values: List[int]
    densities: List[float]
    deficits: List[int]
    flagged: List[int]

    @property
    def J(self) -> int:
        return len(self.x_values) - 1

    @property
    def min_density(self) -> float:
        return min(self.densities) if self.densities else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N, "eps": self.eps, "c1": self.c1, "eta": self.eta, "J": self.J,
            "x_values": self.x_values, "densities": self.densities,
            "deficits": self.deficits, "flagged": self.flagged,
            "min_density": self.min_density,
        }


# ---------------------
# A + A + P
# ---------------------

def _pair_sum_histogram(elements: np.ndarray, limit: int) -> np.ndarray:
    """m[s] = #{(a1, a2) ordered : a1 + a2 = s} for 0 <= s <= limit."""
    if len(elements) == 0 or limit < 0:
        return np.zeros(max(limit, 0) + 1, dtype=np.int64)
    if len(elements) ** 2 <= OUTER_SUM_LIMIT:
        sums = (elements[:, None] + elements[None, :]).ravel()
        return np.bincount(sums[sums <= limit], minlength=limit + 1).astype(np.int64)
    indicator = np.zeros(limit + 1, dtype=np.float64)
    indicator[elements[elements <= limit]] = 1.0
    return _convolve(indicator, indicator, limit)


def _convolve(first: np.ndarray, second: np.ndarray, limit: int) -> np.ndarray:
    size = 1 << int(len(first) + len(second) - 1).bit_length()
    product = np.fft.rfft(first, size) * np.fft.rfft(second, size)
    return np.rint(np.fft.irfft(product, size)[: limit + 1]).astype(np.int64)


def _pairs_chunk(hist: np.ndarray, sums: np.ndarray, flags: np.ndarray, lo: int, hi: int):
    """Y[n] for n in [lo, hi] by walking every pair sum s with table lookups at n - s."""
    counts = np.zeros(hi - lo + 1, dtype=np.int64)
    for s in sums:
        s = int(s)
        start = max(lo, s + 2)
        if start > hi:
            break
        counts[start - lo:] += hist[s] * flags[start - s: hi - s + 1]
    return counts


def representation_counts(A: SparseComplement, lo: int, hi: int, table: PrimeTable,
                          method: str = "auto", threads: Optional[int] = None) -> np.ndarray:
    """Y_n for every n in [lo, hi] (both parities)."""
    if lo > hi:
        raise ValueError("lo must not exceed hi")
    table.require(2, hi)
    elements = A.as_array()
    elements = elements[elements <= hi - 2] if hi >= 2 else elements[:0]
    hist = _pair_sum_histogram(elements, max(hi - 2, 0))
    sums = np.flatnonzero(hist)
    if method == "auto":
        method = "pairs" if len(sums) * (hi - lo + 1) <= PAIR_WORK_LIMIT else "fft"

    flags = np.zeros(hi + 1, dtype=np.int64)
    flags[2:] = table.window(2, hi)
    if method == "fft":
        return _convolve(hist.astype(np.float64), flags.astype(np.float64), hi)[lo:]
    if method != "pairs":
        raise ValueError(f"unknown method {method!r}")

    workers = resolve_threads(threads)
    bounds = np.linspace(lo, hi + 1, num=min(workers, hi - lo + 1) + 1).astype(np.int64)
    ranges = [(int(a), int(b) - 1) for a, b in zip(bounds, bounds[1:]) if b > a]
    if len(ranges) == 1:
        return _pairs_chunk(hist, sums, flags, lo, hi)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        parts = list(executor.map(lambda r: _pairs_chunk(hist, sums, flags, r[0], r[1]), ranges))
    return np.concatenate(parts)


def _first_of_parity(n: int, parity: str) -> int:
    if parity == "odd" and n % 2 == 0:
        return n + 1
    if parity == "even" and n % 2 == 1:
        return n + 1
    return n


def verify_thm1(A: SparseComplement, n_lo: int, n_hi: int, table: PrimeTable,
                method: str = "auto", threads: Optional[int] = None,
                shifted: bool = False) -> CoverageReport:
    """Coverage of odd n in [n_lo, n_hi] by A + A + P (every n with shifted=True)."""
    table.require(2, n_hi)
    relevant = [a for a in A.elements if a <= n_hi]
    if relevant:
        SparseComplement(elements=tuple(relevant), kind=A.kind).check_primes(table)
    source = A
    parity = "odd"
    if shifted:
        parity = "all"
        source = SparseComplement(
            elements=tuple(sorted(set(A.elements) | {a + 1 for a in A.elements})),
            kind=A.kind, config=A.config, seed=A.seed)

    counts = representation_counts(source, n_lo, n_hi, table, method, threads)
    ns = np.arange(n_lo, n_hi + 1)
    step = 1 if parity == "all" else 2
    start = _first_of_parity(n_lo, parity)
    selected = counts[start - n_lo::step]
    tested_ns = ns[start - n_lo::step]

    failed = tested_ns[selected == 0]
    covered_counts = selected[selected > 0]
    if failed.size:
        threshold = int(failed[-1]) + step
    else:
        threshold = start
    report = CoverageReport(
        n_lo=n_lo, n_hi=n_hi, parity=parity,
        covered=int(covered_counts.size), tested=int(selected.size),
        failures=[int(n) for n in failed[:FAILURE_CAP]],
        failure_count=int(failed.size),
        min_reps=int(covered_counts.min()) if covered_counts.size else 0,
        threshold_n0=threshold,
        counts=counts,
    )
    if report.covered + report.failure_count != report.tested:
        raise InvariantViolation("covered + failures != tested")
    if 2 in A and not shifted:
        evens = counts[_first_of_parity(n_lo, "even") - n_lo::2]
        report.even_covered = int(np.count_nonzero(evens))
        report.even_tested = int(evens.size)
    logger.info(
        f"A+A+P on [{n_lo}, {n_hi}]: {report.covered}/{report.tested} covered, "
        f"n0={report.threshold_n0}"
    )
    return report


# ---------------------
# P + B
# ---------------------

def covered_mask(B: SparseComplement, x: int, table: PrimeTable) -> np.ndarray:
    """mask[n] is True iff n = b + p <= x for some b in B and prime p."""
    x = int(x)
    table.require(2, max(x, 2))
    mask = np.zeros(x + 1, dtype=bool)
    primes = table.primes(2, x)
    for b in B.elements:
        if b + 2 > x:
            break
        mask[b + primes[primes <= x - b]] = True
    return mask


def verify_thm2_density(B: SparseComplement, x: int, table: PrimeTable,
                        parity: str = "all") -> float:
    """|{n <= x : n in P + B}| / x, or the share of covered even n <= x."""
    x = int(x)
    if x < 1:
        raise ValueError("x must be at least 1")
    mask = covered_mask(B, x, table)
    if parity == "all":
        return int(np.count_nonzero(mask[1:])) / x
    if parity == "even":
        evens = x // 2
        return int(np.count_nonzero(mask[2::2])) / evens if evens else 0.0
    raise ValueError(f"unknown parity {parity!r}")


def grid_points(N: int, eps: float, c1: float) -> List[int]:
    """x_j = N/η^j for j = 0..J, η = 1+ε/2, the last point raised to ⌈N^c1⌉."""
    if not 0 < eps < 2:
        raise ValueError("eps must lie in (0, 2)")
    eta = 1.0 + eps / 2.0
    J = math.floor((1.0 - c1) * math.log(N) / math.log(eta) + 1.0)
    floor_x = math.ceil(N ** c1 - 1e-9)
    points = []
    for j in range(J + 1):
        x = max(math.floor(N / eta ** j), floor_x)
        if points and x >= points[-1]:
            continue
        points.append(x)
    return points


def grid_success_bound(eps: float, c1: float, N: int) -> float:
    """η^{-J-1}, the lower bound on every grid point succeeding at once."""
    eta = 1.0 + eps / 2.0
    J = math.floor((1.0 - c1) * math.log(N) / math.log(eta) + 1.0)
    return eta ** (-J - 1)


def density_grid(B: SparseComplement, N: int, eps: float, c1: float,
                 table: PrimeTable) -> DensityGrid:
    """Even-integer density of P + B at each grid point; flags T(x_j) >= (ε/2)·#evens."""
    points = grid_points(N, eps, c1)
    table.require(2, N)
    mask = covered_mask(B, N, table)
    covered_evens = np.cumsum(mask[2::2])

    densities, deficits, flagged = [], [], []
    for j, x in enumerate(points):
        evens = x // 2
        covered = int(covered_evens[evens - 1]) if evens else 0
        deficit = evens - covered
        densities.append(covered / evens if evens else 0.0)
        deficits.append(deficit)
        if deficit >= (eps / 2.0) * evens:
            flagged.append(j)
    return DensityGrid(N=N, eps=eps, c1=c1, eta=1.0 + eps / 2.0, x_values=points,
                       densities=densities, deficits=deficits, flagged=flagged)


def counting_function_profile(S: SparseComplement, grid: Sequence[int]) -> List[Dict[str, Any]]:
    """
    (x, S(x), S(x)/log x) per grid point.
    Assembled sets add the schedule cap and S(x)/(w(x) log x) for the schedule's
    growth preset; chains add their own cap and single blocks K log N.
    """
    cap = None
    block_cap = None
    w_key = None
    if S.kind == KIND_B_ASSEMBLED and "schedule" in S.config:
        schedule = ScaleSchedule.from_dict(S.config["schedule"])
        cap = schedule.counting_cap
        w_key = schedule.w_key
    if S.kind == KIND_B_CHAIN and "cap" in S.config:
        cap = S.config["cap"]
    if S.kind == KIND_B_BLOCK and {"K", "N"} <= set(S.config):
        block_cap = S.config["K"] * math.log(S.config["N"])

    rows = []
    for x in grid:
        count = S.counting_function(x)
        row: Dict[str, Any] = {
            "x": int(x),
            "count": count,
            "ratio": count / math.log(x) if x > 1 else None,
        }
        if cap is not None:
            row["cap"] = cap
            row["within_cap"] = row["ratio"] is not None and row["ratio"] <= cap
        if w_key is not None:
            w = w_values(w_key, [x])[0] if x > math.e else None
            row["w"] = w
            row["w_ratio"] = row["ratio"] / w if w and w > 0 else None
        if block_cap is not None:
            row["block_cap"] = block_cap
            row["within_cap"] = count <= block_cap
        rows.append(row)
    return rows


def assembly_annotations(B: SparseComplement, table: PrimeTable) -> List[Dict[str, Any]]:
    """Truncation loss N_{i-1}·P(x) against ε_i·x for every inner block."""
    if B.kind != KIND_B_ASSEMBLED:
        return []
    schedule = ScaleSchedule.from_dict(B.config["schedule"])
    N = schedule.N_sequence
    notes = []
    for i in range(1, len(N)):
        x = min(N[i + 1] if i + 1 < len(N) else N[i], table.hi)
        loss = N[i - 1] * count_primes(table, x)
        allowance = schedule.eps_schedule[i] * x
        notes.append({
            "block": i, "x": x, "truncation_loss": loss,
            "eps_x": allowance, "within_allowance": loss <= allowance,
        })
    return notes
