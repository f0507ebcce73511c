#!/usr/bin/env python3
"""
Randomized sparse prime subsets and their probabilistic bookkeeping.

- sample_A: every prime x is kept with probability min(1, c log x / x);
  the order-2 complement.
- sample_B_block / sample_B_chain / assemble_B: single-scale blocks inside
  [N^c0, 2N^c0], their uncut union along N -> N^{1/c1}, and the windowed
  union of such chains over a scale schedule; the almost-complement.
- janson_bound, k_of_eps and exact_EY_delta: the quantities behind the
  existence arguments, evaluated exactly at desk scale.

Randomness is counter-based: the uniform attached to element x depends only
on (seed, x), so samples do not depend on evaluation order or thread count,
and a larger probability always yields a superset for the same seed.
"""

import bisect
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import CLAMP_WARNING_FLOOR, VERSION, resolve_threads
from errors import InvariantViolation, RangeTooLargeError
from sieve import PrimeTable

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

KIND_A = "A"
KIND_B_BLOCK = "B-block"
KIND_B_ASSEMBLED = "B-assembled"
KIND_B_CHAIN = "B-chain"
KINDS = (KIND_A, KIND_B_BLOCK, KIND_B_CHAIN, KIND_B_ASSEMBLED)

# Largest odd n accepted by the exhaustive E/Δ enumeration
EXHAUSTIVE_LIMIT = 200_000


# ---------------------
# Counter-based randomness
# ---------------------

def _mix64(z: int) -> int:
    """SplitMix64 finaliser on Python ints."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, stream: int) -> int:
    """Independent 64-bit seed for a numbered sub-stream (e.g. a schedule block)."""
    return _mix64((seed & MASK64) + (stream + 1) * GOLDEN)


def uniform_draws(seed: int, elements) -> np.ndarray:
    """u(seed, x) in [0, 1) for every element, 53-bit resolution."""
    key = np.uint64(_mix64(seed & MASK64))
    z = np.asarray(elements, dtype=np.int64).astype(np.uint64)
    z = key + z * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def bernoulli_draw(seed: int, element: int, rho: float) -> bool:
    """Indicator t_x: True iff u(seed, x) < rho."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    return bool(uniform_draws(seed, [int(element)])[0] < rho)


def _keep_mask(seed: int, elements: np.ndarray, rho: np.ndarray,
               threads: Optional[int] = None) -> np.ndarray:
    workers = resolve_threads(threads)
    if workers == 1 or len(elements) < 1 << 16:
        return uniform_draws(seed, elements) < rho
    chunks = np.array_split(np.arange(len(elements)), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        parts = list(executor.map(
            lambda idx: uniform_draws(seed, elements[idx]) < rho[idx], chunks))
    return np.concatenate(parts)


# ---------------------
# Sampler configurations and sets
# ---------------------

@dataclass(frozen=True)
class SamplerConfigA:
    c: float
    range_max: int
    seed: int = 1

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("density multiplier c must be positive")
        if self.range_max < 3:
            raise ValueError("range_max must be at least 3")


def _clean_power(base: float, exponent: float) -> float:
    value = base ** exponent
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return float(nearest)
    return value


@dataclass(frozen=True)
class SamplerConfigB:
    N: int
    K: float
    c0: float = 0.5
    seed: int = 1

    def __post_init__(self):
        if not 0 < self.c0 < 1:
            raise ValueError("c0 must lie in (0, 1)")
        if not self.K > 0:
            raise ValueError("K must be positive")
        if self.M < 2:
            raise ValueError("N^c0 must be at least 2")

    @property
    def M(self) -> float:
        return _clean_power(self.N, self.c0)

    @property
    def interval(self) -> Tuple[int, int]:
        return math.ceil(self.M), math.floor(2 * self.M)


@dataclass(frozen=True)
class SparseComplement:
    """A sampled prime subset with its provenance."""
    elements: Tuple[int, ...]
    kind: str
    config: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown set kind {self.kind!r}")
        if any(b <= a for a, b in zip(self.elements, self.elements[1:])):
            raise InvariantViolation("elements must be sorted and duplicate-free")

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        i = bisect.bisect_left(self.elements, x)
        return i < len(self.elements) and self.elements[i] == x

    def as_array(self) -> np.ndarray:
        return np.asarray(self.elements, dtype=np.int64)

    def counting_function(self, x: int) -> int:
        """|S ∩ [1, x]|."""
        return bisect.bisect_right(self.elements, x)

    def check_primes(self, table: PrimeTable):
        if not self.elements:
            return
        table.require(self.elements[0], self.elements[-1])
        arr = self.as_array()
        if not table.flags[arr - table.lo].all():
            raise InvariantViolation("set contains a non-prime element")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "config": self.config,
            "seed": self.seed,
            "version": VERSION,
            "elements": list(self.elements),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SparseComplement":
        return cls(
            elements=tuple(int(e) for e in data.get("elements", [])),
            kind=data["kind"],
            config=data.get("config", {}),
            seed=int(data.get("seed", 0)),
        )


def prime_probabilities(c: float, primes: np.ndarray) -> np.ndarray:
    """ρ_x = min(1, c log x / x)."""
    x = primes.astype(np.float64)
    return np.minimum(1.0, c * np.log(x) / x)


def expected_size_A(c: float, x: int, table: PrimeTable) -> float:
    """E|A ∩ [1, x]| = Σ_{p<=x} min(1, c log p / p)."""
    return math.fsum(prime_probabilities(c, table.primes(2, x)).tolist())


def sample_A(config: SamplerConfigA, table: PrimeTable,
             threads: Optional[int] = None) -> SparseComplement:
    table.require(2, config.range_max)
    primes = table.primes(2, config.range_max)
    rho = prime_probabilities(config.c, primes)
    clamped = primes[(rho >= 1.0) & (primes > CLAMP_WARNING_FLOOR)]
    if len(clamped):
        logger.warning(
            f"rho clamped to 1 for {len(clamped)} primes above {CLAMP_WARNING_FLOOR} "
            f"(largest {int(clamped[-1])}) with c={config.c}"
        )
    kept = primes[_keep_mask(config.seed, primes, rho, threads)]
    return SparseComplement(
        elements=tuple(int(p) for p in kept),
        kind=KIND_A,
        config=asdict(config),
        seed=config.seed,
    )


def sample_B_block(config: SamplerConfigB, table: PrimeTable) -> SparseComplement:
    """Random subset of I = [M, 2M] ∩ P, each prime kept with ρ = K log N / (2L)."""
    lo, hi = config.interval
    table.require(lo, hi)
    band = table.primes(lo, hi)
    L = len(band)
    if L == 0:
        raise ValueError(f"interval [{lo}, {hi}] contains no primes")
    rho = config.K * math.log(config.N) / (2 * L)
    if rho > 1.0:
        logger.warning(f"block N={config.N}: rho={rho:.4f} clamped to 1 (L={L})")
        rho = 1.0
    kept = band[uniform_draws(config.seed, band) < rho]
    details = asdict(config)
    details.update({"M": config.M, "L": L, "rho": rho})
    return SparseComplement(
        elements=tuple(int(p) for p in kept),
        kind=KIND_B_BLOCK,
        config=details,
        seed=config.seed,
    )


# ---------------------
# Constants of the block construction
# ---------------------

def k_of_eps(eps: float, c0: float, cstar: float) -> float:
    """K(ε) = max{(10/(c0 C*)) log(16/ε²), 20}."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if c0 <= 0 or cstar <= 0:
        raise ValueError("c0 and cstar must be positive")
    return max(10.0 / (c0 * cstar) * math.log(16.0 / eps ** 2), 20.0)


def block_size_tail_bound(K: float, N: int) -> float:
    """Markov bound N^{K(e-2.9)/1.9} for P(|B| > K log N)."""
    return math.exp(K * (math.e - 2.9) / 1.9 * math.log(N))


def miss_probability_bound(c0: float, cstar: float, K: float) -> float:
    """exp(-0.1 c0 C* K), the chance a non-exceptional n misses P + B."""
    return math.exp(-0.1 * c0 * cstar * K)


# ---------------------
# Scale schedules
# ---------------------

def _loglog(x: float) -> float:
    return math.log(math.log(x))


def _sqrtlog(x: float) -> float:
    return math.sqrt(math.log(x))


W_PRESETS: Dict[str, Tuple[str, Callable[[float], float]]] = {
    "loglog": ("w(x) = log log x", _loglog),
    "sqrtlog": ("w(x) = sqrt(log x)", _sqrtlog),
    "constlog": ("w(x) = log x", math.log),
}


def w_preset(name: str) -> str:
    """Preset key for a key or its description string."""
    if name in W_PRESETS:
        return name
    for key, (description, _) in W_PRESETS.items():
        if name == description:
            return key
    raise ValueError(f"unknown growth preset {name!r}; choose from {sorted(W_PRESETS)}")


def w_values(name: str, xs: Sequence[float]) -> List[float]:
    fn = W_PRESETS[w_preset(name)][1]
    return [fn(x) for x in xs]


def next_scale(N: int, c1: float) -> int:
    """N_{i+1} = ⌊N_i^{1/c1}⌋ + 1."""
    return math.floor(_clean_power(N, 1.0 / c1)) + 1


def literal_next(N_prev: int, eps: float) -> float:
    """Lower bound e^{2 N_{i-1} / ε_i} of the literal schedule (recorded, never run)."""
    try:
        return math.exp(2.0 * N_prev / eps)
    except OverflowError:
        return math.inf


@dataclass
class ScaleSchedule:
    c0: float
    c1: float
    eps_schedule: List[float]
    N_sequence: List[int]
    K_values: List[float]
    w_description: str = "loglog"
    cstar: float = 0.5
    override: bool = False
    truncate: bool = True

    def __post_init__(self):
        if not 0 < self.c0 < self.c1 < 1:
            raise ValueError("schedule needs 0 < c0 < c1 < 1")
        if not self.N_sequence:
            raise ValueError("N_sequence must not be empty")
        if any(b <= a for a, b in zip(self.N_sequence, self.N_sequence[1:])):
            raise ValueError("N_sequence must be strictly increasing")
        if not len(self.eps_schedule) == len(self.K_values) == len(self.N_sequence):
            raise ValueError("eps_schedule, K_values and N_sequence must align")
        self.w_description = W_PRESETS[w_preset(self.w_description)][0]
        if not self.override:
            for a, b in zip(self.N_sequence, self.N_sequence[1:]):
                if b != next_scale(a, self.c1):
                    raise ValueError(
                        f"N={b} does not follow {a} under c1={self.c1}; "
                        "set override for a desk-scale schedule"
                    )

    @staticmethod
    def default_eps(length: int) -> List[float]:
        """ε_i = 1/(i+1) for blocks numbered from 1."""
        return [1.0 / (i + 2) for i in range(length)]

    @classmethod
    def from_c1(cls, N0: int, c1: float, length: int, c0: float = 0.5,
                cstar: float = 0.5, w_description: str = "loglog") -> "ScaleSchedule":
        sequence = [int(N0)]
        while len(sequence) < length:
            sequence.append(next_scale(sequence[-1], c1))
        eps = cls.default_eps(length)
        return cls(c0=c0, c1=c1, eps_schedule=eps, N_sequence=sequence,
                   K_values=[k_of_eps(e, c0, cstar) for e in eps],
                   w_description=w_description, cstar=cstar)

    @classmethod
    def desk(cls, N_sequence: Sequence[int], c0: float = 0.5, c1: float = 0.7,
             cstar: float = 0.5, K_values: Optional[Sequence[float]] = None,
             w_description: str = "loglog", truncate: bool = True) -> "ScaleSchedule":
        eps = cls.default_eps(len(N_sequence))
        if K_values is None:
            K_values = [k_of_eps(e, c0, cstar) for e in eps]
        return cls(c0=c0, c1=c1, eps_schedule=eps, N_sequence=[int(N) for N in N_sequence],
                   K_values=[float(K) for K in K_values], w_description=w_description,
                   cstar=cstar, override=True, truncate=truncate)

    @property
    def w_key(self) -> str:
        return w_preset(self.w_description)

    @property
    def counting_cap(self) -> float:
        """2K/(c0 c1 (1-c1)) with the largest block constant."""
        return chain_cap(max(self.K_values), self.c0, self.c1)

    def table_limit(self) -> int:
        """Largest integer the chains of this schedule draw from, at least the top scale."""
        N = self.N_sequence
        limit = max(N)
        for i, N_i in enumerate(N):
            top = N[i + 1] if i + 1 < len(N) else N_i
            last = chain_scales(N_i, top, self.c1)[-1]
            limit = max(limit, SamplerConfigB(N=last, K=1.0, c0=self.c0).interval[1])
        return limit

    def literal_bounds(self) -> List[float]:
        return [literal_next(a, e) for a, e in zip(self.N_sequence, self.eps_schedule[1:])]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["literal_bounds"] = [None if math.isinf(v) else v for v in self.literal_bounds()]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScaleSchedule":
        data = dict(data)
        data.pop("literal_bounds", None)
        if "K_values" not in data or "eps_schedule" not in data:
            return cls.desk(data["N_sequence"], c0=data.get("c0", 0.5),
                            c1=data.get("c1", 0.7), cstar=data.get("cstar", 0.5),
                            K_values=data.get("K_values"),
                            w_description=data.get("w_description", "loglog"),
                            truncate=data.get("truncate", True))
        return cls(**data)


def chain_scales(N0: int, N_top: int, c1: float) -> List[int]:
    """N_0, N_1 = ⌊N_0^{1/c1}⌋ + 1, ... up to the first scale reaching N_top."""
    scales = [int(N0)]
    while scales[-1] < N_top:
        scales.append(next_scale(scales[-1], c1))
    return scales


def sample_B_chain(N0: int, N_top: int, K: float, c0: float, c1: float, seed: int,
                   table: PrimeTable) -> SparseComplement:
    """
    Uncut union of single-scale blocks along N_{k+1} = ⌊N_k^{1/c1}⌋ + 1 with one
    constant K, from N0 until a scale reaches N_top.
    Covers x in [N0^c1, N_top] and keeps B(x) <= 2K/(c0 c1 (1-c1)) log x.
    """
    if N_top < N0:
        raise ValueError("N_top must be at least N0")
    members = set()
    links = []
    for k, N_k in enumerate(chain_scales(N0, N_top, c1)):
        link = SamplerConfigB(N=N_k, K=K, c0=c0, seed=derive_seed(seed, k))
        block = sample_B_block(link, table)
        members.update(block.elements)
        links.append({"N": N_k, "seed": link.seed, "interval": list(link.interval),
                      "size": len(block)})
    return SparseComplement(
        elements=tuple(sorted(members)),
        kind=KIND_B_CHAIN,
        config={"N0": int(N0), "N_top": int(N_top), "K": K, "c0": c0, "c1": c1,
                "cap": chain_cap(K, c0, c1), "links": links},
        seed=seed,
    )


def chain_cap(K: float, c0: float, c1: float) -> float:
    """2K/(c0 c1 (1-c1))."""
    return 2.0 * K / (c0 * c1 * (1.0 - c1))


def _cut_mode(schedule: ScaleSchedule, chain: SparseComplement, lower: int) -> str:
    if not schedule.truncate:
        return "none"
    if schedule.override and chain.elements and chain.elements[-1] < lower:
        return "upper"
    return "window"


def assemble_B(schedule: ScaleSchedule, seed: int, table: PrimeTable) -> SparseComplement:
    """
    ∪_i (B_i ∩ [N_{i-1}, N_{i+1}]), where B_i is the chain set for ε_i that starts
    at N_i and runs until it covers N_{i+1}.

    A desk schedule whose chain lies wholly below N_{i-1} is cut from above only.
    """
    N = schedule.N_sequence
    members = set()
    blocks = []
    for i, N_i in enumerate(N):
        chain_seed = derive_seed(seed, i)
        lower = N[i - 1] if i > 0 else 0
        upper = N[i + 1] if i + 1 < len(N) else None
        chain = sample_B_chain(N_i, upper or N_i, schedule.K_values[i], schedule.c0,
                               schedule.c1, chain_seed, table)
        cut = _cut_mode(schedule, chain, lower)
        if cut == "upper":
            logger.info(f"chain at N={N_i} lies below N_(i-1)={lower}; cutting from above only")
        kept = [b for b in chain.elements
                if cut == "none"
                or ((cut == "upper" or b >= lower) and (upper is None or b <= upper))]
        if chain.elements and not kept:
            logger.warning(f"chain at N={N_i} lies outside [{lower}, {upper}] and was truncated away")
        members.update(kept)
        blocks.append({
            "N": N_i, "K": schedule.K_values[i], "eps": schedule.eps_schedule[i],
            "seed": chain_seed, "scales": [link["N"] for link in chain.config["links"]],
            "size": len(chain), "kept": len(kept), "window": [lower, upper], "cut": cut,
        })
    return SparseComplement(
        elements=tuple(sorted(members)),
        kind=KIND_B_ASSEMBLED,
        config={"schedule": schedule.to_dict(), "blocks": blocks},
        seed=seed,
    )


# ---------------------
# Janson certificate
# ---------------------

@dataclass(frozen=True)
class JansonCertificate:
    expected: float
    delta: float
    eps: float
    bound: float

    @property
    def exponent(self) -> float:
        return (self.eps * self.expected) ** 2 / (2.0 * (self.expected + self.delta))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def janson_bound(expected: float, delta: float, eps: float) -> JansonCertificate:
    """P(Y <= (1-ε)E(Y)) <= exp(-(εE(Y))² / (2(E(Y)+Δ)))."""
    if not expected > 0:
        raise ValueError("expected value must be positive")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    exponent = (eps * expected) ** 2 / (2.0 * (expected + delta))
    return JansonCertificate(expected=expected, delta=delta, eps=eps, bound=math.exp(-exponent))


def janson_criterion(expected: float, delta: float, n: int) -> bool:
    """E²/(E+Δ) >= 100 log n, which forces P(Y* = 0) <= n^-2."""
    return expected ** 2 / (expected + delta) >= 100.0 * math.log(n)


def union_tail_bound(n0: int) -> float:
    """Σ_{n>=n0} 1/n² <= 1/(n0-1)."""
    if n0 < 2:
        raise ValueError("n0 must be at least 2")
    return 1.0 / (n0 - 1)


# ---------------------
# Exact E(Y_n*) and Δ
# ---------------------

def _ey_setup(n: int, config: SamplerConfigA, eps: float, table: PrimeTable):
    n = int(n)
    if n % 2 == 0:
        raise ValueError("n must be odd")
    if n > EXHAUSTIVE_LIMIT:
        raise RangeTooLargeError(f"n={n} is too large for exhaustive enumeration")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    table.require(2, max(n, 2))
    m0 = max(2, math.ceil(_clean_power(n, 1 - 2 * eps)))
    s0 = math.ceil(_clean_power(n, 1 - eps))
    flags = np.zeros(n + 1, dtype=bool)
    flags[2:] = table.window(2, n)
    rho = np.zeros(n + 1, dtype=np.float64)
    ks = np.arange(2, n + 1, dtype=np.float64)
    rho[2:] = np.minimum(1.0, config.c * np.log(ks) / ks)
    return n, m0, s0, flags, rho


def exact_EY_delta(n: int, config: SamplerConfigA, eps: float,
                   table: PrimeTable) -> Tuple[float, float]:
    """(E(Y_n*), Δ) over X = {(i,j): i,j >= M, i+j >= n^{1-ε}, i, j, n-i-j prime}."""
    n, m0, s0, flags, rho = _ey_setup(n, config, eps, table)
    expected = total = diag_corr = pair_corr = 0.0
    for i in range(m0, n - 1 - m0):
        if not flags[i]:
            continue
        j_lo = max(m0, s0 - i)
        j_hi = n - 2 - i
        if j_lo > j_hi:
            continue
        valid = flags[j_lo:j_hi + 1] & flags[n - i - j_hi:n - i - j_lo + 1][::-1]
        weights = rho[j_lo:j_hi + 1][valid]
        js = np.flatnonzero(valid) + j_lo
        on_diag = bool(np.any(js == i))
        off = weights[js != i]
        s_i = float(off.sum())
        q_i = float((off * off).sum())
        r_i = rho[i]
        expected += r_i * s_i + (r_i if on_diag else 0.0)
        f_i = 2.0 * s_i + (1.0 if on_diag else 0.0)
        total += r_i * f_i * f_i
        diag_corr += r_i if on_diag else 0.0
        pair_corr += 2.0 * r_i * r_i * s_i + 2.0 * r_i * q_i - r_i * s_i
    return float(expected), float(total - diag_corr - pair_corr)


def enumerate_EY_delta(n: int, config: SamplerConfigA, eps: float,
                       table: PrimeTable) -> Tuple[float, float]:
    """Brute-force (E(Y_n*), Δ) by listing X and every overlapping pair."""
    n, m0, s0, flags, rho = _ey_setup(n, config, eps, table)
    X = [(i, j)
         for i in range(m0, n)
         if flags[i]
         for j in range(m0, n - i - 1)
         if flags[j] and i + j >= s0 and flags[n - i - j]]

    def weight(indices):
        w = 1.0
        for k in indices:
            w *= rho[k]
        return w

    expected = math.fsum(weight({i, j}) for i, j in X)
    by_index: Dict[int, List[int]] = {}
    for a, (i, j) in enumerate(X):
        for k in {i, j}:
            by_index.setdefault(k, []).append(a)
    terms = []
    for a, (i, j) in enumerate(X):
        partners = set()
        for k in {i, j}:
            partners.update(by_index[k])
        partners.discard(a)
        for b in partners:
            terms.append(weight({i, j} | set(X[b])))
    return expected, math.fsum(terms)


def ey_delta_sweep(ns: Sequence[int], config: SamplerConfigA, eps: float,
                   table: PrimeTable) -> Dict[str, Any]:
    """E and Δ over several n with the slope of E against log n."""
    rows = []
    for n in ns:
        expected, delta = exact_EY_delta(n, config, eps, table)
        rows.append({"n": int(n), "expected": expected, "delta": delta,
                     "ratio": delta / expected if expected else None})
    slope = None
    if len(rows) >= 2:
        slope = float(np.polyfit([math.log(r["n"]) for r in rows],
                                 [r["expected"] for r in rows], 1)[0])
    return {"c": config.c, "eps": eps, "rows": rows, "slope": slope}
