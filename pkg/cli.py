#!/usr/bin/env python3
"""
Command-line front end: builds tables and sets, runs the verifications and
Monte Carlo experiments, and persists JSON/CSV artifacts.

Logs go to standard error; only data is written to standard output.
Exit codes: 0 success, 2 usage/precondition, 3 resource ceiling, 4 invariant.
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

import config
from errors import EXIT_OK, exit_status_for
from file_utils import load_artifact, write_artifact, write_csv
from goldbach import IntervalPairQuery, exceptional_set
from numtheory import (SingularSeriesParams, is_squarefree, omega, phi,
                       singular_series, tau)
from randcomplement import (SamplerConfigA, SamplerConfigB, ScaleSchedule,
                            SparseComplement, assemble_B, chain_scales, exact_EY_delta,
                            expected_size_A, janson_bound, janson_criterion,
                            sample_A, sample_B_block, sample_B_chain)
from sieve import count_primes, primes_in_ap, sieve_range
from verify import (assembly_annotations, counting_function_profile,
                    density_grid, verify_thm1, verify_thm2_density)

logger = logging.getLogger(__name__)

MONTE_CARLO_COMMANDS = {"tune-c", "tune-k"}
ARITH_FUNCTIONS = {"tau": tau, "phi": phi, "omega": omega, "squarefree": is_squarefree}

# Smallest odd n with a representation a1 + a2 + p
FIRST_ODD = 7


@dataclass
class ExperimentConfig:
    """Parameters of one invocation, embedded in every artifact it writes."""
    command: str
    params: Dict[str, Any]
    seeds: List[int] = field(default_factory=list)
    threads: int = 1
    memory_ceiling: int = config.MEMORY_CEILING

    def __post_init__(self):
        if self.command in MONTE_CARLO_COMMANDS and not self.seeds:
            raise ValueError(f"{self.command} needs a non-empty seed list")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "ExperimentConfig":
        params = {k: v for k, v in vars(args).items()
                  if k not in ("command", "threads", "log_level", "handler")}
        seeds: List[int] = []
        if getattr(args, "seeds", None) is not None:
            seeds = list(range(1, args.seeds + 1))
        elif getattr(args, "seed", None) is not None:
            seeds = [args.seed]
        return cls(command=args.command, params=params, seeds=seeds,
                   threads=config.resolve_threads(args.threads))

    def provenance(self) -> Dict[str, Any]:
        return {
            "version": config.VERSION,
            "command": self.command,
            "config": self.params,
            "seeds": self.seeds,
            "memory_ceiling": self.memory_ceiling,
        }


@dataclass
class TuneResult:
    value: Optional[float]
    attained: bool
    target: float
    history: List[Dict[str, Any]]
    parameter: str = "c"

    def to_dict(self) -> Dict[str, Any]:
        return {self.parameter: self.value, "parameter": self.parameter,
                "attained": self.attained, "target": self.target, "history": self.history}


def _emit(data: Dict[str, Any], experiment: ExperimentConfig, out: Optional[str]):
    payload = dict(data)
    payload["provenance"] = experiment.provenance()
    write_artifact(payload, out)


def _load_set(path: str) -> SparseComplement:
    data, error = load_artifact(path)
    if error:
        raise ValueError(f"cannot read set {path}: {error}")
    return SparseComplement.from_dict(data)


def _profile_grid(x: int) -> List[int]:
    return sorted({10 ** k for k in range(2, int(math.log10(x)) + 1)} | {x})


# ---------------------
# Monte Carlo parameter searches
# ---------------------

def _smallest_passing(success: Callable[[float], float], parameter: str, target: float,
                      low: float, high: float, resolution: float,
                      history: List[Dict[str, Any]]) -> TuneResult:
    """Smallest value (doubling from low, then bisection) whose success fraction reaches target."""
    value = low
    while success(value) < target:
        value *= 2
        if value > high:
            if success(high) >= target:
                value = high
                break
            logger.warning(f"target {target} not reached below {parameter}={high}")
            return TuneResult(value=None, attained=False, target=target, history=history,
                              parameter=parameter)
    if value == low:
        return TuneResult(value=value, attained=True, target=target, history=history,
                          parameter=parameter)

    lo, hi = max(value / 2, low), value
    while hi - lo > resolution:
        mid = (lo + hi) / 2
        if success(mid) >= target:
            hi = mid
        else:
            lo = mid
    return TuneResult(value=hi, attained=True, target=target, history=history,
                      parameter=parameter)


def _cached_success(parameter: str, trial: Callable[[float, int], Dict[str, Any]],
                    seeds: List[int], history: List[Dict[str, Any]]) -> Callable[[float], float]:
    cache: Dict[float, float] = {}

    def success(value: float) -> float:
        if value not in cache:
            runs = [trial(value, s) for s in seeds]
            cache[value] = sum(r["success"] for r in runs) / len(runs)
            history.append({parameter: value, "success": cache[value], "runs": runs})
            logger.info(f"{parameter}={value:g}: success {cache[value]:.2f}")
        return cache[value]

    return success


def seed_success(c: float, seed: int, max_n: int, table, n0_max: int,
                 threads: Optional[int] = None) -> Dict[str, Any]:
    A = sample_A(SamplerConfigA(c=c, range_max=max_n, seed=seed), table, threads)
    report = verify_thm1(A, FIRST_ODD, max_n, table, threads=threads)
    return {
        "seed": seed,
        "size": len(A),
        "size_ratio": len(A) / math.log(max_n),
        "threshold_n0": report.threshold_n0,
        "success": report.threshold_n0 <= n0_max,
    }


def tune_c(max_n: int, seeds: List[int], target: float, table=None,
           n0_max: int = 10_000, c_min: float = 1.0, c_max: float = 512.0,
           resolution: float = 0.25, threads: Optional[int] = None) -> TuneResult:
    """Smallest c whose share of seeds covers every odd n in [n0, max_n] with n0 <= n0_max."""
    if not seeds:
        raise ValueError("seeds must not be empty")
    if table is None:
        table = sieve_range(0, max_n, threads=threads)
    history: List[Dict[str, Any]] = []
    success = _cached_success(
        "c", lambda c, s: seed_success(c, s, max_n, table, n0_max, threads), seeds, history)
    return _smallest_passing(success, "c", target, c_min, c_max, resolution, history)


def block_success(K: float, seed: int, N: int, c0: float, c1: float, eps: float,
                  table) -> Dict[str, Any]:
    block = sample_B_block(SamplerConfigB(N=N, K=K, c0=c0, seed=seed), table)
    grid = density_grid(block, N, eps, c1, table)
    size_cap = K * math.log(N)
    return {
        "seed": seed,
        "size": len(block),
        "size_cap": size_cap,
        "min_density": grid.min_density,
        "success": len(block) <= size_cap and grid.min_density >= 1.0 - eps,
    }


def tune_k(N: int, seeds: List[int], target: float, eps: float = 0.1, c0: float = 0.5,
           c1: float = 0.7, table=None, K_min: float = 1.0, K_max: float = 200.0,
           resolution: float = 0.5) -> TuneResult:
    """Smallest K whose share of seeds gives |B| <= K log N and even density >= 1-ε on the grid."""
    if not seeds:
        raise ValueError("seeds must not be empty")
    if table is None:
        table = sieve_range(0, N)
    history: List[Dict[str, Any]] = []
    success = _cached_success(
        "K", lambda K, s: block_success(K, s, N, c0, c1, eps, table), seeds, history)
    return _smallest_passing(success, "K", target, K_min, K_max, resolution, history)


# ---------------------
# Subcommand handlers
# ---------------------

def cmd_sieve(args, experiment):
    table = sieve_range(args.lo, args.hi, threads=experiment.threads)
    at = args.count_at if args.count_at is not None else args.hi
    data = {"lo": args.lo, "hi": args.hi, "count_at": at, "count": count_primes(table, at)}
    if args.ap_d is not None:
        data["ap"] = {"d": args.ap_d, "r": args.ap_r,
                      "count": primes_in_ap(table, at, args.ap_d, args.ap_r)}
    _emit(data, experiment, args.out)


def cmd_singular_series(args, experiment):
    params = SingularSeriesParams(truncation_bound=args.truncation, tolerance=args.tol)
    value = singular_series(args.n, params)
    if args.out:
        _emit({"n": args.n, "value": value}, experiment, args.out)
    print(repr(value))


def cmd_arith(args, experiment):
    value = ARITH_FUNCTIONS[args.fn](args.n)
    if args.out:
        _emit({"fn": args.fn, "n": args.n, "value": value}, experiment, args.out)
    print(value)


def cmd_goldbach_stats(args, experiment):
    y = args.y if args.y is not None else args.x // 2
    query = IntervalPairQuery(x=args.x, M=args.M, y=y, cstar=args.cstar, c0=args.c0)
    table = sieve_range(0, args.x + args.M, threads=experiment.threads)
    report = exceptional_set(query, table, threads=experiment.threads)
    if args.csv:
        write_csv(["n", "count"], sorted(report.counts.items()), args.csv)
    _emit(report.to_dict(), experiment, args.out)


def cmd_build_a(args, experiment):
    table = sieve_range(0, args.max, threads=experiment.threads)
    A = sample_A(SamplerConfigA(c=args.c, range_max=args.max, seed=args.seed),
                 table, experiment.threads)
    data = A.to_dict()
    data["expected_size"] = expected_size_A(args.c, args.max, table)
    if args.sweep:
        sizes = [len(sample_A(SamplerConfigA(c=args.c, range_max=args.max, seed=args.seed + k),
                              table, experiment.threads)) for k in range(args.sweep)]
        data["sweep"] = {
            "seeds": [args.seed + k for k in range(args.sweep)],
            "sizes": sizes,
            "mean": float(np.mean(sizes)),
            "stderr": float(np.std(sizes, ddof=1) / math.sqrt(len(sizes))) if len(sizes) > 1 else None,
        }
    _emit(data, experiment, args.out)


def cmd_build_b(args, experiment):
    cfg = SamplerConfigB(N=args.N, K=args.K, c0=args.c0, seed=args.seed)
    if args.chain_top is None:
        table = sieve_range(0, cfg.interval[1], threads=experiment.threads)
        block = sample_B_block(cfg, table)
    else:
        last = chain_scales(args.N, args.chain_top, args.c1)[-1]
        hi = SamplerConfigB(N=last, K=args.K, c0=args.c0).interval[1]
        table = sieve_range(0, hi, threads=experiment.threads)
        block = sample_B_chain(args.N, args.chain_top, args.K, args.c0, args.c1, args.seed, table)
    _emit(block.to_dict(), experiment, args.out)


def cmd_assemble_b(args, experiment):
    data, error = load_artifact(args.schedule)
    if error:
        raise ValueError(f"cannot read schedule {args.schedule}: {error}")
    schedule = ScaleSchedule.from_dict(data)
    table = sieve_range(0, schedule.table_limit(), threads=experiment.threads)
    B = assemble_B(schedule, args.seed, table)
    payload = B.to_dict()
    payload["profile"] = counting_function_profile(B, _profile_grid(max(schedule.N_sequence)))
    payload["annotations"] = assembly_annotations(B, table)
    _emit(payload, experiment, args.out)


def cmd_verify_a(args, experiment):
    A = _load_set(args.set)
    table = sieve_range(0, args.hi, threads=experiment.threads)
    report = verify_thm1(A, args.lo, args.hi, table, method=args.method,
                         threads=experiment.threads, shifted=args.shifted)
    if args.csv:
        step = 1 if report.parity == "all" else 2
        start = args.lo + (1 - args.lo % 2 if report.parity == "odd" else 0)
        rows = [(n, int(report.counts[n - args.lo])) for n in range(start, args.hi + 1, step)]
        write_csv(["n", "count"], rows, args.csv)
    data = report.to_dict()
    data["set"] = {"kind": A.kind, "seed": A.seed, "size": len(A)}
    _emit(data, experiment, args.out)


def cmd_verify_b(args, experiment):
    B = _load_set(args.set)
    table = sieve_range(0, args.x, threads=experiment.threads)
    data: Dict[str, Any] = {
        "x": args.x,
        "density": verify_thm2_density(B, args.x, table),
        "even_density": verify_thm2_density(B, args.x, table, parity="even"),
        "size": len(B),
    }
    data["profile"] = counting_function_profile(B, _profile_grid(args.x))
    if args.grid:
        grid = density_grid(B, args.x, args.eps, args.c1, table)
        data["grid"] = grid.to_dict()
        if args.csv:
            write_csv(["x", "density"], zip(grid.x_values, grid.densities), args.csv)
    data["annotations"] = assembly_annotations(B, table)
    _emit(data, experiment, args.out)


def cmd_janson(args, experiment):
    certificate = janson_bound(args.E, args.delta, args.eps)
    if args.out:
        _emit(certificate.to_dict(), experiment, args.out)
    print(repr(certificate.bound))


def cmd_eyd(args, experiment):
    table = sieve_range(0, args.n, threads=experiment.threads)
    cfg = SamplerConfigA(c=args.c, range_max=max(args.n, 3), seed=0)
    expected, delta = exact_EY_delta(args.n, cfg, args.eps, table)
    data: Dict[str, Any] = {"n": args.n, "c": args.c, "eps": args.eps,
                            "expected": expected, "delta": delta}
    if expected > 0:
        data["certificate"] = janson_bound(expected, delta, 0.5).to_dict()
        data["criterion_met"] = janson_criterion(expected, delta, args.n)
    _emit(data, experiment, args.out)


def cmd_tune_c(args, experiment):
    result = tune_c(args.max, experiment.seeds, args.target_success, n0_max=args.n0_max,
                    c_min=args.c_min, c_max=args.c_max, resolution=args.resolution,
                    threads=experiment.threads)
    _emit(result.to_dict(), experiment, args.out)


def cmd_tune_k(args, experiment):
    table = sieve_range(0, args.N, threads=experiment.threads)
    result = tune_k(args.N, experiment.seeds, args.target_success, eps=args.eps, c0=args.c0,
                    c1=args.c1, table=table, K_min=args.K_min, K_max=args.K_max,
                    resolution=args.resolution)
    _emit(result.to_dict(), experiment, args.out)


SUMMARY_KEYS = ("kind", "seed", "covered", "tested", "density", "even_density",
                "threshold_n0", "exceptional_count", "ratio", "empirical_constant",
                "bound", "expected", "delta", "c", "K", "attained")


def cmd_report(args, experiment):
    rows = []
    for path in args.inputs:
        data, error = load_artifact(path)
        if error:
            raise ValueError(f"cannot read artifact {path}: {error}")
        row = {"file": path, "command": data.get("provenance", {}).get("command")}
        row.update({k: data[k] for k in SUMMARY_KEYS if k in data})
        if "elements" in data:
            row["size"] = len(data["elements"])
        rows.append(row)
    if args.csv:
        header = ["file", "command"] + [k for k in SUMMARY_KEYS + ("size",)
                                        if any(k in r for r in rows)]
        write_csv(header, [[r.get(k) for k in header] for r in rows], args.csv)
    _emit({"artifacts": rows}, experiment, args.out)


# ---------------------
# Parser
# ---------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primecomp",
        description="Sparse prime complements: construction and desk-scale verification.")
    parser.add_argument("--log-level", default=None, help="override PRIMES_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None, help="JSON artifact path (stdout if omitted)")
        p.set_defaults(handler=handler)
        return p

    p = add("sieve", cmd_sieve, "prime table statistics")
    p.add_argument("--lo", type=int, required=True)
    p.add_argument("--hi", type=int, required=True)
    p.add_argument("--count-at", type=int, default=None)
    p.add_argument("--ap-d", type=int, default=None)
    p.add_argument("--ap-r", type=int, default=0)

    p = add("singular-series", cmd_singular_series, "evaluate C(n)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--truncation", type=int, default=SingularSeriesParams().truncation_bound)

    p = add("arith", cmd_arith, "arithmetic functions")
    p.add_argument("--fn", choices=sorted(ARITH_FUNCTIONS), required=True)
    p.add_argument("--n", type=int, required=True)

    p = add("goldbach-stats", cmd_goldbach_stats, "short-interval exceptional set")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--y", type=int, default=None)
    p.add_argument("--cstar", type=float, default=0.5)
    p.add_argument("--c0", type=float, default=config.DEFAULT_C0)
    p.add_argument("--csv", default=None)

    p = add("build-a", cmd_build_a, "sample the order-2 complement A")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--sweep", type=int, default=0, help="also report sizes over this many seeds")

    p = add("build-b", cmd_build_b, "sample one block B at scale N")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--c0", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--chain-top", type=int, default=None,
                   help="union of blocks along N -> N^(1/c1) until a scale reaches this value")
    p.add_argument("--c1", type=float, default=0.7)

    p = add("assemble-b", cmd_assemble_b, "assemble B over a scale schedule")
    p.add_argument("--schedule", required=True)
    p.add_argument("--seed", type=int, default=1)

    p = add("verify-a", cmd_verify_a, "coverage of odd n by A + A + P")
    p.add_argument("--set", required=True)
    p.add_argument("--lo", type=int, required=True)
    p.add_argument("--hi", type=int, required=True)
    p.add_argument("--method", choices=("auto", "pairs", "fft"), default="auto")
    p.add_argument("--shifted", action="store_true", help="check A ∪ (A+1) on every n")
    p.add_argument("--csv", default=None)

    p = add("verify-b", cmd_verify_b, "density of P + B")
    p.add_argument("--set", required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--c1", type=float, default=0.7)
    p.add_argument("--grid", action="store_true")
    p.add_argument("--csv", default=None)

    p = add("janson", cmd_janson, "Janson lower-tail bound")
    p.add_argument("--E", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)

    p = add("eyd", cmd_eyd, "exact E(Y_n*) and Δ")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)

    p = add("tune-c", cmd_tune_c, "search the smallest working c")
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--target-success", type=float, default=0.5)
    p.add_argument("--n0-max", type=int, default=10_000)
    p.add_argument("--c-min", type=float, default=1.0)
    p.add_argument("--c-max", type=float, default=512.0)
    p.add_argument("--resolution", type=float, default=0.25)

    p = add("tune-k", cmd_tune_k, "search the smallest working block constant K")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--target-success", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--c0", type=float, default=0.5)
    p.add_argument("--c1", type=float, default=0.7)
    p.add_argument("--K-min", type=float, default=1.0)
    p.add_argument("--K-max", type=float, default=200.0)
    p.add_argument("--resolution", type=float, default=0.5)

    p = add("report", cmd_report, "summarise artifacts")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--csv", default=None)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    config.configure_logging(args.log_level)
    try:
        experiment = ExperimentConfig.from_args(args)
        args.handler(args, experiment)
    except Exception as e:
        status = exit_status_for(e)
        if status == 4 and not isinstance(e, RuntimeError):
            logger.exception("unexpected failure")
        sys.stderr.write(json.dumps({
            "status": status, "error": type(e).__name__, "message": str(e),
        }) + "\n")
        return status
    return EXIT_OK


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
