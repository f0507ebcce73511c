import math

import numpy as np
import pytest

from randcomplement import (KIND_A, KIND_B_BLOCK, SamplerConfigA, SamplerConfigB,
                            ScaleSchedule, SparseComplement, assemble_B, sample_A,
                            sample_B_block, sample_B_chain)
from verify import (counting_function_profile, covered_mask, density_grid, grid_points,
                    grid_success_bound, representation_counts, verify_thm1,
                    verify_thm2_density, assembly_annotations)


def brute_Y(elements, n, is_prime):
    return sum(1 for a1 in elements for a2 in elements
               if n - a1 - a2 >= 2 and is_prime(n - a1 - a2))


def make_set(elements, kind=KIND_A):
    return SparseComplement(elements=tuple(sorted(elements)), kind=kind)


# ---------------------
# A + A + P
# ---------------------

def test_small_set_covers_window(small_table):
    report = verify_thm1(make_set({3, 5}), 11, 19, small_table)
    assert report.tested == 5
    assert report.covered == 5
    assert report.density == 1.0
    assert report.failures == []
    assert report.threshold_n0 == 11


def test_empty_set_covers_nothing(small_table):
    report = verify_thm1(make_set(set()), 11, 99, small_table)
    assert report.covered == 0
    assert report.failure_count == report.tested
    assert report.threshold_n0 == 101


@pytest.mark.parametrize("method", ["pairs", "fft"])
def test_counts_match_brute_force(method, small_table, is_prime_oracle):
    A = make_set({2, 3, 7, 13, 31, 97, 101})
    counts = representation_counts(A, 50, 400, small_table, method=method)
    for n in range(50, 401):
        assert counts[n - 50] == brute_Y(A.elements, n, is_prime_oracle)


def test_methods_agree_on_sampled_set(small_table):
    A = sample_A(SamplerConfigA(c=6, range_max=20_000, seed=2), small_table)
    pairs = representation_counts(A, 1001, 20_000, small_table, method="pairs", threads=3)
    fft = representation_counts(A, 1001, 20_000, small_table, method="fft")
    assert np.array_equal(pairs, fft)


def test_failures_and_threshold(small_table, is_prime_oracle):
    A = make_set({3, 5, 7})
    report = verify_thm1(A, 7, 301, small_table)
    failed = [n for n in range(7, 302, 2) if brute_Y(A.elements, n, is_prime_oracle) == 0]
    assert report.failures == failed
    assert report.threshold_n0 == (failed[-1] + 2 if failed else 7)


def test_even_coverage_reported_when_two_is_in_A(small_table):
    report = verify_thm1(make_set({2, 3}), 11, 40, small_table)
    assert report.even_tested == 15
    assert report.to_dict()["even_covered"] == report.even_covered


def test_shifted_variant_checks_every_n(small_table):
    report = verify_thm1(make_set({3, 5, 7, 11}), 20, 60, small_table, shifted=True)
    assert report.parity == "all"
    assert report.tested == 41


def test_rejects_non_prime_elements(small_table):
    with pytest.raises(Exception):
        verify_thm1(make_set({3, 9}), 11, 99, small_table)


@pytest.mark.slow
def test_all_primes_cover_odd_range():
    from sieve import sieve_range
    table = sieve_range(0, 10 ** 5)
    A = make_set(table.primes(2, 10 ** 5).tolist())
    report = verify_thm1(A, 9, 10 ** 5, table)
    assert report.covered == report.tested


# ---------------------
# P + B
# ---------------------

def test_density_of_single_element(small_table):
    assert verify_thm2_density(make_set({3}, KIND_B_BLOCK), 20, small_table) == 0.35
    mask = covered_mask(make_set({3}, KIND_B_BLOCK), 20, small_table)
    assert np.flatnonzero(mask).tolist() == [5, 6, 8, 10, 14, 16, 20]


def test_density_of_empty_set(small_table):
    assert verify_thm2_density(make_set(set(), KIND_B_BLOCK), 1000, small_table) == 0.0


def test_density_rejects_bad_parity(small_table):
    with pytest.raises(ValueError):
        verify_thm2_density(make_set({3}), 20, small_table, parity="odd")


@pytest.mark.slow
def test_full_band_density(table_1e6):
    band = make_set(table_1e6.primes(1000, 2000).tolist(), KIND_B_BLOCK)
    assert verify_thm2_density(band, 10 ** 6, table_1e6) >= 0.49
    assert verify_thm2_density(band, 10 ** 6, table_1e6, parity="even") >= 0.98


def test_grid_points():
    points = grid_points(10 ** 6, 0.2, 0.7)
    assert len(points) - 1 == 44
    assert points[0] == 10 ** 6
    assert points[-1] == 15849
    assert all(b < a for a, b in zip(points, points[1:]))
    assert grid_success_bound(0.2, 0.7, 10 ** 6) == pytest.approx(1.1 ** -45)


def test_density_grid_for_full_band(table_1e6):
    band = make_set(table_1e6.primes(1000, 2000).tolist(), KIND_B_BLOCK)
    grid = density_grid(band, 10 ** 6, 0.2, 0.7, table_1e6)
    assert grid.J == 44
    assert grid.min_density >= 0.8
    assert grid.flagged == []
    assert grid.to_dict()["J"] == 44


def test_counting_function_profile(table_1e6):
    empty = counting_function_profile(make_set(set()), [10, 100])
    assert [row["count"] for row in empty] == [0, 0]

    grid = [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]
    for seed in range(1, 6):
        A = sample_A(SamplerConfigA(c=30, range_max=10 ** 6, seed=seed), table_1e6)
        ratios = [row["ratio"] for row in counting_function_profile(A, grid)]
        assert max(ratios) / min(ratios) <= 3


def test_block_profile_reports_cap(small_table):
    block = sample_B_block(SamplerConfigB(N=10 ** 8, K=10, seed=3), small_table)
    row = counting_function_profile(block, [20_000])[0]
    assert row["block_cap"] == pytest.approx(10 * math.log(10 ** 8))
    assert row["within_cap"]


def test_assembly_annotations(table_1e6):
    B = assemble_B(ScaleSchedule.desk([10 ** 4, 10 ** 6], K_values=[10, 10], truncate=False),
                   3, table_1e6)
    notes = assembly_annotations(B, table_1e6)
    assert len(notes) == 1
    assert notes[0]["x"] == 10 ** 6
    assert notes[0]["truncation_loss"] == 10 ** 4 * 78498
    assert not notes[0]["within_allowance"]
    assert assembly_annotations(make_set({3}), table_1e6) == []


def test_assembled_profile_tabulates_growth(table_1e6):
    schedule = ScaleSchedule.desk([10 ** 4, 10 ** 6], K_values=[10, 10])
    B = assemble_B(schedule, 3, table_1e6)
    rows = counting_function_profile(B, [10 ** 4, 10 ** 5, 10 ** 6])
    for row in rows:
        assert row["cap"] == pytest.approx(schedule.counting_cap)
        assert row["within_cap"]
        assert row["w"] == pytest.approx(math.log(math.log(row["x"])))
        assert row["w_ratio"] == pytest.approx(row["count"] / (row["w"] * math.log(row["x"])))
    assert counting_function_profile(B, [2])[0]["w"] is None


def test_chain_profile_reports_cap(table_1e6):
    chain = sample_B_chain(10 ** 4, 10 ** 6, 10, 0.5, 0.7, 4, table_1e6)
    rows = counting_function_profile(chain, [10 ** 4, 10 ** 6])
    assert all(row["within_cap"] for row in rows)
    assert "w" not in rows[0]


def test_density_monotone_in_B(table_1e6):
    band = table_1e6.primes(1000, 2000).tolist()
    smaller = make_set(band[::3], KIND_B_BLOCK)
    larger = make_set(band[::3] + band[1::3], KIND_B_BLOCK)
    for x in (10 ** 4, 10 ** 5, 10 ** 6):
        for parity in ("all", "even"):
            assert verify_thm2_density(smaller, x, table_1e6, parity) <= \
                verify_thm2_density(larger, x, table_1e6, parity)


def test_density_grid_flags_low_points(table_1e6):
    eps = 0.2
    sparse = make_set([1009, 1013, 1019, 1021, 1031], KIND_B_BLOCK)
    grid = density_grid(sparse, 10 ** 6, eps, 0.7, table_1e6)
    assert grid.flagged
    assert grid.flagged == [j for j, d in enumerate(grid.densities) if d <= 1 - eps / 2]
    band = make_set(table_1e6.primes(1000, 2000).tolist(), KIND_B_BLOCK)
    assert density_grid(band, 10 ** 6, eps, 0.7, table_1e6).flagged == []
