import itertools
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from rskgue.errors import InputError, ResourceError
from rskgue.shapes import Partition, center, enumerate_partitions, f_hook
from rskgue.walks import (
    DifferenceOperator,
    apply_difference,
    corollary_residual,
    f_reflection,
    gaussian_density_q,
    path_count_m,
    permutation_sign,
    residual_report_csv,
    staircase,
)


def test_path_count_examples():
    assert path_count_m((5, 0, 0), 5) == 1
    assert path_count_m((1, 1), 2) == 2
    assert path_count_m((2, 1, 1), 4) == 12
    assert path_count_m((2, -1, 1), 2) == 0
    assert path_count_m((1, 1), 3) == 0


def test_path_count_matches_walk_enumeration():
    hist = {}
    for steps in itertools.product(range(3), repeat=4):
        end = tuple(steps.count(a) for a in range(3))
        hist[end] = hist.get(end, 0) + 1
    for end, n in hist.items():
        assert path_count_m(end, 4) == n


@given(st.integers(1, 4), st.integers(0, 8))
def test_path_counts_sum_to_k_power(k, N):
    total = sum(path_count_m(p, N) for p in itertools.product(range(N + 1), repeat=k))
    assert total == k**N


def test_permutation_sign():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert permutation_sign((1, 2, 0)) == 1


def test_reflection_examples():
    assert f_reflection((6,), 1) == 1
    assert f_reflection((2, 1), 2) == 2
    assert f_reflection((2, 1, 1), 3) == 3


def test_reflection_equals_hook_up_to_40():
    for N in range(41):
        for lam in enumerate_partitions(N, 4):
            assert f_reflection(lam, 4) == f_hook(lam)


def test_reflection_operator_factors_over_positive_roots():
    for k in (1, 2, 3, 4):
        assert DifferenceOperator.reflection(k) == DifferenceOperator.root_product(k)


def test_difference_of_constant_is_zero():
    D = DifferenceOperator.reflection(3)
    assert apply_difference(D, lambda v: 7, (4, 2, 0)) == 0


def test_difference_of_path_counts_is_tableau_count():
    D = DifferenceOperator.reflection(3)
    for lam in enumerate_partitions(9, 3):
        assert apply_difference(D, lambda v: path_count_m(v, 9), lam.padded(3)) == f_hook(lam)


@pytest.mark.parametrize("k", [2, 3])
def test_difference_annihilates_low_degree_monomials(k):
    xs = sympy.symbols(f"x0:{k}")
    D = DifferenceOperator.reflection(k)
    top = k * (k - 1) // 2
    for degree in range(top):
        for exps in itertools.product(range(degree + 1), repeat=k):
            if sum(exps) != degree:
                continue
            f = lambda v: sympy.Mul(*[vi**e for vi, e in zip(v, exps)])
            assert sympy.expand(apply_difference(D, f, xs)) == 0
    # the top degree survives: D applied to the Vandermonde is a nonzero constant
    vdm = lambda v: sympy.Mul(*[v[a] - v[b] for a in range(k) for b in range(a + 1, k)])
    assert sympy.expand(apply_difference(D, vdm, xs)) != 0


def test_staircase():
    assert staircase(4) == (3, 2, 1, 0)


def test_gaussian_mode_and_ratio():
    k, N = 3, 60
    q0 = gaussian_density_q((0, 0, 0), k, N)
    for lam in enumerate_partitions(N, k):
        c = center(lam, k, N)
        q = gaussian_density_q(c, k, N)
        assert q <= q0
        assert q / q0 == pytest.approx(math.exp(-k * float(c.norm2()) / (2 * N)), rel=1e-12)


def test_gaussian_sums_to_one_on_lattice():
    k, N = 2, 100
    # endpoints (a, N - a) for all integers a, including those outside [0, N]
    total = sum(gaussian_density_q((a - N / 2, N / 2 - a), k, N) for a in range(-200, 301))
    assert total == pytest.approx(1.0, abs=1e-6)


def test_gaussian_rejects_off_hyperplane():
    with pytest.raises(InputError):
        gaussian_density_q((1.0, 1.0), 2, 10)


def test_gaussian_approximates_path_counts():
    k, N = 3, 300
    worst = 0.0
    for a in range(95, 106):
        for b in range(95, 106):
            p = (a, b, N - a - b)
            exact = path_count_m(p, N) / k**N
            approx = gaussian_density_q(tuple(x - N / k for x in p), k, N)
            worst = max(worst, abs(exact / approx - 1))
    assert worst < 0.02


def test_residual_k1_is_exact():
    r = corollary_residual(1, 10)
    assert r.scaled_sup_residual == 0.0


def test_residual_fitted_constant_converges_k2():
    small, large = corollary_residual(2, 100), corollary_residual(2, 400)
    assert abs(small.fitted_C / large.fitted_C - 1) < 0.05
    # dimensionless constant tends to the GUE chamber normalizer 2 / sqrt(pi)
    assert large.fitted_C == pytest.approx(2 / math.sqrt(math.pi), rel=0.01)


def test_residual_shifted_residual_decays():
    small, large = corollary_residual(2, 100), corollary_residual(2, 400)
    assert large.shifted_scaled_sup_residual < small.shifted_scaled_sup_residual


def test_residual_resource_cap():
    with pytest.raises(ResourceError):
        corollary_residual(4, 400, max_shapes=1000)


def test_residual_csv_columns():
    text = residual_report_csv([corollary_residual(2, 20)])
    assert text.splitlines()[0] == "N,k,fitted_C,scaled_sup_residual"
    assert text.splitlines()[1].startswith("20,2,")
