import numpy as np
from nose.tools import eq_, ok_, raises

from kronprec.exceptions import ShapeError
from kronprec.lpblas import (lp_dot, lp_hadamard, lp_matmul, lp_matvec,
                             pairwise_sum, recursive_sum)
from kronprec.precision import FP16, FP64, counting_rounds, round_call_count

from oracles import fp16


def _scalar_pairwise(values):
    # One value at a time through struct; carries an odd tail unrounded.
    values = list(values)
    while len(values) > 1:
        paired = [fp16(values[i] + values[i + 1])
                  for i in range(0, len(values) - 1, 2)]
        if len(values) % 2:
            paired.append(values[-1])
        values = paired
    return values[0]


def _fp16_vector(n, seed):
    return np.array([fp16(v) for v in
                     np.random.default_rng(seed).uniform(-1, 1, size=n)])


def test_pairwise_beats_recursive_on_many_small_addends():
    """
    Pairwise summation keeps addends a running sum would absorb
    """
    z = np.array([2048.0] + [1.0] * 7)
    eq_(pairwise_sum(z, FP16), 2054.0)
    eq_(recursive_sum(z, FP16), 2048.0)


def test_lp_matmul_small_integers_are_exact():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    B = np.array([[5.0, 6.0], [7.0, 8.0]])
    eq_(lp_matmul(A, B, FP16).tolist(), [[19.0, 22.0], [43.0, 50.0]])


def test_lp_dot_matches_scalar_oracle():
    for n in (1, 2, 7, 8, 33, 64):
        x = _fp16_vector(n, n)
        y = _fp16_vector(n, n + 100)
        expected = _scalar_pairwise([fp16(a * b) for a, b in zip(x, y)])
        eq_(lp_dot(x, y, FP16), expected)


def test_lp_dot_call_counts():
    for n, expected in ((1, 1), (2, 2), (7, 4), (8, 4), (9, 5), (1024, 11)):
        x = np.ones(n)
        with counting_rounds() as session:
            lp_dot(x, x, FP16)
        eq_(round_call_count(session), expected)


def test_lp_matvec_equals_matmul_column():
    """
    lp_matvec(A, v) is lp_matmul(A, v as a column) bit for bit
    """
    rng = np.random.default_rng(5)
    A = rng.uniform(-1, 1, size=(6, 9))
    v = rng.uniform(-1, 1, size=9)
    ok_(np.array_equal(lp_matvec(A, v, FP16),
                       lp_matmul(A, v[:, np.newaxis], FP16)[:, 0]))


def test_lp_matvec_rows_match_lp_dot():
    rng = np.random.default_rng(6)
    A = np.array([[fp16(v) for v in row] for row in
                  rng.uniform(-1, 1, size=(4, 16))])
    v = _fp16_vector(16, 7)
    result = lp_matvec(A, v, FP16)
    eq_(list(result), [lp_dot(A[i], v, FP16) for i in range(4)])


def test_lp_matmul_call_count_is_log_inner_dimension_plus_one():
    A = np.ones((5, 8))
    B = np.ones((8, 3))
    with counting_rounds() as session:
        lp_matmul(A, B, FP16)
    eq_(round_call_count(session), 4)


def test_lp_hadamard_rounds_once():
    with counting_rounds() as session:
        result = lp_hadamard([0.1, 3.0], [1.0, 0.5], FP16)
    eq_(round_call_count(session), 1)
    eq_(list(result), [0.0999755859375, 1.5])


def test_working_precision_falls_back_to_numpy():
    rng = np.random.default_rng(8)
    A = rng.normal(size=(4, 4))
    B = rng.normal(size=(4, 4))
    with counting_rounds() as session:
        product = lp_matmul(A, B, FP64)
        dot = lp_dot(A[0], B[0], FP64)
    eq_(round_call_count(session), 0)
    ok_(np.array_equal(product, A.dot(B)))
    eq_(dot, float(np.dot(A[0], B[0])))


def test_results_are_representable():
    rng = np.random.default_rng(9)
    A = rng.uniform(-3, 3, size=(7, 5))
    B = rng.uniform(-3, 3, size=(5, 4))
    product = lp_matmul(A, B, FP16)
    ok_(np.array_equal(product, np.vectorize(fp16)(product)))


def test_overflow_propagates_as_inf():
    x = np.array([300.0, 300.0])
    eq_(lp_dot(x, x, FP16), np.inf)


@raises(ShapeError)
def test_lp_dot_rejects_mismatched_lengths():
    lp_dot(np.ones(3), np.ones(4), FP16)


@raises(ShapeError)
def test_lp_dot_rejects_empty_vectors():
    lp_dot(np.ones(0), np.ones(0), FP16)


@raises(ShapeError)
def test_lp_matmul_rejects_mismatched_inner_dimensions():
    lp_matmul(np.ones((2, 3)), np.ones((2, 3)), FP16)


@raises(ShapeError)
def test_lp_matvec_rejects_mismatched_vector():
    lp_matvec(np.ones((2, 3)), np.ones(2), FP16)


@raises(ShapeError)
def test_lp_hadamard_rejects_mismatched_shapes():
    lp_hadamard(np.ones(2), np.ones(3), FP16)
