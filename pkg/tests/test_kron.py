import numpy as np
from nose.tools import eq_, ok_, raises

from kronprec.exceptions import ShapeError, SizeGuardError
from kronprec.kron import (DENSIFY_LIMIT, KroneckerSum, kron_apply,
                           kronsum_apply, kronsum_apply_transpose,
                           kronsum_densify, kronsum_frobenius_distance,
                           kronsum_frobenius_norm, unvec, vec)

from utils import assert_close


def _random_sum(n, terms, seed):
    rng = np.random.default_rng(seed)
    return KroneckerSum([(rng.normal(size=(n, n)), rng.normal(size=(n, n)))
                         for _ in range(terms)])


def test_vec_stacks_columns():
    Y = np.array([[1.0, 2.0], [3.0, 4.0]])
    eq_(vec(Y).tolist(), [1.0, 3.0, 2.0, 4.0])


def test_unvec_inverts_vec():
    Y = np.arange(16.0).reshape((4, 4))
    ok_(np.array_equal(unvec(vec(Y)), Y))
    ok_(np.array_equal(unvec(vec(Y), 4), Y))


@raises(ShapeError)
def test_unvec_rejects_non_square_lengths():
    unvec(np.ones(10))


@raises(ShapeError)
def test_unvec_rejects_wrong_explicit_size():
    unvec(np.ones(9), 4)


def test_kron_apply_matches_numpy_kron():
    """
    (C kron D) y agrees with the explicit np.kron product
    """
    rng = np.random.default_rng(1)
    C, D = rng.normal(size=(5, 5)), rng.normal(size=(5, 5))
    y = rng.normal(size=25)
    assert_close(kron_apply(C, D, y), np.kron(C, D).dot(y), rtol=1e-12,
                 atol=1e-12)


def test_mixed_product_identity():
    """
    (A kron B)(C kron D) = (AC) kron (BD), applied to a vector
    """
    rng = np.random.default_rng(8)
    A, B, C, D = [rng.normal(size=(4, 4)) for _ in range(4)]
    y = rng.normal(size=16)
    assert_close(kron_apply(A, B, kron_apply(C, D, y)),
                 kron_apply(A.dot(C), B.dot(D), y), rtol=1e-11, atol=1e-11)


def test_transpose_is_the_adjoint():
    rng = np.random.default_rng(9)
    for terms in (1, 3):
        K = _random_sum(5, terms, terms)
        x, y = rng.normal(size=25), rng.normal(size=25)
        assert_close(kronsum_apply(K, x).dot(y),
                     x.dot(kronsum_apply_transpose(K, y)), rtol=1e-11)


@raises(ShapeError)
def test_kron_apply_rejects_mismatched_vector():
    kron_apply(np.eye(3), np.eye(3), np.ones(8))


def test_kronsum_apply_matches_dense():
    K = _random_sum(6, 3, 2)
    y = np.random.default_rng(3).normal(size=36)
    dense = kronsum_densify(K)
    assert_close(kronsum_apply(K, y), dense.dot(y), rtol=1e-11, atol=1e-11)
    assert_close(K @ y, dense.dot(y), rtol=1e-11, atol=1e-11)


def test_kronsum_transpose_matches_dense():
    K = _random_sum(6, 2, 4)
    y = np.random.default_rng(5).normal(size=36)
    dense = kronsum_densify(K)
    assert_close(kronsum_apply_transpose(K, y), dense.T.dot(y), rtol=1e-11,
                 atol=1e-11)
    assert_close(kronsum_densify(K.transpose()), dense.T)


def test_sum_and_difference_of_operators():
    K = _random_sum(4, 2, 6)
    T = _random_sum(4, 1, 7)
    eq_(len(K + T), 3)
    assert_close(kronsum_densify(K - T),
                 kronsum_densify(K) - kronsum_densify(T), atol=1e-12)


def test_factors_are_read_only():
    K = _random_sum(3, 1, 8)
    a_r, _ = K.terms[0]
    ok_(not a_r.flags.writeable)


@raises(ShapeError)
def test_empty_sum_is_rejected():
    KroneckerSum([])


@raises(ShapeError)
def test_mixed_factor_sizes_are_rejected():
    KroneckerSum([(np.eye(3), np.eye(3)), (np.eye(4), np.eye(4))])


@raises(ShapeError)
def test_adding_different_sizes_is_rejected():
    _random_sum(3, 1, 1) + _random_sum(4, 1, 1)


@raises(SizeGuardError)
def test_densify_refuses_large_operators():
    n = DENSIFY_LIMIT + 1
    kronsum_densify(KroneckerSum([(np.eye(n), np.eye(n))]))


def test_frobenius_norm_matches_dense():
    K = _random_sum(5, 3, 9)
    assert_close(kronsum_frobenius_norm(K),
                 np.linalg.norm(kronsum_densify(K), 'fro'), rtol=1e-10)


def test_frobenius_distance_matches_dense():
    K = _random_sum(5, 3, 10)
    T = _random_sum(5, 1, 11)
    expected = np.linalg.norm(kronsum_densify(K) - kronsum_densify(T), 'fro')
    assert_close(kronsum_frobenius_distance(K, T), expected, rtol=1e-10)
    assert_close(kronsum_frobenius_distance(K, T, relative=True),
                 expected / kronsum_frobenius_norm(K), rtol=1e-10)


def test_frobenius_distance_resolves_tiny_differences():
    """
    A relative perturbation of 1e-7 is measured to five digits, which
    subtracting squared norms cannot do
    """
    rng = np.random.default_rng(12)
    a_r, a_c = rng.normal(size=(6, 6)), rng.normal(size=(6, 6))
    E = rng.normal(size=(6, 6))
    delta = 1e-7
    K = KroneckerSum([(a_r, a_c)])
    T = KroneckerSum([(a_r, a_c + delta * E)])
    expected = delta * np.linalg.norm(a_r) * np.linalg.norm(E)
    assert_close(kronsum_frobenius_distance(K, T), expected, rtol=1e-5)


def test_frobenius_distance_of_operator_to_itself_is_zero():
    K = _random_sum(4, 2, 13)
    eq_(kronsum_frobenius_distance(K, K), 0.0)
    eq_(kronsum_frobenius_distance(K, K.transpose().transpose()), 0.0)


def test_shared_terms_cancel_exactly():
    K = _random_sum(4, 3, 15)
    T = KroneckerSum(K.terms[:2])
    extra = KroneckerSum(K.terms[2:])
    eq_(kronsum_frobenius_distance(K, T), kronsum_frobenius_norm(extra))


@raises(ShapeError)
def test_relative_distance_to_zero_operator_is_undefined():
    zero = KroneckerSum([(np.zeros((3, 3)), np.zeros((3, 3)))])
    kronsum_frobenius_distance(zero, _random_sum(3, 1, 14), relative=True)
