"""
Kronecker product algebra on column-stacked vectors.

``vec`` stacks columns, so ``(C kron D) vec(Y) = vec(D Y C^T)`` and a
Kronecker product of two n x n factors is applied in O(n^3) operations without
ever forming the n^2 x n^2 matrix.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from kronprec.exceptions import NumericalError, ShapeError, SizeGuardError


DENSIFY_LIMIT = 64


def vec(Y):
    """Stack the columns of ``Y`` into one vector."""
    return np.asarray(Y, dtype=np.float64).ravel(order='F')


def unvec(y, n=None):
    """
    Inverse of `vec` for square matrices.

    ``n`` defaults to the square root of ``len(y)``; a length that is not a
    perfect square raises `ShapeError`.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ShapeError("unvec expects a vector, got shape %s" % (y.shape,))
    if n is None:
        n = math.isqrt(y.shape[0])
        if n * n != y.shape[0]:
            raise ShapeError("length %d is not a perfect square" % y.shape[0])
    elif n * n != y.shape[0]:
        raise ShapeError("length %d is not %d^2" % (y.shape[0], n))
    return y.reshape((n, n), order='F')


def kron_apply(C, D, y):
    """Return ``(C kron D) y`` as ``vec(D unvec(y) C^T)``."""
    C = np.asarray(C, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    n = C.shape[0]
    if C.shape != (n, n) or D.shape != (n, n):
        raise ShapeError("kron_apply needs square factors of equal size, got "
                         "%s and %s" % (C.shape, D.shape))
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (n * n,):
        raise ShapeError("kron_apply: vector of length %d does not match "
                         "factors of size %d" % (y.size, n))
    return vec(D.dot(unvec(y, n)).dot(C.T))


class KroneckerSum(object):
    """
    The operator ``sum_k A_r[k] kron A_c[k]`` kept as its small factors.

    ``terms`` is a sequence of ``(A_r, A_c)`` pairs of n x n arrays. A single
    Kronecker product is a one-term sum.
    """

    def __init__(self, terms):
        terms = [(np.array(a_r, dtype=np.float64), np.array(a_c, dtype=np.float64))
                 for a_r, a_c in terms]
        if not terms:
            raise ShapeError("a KroneckerSum needs at least one term")
        n = terms[0][0].shape[0]
        for a_r, a_c in terms:
            if a_r.shape != (n, n) or a_c.shape != (n, n):
                raise ShapeError("all Kronecker factors must be %dx%d, got %s "
                                 "and %s" % (n, n, a_r.shape, a_c.shape))
        for a_r, a_c in terms:
            a_r.setflags(write=False)
            a_c.setflags(write=False)
        self.terms = tuple(terms)
        self.n = n

    @property
    def N(self):
        return self.n * self.n

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self):
        return "<KroneckerSum n=%d terms=%d>" % (self.n, len(self.terms))

    def transpose(self):
        return KroneckerSum([(a_r.T, a_c.T) for a_r, a_c in self.terms])

    def __neg__(self):
        return KroneckerSum([(-a_r, a_c) for a_r, a_c in self.terms])

    def __add__(self, other):
        if not isinstance(other, KroneckerSum):
            return NotImplemented
        _check_same_size(self, other)
        return KroneckerSum(self.terms + other.terms)

    def __sub__(self, other):
        if not isinstance(other, KroneckerSum):
            return NotImplemented
        return self + (-other)

    def __matmul__(self, y):
        return kronsum_apply(self, y)


def _check_same_size(K, T):
    if K.n != T.n:
        raise ShapeError("Kronecker sums of different sizes: %d vs %d"
                         % (K.n, T.n))


def kronsum_apply(K, y):
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (K.N,):
        raise ShapeError("vector of length %d does not match operator of "
                         "size %d" % (y.size, K.N))
    Y = unvec(y, K.n)
    result = np.zeros((K.n, K.n))
    for a_r, a_c in K.terms:
        result += a_c.dot(Y).dot(a_r.T)
    return vec(result)


def kronsum_apply_transpose(K, y):
    """Apply ``K^T = sum_k A_r[k]^T kron A_c[k]^T``."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (K.N,):
        raise ShapeError("vector of length %d does not match operator of "
                         "size %d" % (y.size, K.N))
    Y = unvec(y, K.n)
    result = np.zeros((K.n, K.n))
    for a_r, a_c in K.terms:
        result += a_c.T.dot(Y).dot(a_r)
    return vec(result)


def kronsum_densify(K):
    """
    Explicit N x N matrix of ``K``; for tests and small problems only.

    Refuses factors larger than `DENSIFY_LIMIT` with `SizeGuardError`.
    """
    if K.n > DENSIFY_LIMIT:
        raise SizeGuardError("refusing to densify a Kronecker sum with n=%d "
                             "(limit %d)" % (K.n, DENSIFY_LIMIT))
    dense = np.zeros((K.N, K.N))
    for a_r, a_c in K.terms:
        dense += np.kron(a_r, a_c)
    return dense


def kronsum_frobenius_norm(K):
    return _gram_norm([a_r for a_r, _ in K.terms], [a_c for _, a_c in K.terms])


def kronsum_frobenius_distance(K, T, relative=False):
    """
    ``||K - T||_F`` without forming either operator.

    Uses ``||sum_k B_k kron C_k||_F^2 = sum_{k,l} <B_k,B_l> <C_k,C_l>`` over
    the signed, concatenated term list. The Gram matrices are taken as
    ``R^T R`` from QR factorizations of the stacked vectorized factors, so the
    distance is the Frobenius norm of ``R_B R_C^T``; this keeps the
    cancellation between nearly equal sums at the level of the entries
    instead of their squares.

    Terms present with identical factors in both sums cancel before any
    arithmetic, so equal operators are exactly zero apart.

    With ``relative=True`` the result is divided by ``||K||_F``, which must be
    nonzero.
    """
    _check_same_size(K, T)
    terms = _cancel_equal_terms(K.terms, T.terms)
    if terms:
        distance = _gram_norm([a_r for a_r, _ in terms],
                              [a_c for _, a_c in terms])
    else:
        distance = 0.0
    if not relative:
        return distance
    norm = kronsum_frobenius_norm(K)
    if norm == 0:
        raise ShapeError("relative distance undefined: ||K||_F = 0")
    return distance / norm


def _cancel_equal_terms(plus, minus):
    minus = list(minus)
    kept = []
    for a_r, a_c in plus:
        for i, (b_r, b_c) in enumerate(minus):
            if np.array_equal(a_r, b_r) and np.array_equal(a_c, b_c):
                del minus[i]
                break
        else:
            kept.append((a_r, a_c))
    return kept + [(-b_r, b_c) for b_r, b_c in minus]


def _gram_norm(left, right):
    B = np.column_stack([vec(f) for f in left])
    C = np.column_stack([vec(f) for f in right])
    r_b = np.linalg.qr(B, mode='r')
    r_c = np.linalg.qr(C, mode='r')
    return float(np.linalg.norm(r_b.dot(r_c.T), 'fro'))


@dataclass(eq=False)
class SvdTriple(object):
    """``A = U diag(S) V^T`` with S nonincreasing."""
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


def svd_dense(A):
    """
    Dense SVD of a small square matrix.

    LAPACK's divide-and-conquer driver is tried first, then the slower QR
    driver; `NumericalError` if neither converges.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ShapeError("svd_dense expects a non-empty square matrix, got "
                         "shape %s" % (A.shape,))
    if not np.all(np.isfinite(A)):
        raise NumericalError("svd_dense: matrix has non-finite entries")
    for driver in ('gesdd', 'gesvd'):
        try:
            U, S, Vt = scipy.linalg.svd(A, lapack_driver=driver)
            return SvdTriple(U, S, Vt.T)
        except np.linalg.LinAlgError:
            continue
    raise NumericalError("SVD did not converge for a %dx%d matrix"
                         % A.shape)
