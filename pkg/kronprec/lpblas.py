"""
Low-precision dot products and matrix products built on `round_array`.

All kernels follow the same discipline: form every elementwise product in one
vectorized rounding, then add adjacent pairs stage by stage, rounding each
stage with one more call. For n terms that is ``ceil(log2(n)) + 1`` rounding
calls, against ``n + 1`` for a left-to-right running sum (`recursive_sum`).

The pairing is fixed (adjacent pairs, left to right, an odd trailing element
carried to the next stage unrounded), so results are bit-reproducible.

When ``fmt`` is working precision no rounding happens at all and the kernels
fall back to plain numpy products.
"""

import numpy as np

from kronprec.exceptions import ShapeError
from kronprec.precision import round_array


def _pairwise_reduce(stack, fmt):
    """
    Sum ``stack`` along axis 0 by pairwise stages, one rounding per stage.
    """
    while stack.shape[0] > 1:
        pairs = stack.shape[0] // 2
        summed = round_array(stack[0:2 * pairs:2] + stack[1:2 * pairs:2], fmt)
        if stack.shape[0] % 2:
            stack = np.concatenate([summed, stack[-1:]], axis=0)
        else:
            stack = summed
    return stack[0]


def pairwise_sum(z, fmt):
    """
    Pairwise sum of ``z``, whose entries are already representable in ``fmt``.

    Uses ``ceil(log2(len(z)))`` rounding calls.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] < 1:
        raise ShapeError("pairwise_sum needs a non-empty vector, got shape %s"
                         % (z.shape,))
    if fmt.is_working_precision:
        return float(np.sum(z))
    return float(_pairwise_reduce(z, fmt))


def recursive_sum(z, fmt):
    """
    Left-to-right running sum rounding after every addition (n - 1 calls).

    Kept for comparison with `pairwise_sum`; its error bound grows with n
    rather than log2(n), and small addends can be lost entirely once the
    running sum is large.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] < 1:
        raise ShapeError("recursive_sum needs a non-empty vector, got shape %s"
                         % (z.shape,))
    s = z[0]
    for value in z[1:]:
        s = round_array(s + value, fmt)
    return float(s)


def lp_hadamard(a, b, fmt):
    """Elementwise product rounded with a single call."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError("lp_hadamard shape mismatch: %s vs %s"
                         % (a.shape, b.shape))
    return round_array(a * b, fmt)


def lp_dot(x, y, fmt):
    """
    Low-precision inner product ``x^T y``.

    ``z = round(x .* y)`` in one call, then `pairwise_sum` of z: for n a
    power of two exactly ``log2(n) + 1`` rounding calls.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape or x.shape[0] < 1:
        raise ShapeError("lp_dot needs two non-empty vectors of equal length, "
                         "got %s and %s" % (x.shape, y.shape))
    if fmt.is_working_precision:
        return float(np.dot(x, y))
    return pairwise_sum(round_array(x * y, fmt), fmt)


def lp_matvec(A, v, fmt):
    """
    Low-precision ``A v``: scale column j of A by v_j with one rounding call,
    then add the columns pairwise.
    """
    A = np.asarray(A, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if A.ndim != 2 or v.ndim != 1 or A.shape[1] != v.shape[0] or v.shape[0] < 1:
        raise ShapeError("lp_matvec shape mismatch: %s times %s"
                         % (A.shape, v.shape))
    if fmt.is_working_precision:
        return A.dot(v)
    scaled = round_array(A * v[np.newaxis, :], fmt)
    return _pairwise_reduce(scaled.T, fmt)


def lp_matmul(A, B, fmt):
    """
    Low-precision ``A B`` as a pairwise sum of rounded outer products.

    Term i is ``round(A[:, i] B[i, :])``; all k terms are rounded in one call
    and then combined stage by stage. ``lp_matmul(A, v[:, None])[:, 0]`` equals
    ``lp_matvec(A, v)`` bit for bit.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0] or A.shape[1] < 1:
        raise ShapeError("lp_matmul shape mismatch: %s times %s"
                         % (A.shape, B.shape))
    if fmt.is_working_precision:
        return A.dot(B)
    terms = round_array(A.T[:, :, np.newaxis] * B[:, np.newaxis, :], fmt)
    return _pairwise_reduce(terms, fmt)
