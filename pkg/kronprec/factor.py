"""
Nearest Kronecker product approximation and the low-precision Kronecker SVD
preconditioner.

With ``A_hat = A_r kron A_c`` and factor SVDs ``A_r = U_r S_r V_r^T``,
``A_c = U_c S_c V_c^T``, the Tikhonov preconditioner
``M = A_hat^T A_hat + lam^2 I`` is diagonalized by ``V_r kron V_c``, so::

    M^{-1} vec(R) = vec(V_c (S .* (V_c^T R V_r)) V_r^T)

with ``S[i, j] = 1 / ((s_r[j] s_c[i])^2 + lam^2)``. The SVDs are computed in
working precision; only ``V_r``, ``V_c`` and ``S`` are stored in the target
format and every product of the solve is done with the `lpblas` kernels.
"""

from dataclasses import dataclass

import numpy as np

from kronprec.deblur import point_term, psf_terms, toeplitz_factor
from kronprec.exceptions import ConfigError, NumericalError, ShapeError
from kronprec.kron import (KroneckerSum, SvdTriple, kronsum_frobenius_distance,
                           svd_dense, unvec, vec)
from kronprec.lpblas import lp_hadamard, lp_matmul
from kronprec.precision import format_by_name, round_array


def nearest_kron(psf, n, weighting='toeplitz'):
    """
    One-term Kronecker approximation ``(A_r, A_c)`` of the blur operator of
    ``psf`` on n x n images.

    ``uniform`` takes the dominant singular term of the PSF array itself.
    ``toeplitz`` first weights row i of the array by ``sqrt(n - |i - c|)`` (and
    columns alike), the number of times that PSF entry appears in its
    Toeplitz factor, which makes the rank-one choice optimal in the Frobenius
    norm of the n^2 x n^2 operator; the weights are divided back out before
    building the factors.

    A PSF with a single nonzero entry is its own exact Kronecker product, so
    the delta blur gives identity factors without going through an SVD.
    """
    if weighting not in ('uniform', 'toeplitz'):
        raise ConfigError("unknown weighting %r (expected uniform or "
                          "toeplitz)" % (weighting,))
    if n < psf.size:
        raise ShapeError("image size n=%d is smaller than the %dx%d PSF"
                         % (n, psf.size, psf.size))
    row_c, col_c = psf.center
    point = point_term(psf.values)
    if point is not None:
        s, u, v = point
    elif weighting == 'uniform':
        s, u, v = psf_terms(psf)[0]
    else:
        offsets = np.arange(psf.size)
        d_r = np.sqrt(n - np.abs(offsets - row_c))
        d_c = np.sqrt(n - np.abs(offsets - col_c))
        svd = svd_dense(d_r[:, None] * psf.values * d_c[None, :])
        s, u, v = svd.S[0], svd.U[:, 0] / d_r, svd.V[:, 0] / d_c
        if u.sum() < 0:
            u, v = -u, -v
    root = np.sqrt(s)
    return (toeplitz_factor(root * v, col_c, n),
            toeplitz_factor(root * u, row_c, n))


def rounded_factors(A_r, A_c, fmt):
    fmt = format_by_name(fmt)
    return round_array(A_r, fmt), round_array(A_c, fmt)


def approximation_errors(A, A_r, A_c, fmt):
    """
    Relative Frobenius distances from ``A`` to ``A_r kron A_c``, first with
    the factors as computed, then with the factors rounded to ``fmt``.
    """
    exact = kronsum_frobenius_distance(A, KroneckerSum([(A_r, A_c)]),
                                       relative=True)
    rounded = kronsum_frobenius_distance(
        A, KroneckerSum([rounded_factors(A_r, A_c, fmt)]), relative=True)
    return exact, rounded


@dataclass(eq=False)
class KronSvd(object):
    """
    Factor SVDs of ``A_r kron A_c``; independent of lambda, so one
    decomposition serves parameter selection and every preconditioner.
    """
    A_r: np.ndarray
    A_c: np.ndarray
    svd_r: SvdTriple
    svd_c: SvdTriple

    @property
    def n(self):
        return self.A_r.shape[0]

    def products(self):
        """``sigma[i, j] = s_c[i] * s_r[j]``, the unsorted spectrum of A_hat."""
        return np.outer(self.svd_c.S, self.svd_r.S)


def kron_svd(A_r, A_c):
    A_r = np.asarray(A_r, dtype=np.float64)
    A_c = np.asarray(A_c, dtype=np.float64)
    if A_r.shape != A_c.shape:
        raise ShapeError("Kronecker factors differ in shape: %s vs %s"
                         % (A_r.shape, A_c.shape))
    return KronSvd(A_r, A_c, svd_dense(A_r), svd_dense(A_c))


@dataclass(eq=False)
class KronSvdPreconditioner(object):
    """
    ``M = (A_r kron A_c)^T (A_r kron A_c) + lam^2 I`` ready for `precond_solve`.

    ``S_weights`` is the exact weight array, ``Vr_lp``, ``Vc_lp`` and ``S_lp``
    its rounded counterparts. With ``scale`` on, the solve uses
    ``S_scaled_lp``, the weights multiplied by ``2**-S_exponent`` before
    rounding, and undoes the power of two afterwards.
    """
    A_r: np.ndarray
    A_c: np.ndarray
    svd_r: SvdTriple
    svd_c: SvdTriple
    lam: float
    S_weights: np.ndarray
    fmt: object
    Vr_lp: np.ndarray
    Vc_lp: np.ndarray
    S_lp: np.ndarray
    S_scaled_lp: np.ndarray
    S_exponent: int
    scale: bool = True

    @property
    def n(self):
        return self.A_r.shape[0]

    @property
    def decomposition(self):
        return KronSvd(self.A_r, self.A_c, self.svd_r, self.svd_c)


def build_preconditioner(A_r, A_c, lam, fmt, decomposition=None, scale=True):
    """
    Factor ``A_r kron A_c`` (unless ``decomposition`` is given) and store the
    preconditioner components rounded to ``fmt``.

    ``lam = 0`` is allowed only when no singular value product vanishes.
    """
    fmt = format_by_name(fmt)
    lam = float(lam)
    if not lam >= 0:
        raise ConfigError("preconditioner lambda must be >= 0, got %r" % lam)
    if decomposition is None:
        decomposition = kron_svd(A_r, A_c)
    denominator = decomposition.products() ** 2 + lam ** 2
    if np.any(denominator == 0):
        raise NumericalError("lambda = 0 with a singular Kronecker factor: "
                             "the preconditioner does not exist")
    S = 1.0 / denominator
    _, exponent = np.frexp(S.max())
    return KronSvdPreconditioner(
        decomposition.A_r, decomposition.A_c,
        decomposition.svd_r, decomposition.svd_c,
        lam, S, fmt,
        round_array(decomposition.svd_r.V, fmt),
        round_array(decomposition.svd_c.V, fmt),
        round_array(S, fmt),
        round_array(np.ldexp(S, -int(exponent)), fmt),
        int(exponent), bool(scale))


def precond_solve(P, r):
    """
    ``M^{-1} r`` with every product carried out in ``P.fmt``.

    With ``P.scale`` the residual is brought to ``[0.5, 1)`` in magnitude by a
    power of two before rounding, which changes nothing in the normal range
    but keeps small late-iteration residuals from vanishing in the subnormals.
    """
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (P.n * P.n,):
        raise ShapeError("residual of length %d does not match a "
                         "preconditioner of size %d" % (r.size, P.n * P.n))
    if P.scale:
        peak = np.max(np.abs(r))
        if peak == 0:
            return np.zeros_like(r)
        if not np.isfinite(peak):
            return np.full_like(r, np.nan)
        _, r_exponent = np.frexp(peak)
        r = np.ldexp(r, -int(r_exponent))
        weights = P.S_scaled_lp
        shift = int(r_exponent) + P.S_exponent
    else:
        weights = P.S_lp
        shift = 0
    fmt = P.fmt
    R = round_array(unvec(r, P.n), fmt)
    inner = lp_matmul(lp_matmul(P.Vc_lp.T, R, fmt), P.Vr_lp, fmt)
    Z = lp_matmul(lp_matmul(P.Vc_lp, lp_hadamard(weights, inner, fmt), fmt),
                  P.Vr_lp.T, fmt)
    return np.ldexp(vec(Z), shift)


def precond_apply(P, z):
    """``M z`` in working precision; the inverse of `precond_solve`."""
    Z = unvec(np.asarray(z, dtype=np.float64), P.n)
    AZ = P.A_c.dot(Z).dot(P.A_r.T)
    return vec(P.A_c.T.dot(AZ).dot(P.A_r)) + P.lam ** 2 * vec(Z)


def approx_spectrum(P):
    """
    Singular values of ``A_r kron A_c`` sorted nonincreasing, and ``perm``
    with ``sigma_hat = vec(s_c s_r^T)[perm]``.

    Accepts a preconditioner or a bare `KronSvd`.
    """
    sigma = vec(P.decomposition.products() if hasattr(P, 'decomposition')
                else P.products())
    perm = np.argsort(-sigma, kind='stable')
    return sigma[perm], perm


def _check_length(P, y, what):
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (P.n * P.n,):
        raise ShapeError("%s of length %d does not match factors of size %d"
                         % (what, y.size, P.n))
    return y


def project_b(P, b):
    """``(U_r kron U_c)^T b`` in the sorted order of `approx_spectrum`."""
    B = unvec(_check_length(P, b, 'b'), P.n)
    _, perm = approx_spectrum(P)
    return vec(P.svd_c.U.T.dot(B).dot(P.svd_r.U))[perm]


def project_x(P, x):
    """``(V_r kron V_c)^T x`` in the sorted order of `approx_spectrum`."""
    X = unvec(_check_length(P, x, 'x'), P.n)
    _, perm = approx_spectrum(P)
    return vec(P.svd_c.V.T.dot(X).dot(P.svd_r.V))[perm]
