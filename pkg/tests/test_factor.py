import numpy as np
import scipy.linalg
from fudge import Fake, patched_context
from nose.tools import eq_, ok_, raises

from kronprec.deblur import make_psf, psf_terms, psf_to_kronsum
from kronprec.exceptions import (ConfigError, NumericalError, ShapeError)
from kronprec.factor import (approx_spectrum, approximation_errors,
                             build_preconditioner, kron_svd, nearest_kron,
                             precond_apply, precond_solve, project_b,
                             project_x, rounded_factors, svd_dense)
from kronprec.precision import FP16, FP64, counting_rounds, round_call_count

from oracles import fp16
from utils import assert_close, assert_rel


def _factors(n=8, kind='gauss', params=None, n_p=5, seed=0):
    psf = make_psf(kind, n_p, params or {'sigma': 1.0}, seed=seed)
    return nearest_kron(psf, n)


def test_svd_dense_reconstructs():
    A = np.random.default_rng(1).normal(size=(6, 6))
    svd = svd_dense(A)
    assert_close(svd.U.dot(np.diag(svd.S)).dot(svd.V.T), A, atol=1e-12)
    ok_(np.all(np.diff(svd.S) <= 0))


@raises(ShapeError)
def test_svd_dense_needs_a_square_matrix():
    svd_dense(np.ones((3, 4)))


@raises(NumericalError)
def test_svd_dense_refuses_nonfinite_entries():
    A = np.eye(3)
    A[1, 1] = np.nan
    svd_dense(A)


def _failing_svd():
    return Fake('svd', callable=True).raises(
        np.linalg.LinAlgError("SVD did not converge"))


@raises(NumericalError)
def test_psf_terms_reports_svd_failure_as_numerical():
    psf = make_psf('speckle', 5, {'blobs': 3}, seed=1)
    with patched_context(scipy.linalg, 'svd', _failing_svd()):
        psf_terms(psf)


@raises(NumericalError)
def test_nearest_kron_reports_svd_failure_as_numerical():
    psf = make_psf('speckle', 5, {'blobs': 3}, seed=1)
    with patched_context(scipy.linalg, 'svd', _failing_svd()):
        nearest_kron(psf, 8)


def test_delta_blur_decomposes_exactly():
    psf = make_psf('delta', 15)
    A = psf_to_kronsum(psf, 32)
    for weighting in ('uniform', 'toeplitz'):
        A_r, A_c = nearest_kron(psf, 32, weighting)
        ok_(np.array_equal(A_r, np.eye(32)))
        ok_(np.array_equal(A_c, np.eye(32)))
        eq_(approximation_errors(A, A_r, A_c, FP16), (0.0, 0.0))


def test_separable_blur_is_its_own_nearest_kron():
    """
    A Gaussian blur is exactly one Kronecker product under either weighting
    """
    psf = make_psf('gauss', 5, {'sigma': 1.0})
    A = psf_to_kronsum(psf, 8)
    for weighting in ('uniform', 'toeplitz'):
        A_r, A_c = nearest_kron(psf, 8, weighting)
        exact, _ = approximation_errors(A, A_r, A_c, FP16)
        ok_(exact < 1e-12, "%s: %r" % (weighting, exact))


def test_toeplitz_weighting_is_never_worse_than_uniform():
    for seed in range(4):
        psf = make_psf('speckle', 7, {'blobs': 5}, seed=seed)
        A = psf_to_kronsum(psf, 12)
        weighted, _ = approximation_errors(A, *nearest_kron(psf, 12),
                                           fmt=FP16)
        uniform, _ = approximation_errors(
            A, *nearest_kron(psf, 12, 'uniform'), fmt=FP16)
        ok_(weighted <= uniform * (1 + 1e-10), "seed %d" % seed)
        ok_(weighted > 0)


def test_rounding_the_factors_costs_about_unit_roundoff():
    psf = make_psf('gauss', 5, {'sigma': 1.0})
    A = psf_to_kronsum(psf, 8)
    A_r, A_c = nearest_kron(psf, 8)
    _, rounded = approximation_errors(A, A_r, A_c, FP16)
    ok_(0 < rounded < 4 * FP16.unit_roundoff)
    _, unrounded = approximation_errors(A, A_r, A_c, FP64)
    ok_(unrounded < 1e-12)


def test_rounded_factors_are_representable():
    A_r, A_c = rounded_factors(*_factors(), fmt='fp16')
    ok_(np.array_equal(A_r, np.vectorize(fp16)(A_r)))
    ok_(np.array_equal(A_c, np.vectorize(fp16)(A_c)))


@raises(ConfigError)
def test_unknown_weighting_is_rejected():
    nearest_kron(make_psf('gauss', 5), 8, 'optimal')


@raises(ShapeError)
def test_nearest_kron_needs_room_for_the_psf():
    nearest_kron(make_psf('gauss', 9), 8)


@raises(ShapeError)
def test_kron_svd_needs_matching_factors():
    kron_svd(np.eye(3), np.eye(4))


def test_preconditioner_weights_layout():
    A_r, A_c = _factors()
    P = build_preconditioner(A_r, A_c, 0.1, FP16)
    s_r, s_c = P.svd_r.S, P.svd_c.S
    eq_(P.S_weights.shape, (8, 8))
    assert_close(P.S_weights[2, 5], 1.0 / ((s_c[2] * s_r[5]) ** 2 + 0.01),
                 rtol=1e-14)


def test_stored_components_are_rounded():
    A_r, A_c = _factors()
    P = build_preconditioner(A_r, A_c, 0.1, FP16)
    ok_(np.array_equal(P.Vr_lp, np.vectorize(fp16)(P.svd_r.V)))
    ok_(np.array_equal(P.Vc_lp, np.vectorize(fp16)(P.svd_c.V)))
    ok_(np.array_equal(P.S_lp, np.vectorize(fp16)(P.S_weights)))
    ok_(0.5 <= P.S_scaled_lp.max() <= 1.0)


def test_fp64_solve_inverts_apply():
    """
    In working precision precond_solve is the inverse of precond_apply
    """
    A_r, A_c = _factors()
    P = build_preconditioner(A_r, A_c, 0.05, FP64)
    z = np.random.default_rng(2).normal(size=64)
    assert_rel(precond_solve(P, precond_apply(P, z)), z, 1e-10)


def test_precond_apply_matches_dense():
    A_r, A_c = _factors()
    P = build_preconditioner(A_r, A_c, 0.2, FP64)
    A_hat = np.kron(A_r, A_c)
    M = A_hat.T.dot(A_hat) + 0.04 * np.eye(64)
    z = np.random.default_rng(3).normal(size=64)
    assert_close(precond_apply(P, z), M.dot(z), rtol=1e-12, atol=1e-12)


def test_fp16_solve_is_close_to_exact():
    A_r, A_c = _factors()
    exact = build_preconditioner(A_r, A_c, 1.0, FP64)
    half = build_preconditioner(A_r, A_c, 1.0, FP16,
                                decomposition=exact.decomposition)
    r = np.random.default_rng(4).normal(size=64)
    assert_rel(precond_solve(half, r), precond_solve(exact, r), 2e-2)


def test_fp16_solve_rounding_call_count():
    """
    One solve at n=8: R, four products of inner size 8 and one Hadamard
    product, 1 + 4 * 4 + 1 calls
    """
    A_r, A_c = _factors()
    P = build_preconditioner(A_r, A_c, 0.1, FP16)
    r = np.random.default_rng(5).normal(size=64)
    with counting_rounds() as session:
        precond_solve(P, r)
    eq_(round_call_count(session), 18)


def test_scaling_rescues_tiny_residuals():
    A_r, A_c = _factors()
    decomposition = kron_svd(A_r, A_c)
    exact = build_preconditioner(A_r, A_c, 1.0, FP64, decomposition)
    scaled = build_preconditioner(A_r, A_c, 1.0, FP16, decomposition)
    unscaled = build_preconditioner(A_r, A_c, 1.0, FP16, decomposition,
                                    scale=False)
    r = 1e-9 * np.random.default_rng(6).normal(size=64)
    assert_rel(precond_solve(scaled, r), precond_solve(exact, r), 2e-2)
    ok_(not np.any(precond_solve(unscaled, r)))


def test_zero_residual_gives_zero():
    A_r, A_c = _factors()
    P = build_preconditioner(A_r, A_c, 0.1, FP16)
    eq_(precond_solve(P, np.zeros(64)).tolist(), [0.0] * 64)


def test_nonfinite_residual_gives_nan():
    A_r, A_c = _factors()
    P = build_preconditioner(A_r, A_c, 0.1, FP16)
    r = np.ones(64)
    r[7] = np.inf
    ok_(np.all(np.isnan(precond_solve(P, r))))


@raises(ShapeError)
def test_precond_solve_checks_length():
    A_r, A_c = _factors()
    precond_solve(build_preconditioner(A_r, A_c, 0.1, FP16), np.ones(63))


@raises(ConfigError)
def test_negative_lambda_is_rejected():
    build_preconditioner(*_factors(), lam=-1.0, fmt=FP16)


@raises(NumericalError)
def test_zero_lambda_with_singular_factor_is_rejected():
    A = np.diag([1.0, 1.0, 0.0])
    build_preconditioner(A, np.eye(3), 0.0, FP16)


def test_approx_spectrum_matches_dense_singular_values():
    A_r, A_c = _factors(n=6)
    sigma, perm = approx_spectrum(kron_svd(A_r, A_c))
    dense = np.linalg.svd(np.kron(A_r, A_c), compute_uv=False)
    assert_close(sigma, dense, rtol=1e-10, atol=1e-14)
    ok_(np.all(np.diff(sigma) <= 0))
    eq_(sorted(perm.tolist()), list(range(36)))


def test_approx_spectrum_accepts_a_preconditioner():
    A_r, A_c = _factors(n=6)
    P = build_preconditioner(A_r, A_c, 0.1, FP16)
    ok_(np.array_equal(approx_spectrum(P)[0],
                       approx_spectrum(kron_svd(A_r, A_c))[0]))


def test_projections_match_dense_kronecker_products():
    A_r, A_c = _factors(n=6)
    P = build_preconditioner(A_r, A_c, 0.1, FP64)
    _, perm = approx_spectrum(P)
    y = np.random.default_rng(7).normal(size=36)
    U = np.kron(P.svd_r.U, P.svd_c.U)
    V = np.kron(P.svd_r.V, P.svd_c.V)
    assert_close(project_b(P, y), U.T.dot(y)[perm], atol=1e-12)
    assert_close(project_x(P, y), V.T.dot(y)[perm], atol=1e-12)


@raises(ShapeError)
def test_projection_checks_length():
    A_r, A_c = _factors(n=6)
    project_b(kron_svd(A_r, A_c), np.ones(35))
