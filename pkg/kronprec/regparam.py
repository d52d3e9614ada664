"""
Regularization parameter selection from an (approximate) SVD spectrum.

Each rule is a scalar function of lambda evaluated in O(N) from the sorted
singular values ``sigma``, the projected data ``b_hat = U^T b`` and, for the
optimal rule only, ``x_hat = V^T x_true``:

* opt: ``sum (sigma b_hat / (sigma^2 + lam^2) - x_hat)^2``
* gcv: ``N sum (b_hat / (sigma^2 + lam^2))^2 / (sum 1 / (sigma^2 + lam^2))^2``
  (the lam^4 factors of numerator and denominator cancelled)
* wgcv: ``N sum (lam^2 b_hat / (sigma^2 + lam^2))^2 /
  (sum ((1 - omega) sigma^2 + lam^2) / (sigma^2 + lam^2))^2``
* discrepancy: root of ``sum (lam^2 b_hat / (sigma^2 + lam^2))^2 - eps^2``

Minimizers search ``[max(sigma_min, 1e-10 sigma_max), sigma_max]`` on a log
scale: a coarse grid locates the global minimum, bounded Brent refinement
(`scipy.optimize.fminbound`) polishes it.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import bisect, fminbound

from kronprec.exceptions import ConfigError, NoRootError, NumericalError
from kronprec.factor import approx_spectrum, project_b, project_x
from kronprec.kron import unvec, vec


BRACKET_FLOOR = 1e-10
GRID_POINTS = 257
FLAT_TOL = 1e-14
METHODS = ('opt', 'gcv', 'wgcv', 'discrepancy', 'fixed')


@dataclass(eq=False)
class SpectralData(object):
    sigma_hat: np.ndarray
    b_hat: np.ndarray
    x_hat: Optional[np.ndarray] = None

    def __post_init__(self):
        self.sigma_hat = np.asarray(self.sigma_hat, dtype=np.float64)
        self.b_hat = np.asarray(self.b_hat, dtype=np.float64)
        if self.x_hat is not None:
            self.x_hat = np.asarray(self.x_hat, dtype=np.float64)
        lengths = set([self.sigma_hat.shape, self.b_hat.shape])
        if self.x_hat is not None:
            lengths.add(self.x_hat.shape)
        if len(lengths) != 1 or self.sigma_hat.ndim != 1:
            raise ConfigError("spectral data vectors must be 1-D and of equal "
                              "length")
        if np.any(self.sigma_hat < 0):
            raise ConfigError("singular values must be nonnegative")

    @property
    def n(self):
        return self.sigma_hat.shape[0]


@dataclass(eq=False)
class ParamChoice(object):
    """
    A chosen lambda. ``flat`` marks an objective without measurable
    variation over the bracket, in which case lambda is the log-midpoint.
    """
    lam: float
    method: str
    objective_value: float
    bracket: tuple
    flat: bool = False
    omega: Optional[float] = None
    eta: Optional[float] = None
    noise_norm: Optional[float] = None

    def as_dict(self):
        return {
            'lambda': self.lam,
            'method': self.method,
            'objective_value': self.objective_value,
            'bracket': list(self.bracket),
            'flat': self.flat,
            'omega': self.omega,
            'eta': self.eta,
            'noise_norm': self.noise_norm,
        }


def spectral_data(decomposition, b, x_true=None):
    """Project ``b`` (and ``x_true``) onto the singular vectors of A_hat."""
    sigma, _ = approx_spectrum(decomposition)
    x_hat = None if x_true is None else project_x(decomposition, x_true)
    return SpectralData(sigma, project_b(decomposition, b), x_hat)


#
# Scalar search primitives
#

def minimize_1d(f, lo, hi, tol=1e-8):
    """Bounded minimization of ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    if not lo < hi:
        raise NumericalError("empty search interval [%r, %r]" % (lo, hi))
    x, fx, ierr, _ = fminbound(f, lo, hi, xtol=tol, full_output=True)
    if not np.isfinite(fx):
        raise NumericalError("objective is not finite at its minimizer %r"
                             % x)
    return float(x), float(fx)


def find_root(f, lo, hi, tol=1e-12):
    """Bisection root of ``f`` on ``[lo, hi]``, which must bracket a sign change."""
    f_lo, f_hi = f(lo), f(hi)
    if not (np.isfinite(f_lo) and np.isfinite(f_hi)):
        raise NumericalError("function is not finite at the interval ends")
    if f_lo == 0:
        return float(lo)
    if f_hi == 0:
        return float(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise NumericalError("no sign change on [%r, %r]" % (lo, hi))
    return float(bisect(f, lo, hi, xtol=tol, rtol=max(tol, 4e-16)))


def search_bracket(sd):
    sigma = sd.sigma_hat
    if sigma.size == 0 or not np.max(sigma) > 0:
        raise NumericalError("all singular values are zero")
    hi = float(np.max(sigma))
    lo = max(float(np.min(sigma)), BRACKET_FLOOR * hi)
    return lo, hi


def _log_search(objective, lo, hi):
    """
    Global minimum of ``objective`` on ``[lo, hi]`` over log10(lambda).

    Returns ``(lam, value, flat)``.
    """
    if lo == hi:
        return lo, float(objective(lo)), True
    t_lo, t_hi = np.log10(lo), np.log10(hi)
    g = lambda t: objective(10.0 ** t)
    grid = np.linspace(t_lo, t_hi, GRID_POINTS)
    values = np.array([g(t) for t in grid])
    finite = np.isfinite(values)
    if not finite.any():
        raise NumericalError("objective is not finite anywhere in the bracket")
    top, bottom = values[finite].max(), values[finite].min()
    if top - bottom <= FLAT_TOL * max(abs(top), abs(bottom)):
        mid = 0.5 * (t_lo + t_hi)
        return 10.0 ** mid, float(g(mid)), True
    values[~finite] = np.inf
    k = int(np.argmin(values))
    left, right = grid[max(k - 1, 0)], grid[min(k + 1, GRID_POINTS - 1)]
    t, value = minimize_1d(g, left, right, tol=1e-10)
    if values[k] < value:
        t, value = grid[k], values[k]
    return 10.0 ** t, float(value), False


#
# Objectives
#

def _denominators(sd, lam):
    return sd.sigma_hat ** 2 + lam ** 2


def opt_objective(sd, lam):
    if sd.x_hat is None:
        raise ConfigError("the optimal rule needs x_true")
    s = sd.sigma_hat
    return float(np.sum((s * sd.b_hat / _denominators(sd, lam) - sd.x_hat) ** 2))


def gcv_objective(sd, lam):
    d = _denominators(sd, lam)
    return float(sd.n * np.sum((sd.b_hat / d) ** 2) / np.sum(1.0 / d) ** 2)


def wgcv_trace(sd, lam, omega):
    """``N - omega * sum(phi)``, the wGCV denominator before squaring."""
    s2 = sd.sigma_hat ** 2
    return float(np.sum(((1.0 - omega) * s2 + lam ** 2) / (s2 + lam ** 2)))


def wgcv_objective(sd, lam, omega):
    d = _denominators(sd, lam)
    trace = wgcv_trace(sd, lam, omega)
    if trace == 0:
        return np.inf
    return float(sd.n * np.sum((lam ** 2 * sd.b_hat / d) ** 2) / trace ** 2)


def discrepancy_function(sd, lam, eps):
    d = _denominators(sd, lam)
    return float(np.sum((lam ** 2 * sd.b_hat / d) ** 2) - eps ** 2)


#
# Rules
#

def lambda_opt(sd):
    """The lambda minimizing the error against x_true."""
    if sd.x_hat is None:
        raise ConfigError("the optimal rule needs x_true")
    lo, hi = search_bracket(sd)
    lam, value, flat = _log_search(lambda l: opt_objective(sd, l), lo, hi)
    return ParamChoice(lam, 'opt', value, (lo, hi), flat)


def gcv(sd):
    lo, hi = search_bracket(sd)
    lam, value, flat = _log_search(lambda l: gcv_objective(sd, l), lo, hi)
    return ParamChoice(lam, 'gcv', value, (lo, hi), flat)


def wgcv(sd, omega):
    """
    Weighted GCV. For ``omega > 1`` the denominator vanishes at some lambda
    and the objective tends to zero as lambda goes to zero, so only the branch
    to the right of that pole, where ``N - omega * sum(phi) > 0``, is searched.
    """
    omega = float(omega)
    if not omega > 0:
        raise ConfigError("omega must be positive, got %r" % omega)
    lo, hi = search_bracket(sd)
    if omega > 1 and wgcv_trace(sd, lo, omega) <= 0:
        if wgcv_trace(sd, hi, omega) <= 0:
            raise NumericalError("wGCV with omega=%g has no admissible "
                                 "lambda in [%g, %g]" % (omega, lo, hi))
        pole = 10.0 ** find_root(
            lambda t: wgcv_trace(sd, 10.0 ** t, omega),
            np.log10(lo), np.log10(hi))
        lo = min(pole * (1 + 1e-6), hi)
    lam, value, flat = _log_search(lambda l: wgcv_objective(sd, l, omega),
                                   lo, hi)
    return ParamChoice(lam, 'wgcv', value, (lo, hi), flat, omega=omega)


def discrepancy(sd, noise_norm, eta):
    """
    Solve ``||residual(lam)|| = eta * noise_norm``.

    `NoRootError` with ``side='too large'`` when even the largest lambda in
    the bracket leaves a smaller residual, ``'too small'`` when the smallest
    lambda already exceeds the target.
    """
    if noise_norm is None:
        raise ConfigError("discrepancy needs the noise norm")
    noise_norm, eta = float(noise_norm), float(eta)
    if not noise_norm > 0:
        raise ConfigError("discrepancy needs a positive noise norm, got %r"
                          % noise_norm)
    if not eta > 0:
        raise ConfigError("eta must be positive, got %r" % eta)
    eps = eta * noise_norm
    lo, hi = search_bracket(sd)
    D = lambda t: discrepancy_function(sd, 10.0 ** t, eps)
    t_lo, t_hi = np.log10(lo), np.log10(hi)
    if D(t_hi) < 0:
        raise NoRootError("discrepancy: no root, eps=%g too large for the "
                          "achievable residual" % eps, 'too large')
    if D(t_lo) > 0:
        raise NoRootError("discrepancy: no root, eps=%g too small" % eps,
                          'too small')
    lam = 10.0 ** find_root(D, t_lo, t_hi) if lo < hi else lo
    return ParamChoice(lam, 'discrepancy', discrepancy_function(sd, lam, eps),
                       (lo, hi), eta=eta, noise_norm=noise_norm)


def select_parameter(method, sd, omega=1.0, eta=1.0, noise_norm=None,
                     lam=None):
    """Dispatch to the rule named ``method`` (one of `METHODS`)."""
    if method == 'opt':
        return lambda_opt(sd)
    if method == 'gcv':
        return gcv(sd)
    if method == 'wgcv':
        return wgcv(sd, omega)
    if method == 'discrepancy':
        return discrepancy(sd, noise_norm, eta)
    if method == 'fixed':
        if lam is None or not lam >= 0:
            raise ConfigError("param=fixed needs lambda >= 0")
        return ParamChoice(float(lam), 'fixed', float('nan'), (lam, lam))
    raise ConfigError("unknown parameter rule %r (expected one of %s)"
                      % (method, ", ".join(METHODS)))


def filtered_solution(P, b, lam):
    """
    Tikhonov solution for ``A_hat = A_r kron A_c`` in working precision:
    ``(V_r kron V_c) diag(sigma / (sigma^2 + lam^2)) (U_r kron U_c)^T b``.
    """
    decomposition = P.decomposition if hasattr(P, 'decomposition') else P
    sigma = decomposition.products()
    denominator = sigma ** 2 + lam ** 2
    if np.any(denominator == 0):
        raise NumericalError("lambda = 0 with zero singular values")
    svd_r, svd_c = decomposition.svd_r, decomposition.svd_c
    B = unvec(np.asarray(b, dtype=np.float64), decomposition.n)
    C = sigma / denominator * svd_c.U.T.dot(B).dot(svd_r.U)
    return vec(svd_c.V.dot(C).dot(svd_r.V.T))
