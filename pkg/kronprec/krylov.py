"""
Conjugate gradient solvers for the Tikhonov normal equations

    (A^T A + lam^2 I) x = A^T b

* `cgls`: unpreconditioned CGLS on the stacked least-squares problem
  ``min ||[A; lam I] x - [b; 0]||``, the baseline.
* `pcg`: preconditioned CG with the Fletcher-Reeves step
  ``beta = z_new.r_new / z.r``.
* `fpcg`: flexible PCG, identical except for the Polak-Ribiere step
  ``beta = z_new.(r_new - r) / z.r``, which tolerates a preconditioner that
  changes slightly from one application to the next.

Only the preconditioner solve runs in the preconditioner's format; all inner
products and vector updates here are float64.

Work is counted in units of one structured product with A or A^T: 2 per
iteration for every solver, plus 1/4 for each low-precision preconditioner
solve. Computing ``A^T b`` at start-up costs 1 unit (and the first
preconditioner solve another 1/4).
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from kronprec.exceptions import ConfigError, ShapeError, SolverBreakdown
from kronprec.factor import precond_solve
from kronprec.kron import kronsum_apply, kronsum_apply_transpose


MATVEC_UNITS = 1.0
PRECOND_UNITS = 0.25
SOLVERS = ('cgls', 'pcg', 'fpcg')


@dataclass(eq=False)
class SolverOptions(object):
    lam: float
    max_iterations: int = 100
    rel_residual_tol: float = 1e-6
    x_true: Optional[np.ndarray] = None
    track_search_direction_orthogonality: bool = False
    callback: Optional[Callable] = None

    def __post_init__(self):
        if isinstance(self.max_iterations, bool) or \
                not isinstance(self.max_iterations, (int, np.integer)) or \
                self.max_iterations < 1:
            raise ConfigError("max_iterations must be an integer >= 1, got %r"
                              % (self.max_iterations,))
        if not self.rel_residual_tol > 0:
            raise ConfigError("rel_residual_tol must be positive, got %r"
                              % (self.rel_residual_tol,))
        if not self.lam >= 0:
            raise ConfigError("lambda must be >= 0, got %r" % (self.lam,))


@dataclass(eq=False)
class ConvergenceHistory(object):
    """
    Per-iteration diagnostics; entry k describes iterate x_k, entry 0 the
    zero starting guess.
    """
    solver: str
    relative_errors: List[float] = field(default_factory=list)
    residual_norms: List[float] = field(default_factory=list)
    work_units: List[float] = field(default_factory=list)
    orthogonality: List[float] = field(default_factory=list)
    iterations_used: int = 0
    converged: bool = False
    precond_solves: int = 0
    stop_reason: str = ''

    def record(self, x, residual_norm, work, x_true):
        if x_true is not None:
            self.relative_errors.append(
                float(np.linalg.norm(x - x_true) / np.linalg.norm(x_true)))
        self.residual_norms.append(float(residual_norm))
        self.work_units.append(float(work))

    def rows(self):
        """``(iteration, relative_error, residual_norm, work)`` tuples."""
        errors = self.relative_errors or [None] * len(self.residual_norms)
        return [(k, errors[k], self.residual_norms[k], self.work_units[k])
                for k in range(len(self.residual_norms))]


def _check_system(A, b):
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (A.N,):
        raise ShapeError("right-hand side of length %d does not match an "
                         "operator of size %d" % (b.size, A.N))
    return b


def normal_matvec(A, lam, p):
    """``A^T (A p) + lam^2 p``: two structured products."""
    p = np.asarray(p, dtype=np.float64)
    return kronsum_apply_transpose(A, kronsum_apply(A, p)) + lam ** 2 * p


def _x_true(opts, N):
    if opts.x_true is None:
        return None
    x_true = np.asarray(opts.x_true, dtype=np.float64)
    if x_true.shape != (N,):
        raise ShapeError("x_true of length %d does not match size %d"
                         % (x_true.size, N))
    if not np.linalg.norm(x_true) > 0:
        raise ConfigError("x_true must be nonzero to track relative errors")
    return x_true


def cgls(A, b, opts):
    """
    CGLS on the damped least-squares problem; mathematically CG on the
    normal equations. Returns ``(x, history)``.
    """
    b = _check_system(A, b)
    x_true = _x_true(opts, A.N)
    lam2 = opts.lam ** 2
    history = ConvergenceHistory('cgls')

    x = np.zeros(A.N)
    r = b.copy()
    s = kronsum_apply_transpose(A, r)
    work = MATVEC_UNITS
    norm_rhs = np.linalg.norm(s)
    history.record(x, norm_rhs, work, x_true)
    if norm_rhs == 0:
        history.converged, history.stop_reason = True, 'zero right-hand side'
        return x, history

    p = s.copy()
    gamma = s.dot(s)
    previous = None
    for k in range(1, opts.max_iterations + 1):
        q = kronsum_apply(A, p)
        delta = q.dot(q) + lam2 * p.dot(p)
        if not np.isfinite(delta) or delta <= 0:
            raise SolverBreakdown("cgls: curvature %r at iteration %d"
                                  % (delta, k), k, x, history)
        if opts.track_search_direction_orthogonality:
            history.orthogonality.append(
                _orthogonality(A, opts.lam, p, delta, previous))
            previous = (p, delta)
        alpha = gamma / delta
        x = x + alpha * p
        r = r - alpha * q
        s = kronsum_apply_transpose(A, r) - lam2 * x
        work += 2 * MATVEC_UNITS
        gamma_new = s.dot(s)
        residual_norm = np.sqrt(gamma_new)
        history.record(x, residual_norm, work, x_true)
        history.iterations_used = k
        if opts.callback is not None:
            opts.callback(k, x)
        if residual_norm <= opts.rel_residual_tol * norm_rhs:
            history.converged, history.stop_reason = True, 'tolerance'
            return x, history
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
    history.stop_reason = 'max_iterations'
    return x, history


def _orthogonality(A, lam, p, pq, previous):
    """``|p_k^T H p_{k-1}| / (||p_k||_H ||p_{k-1}||_H)``, NaN at k = 1."""
    if previous is None:
        return float('nan')
    p_old, pq_old = previous
    coupling = p.dot(normal_matvec(A, lam, p_old))
    return float(abs(coupling) / np.sqrt(pq * pq_old))


def _preconditioned(A, b, M, opts, flexible):
    name = 'fpcg' if flexible else 'pcg'
    b = _check_system(A, b)
    if M.n != A.n:
        raise ShapeError("preconditioner of size %d for an operator of size "
                         "%d" % (M.n, A.n))
    x_true = _x_true(opts, A.N)
    history = ConvergenceHistory(name)

    x = np.zeros(A.N)
    r = kronsum_apply_transpose(A, b)
    work = MATVEC_UNITS
    norm_rhs = np.linalg.norm(r)
    if norm_rhs == 0:
        history.record(x, 0.0, work, x_true)
        history.converged, history.stop_reason = True, 'zero right-hand side'
        return x, history
    z = precond_solve(M, r)
    history.precond_solves += 1
    work += PRECOND_UNITS
    history.record(x, norm_rhs, work, x_true)
    rz = r.dot(z)
    if not np.isfinite(rz) or rz <= 0:
        raise SolverBreakdown("%s: preconditioned residual product %r at "
                              "iteration 0" % (name, rz), 0, x, history)

    p = z.copy()
    previous = None
    for k in range(1, opts.max_iterations + 1):
        q = normal_matvec(A, opts.lam, p)
        pq = p.dot(q)
        if not np.isfinite(pq) or pq <= 0:
            raise SolverBreakdown("%s: curvature %r at iteration %d"
                                  % (name, pq, k), k, x, history)
        if opts.track_search_direction_orthogonality:
            history.orthogonality.append(
                _orthogonality(A, opts.lam, p, pq, previous))
            previous = (p, pq)
        alpha = rz / pq
        x = x + alpha * p
        r_new = r - alpha * q
        work += 2 * MATVEC_UNITS
        residual_norm = np.linalg.norm(r_new)
        history.record(x, residual_norm, work, x_true)
        history.iterations_used = k
        if opts.callback is not None:
            opts.callback(k, x)
        if residual_norm <= opts.rel_residual_tol * norm_rhs:
            history.converged, history.stop_reason = True, 'tolerance'
            return x, history
        if k == opts.max_iterations:
            break
        z_new = precond_solve(M, r_new)
        history.precond_solves += 1
        work += PRECOND_UNITS
        history.work_units[-1] = work
        if flexible:
            rz_new = z_new.dot(r_new)
            beta = z_new.dot(r_new - r) / rz
        else:
            rz_new = z_new.dot(r_new)
            beta = rz_new / rz
        if not (np.isfinite(rz_new) and np.isfinite(beta)) or rz_new <= 0:
            raise SolverBreakdown("%s: non-finite or non-positive "
                                  "preconditioned residual product at "
                                  "iteration %d (preconditioner overflow?)"
                                  % (name, k), k, x, history)
        p = z_new + beta * p
        r, z, rz = r_new, z_new, rz_new
    history.stop_reason = 'max_iterations'
    return x, history


def pcg(A, b, M, opts):
    """Preconditioned CG with Fletcher-Reeves updates."""
    return _preconditioned(A, b, M, opts, flexible=False)


def fpcg(A, b, M, opts):
    """Flexible PCG: Polak-Ribiere updates, one extra stored residual."""
    return _preconditioned(A, b, M, opts, flexible=True)


def solve(solver, A, b, M, opts):
    if solver == 'cgls':
        return cgls(A, b, opts)
    if solver == 'pcg':
        return pcg(A, b, M, opts)
    if solver == 'fpcg':
        return fpcg(A, b, M, opts)
    raise ConfigError("unknown solver %r (expected one of %s)"
                      % (solver, ", ".join(SOLVERS)))


#
# Work accounting
#

def plateau_iteration(history, tol=0.01):
    """
    First iteration whose relative error is within ``(1 + tol)`` of the
    run's minimum relative error.
    """
    errors = history.relative_errors
    if not errors:
        raise ConfigError("plateau is undefined without x_true")
    finite = [e for e in errors if np.isfinite(e)]
    if not finite:
        raise ConfigError("plateau is undefined: no finite relative error")
    threshold = (1 + tol) * min(finite)
    for k, error in enumerate(errors):
        if error <= threshold:
            return k


@dataclass(eq=False)
class WorkReport(object):
    """
    Whether preconditioning pays off: ``(2 + 1/4) m_P < 2 m_N``, that is
    ``m_P < 8/9 m_N``. Compared as ``9 m_P < 8 m_N`` so the strict
    inequality is decided in integers.
    """
    m_P: int
    m_N: int
    threshold: float
    preconditioning_pays: bool

    @classmethod
    def from_iterations(cls, m_P, m_N):
        m_P, m_N = int(m_P), int(m_N)
        return cls(m_P, m_N, 8.0 * m_N / 9.0, 9 * m_P < 8 * m_N)

    def as_dict(self):
        return {
            'm_P': self.m_P,
            'm_N': self.m_N,
            'threshold': self.threshold,
            'preconditioning_pays': self.preconditioning_pays,
        }


def work_report(h_precond, h_baseline, tol=0.01):
    return WorkReport.from_iterations(plateau_iteration(h_precond, tol),
                                      plateau_iteration(h_baseline, tol))
