"""
The ``kronprec`` verbs: generate, decompose, solve, compare and sweep.

Each verb takes a validated `kronprec.config.ExperimentConfig`, writes its
results below ``config.out`` and returns a dictionary describing them.
"""

import math
import os
import re

import numpy as np

from kronprec import io
from kronprec.config import with_value
from kronprec.context_managers import hide
from kronprec.decorators import command, requires
from kronprec.deblur import (default_image, load_problem, make_psf,
                             make_test_problem, save_problem)
from kronprec.exceptions import (BundleError, ConfigError, NoRootError,
                                 SolverBreakdown)
from kronprec.factor import (approximation_errors, build_preconditioner,
                             kron_svd, nearest_kron)
from kronprec.krylov import (ConvergenceHistory, SolverOptions,
                             plateau_iteration, solve, work_report)
from kronprec.precision import FP64, format_by_name
from kronprec.regparam import select_parameter, spectral_data
from kronprec.state import output
from kronprec.thread_handling import run_in_threads
from kronprec.utils import puts, warn


CONVERGENCE_HEADER = ['iteration', 'relative_error', 'residual_norm',
                      'cumulative_work_units']


#
# Shared steps
#

def build_problem(config):
    """The test problem described by ``config``: a saved bundle or a new one."""
    if config.bundle:
        return load_problem(config.bundle)
    if config.image:
        image = io.read_pgm(config.image)
        if image.shape[0] != image.shape[1]:
            raise ConfigError("image: %s is %dx%d, only square images are "
                              "supported" % ((config.image,) + image.shape))
        if image.shape[0] < config.psf_size:
            raise ConfigError("psf_size: %d exceeds the %dx%d image"
                              % (config.psf_size, image.shape[0],
                                 image.shape[0]))
    else:
        image = default_image(config.n)
    psf = make_psf(config.blur, config.psf_size, config.psf_params(),
                   config.seed)
    return make_test_problem(image, psf, config.noise, config.seed,
                             config.truncation_tol)


def approximate(config, tp):
    """Nearest Kronecker product of the problem's blur and its factor SVDs."""
    A_r, A_c = nearest_kron(tp.psf, tp.n, config.weighting)
    return kron_svd(A_r, A_c)


def choose_lambda(config, tp, decomposition):
    sd = spectral_data(decomposition, tp.b, tp.x_true)
    choice = select_parameter(config.param, sd, omega=config.omega,
                              eta=config.eta, noise_norm=tp.noise_norm,
                              lam=config['lambda'])
    if choice.flat:
        warn("the %s objective is flat over [%g, %g]; using lambda=%g"
             % (choice.method, choice.bracket[0], choice.bracket[1],
                choice.lam))
    return choice


def _progress(solver):
    def report(k, x):
        if output.progress:
            puts("%s iteration %d" % (solver, k))
    return report


def run_solver(config, tp, decomposition, lam, solver, fmt):
    """
    Run one solver; returns ``(x, history, failure)``.

    A `SolverBreakdown` does not propagate: the partial iterate and history
    are returned with ``failure`` holding the reason.
    """
    M = None
    if solver != 'cgls':
        precond_lam = config.precond_lambda
        if precond_lam is None:
            precond_lam = lam
        M = build_preconditioner(decomposition.A_r, decomposition.A_c,
                                 precond_lam, fmt, decomposition=decomposition,
                                 scale=config.scale)
    opts = SolverOptions(lam, config.maxit, config.tol, tp.x_true,
                         callback=_progress(solver))
    try:
        x, history = solve(solver, tp.A, tp.b, M, opts)
    except SolverBreakdown as e:
        history = e.history or ConvergenceHistory(solver)
        history.stop_reason = str(e)
        x = e.x if e.x is not None else np.zeros(tp.A.N)
        return x, history, str(e)
    if not history.converged:
        warn("%s stopped after %d iterations without reaching tol=%g"
             % (solver, history.iterations_used, config.tol))
    return x, history, None


def run_summary(history, x, tp, plateau_tol, failure=None):
    errors = history.relative_errors
    summary = {
        'solver': history.solver,
        'iterations': history.iterations_used,
        'converged': history.converged,
        'stop_reason': history.stop_reason,
        'precond_solves': history.precond_solves,
        'final_relative_error': float(np.linalg.norm(x - tp.x_true)
                                      / np.linalg.norm(tp.x_true)),
        'plateau_iteration': None,
        'failure': failure,
    }
    if errors:
        summary['plateau_iteration'] = plateau_iteration(history, plateau_tol)
        summary['min_relative_error'] = min(errors)
    return summary


def write_history(path, history):
    return io.write_csv(path, 'convergence', CONVERGENCE_HEADER,
                        history.rows())


def _number(cell):
    return float(cell) if cell != '' else float('nan')


def load_history(path, solver='baseline'):
    """Rebuild a `ConvergenceHistory` from a ``convergence.csv`` file."""
    header, rows = io.read_csv(path, 'convergence')
    if header != CONVERGENCE_HEADER:
        raise BundleError("%s has columns %s, expected %s"
                          % (path, header, CONVERGENCE_HEADER))
    history = ConvergenceHistory(solver)
    for row in rows:
        history.relative_errors.append(_number(row[1]))
        history.residual_norms.append(_number(row[2]))
        history.work_units.append(_number(row[3]))
    history.relative_errors = [e for e in history.relative_errors
                               if not math.isnan(e)]
    history.iterations_used = max(len(rows) - 1, 0)
    return history


def reconstruction(x, n):
    return np.asarray(x).reshape((n, n), order='F')


#
# Verbs
#

@command
def cmd_generate(config):
    """
    Generate a test problem bundle plus PGM previews.

    Writes ``bundle/`` (see `kronprec.deblur.save_problem`) and
    ``xtrue.pgm``, ``btrue.pgm`` and ``b.pgm`` into the output directory.
    """
    tp = build_problem(config)
    out = io.ensure_dir(config.out)
    bundle = save_problem(tp, os.path.join(out, 'bundle'))
    for name, image in (('xtrue', tp.x_true), ('btrue', tp.b_true),
                        ('b', tp.b)):
        io.write_pgm(os.path.join(out, name + '.pgm'),
                     reconstruction(image, tp.n))
    puts("%s blur, n=%d, %d Kronecker term(s), noise %g -> %s"
         % (tp.psf.kind, tp.n, len(tp.A), tp.noise_level, bundle))
    return {'bundle': bundle, 'terms': len(tp.A)}


@command
def cmd_decompose(config):
    """
    Report how well one Kronecker product approximates the blur.

    Prints the number of terms of the exact Kronecker sum and the relative
    Frobenius error of the nearest Kronecker product, with its factors as
    computed and rounded to ``fmt``. Also written to ``decompose.csv``.
    """
    tp = build_problem(config)
    decomposition = approximate(config, tp)
    fmt = format_by_name(config.fmt)
    exact, rounded = approximation_errors(tp.A, decomposition.A_r,
                                          decomposition.A_c, fmt)
    row = (tp.psf.kind, tp.n, len(tp.A), fmt.name, exact, rounded)
    out = io.ensure_dir(config.out)
    io.write_csv(os.path.join(out, 'decompose.csv'), 'decompose',
                 ['blur', 'n', 'terms', 'fmt', 'relative_error',
                  'relative_error_rounded'], [row])
    puts("%s: %d term(s), relative error %.4e (%s factors: %.4e)"
         % (tp.psf.kind, len(tp.A), exact, fmt.name, rounded))
    return {'terms': len(tp.A), 'relative_error': exact,
            'relative_error_rounded': rounded}


@command
def cmd_solve(config):
    """
    Choose lambda and run one solver.

    Writes ``convergence.csv`` (one row per iteration), ``summary.json`` and
    ``reconstruction.pgm``. A parameter rule without a solution (for example
    a discrepancy target beyond the achievable residual) is reported in the
    summary instead of failing the run. With ``baseline`` set to an earlier
    run's output directory, the summary carries a work report against it.
    """
    out = io.ensure_dir(config.out)
    summary_path = os.path.join(out, 'summary.json')
    tp = build_problem(config)
    decomposition = approximate(config, tp)
    summary = {'config': config.as_dict()}
    try:
        choice = choose_lambda(config, tp, decomposition)
    except NoRootError as e:
        summary.update(converged=False, failure=str(e), no_root=e.side)
        io.write_json(summary_path, 'summary', summary)
        warn(str(e))
        return summary
    summary['lambda'] = choice.as_dict()
    x, history, failure = run_solver(config, tp, decomposition, choice.lam,
                                     config.solver, config.fmt)
    summary.update(run_summary(history, x, tp, config.plateau_tol, failure))
    write_history(os.path.join(out, 'convergence.csv'), history)
    io.write_pgm(os.path.join(out, 'reconstruction.pgm'),
                 reconstruction(x, tp.n))
    if config.baseline:
        baseline = load_history(os.path.join(config.baseline,
                                             'convergence.csv'))
        summary['work_report'] = work_report(history, baseline,
                                             config.plateau_tol).as_dict()
    io.write_json(summary_path, 'summary', summary)
    puts("%s with %s lambda=%.4e: %d iteration(s), relative error %.4f"
         % (config.solver, choice.method, choice.lam,
            history.iterations_used, summary['final_relative_error']))
    if failure:
        warn(failure)
    return summary


@command
def cmd_compare(config):
    """
    Compare CGLS against preconditioned CG on one problem.

    Runs CGLS and PCG (plus flexible PCG with ``fpcg=true`` and PCG with a
    working-precision preconditioner with ``compare_fp64=true``) with the same
    lambda. Writes ``comparison.csv`` with every run's per-iteration series
    and ``work_report.json`` deciding whether preconditioning pays off. As
    in 'solve', a parameter rule without a solution is recorded in
    ``work_report.json`` and no solver runs.
    """
    out = io.ensure_dir(config.out)
    report_path = os.path.join(out, 'work_report.json')
    tp = build_problem(config)
    decomposition = approximate(config, tp)
    try:
        choice = choose_lambda(config, tp, decomposition)
    except NoRootError as e:
        report = {'config': config.as_dict(), 'converged': False,
                  'failure': str(e), 'no_root': e.side}
        io.write_json(report_path, 'work_report', report)
        warn(str(e))
        return report
    runs = [('cgls', 'cgls', config.fmt), ('pcg', 'pcg', config.fmt)]
    if config.fpcg:
        runs.append(('fpcg', 'fpcg', config.fmt))
    if config.compare_fp64:
        runs.append(('pcg_fp64', 'pcg', FP64))
    histories, results, rows = {}, {}, []
    for name, solver, fmt in runs:
        x, history, failure = run_solver(config, tp, decomposition,
                                         choice.lam, solver, fmt)
        histories[name] = history
        results[name] = run_summary(history, x, tp, config.plateau_tol,
                                    failure)
        rows.extend((name,) + row for row in history.rows())
        io.write_pgm(os.path.join(out, 'reconstruction_%s.pgm' % name),
                     reconstruction(x, tp.n))
    io.write_csv(os.path.join(out, 'comparison.csv'), 'comparison',
                 ['solver'] + CONVERGENCE_HEADER, rows)
    report = {
        'config': config.as_dict(),
        'lambda': choice.as_dict(),
        'runs': results,
        'work_report': work_report(histories['pcg'], histories['cgls'],
                                   config.plateau_tol).as_dict(),
    }
    if 'fpcg' in histories:
        report['fpcg_work_report'] = work_report(
            histories['fpcg'], histories['cgls'], config.plateau_tol).as_dict()
    if 'pcg_fp64' in histories:
        report['fp64_final_error_difference'] = abs(
            results['pcg']['final_relative_error'] -
            results['pcg_fp64']['final_relative_error'])
    io.write_json(report_path, 'work_report', report)
    verdict = report['work_report']
    puts("m_P=%d m_N=%d threshold=%.3f: preconditioning %s"
         % (verdict['m_P'], verdict['m_N'], verdict['threshold'],
            "pays" if verdict['preconditioning_pays'] else "does not pay"))
    return report


def _run_dir(index, value):
    return "run-%02d-%s" % (index, re.sub(r'[^A-Za-z0-9.+-]', '_', value))


@command
@requires('sweep_field', 'sweep_values')
def cmd_sweep(config):
    """
    Repeat 'solve' for each of ``sweep_values`` assigned to ``sweep_field``.

    Runs go to ``run-NN-VALUE`` subdirectories, up to ``workers`` at a time,
    and are summarized in ``sweep.csv`` in value order. A failing run is
    recorded in its row and the sweep carries on.
    """
    out = io.ensure_dir(config.out)
    field = config.sweep_field
    jobs, rows = [], {}
    for index, value in enumerate(config.sweep_values):
        try:
            run = with_value(config, field, value)
        except ConfigError as e:
            rows[index] = (field, value, None, None, None, False, str(e))
            continue
        run['sweep_field'] = run['sweep_values'] = None
        run['out'] = os.path.join(out, _run_dir(index, value))
        jobs.append((str(index), cmd_solve, (run,)))
    with hide('running'):
        handlers = run_in_threads(jobs, config.workers)
    for handler in handlers:
        index = int(handler.name)
        value = config.sweep_values[index]
        if handler.failed:
            rows[index] = (field, value, None, None, None, False,
                           str(handler.exception[1]))
            continue
        summary = handler.result
        lam = summary.get('lambda', {}).get('lambda')
        rows[index] = (field, value, lam,
                       summary.get('final_relative_error'),
                       summary.get('iterations'), summary.get('converged'),
                       summary.get('failure'))
    table = [rows[index] for index in sorted(rows)]
    path = io.write_csv(os.path.join(out, 'sweep.csv'), 'sweep',
                        ['field', 'value', 'lambda', 'final_relative_error',
                         'iterations', 'converged', 'error'], table)
    puts("%d run(s) over %s -> %s" % (len(table), field, path))
    return {'rows': table}
