"""
Everything a library user normally needs, importable in one line::

    from kronprec.api import *

Kept apart from ``kronprec/__init__.py`` so that importing the package (for
instance to read its version in ``setup.py``) does not pull in numpy and
scipy.
"""
from kronprec.context_managers import hide, settings, show
from kronprec.deblur import (Psf, TestProblem, default_image, load_problem,
    make_psf, make_test_problem, psf_to_kronsum, save_problem)
from kronprec.factor import (KronSvdPreconditioner, approx_spectrum,
    build_preconditioner, kron_svd, nearest_kron, precond_solve, project_b,
    project_x, svd_dense)
from kronprec.kron import (KroneckerSum, kron_apply, kronsum_apply,
    kronsum_apply_transpose, kronsum_densify, kronsum_frobenius_distance,
    unvec, vec)
from kronprec.krylov import (ConvergenceHistory, SolverOptions, WorkReport,
    cgls, fpcg, normal_matvec, pcg, work_report)
from kronprec.lpblas import lp_dot, lp_matmul, lp_matvec, pairwise_sum
from kronprec.precision import (FP16, FP32, FP64, BFLOAT16, PrecisionFormat,
    RoundingMode, counting_rounds, format_by_name, round_array,
    round_call_count, round_value)
from kronprec.regparam import (ParamChoice, SpectralData, discrepancy,
    filtered_solution, gcv, lambda_opt, spectral_data, wgcv)
from kronprec.state import env, output
from kronprec.utils import abort, fastprint, puts, warn
