"""
Exception hierarchy shared by the library modules.

Library code raises these; only `kronprec.main` turns them into exit codes
(see `EXIT_CODES`).
"""


class KronprecError(Exception):
    """Base class for every error raised on purpose by kronprec."""
    exit_code = 1


class ConfigError(KronprecError, ValueError):
    """Invalid or unknown configuration value."""
    exit_code = 2


class ShapeError(KronprecError, ValueError):
    """Operands whose shapes or lengths do not conform."""
    exit_code = 4


class SizeGuardError(KronprecError, ValueError):
    """Refusal to build a dense operator above the size guard."""
    exit_code = 4


class BundleError(KronprecError, IOError):
    """Missing, truncated or corrupt on-disk data."""
    exit_code = 3


class NumericalError(KronprecError, ArithmeticError):
    """A numerical procedure could not produce a meaningful result."""
    exit_code = 4


class SolverBreakdown(NumericalError):
    """
    Krylov iteration stopped early.

    ``iteration`` is the iteration at which the breakdown was detected; ``x``
    and ``history`` hold the last good iterate and the diagnostics gathered so
    far, so callers can still report a partial run.
    """

    def __init__(self, message, iteration, x=None, history=None):
        NumericalError.__init__(self, message)
        self.iteration = iteration
        self.x = x
        self.history = history


class NoRootError(NumericalError):
    """
    The discrepancy equation has no root inside the search bracket.

    ``side`` is ``'too large'`` when the target residual exceeds what any
    admissible parameter achieves and ``'too small'`` in the opposite case.
    """

    def __init__(self, message, side):
        NumericalError.__init__(self, message)
        self.side = side


EXIT_CODES = {
    'ok': 0,
    'config': ConfigError.exit_code,
    'io': BundleError.exit_code,
    'numerical': NumericalError.exit_code,
}
