"""
Internal shared-state variables such as output levels, CLI option definitions
and the command registry.
"""

from collections.abc import MutableMapping
from optparse import make_option

from kronprec.colors import red, yellow
from kronprec.version import get_version


#
# Dictionary support structures
#

class AttributeDict(MutableMapping):
    """
    Dictionary subclass enabling attribute lookup/assignment of keys/values.

    For example::

        >>> m = AttributeDict({'blur': 'gauss'})
        >>> m.blur
        'gauss'
        >>> m.blur = 'defocus'
        >>> m['blur']
        'defocus'

    """
    def __init__(self, data=None, **kwargs):
        self.__dict__['_data'] = {}
        if data is not None:
            self.update(data)
        if kwargs:
            self.update(kwargs)

    def __getitem__(self, key):
        v = self._data[key]
        if isinstance(v, dict) and not isinstance(v, AttributeDict):
            # magically convert inner dicts into attributedicts
            self[key] = v = AttributeDict(v)
        return v

    def __setitem__(self, key, value):
        self._data[key] = value

    def __delitem__(self, key):
        del self._data[key]

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def copy(self):
        return self.__class__(dict(self._data))

    def __getattr__(self, key):
        if key.startswith('__') or key == '_data':
            # copy/pickle protocol lookups must not reach the data dict
            raise AttributeError(key)
        try:
            return self[key]
        except KeyError:
            # __getattr__ must raise AttributeError, not KeyError
            raise AttributeError(key)

    def __setattr__(self, key, value):
        self[key] = value

    def __str__(self):
        return str(self._data)

    def __repr__(self):
        return repr(self._data)


class _AliasDict(AttributeDict):
    """
    `AttributeDict` subclass that allows for "aliasing" of keys to other keys.

    Upon creation, takes an ``aliases`` mapping, which should map alias names
    to lists of key names. Aliases do not store their own value, but instead
    set (override) all mapped keys' values. For example, in the following
    `_AliasDict`, calling ``levels['solver'] = True`` will set both
    ``levels['running']`` and ``levels['progress']``::

        levels = _AliasDict(
            {'running': True, 'progress': False},
            aliases={'solver': ['running', 'progress']}
        )

    Reading aliases is not supported, since the aliased values may disagree.
    Aliases are recursive, so an alias may name another alias.
    """
    def __init__(self, arg=None, aliases=None):
        self.__dict__['aliases'] = aliases or {}
        super(_AliasDict, self).__init__(arg)

    def __setitem__(self, key, value):
        if key in self.aliases:
            for aliased in self.aliases[key]:
                self[aliased] = value
        else:
            return super(_AliasDict, self).__setitem__(key, value)

    def expand_aliases(self, keys):
        ret = []
        for key in keys:
            if key in self.aliases:
                ret.extend(self.expand_aliases(self.aliases[key]))
            else:
                ret.append(key)
        return ret


#
# Experiment options
#

# Every ExperimentConfig key which may be given on the command line is defined
# here. Defaults are deliberately None: the real defaults live in
# `kronprec.config.DEFAULTS`, so that a value left unset on the command line
# does not clobber one read from a config file.
#
# optparse turns hyphens into underscores when deriving `dest`, e.g.
# `--precond-lambda` becomes `precond_lambda`.
config_options = [

    make_option('--blur', metavar='NAME',
        help="blur kind: gauss, defocus, motion, shake, speckle or delta"
    ),
    make_option('--n', metavar='INT',
        help="image side length (the operator is n^2 x n^2)"
    ),
    make_option('--noise', metavar='FLOAT',
        help="relative noise level ||e||/||b_true||"
    ),
    make_option('--seed', metavar='INT',
        help="seed for randomized PSFs and noise"
    ),
    make_option('--fmt', metavar='NAME',
        help="preconditioner storage format: fp16, bfloat16, fp32, fp64 or "
             "custom:t=T,emax=E,subnormals=0|1"
    ),
    make_option('--solver', metavar='NAME',
        help="cgls, pcg or fpcg"
    ),
    make_option('--param', metavar='NAME',
        help="parameter rule: opt, gcv, wgcv, discrepancy or fixed"
    ),
    make_option('--omega', metavar='FLOAT',
        help="wGCV weight"
    ),
    make_option('--eta', metavar='FLOAT',
        help="discrepancy safety factor"
    ),
    make_option('--lambda', metavar='FLOAT',
        help="regularization parameter for --param fixed"
    ),
    make_option('--maxit', metavar='INT',
        help="maximum number of solver iterations"
    ),
    make_option('--precond-lambda', metavar='FLOAT',
        help="override the preconditioner's lambda"
    ),
    make_option('--out', metavar='DIR',
        help="output directory"
    ),
    make_option('--psf-size', metavar='INT',
        help="odd PSF array side length"
    ),
    make_option('--sigma', metavar='FLOAT',
        help="Gaussian PSF width"
    ),
    make_option('--radius', metavar='FLOAT',
        help="defocus PSF radius"
    ),
    make_option('--length', metavar='INT',
        help="motion PSF length in pixels"
    ),
    make_option('--angle', metavar='FLOAT',
        help="motion PSF angle in degrees"
    ),
    make_option('--steps', metavar='INT',
        help="shake PSF random walk steps"
    ),
    make_option('--blobs', metavar='INT',
        help="speckle PSF blob count"
    ),
    make_option('--blob-sigma', metavar='FLOAT',
        help="speckle PSF blob width"
    ),
    make_option('--truncation-tol', metavar='FLOAT',
        help="relative singular value cutoff for the PSF decomposition"
    ),
    make_option('--weighting', metavar='NAME',
        help="nearest Kronecker product weighting: toeplitz or uniform"
    ),
    make_option('--tol', metavar='FLOAT',
        help="relative normal-equations residual tolerance"
    ),
    make_option('--plateau-tol', metavar='FLOAT',
        help="relative slack defining the error plateau"
    ),
    make_option('--image', metavar='PATH',
        help="8-bit PGM image to use instead of the synthetic one"
    ),
    make_option('--bundle', metavar='DIR',
        help="reuse a problem bundle written by 'generate'"
    ),
    make_option('--baseline', metavar='DIR',
        help="output directory of a baseline 'solve' run for a work report"
    ),
    make_option('--fpcg', metavar='BOOL',
        help="also run flexible PCG in 'compare'"
    ),
    make_option('--compare-fp64', metavar='BOOL',
        help="also run PCG with a working-precision preconditioner in 'compare'"
    ),
    make_option('--sweep-field', metavar='KEY',
        help="config key varied by 'sweep'"
    ),
    make_option('--sweep-values', metavar='LIST',
        help="comma-separated values for --sweep-field"
    ),
    make_option('--workers', metavar='INT',
        help="concurrent runs in 'sweep'"
    ),
    make_option('--scale', metavar='BOOL',
        help="power-of-two scaling inside the preconditioner solve"
    ),
]


#
# Environment dictionary
#

# Process-wide runtime settings. Experiment parameters do NOT live here: they
# travel as ExperimentConfig objects so concurrent sweep runs never share them.
env = AttributeDict({
    'colors': False,
    'color_settings': {
        'abort': yellow,
        'prefix': red,
        'warn': yellow,
        },
    'command': None,
    'version': get_version('short'),
})


#
# Command dictionary
#

# Keys are the verb names, values the callables. Filled in by
# `kronprec.decorators.command` at import time of `kronprec.operations`.
commands = {}


#
# Output controls
#

# Keys are "levels" or "groups" of output, values are always boolean,
# determining whether output falling into the given group is printed or not.
#
# By default everything except 'progress' (one line per solver iteration) and
# 'debug' is printed.
output = _AliasDict({
    'status': True,
    'aborts': True,
    'warnings': True,
    'running': True,
    'progress': False,
    'debug': False,
    'user': True,
}, aliases={
    'everything': ['warnings', 'running', 'user', 'progress'],
    'solver': ['running', 'progress'],
})
