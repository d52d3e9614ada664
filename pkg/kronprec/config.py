"""
Experiment configuration: defaults, settings files and command-line
overrides merged into one validated `ExperimentConfig`.

Precedence is ``DEFAULTS`` < settings file < command line. Settings files use
the plain ``key = value`` format (``#`` starts a comment line); files ending
in ``.yaml`` or ``.yml`` are read as a YAML mapping instead. Keys may be
written with hyphens or underscores.
"""

import os
from collections import OrderedDict

from yaml import YAMLError, safe_load as load_yaml

from kronprec.deblur import PSF_KINDS
from kronprec.exceptions import ConfigError
from kronprec.krylov import SOLVERS
from kronprec.precision import format_by_name
from kronprec.regparam import METHODS
from kronprec.state import AttributeDict


WEIGHTINGS = ('toeplitz', 'uniform')

DEFAULTS = OrderedDict([
    ('blur', 'gauss'),
    ('n', 32),
    ('noise', 0.01),
    ('seed', 0),
    ('fmt', 'fp16'),
    ('solver', 'pcg'),
    ('param', 'opt'),
    ('omega', 1.0),
    ('eta', 1.0),
    ('lambda', None),
    ('maxit', 50),
    ('precond_lambda', None),
    ('out', 'kronprec-out'),
    ('psf_size', 15),
    ('sigma', 2.0),
    ('radius', 7.0),
    ('length', 9),
    ('angle', 45.0),
    ('steps', 30),
    ('blobs', 6),
    ('blob_sigma', 1.0),
    ('truncation_tol', 0.0),
    ('weighting', 'toeplitz'),
    ('tol', 1e-6),
    ('plateau_tol', 0.01),
    ('image', None),
    ('bundle', None),
    ('baseline', None),
    ('fpcg', False),
    ('compare_fp64', False),
    ('sweep_field', None),
    ('sweep_values', None),
    ('workers', 1),
    ('scale', True),
])

# PSF parameters passed through to `kronprec.deblur.make_psf`, per blur kind.
PSF_PARAMS = {
    'gauss': ('sigma',),
    'defocus': ('radius',),
    'motion': ('length', 'angle'),
    'shake': ('steps',),
    'speckle': ('blobs', 'blob_sigma'),
    'delta': (),
}

_TRUE = ('1', 'true', 'yes', 'on')
_FALSE = ('0', 'false', 'no', 'off')


def _to_bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError("not a boolean: %r" % (value,))


def _to_int(value):
    if isinstance(value, bool):
        raise ValueError("not an integer: %r" % (value,))
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError("not an integer: %r" % (value,))
        return int(value)
    return int(str(value).strip())


def _to_str(value):
    return str(value).strip()


def _to_values(value):
    if isinstance(value, (list, tuple)):
        values = [str(v).strip() for v in value]
    else:
        values = [v.strip() for v in str(value).split(',')]
    return [v for v in values if v]


_COERCE = {
    'blur': _to_str, 'fmt': _to_str, 'solver': _to_str, 'param': _to_str,
    'weighting': _to_str, 'out': _to_str, 'image': _to_str,
    'bundle': _to_str, 'baseline': _to_str, 'sweep_field': _to_str,
    'n': _to_int, 'seed': _to_int, 'maxit': _to_int, 'psf_size': _to_int,
    'length': _to_int, 'steps': _to_int, 'blobs': _to_int,
    'workers': _to_int,
    'noise': float, 'omega': float, 'eta': float, 'lambda': float,
    'precond_lambda': float, 'sigma': float, 'radius': float,
    'angle': float, 'blob_sigma': float, 'truncation_tol': float,
    'tol': float, 'plateau_tol': float,
    'fpcg': _to_bool, 'compare_fp64': _to_bool, 'scale': _to_bool,
    'sweep_values': _to_values,
}


class ExperimentConfig(AttributeDict):
    """
    Validated experiment settings. ``lambda`` is a keyword, so read it as
    ``config['lambda']``.
    """

    def as_dict(self):
        return OrderedDict((key, self[key]) for key in sorted(self))

    def psf_params(self):
        return dict((key, self[key]) for key in PSF_PARAMS[self.blur])


def normalize_key(key):
    return str(key).strip().replace('-', '_')


def load_settings(path):
    """
    Return the dictionary of settings found in the file at ``path``.

    A missing file is a `ConfigError`, as are malformed lines.
    """
    if not os.path.exists(path):
        raise ConfigError("config file %s does not exist" % path)
    with open(path) as f:
        text = f.read()
    if path.endswith(('.yaml', '.yml')):
        try:
            data = load_yaml(text)
        except YAMLError as e:
            raise ConfigError("config file %s is not valid YAML: %s"
                              % (path, e))
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError("config file %s must hold a mapping" % path)
        return dict((normalize_key(k), v) for k, v in data.items())
    settings = {}
    for number, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise ConfigError("%s line %d: expected key = value, got %r"
                              % (path, number, line))
        settings[normalize_key(key)] = value.strip()
    return settings


def coerce(key, value):
    """Convert one raw value for ``key``; ``None`` and ``''`` mean unset."""
    if key not in DEFAULTS:
        raise ConfigError("unknown config key %r" % key)
    if value is None or (isinstance(value, str) and not value.strip()
                         and key != 'sweep_values'):
        return None
    if isinstance(value, str) and value.strip().lower() == 'none':
        return None
    try:
        return _COERCE[key](value)
    except (TypeError, ValueError):
        raise ConfigError("%s: cannot interpret %r" % (key, value))


def _require(condition, key, message):
    if not condition:
        raise ConfigError("%s: %s" % (key, message))


def validate(config):
    """Check every field of ``config``; raises `ConfigError` naming the field."""
    _require(config.blur in PSF_KINDS, 'blur',
             "unknown blur kind %r (expected one of %s)"
             % (config.blur, ", ".join(PSF_KINDS)))
    _require(config.solver in SOLVERS, 'solver',
             "unknown solver %r (expected one of %s)"
             % (config.solver, ", ".join(SOLVERS)))
    _require(config.param in METHODS, 'param',
             "unknown parameter rule %r (expected one of %s)"
             % (config.param, ", ".join(METHODS)))
    _require(config.weighting in WEIGHTINGS, 'weighting',
             "expected toeplitz or uniform, got %r" % config.weighting)
    try:
        format_by_name(config.fmt)
    except ConfigError as e:
        raise ConfigError("fmt: %s" % e)
    _require(config.n is not None and config.n >= 1, 'n',
             "must be a positive integer")
    _require(config.psf_size is not None and config.psf_size >= 1
             and config.psf_size % 2 == 1, 'psf_size',
             "must be a positive odd integer")
    _require(config.psf_size <= config.n, 'psf_size',
             "%d exceeds the image size n=%d" % (config.psf_size, config.n))
    _require(config.noise is not None and config.noise >= 0, 'noise',
             "must be >= 0")
    _require(config.seed is not None and config.seed >= 0, 'seed',
             "must be a nonnegative integer")
    _require(config.maxit is not None and config.maxit >= 1, 'maxit',
             "must be >= 1")
    _require(config.omega is not None and config.omega > 0, 'omega',
             "must be positive")
    _require(config.eta is not None and config.eta > 0, 'eta',
             "must be positive")
    _require(config.tol is not None and config.tol > 0, 'tol',
             "must be positive")
    _require(config.plateau_tol is not None and config.plateau_tol >= 0,
             'plateau_tol', "must be >= 0")
    _require(config.truncation_tol is not None
             and 0 <= config.truncation_tol < 1, 'truncation_tol',
             "must lie in [0, 1)")
    _require(config.workers is not None and config.workers >= 1, 'workers',
             "must be >= 1")
    if config.param == 'fixed':
        _require(config['lambda'] is not None, 'lambda',
                 "param=fixed needs a lambda")
    for key in ('lambda', 'precond_lambda'):
        if config[key] is not None:
            _require(config[key] >= 0, key, "must be >= 0")
    if config.param == 'discrepancy':
        _require(config.noise > 0, 'noise',
                 "the discrepancy rule needs noise > 0")
    if config.sweep_field is not None:
        _require(config.sweep_field in DEFAULTS and
                 not config.sweep_field.startswith('sweep_'), 'sweep_field',
                 "cannot sweep over %r" % config.sweep_field)
    if config.sweep_values is not None:
        _require(len(config.sweep_values) > 0, 'sweep_values',
                 "empty value list")
    return config


def resolve_config(file_path=None, overrides=None):
    """
    Merge defaults, the settings file at ``file_path`` and ``overrides``
    (typically parsed command-line options; ``None`` values are skipped).
    """
    config = ExperimentConfig(DEFAULTS)
    layers = []
    if file_path:
        layers.append(load_settings(file_path))
    if overrides:
        layers.append(dict((normalize_key(k), v) for k, v in overrides.items()))
    for layer in layers:
        for key, value in layer.items():
            if key not in DEFAULTS:
                raise ConfigError("unknown config key %r" % key)
            value = coerce(key, value)
            if value is not None:
                config[key] = value
    return validate(config)


def with_value(config, key, value):
    """A validated copy of ``config`` with ``key`` set from a raw ``value``."""
    derived = ExperimentConfig(dict(config))
    derived[key] = coerce(key, value)
    return validate(derived)
