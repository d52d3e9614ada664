import os

from nose.tools import eq_, ok_, raises

from kronprec.config import (DEFAULTS, ExperimentConfig, coerce,
                             load_settings, normalize_key, resolve_config,
                             with_value)
from kronprec.exceptions import ConfigError

from utils import with_tmpdir


def _write(directory, name, text):
    path = os.path.join(directory, name)
    with open(path, 'w') as f:
        f.write(text)
    return path


def _error(**overrides):
    try:
        resolve_config(overrides=overrides)
    except ConfigError as e:
        return str(e)
    raise AssertionError("no ConfigError for %r" % (overrides,))


def test_defaults():
    config = resolve_config()
    ok_(isinstance(config, ExperimentConfig))
    eq_(dict(config), dict(DEFAULTS))
    eq_((config.blur, config.n, config.fmt, config.solver, config.param),
        ('gauss', 32, 'fp16', 'pcg', 'opt'))


def test_normalize_key():
    eq_(normalize_key(' precond-lambda '), 'precond_lambda')


@with_tmpdir
def test_plain_settings_file(tmpdir):
    path = _write(tmpdir, 'run.conf', "# a comment\n\nblur = motion\n"
                  "psf-size = 9\nnoise=0.05\nfpcg = yes\n")
    eq_(load_settings(path), {'blur': 'motion', 'psf_size': '9',
                              'noise': '0.05', 'fpcg': 'yes'})
    config = resolve_config(path)
    eq_((config.blur, config.psf_size, config.noise, config.fpcg),
        ('motion', 9, 0.05, True))


@with_tmpdir
def test_yaml_settings_file(tmpdir):
    path = _write(tmpdir, 'run.yaml', "blur: speckle\nblob-sigma: 0.5\n"
                  "sweep_values: [0.01, 0.1]\nscale: false\n")
    config = resolve_config(path)
    eq_((config.blur, config.blob_sigma, config.sweep_values, config.scale),
        ('speckle', 0.5, ['0.01', '0.1'], False))


@with_tmpdir
def test_empty_yaml_file_changes_nothing(tmpdir):
    path = _write(tmpdir, 'empty.yml', "")
    eq_(dict(resolve_config(path)), dict(DEFAULTS))


@with_tmpdir
def test_command_line_beats_settings_file(tmpdir):
    """
    Precedence is defaults < settings file < command line
    """
    path = _write(tmpdir, 'run.conf', "n = 64\nseed = 3\n")
    config = resolve_config(path, {'n': '48', 'seed': None})
    eq_((config.n, config.seed), (48, 3))


@raises(ConfigError)
def test_missing_settings_file():
    resolve_config('/nonexistent/kronprec.conf')


@with_tmpdir
@raises(ConfigError)
def test_malformed_settings_line(tmpdir):
    resolve_config(_write(tmpdir, 'bad.conf', "blur gauss\n"))


@with_tmpdir
@raises(ConfigError)
def test_invalid_yaml(tmpdir):
    resolve_config(_write(tmpdir, 'bad.yaml', "blur: [gauss\n"))


@with_tmpdir
@raises(ConfigError)
def test_yaml_must_be_a_mapping(tmpdir):
    resolve_config(_write(tmpdir, 'list.yaml', "- gauss\n- motion\n"))


@with_tmpdir
@raises(ConfigError)
def test_unknown_key_in_settings_file(tmpdir):
    resolve_config(_write(tmpdir, 'run.conf', "colour = red\n"))


@raises(ConfigError)
def test_unknown_override_key():
    resolve_config(overrides={'colour': 'red'})


def test_coerce():
    eq_(coerce('n', '16'), 16)
    eq_(coerce('n', 16.0), 16)
    eq_(coerce('noise', '1e-3'), 1e-3)
    eq_(coerce('fpcg', 'off'), False)
    eq_(coerce('scale', True), True)
    eq_(coerce('lambda', 'none'), None)
    eq_(coerce('lambda', ''), None)
    eq_(coerce('sweep_values', ' 1, 2 ,,3'), ['1', '2', '3'])
    eq_(coerce('sweep_values', ''), [])


@raises(ConfigError)
def test_coerce_rejects_non_integers():
    coerce('n', '2.5')


@raises(ConfigError)
def test_coerce_rejects_non_booleans():
    coerce('fpcg', 'maybe')


@raises(ConfigError)
def test_coerce_rejects_unknown_keys():
    coerce('colour', 'red')


def test_validation_errors_name_the_field():
    cases = [
        ({'n': '0'}, 'n:'),
        ({'psf_size': '4'}, 'psf_size:'),
        ({'n': '8', 'psf_size': '9'}, 'psf_size:'),
        ({'blur': 'airy'}, 'blur:'),
        ({'solver': 'gmres'}, 'solver:'),
        ({'param': 'lcurve'}, 'param:'),
        ({'fmt': 'fp8'}, 'fmt:'),
        ({'weighting': 'optimal'}, 'weighting:'),
        ({'noise': '-0.1'}, 'noise:'),
        ({'param': 'discrepancy', 'noise': '0'}, 'noise:'),
        ({'param': 'fixed'}, 'lambda:'),
        ({'lambda': '-1'}, 'lambda:'),
        ({'omega': '0'}, 'omega:'),
        ({'truncation_tol': '1'}, 'truncation_tol:'),
        ({'workers': '0'}, 'workers:'),
        ({'sweep_field': 'sweep_values'}, 'sweep_field:'),
        ({'sweep_values': ''}, 'sweep_values:'),
    ]
    for overrides, prefix in cases:
        message = _error(**overrides)
        ok_(message.startswith(prefix), "%r gave %r" % (overrides, message))


def test_fixed_lambda_is_accepted():
    config = resolve_config(overrides={'param': 'fixed', 'lambda': '0.02'})
    eq_(config['lambda'], 0.02)


def test_psf_params_follow_the_blur_kind():
    config = resolve_config(overrides={'blur': 'motion', 'length': '7'})
    eq_(config.psf_params(), {'length': 7, 'angle': 45.0})
    eq_(resolve_config(overrides={'blur': 'delta'}).psf_params(), {})


def test_as_dict_is_sorted():
    keys = list(resolve_config().as_dict())
    eq_(keys, sorted(keys))


def test_with_value_copies():
    config = resolve_config()
    derived = with_value(config, 'noise', '0.1')
    eq_(derived.noise, 0.1)
    eq_(config.noise, 0.01)


@raises(ConfigError)
def test_with_value_validates():
    with_value(resolve_config(), 'psf_size', '6')
