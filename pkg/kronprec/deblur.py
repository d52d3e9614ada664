"""
Test problems for spatially invariant blur with zero boundary conditions.

A PSF array P (odd side n_p, point source at its center c) acts on an n x n
image X by zero-padded convolution::

    B[i, j] = sum_{p, q} P[p, q] X[i - p + c, j - q + c]

Writing ``P = sum_k s_k u_k v_k^T`` turns that operator into the exact
Kronecker sum ``sum_k T(sqrt(s_k) v_k) kron T(sqrt(s_k) u_k)`` of banded
Toeplitz factors (see `toeplitz_factor`), with one term per nonzero singular
value of P.

Problem bundles are directories holding ``meta.json`` plus raw little-endian
float64 arrays in column-major order; the operator is never stored, it is
rebuilt from the PSF on load.
"""

import hashlib
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz
from scipy.ndimage import gaussian_filter

from kronprec.exceptions import BundleError, ConfigError, ShapeError
from kronprec.io import ensure_dir, read_json, write_json
from kronprec.kron import KroneckerSum, kronsum_apply, svd_dense, vec


PSF_KINDS = ('gauss', 'defocus', 'motion', 'shake', 'speckle', 'delta')

PSF_DEFAULTS = {
    'gauss': {'sigma': 2.0},
    'defocus': {'radius': 7.0},
    'motion': {'length': 9, 'angle': 45.0},
    'shake': {'steps': 30},
    'speckle': {'blobs': 6, 'blob_sigma': 1.0},
    'delta': {},
}

# Independent random streams derived from the one user seed.
_PSF_STREAM = 0
_NOISE_STREAM = 1

BUNDLE_ARRAYS = ('psf', 'xtrue', 'btrue', 'noise', 'b')


def _rng(seed, stream):
    return np.random.default_rng([int(seed), stream])


@dataclass(eq=False)
class Psf(object):
    """
    A point-spread function: nonnegative ``values`` summing to one, the
    ``center`` pixel of the point source, and how it was made (``kind``,
    ``params``, ``seed``) so it can be regenerated from a bundle's metadata.
    """
    values: np.ndarray
    center: tuple
    kind: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.values.shape[0]


def _positive(params, key, kind):
    value = params[key]
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError("%s PSF: %s must be a number, got %r"
                          % (kind, key, value))
    if not value > 0:
        raise ConfigError("%s PSF: %s must be positive, got %r"
                          % (kind, key, value))
    return value


def _count(params, key, kind, limit=None):
    value = params[key]
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) \
            or value < 1:
        raise ConfigError("%s PSF: %s must be a positive integer, got %r"
                          % (kind, key, value))
    if limit is not None and value > limit:
        raise ConfigError("%s PSF: %s=%d exceeds the PSF size %d" % (
            kind, key, value, limit))
    return int(value)


def _gauss(n_p, c, params, rng):
    sigma = _positive(params, 'sigma', 'gauss')
    d = np.arange(n_p) - c
    g = np.exp(-d ** 2 / (2 * sigma ** 2))
    # separable by construction, hence exactly rank one
    return np.outer(g, g)


def _defocus(n_p, c, params, rng):
    radius = _positive(params, 'radius', 'defocus')
    d = np.arange(n_p) - c
    return (d[:, None] ** 2 + d[None, :] ** 2 <= radius ** 2).astype(float)


def _motion(n_p, c, params, rng):
    length = _count(params, 'length', 'motion', limit=n_p)
    angle = np.deg2rad(float(params['angle']))
    cos, sin = np.cos(angle), np.sin(angle)
    # unit steps along the dominant axis keep every pixel distinct
    step = 1.0 / max(abs(cos), abs(sin))
    values = np.zeros((n_p, n_p))
    for k in range(-(length // 2), length - length // 2):
        row = c - int(np.rint(k * step * sin))
        col = c + int(np.rint(k * step * cos))
        if not (0 <= row < n_p and 0 <= col < n_p):
            raise ConfigError("motion PSF: length %d at %s degrees does not "
                              "fit a %dx%d array" % (length, params['angle'],
                                                     n_p, n_p))
        values[row, col] = 1.0
    return values


def _shake(n_p, c, params, rng):
    steps = _count(params, 'steps', 'shake')
    moves = rng.integers(-1, 2, size=(steps, 2))
    path = np.clip(np.array([c, c]) + np.cumsum(moves, axis=0), 0, n_p - 1)
    values = np.zeros((n_p, n_p))
    values[c, c] = 1.0
    np.add.at(values, (path[:, 0], path[:, 1]), 1.0)
    return values


def _speckle(n_p, c, params, rng):
    blobs = _count(params, 'blobs', 'speckle')
    sigma = _positive(params, 'blob_sigma', 'speckle')
    d = np.arange(n_p)
    centers = rng.uniform(c - c / 2.0, c + c / 2.0, size=(blobs, 2))
    weights = rng.uniform(0.5, 1.0, size=blobs)
    values = np.zeros((n_p, n_p))
    for (row, col), weight in zip(centers, weights):
        values += weight * np.outer(np.exp(-(d - row) ** 2 / (2 * sigma ** 2)),
                                    np.exp(-(d - col) ** 2 / (2 * sigma ** 2)))
    return values


def _delta(n_p, c, params, rng):
    values = np.zeros((n_p, n_p))
    values[c, c] = 1.0
    return values


_BUILDERS = {
    'gauss': _gauss,
    'defocus': _defocus,
    'motion': _motion,
    'shake': _shake,
    'speckle': _speckle,
    'delta': _delta,
}


def make_psf(kind, n_p, params=None, seed=0):
    """
    Build a normalized `Psf` of side ``n_p`` (odd) centered at ``n_p // 2``.

    ``params`` overrides the per-kind defaults in `PSF_DEFAULTS`:

    * ``gauss``: ``sigma``; separable, so exactly rank one.
    * ``defocus``: ``radius`` (7 by default); uniform on the disk. Any radius
      below one gives the delta PSF.
    * ``motion``: ``length`` pixels and ``angle`` in degrees (45 by default);
      uniform on the rasterized segment through the center.
    * ``shake``: ``steps`` of a seeded random walk from the center.
    * ``speckle``: ``blobs`` seeded Gaussian blobs of width ``blob_sigma``.
    * ``delta``: the identity blur.

    Invalid kinds or parameters raise `ConfigError`.
    """
    if kind not in _BUILDERS:
        raise ConfigError("unknown blur kind %r (expected one of %s)"
                          % (kind, ", ".join(PSF_KINDS)))
    if isinstance(n_p, bool) or not isinstance(n_p, (int, np.integer)) \
            or n_p < 1 or n_p % 2 == 0:
        raise ConfigError("psf_size must be a positive odd integer, got %r"
                          % (n_p,))
    merged = dict(PSF_DEFAULTS[kind])
    for key, value in (params or {}).items():
        if key not in merged:
            raise ConfigError("%s PSF takes no parameter %r" % (kind, key))
        merged[key] = value
    c = n_p // 2
    values = _BUILDERS[kind](n_p, c, merged, _rng(seed, _PSF_STREAM))
    values = values / values.sum()
    values.setflags(write=False)
    return Psf(values, (c, c), kind, int(seed), merged)


def toeplitz_factor(w, c, n):
    """
    The n x n banded Toeplitz matrix ``T[i, j] = w[i - j + c]``, zero where
    ``i - j + c`` falls outside ``w``.
    """
    w = np.asarray(w, dtype=np.float64)
    column = np.zeros(n)
    row = np.zeros(n)
    below = w[c:c + n]
    above = w[c::-1][:n]
    column[:below.shape[0]] = below
    row[:above.shape[0]] = above
    return toeplitz(column, row)


def point_term(values):
    """
    The exact term ``(s, u, v)`` of an array with a single nonzero entry, or
    None. ``u`` and ``v`` are unit coordinate vectors.
    """
    rows, cols = np.nonzero(values)
    if rows.shape[0] != 1:
        return None
    u = np.zeros(values.shape[0])
    v = np.zeros(values.shape[1])
    u[rows[0]] = v[cols[0]] = 1.0
    return float(values[rows[0], cols[0]]), u, v


def psf_terms(psf, truncation_tol=0.0):
    """
    Singular triplets ``(s_k, u_k, v_k)`` of the PSF array that survive
    truncation: ``s_k > max(truncation_tol, n_p * eps) * s_1``.

    The floor at ``n_p * eps`` drops only numerically zero terms, so the term
    count is the numerical rank of the array.
    """
    point = point_term(psf.values)
    if point is not None:
        return [point]
    svd = svd_dense(psf.values)
    U, s, V = svd.U, svd.S, svd.V
    cutoff = max(truncation_tol, psf.size * np.finfo(float).eps) * s[0]
    terms = []
    for k in range(s.shape[0]):
        if k > 0 and not s[k] > cutoff:
            break
        u, v = U[:, k], V[:, k]
        if u.sum() < 0:
            u, v = -u, -v
        terms.append((s[k], u, v))
    return terms


def psf_to_kronsum(psf, n, truncation_tol=0.0):
    """
    The zero-boundary blur operator of ``psf`` on n x n images as a
    `KroneckerSum`; exact when nothing is truncated.
    """
    if n < psf.size:
        raise ShapeError("image size n=%d is smaller than the %dx%d PSF"
                         % (n, psf.size, psf.size))
    row_c, col_c = psf.center
    terms = []
    for s, u, v in psf_terms(psf, truncation_tol):
        root = np.sqrt(s)
        terms.append((toeplitz_factor(root * v, col_c, n),
                      toeplitz_factor(root * u, row_c, n)))
    return KroneckerSum(terms)


def default_image(n):
    """
    Synthetic n x n scene: a bright rectangle and a disk on black, softened
    by a Gaussian of width ``0.05 n`` so its edges span a few pixels.
    """
    image = np.zeros((n, n))
    image[n // 5:n // 2, n // 6:n // 2] = 0.6
    d = np.arange(n)
    disk = ((d[:, None] - 0.65 * n) ** 2 + (d[None, :] - 0.65 * n) ** 2
            <= (n / 5.0) ** 2)
    image[disk] = 1.0
    return gaussian_filter(image, 0.05 * n, mode='constant')


@dataclass(eq=False)
class TestProblem(object):
    """A blurred, noisy image together with everything used to make it."""
    __test__ = False

    A: KroneckerSum
    x_true: np.ndarray
    b_true: np.ndarray
    noise: np.ndarray
    b: np.ndarray
    noise_level: float
    seed: int
    psf: Psf
    truncation_tol: float = 0.0

    @property
    def n(self):
        return self.A.n

    @property
    def noise_norm(self):
        return float(np.linalg.norm(self.noise))


def make_test_problem(image, psf, noise_level, seed=0, truncation_tol=0.0):
    """
    Blur ``image`` with ``psf`` and add white noise scaled so that
    ``||noise|| / ||b_true|| == noise_level``.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.size == 0 or image.shape[0] != image.shape[1]:
        raise ShapeError("test images must be non-empty and square, got "
                         "shape %s" % (image.shape,))
    if not noise_level >= 0:
        raise ConfigError("noise must be >= 0, got %r" % (noise_level,))
    A = psf_to_kronsum(psf, image.shape[0], truncation_tol)
    x_true = vec(image)
    b_true = kronsum_apply(A, x_true)
    if noise_level > 0:
        g = _rng(seed, _NOISE_STREAM).standard_normal(b_true.shape[0])
        noise = noise_level * np.linalg.norm(b_true) * g / np.linalg.norm(g)
    else:
        noise = np.zeros_like(b_true)
    return TestProblem(A, x_true, b_true, noise, b_true + noise,
                       float(noise_level), int(seed), psf,
                       float(truncation_tol))


#
# Bundles
#

def _array_path(directory, name):
    return os.path.join(directory, name + '.f64')


def save_problem(tp, directory):
    """Write ``tp`` as a bundle into ``directory`` (created if missing)."""
    ensure_dir(directory)
    arrays = {
        'psf': vec(tp.psf.values),
        'xtrue': tp.x_true,
        'btrue': tp.b_true,
        'noise': tp.noise,
        'b': tp.b,
    }
    index = {}
    for name in BUNDLE_ARRAYS:
        raw = np.asarray(arrays[name], dtype='<f8').tobytes()
        with open(_array_path(directory, name), 'wb') as f:
            f.write(raw)
        index[name] = {
            'file': name + '.f64',
            'bytes': len(raw),
            'sha256': hashlib.sha256(raw).hexdigest(),
        }
    meta = {
        'kind': tp.psf.kind,
        'psf_size': tp.psf.size,
        'psf_params': dict(tp.psf.params),
        'center': list(tp.psf.center),
        'n': tp.n,
        'seed': tp.seed,
        'noise_level': tp.noise_level,
        'truncation_tol': tp.truncation_tol,
        'arrays': index,
    }
    write_json(os.path.join(directory, 'meta.json'), 'bundle', meta)
    return directory


def _read_array(directory, name, entry):
    path = _array_path(directory, name)
    try:
        with open(path, 'rb') as f:
            raw = f.read()
    except IOError as e:
        raise BundleError("bundle array %s is missing: %s" % (name, e))
    if len(raw) != entry['bytes']:
        raise BundleError("bundle array %s has %d bytes, meta.json says %d"
                          % (name, len(raw), entry['bytes']))
    if hashlib.sha256(raw).hexdigest() != entry['sha256']:
        raise BundleError("checksum mismatch for bundle array %s" % name)
    return np.frombuffer(raw, dtype='<f8').astype(np.float64)


def rebuild_psf(meta):
    """Regenerate the PSF described by a bundle's metadata."""
    try:
        return make_psf(meta['kind'], int(meta['psf_size']),
                        meta['psf_params'], int(meta['seed']))
    except KeyError as e:
        raise BundleError("meta.json lacks field %s" % e)
    except ConfigError as e:
        raise BundleError("meta.json describes no valid PSF: %s" % e)


def load_problem(directory):
    """
    Read a bundle written by `save_problem`.

    Array lengths and SHA-256 digests are checked against ``meta.json``;
    the stored PSF array must agree with the one `rebuild_psf` regenerates
    from the metadata, and the operator is rebuilt from it.
    """
    meta = read_json(os.path.join(directory, 'meta.json'), 'bundle')
    try:
        index = meta['arrays']
        arrays = dict((name, _read_array(directory, name, index[name]))
                      for name in BUNDLE_ARRAYS)
        n = int(meta['n'])
        n_p = int(meta['psf_size'])
        kind = meta['kind']
        seed = int(meta['seed'])
        noise_level = float(meta['noise_level'])
        truncation_tol = float(meta['truncation_tol'])
        center = tuple(int(c) for c in meta['center'])
        params = meta['psf_params']
    except KeyError as e:
        raise BundleError("meta.json lacks field %s" % e)
    if arrays['psf'].shape[0] != n_p * n_p:
        raise BundleError("psf array does not hold %dx%d values" % (n_p, n_p))
    for name in ('xtrue', 'btrue', 'noise', 'b'):
        if arrays[name].shape[0] != n * n:
            raise BundleError("%s array does not hold %d values"
                              % (name, n * n))
    values = arrays['psf'].reshape((n_p, n_p), order='F')
    expected = rebuild_psf(meta)
    if expected.center != center or not np.allclose(
            values, expected.values, rtol=1e-12, atol=0.0):
        raise BundleError("psf array does not match the %s PSF described in "
                          "meta.json" % kind)
    values.setflags(write=False)
    psf = Psf(values, center, kind, seed, params)
    A = psf_to_kronsum(psf, n, truncation_tol)
    return TestProblem(A, arrays['xtrue'], arrays['btrue'], arrays['noise'],
                       arrays['b'], noise_level, seed, psf, truncation_tol)
