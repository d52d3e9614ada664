"""
Emulated low-precision floating point.

Values are rounded to a target format and carried on in float64 with their
trailing significand bits zero, so numpy arithmetic on the results behaves
like arithmetic on the stored low-precision numbers followed by a
`round_array` call. Every vectorized rounding is counted when a
`counting_rounds` session is open, which lets callers check how many rounding
passes an algorithm needs.

Formats::

    >>> fp16 = format_by_name('fp16')
    >>> round_value(0.1, fp16)
    0.0999755859375
    >>> round_value(70000.0, fp16)
    inf
"""

import re
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum

import numpy as np

from kronprec.exceptions import ConfigError


class RoundingMode(Enum):
    """Rounding rules understood by `round_array`."""
    NEAREST_EVEN = 'nearest_even'


@dataclass(frozen=True)
class PrecisionFormat(object):
    """
    A binary floating-point format described by its parameters.

    ``significand_bits`` (t) counts the implicit leading bit, so IEEE half
    precision has t = 11. The minimum exponent is ``1 - max_exponent``.
    """
    significand_bits: int
    max_exponent: int
    subnormals_enabled: bool = True
    name: str = 'custom'

    def __post_init__(self):
        if self.significand_bits < 2:
            raise ConfigError(
                "significand_bits must be >= 2, got %r" % self.significand_bits)
        if self.max_exponent < 1:
            raise ConfigError(
                "max_exponent must be >= 1, got %r" % self.max_exponent)

    @property
    def min_exponent(self):
        return 1 - self.max_exponent

    @property
    def unit_roundoff(self):
        return 2.0 ** -self.significand_bits

    @property
    def smallest_normal(self):
        return 2.0 ** self.min_exponent

    @property
    def smallest_subnormal(self):
        return 2.0 ** (self.min_exponent - self.significand_bits + 1)

    @property
    def largest_finite(self):
        t = self.significand_bits
        return 2.0 ** self.max_exponent * (2.0 - 2.0 ** (1 - t))

    @property
    def is_working_precision(self):
        """True when the format holds every float64 (rounding is a no-op)."""
        return self.significand_bits >= 53 and self.max_exponent >= 1023

    def __str__(self):
        return self.name


FP16 = PrecisionFormat(11, 15, True, 'fp16')
BFLOAT16 = PrecisionFormat(8, 127, True, 'bfloat16')
FP32 = PrecisionFormat(24, 127, True, 'fp32')
FP64 = PrecisionFormat(53, 1023, True, 'fp64')

PRESETS = {
    'fp16': FP16,
    'half': FP16,
    'bfloat16': BFLOAT16,
    'fp32': FP32,
    'single': FP32,
    'fp64': FP64,
    'double': FP64,
}

_CUSTOM = re.compile(r'^custom:(?P<body>.*)$')


def format_by_name(name):
    """
    Return the `PrecisionFormat` named ``name``.

    Accepts the presets (``fp16``, ``bfloat16``, ``fp32``, ``fp64`` and a few
    aliases) and ``custom:t=T,emax=E,subnormals=0|1``; ``subnormals`` is
    optional and defaults to on. Anything else raises `ConfigError`.
    """
    if isinstance(name, PrecisionFormat):
        return name
    key = str(name).strip().lower()
    if key in PRESETS:
        return PRESETS[key]
    match = _CUSTOM.match(key)
    if not match:
        raise ConfigError("unknown precision format %r (expected one of %s or "
                          "custom:t=T,emax=E,subnormals=0|1)"
                          % (name, ", ".join(sorted(PRESETS))))
    fields = {}
    for pair in match.group('body').split(','):
        k, sep, v = pair.partition('=')
        if not sep:
            raise ConfigError("malformed custom format field %r in %r"
                              % (pair, name))
        fields[k.strip()] = v.strip()
    unknown = set(fields) - set(['t', 'emax', 'subnormals'])
    if unknown or 't' not in fields or 'emax' not in fields:
        raise ConfigError("custom format %r needs t and emax (and optionally "
                          "subnormals)" % name)
    try:
        t = int(fields['t'])
        emax = int(fields['emax'])
        subnormals = fields.get('subnormals', '1') not in ('0', 'false', 'no')
    except ValueError:
        raise ConfigError("non-integer field in custom format %r" % name)
    return PrecisionFormat(t, emax, subnormals, key)


#
# Call counting
#

class RoundingSession(object):
    """Counts vectorized rounding calls made on the opening thread."""

    def __init__(self):
        self.calls = 0

    def __repr__(self):
        return "<RoundingSession calls=%d>" % self.calls


_sessions = threading.local()


def _active_sessions():
    stack = getattr(_sessions, 'stack', None)
    if stack is None:
        stack = _sessions.stack = []
    return stack


@contextmanager
def counting_rounds():
    """
    Count `round_array` calls made inside the ``with`` block::

        with counting_rounds() as session:
            lp_dot(x, y, FP16)
        round_call_count(session)   # log2(n) + 1 for n a power of two

    Sessions nest (an inner call is counted by every open session) and are
    per thread.
    """
    session = RoundingSession()
    stack = _active_sessions()
    stack.append(session)
    try:
        yield session
    finally:
        stack.remove(session)


def round_call_count(session):
    return session.calls


def _count_call():
    for session in _active_sessions():
        session.calls += 1


#
# Rounding
#

def round_array(xs, fmt, mode=RoundingMode.NEAREST_EVEN):
    """
    Round every entry of ``xs`` to the nearest value representable in ``fmt``.

    Ties go to the even significand. Magnitudes at or past the overflow
    threshold become +/-inf; below the smallest normal the result is a
    subnormal, or, with subnormals disabled, whichever of zero and the
    smallest normal is nearer. Infinities and NaNs pass through.

    Counts as one call in an open `counting_rounds` session. When ``fmt``
    is working precision the input is returned as a float64 copy and nothing
    is counted.
    """
    if mode is not RoundingMode.NEAREST_EVEN:
        raise ConfigError("unsupported rounding mode %r" % (mode,))
    x = np.array(xs, dtype=np.float64)
    if fmt.is_working_precision:
        return x
    _count_call()
    if x.size == 0:
        return x
    with np.errstate(invalid='ignore', over='ignore'):
        _, exponent = np.frexp(x)
        # exponent of the leading bit, clamped at emin for the subnormal range
        exponent = np.maximum(exponent - 1, fmt.min_exponent)
        shift = fmt.significand_bits - 1 - exponent
        y = np.ldexp(np.rint(np.ldexp(x, shift)), -shift)
        if not fmt.subnormals_enabled:
            xmin = fmt.smallest_normal
            tiny = np.abs(x) < xmin
            if tiny.any():
                flushed = np.where(np.abs(x) > xmin / 2, xmin, 0.0)
                y = np.where(tiny, np.copysign(flushed, x), y)
        y = np.where(np.abs(y) > fmt.largest_finite, np.copysign(np.inf, x), y)
    return y


def round_value(x, fmt, mode=RoundingMode.NEAREST_EVEN):
    """Scalar `round_array`."""
    return float(round_array(np.float64(x), fmt, mode))
