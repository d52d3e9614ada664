"""
Functions for wrapping strings in ANSI color codes.

Each function returns its input ``text`` wrapped with the color's escape
sequence, or unchanged when ``env.colors`` is off or stdout is not a
terminal::

    from kronprec.colors import green

    print(green("converged"))

Pass ``bold=True`` for the bright variant.
"""

import sys


CODES = {
    'red': '31',
    'green': '32',
    'yellow': '33',
    'blue': '34',
    'magenta': '35',
    'cyan': '36',
    'white': '37',
}

__all__ = sorted(CODES)


def colorize(text, color, bold=False):
    from kronprec.state import env

    if not env.colors or not sys.stdout.isatty():
        return text
    code = CODES[color]
    if bold:
        code = "1;" + code
    return "\033[%sm%s\033[0m" % (code, text)


def _color(name):
    def inner(text, bold=False):
        return colorize(text, name, bold)
    inner.__name__ = name
    return inner


red = _color('red')
green = _color('green')
yellow = _color('yellow')
blue = _color('blue')
magenta = _color('magenta')
cyan = _color('cyan')
white = _color('white')
