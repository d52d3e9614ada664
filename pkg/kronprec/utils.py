"""
Internal subroutines for e.g. aborting execution with an error message,
or performing indenting on multiline output.
"""

import sys
import textwrap

from kronprec.state import env, output


def abort(msg, status=1):
    """
    Abort execution, print ``msg`` to stderr and exit with ``status``.

    This function makes use of `sys.exit`, which raises `SystemExit`.
    Therefore, it's possible to detect and recover from inner calls to `abort`
    by using ``except SystemExit``; the exit status is available as the
    exception's ``code``. The CLI uses the statuses in
    `kronprec.exceptions.EXIT_CODES`.
    """
    if output.aborts:
        lines = ["\nFatal error: " + str(msg), "\nAborting."]
        if env.colors:
            lines = [env.color_settings['abort'](line) for line in lines]
        for line in lines:
            sys.stderr.write(line + "\n")
    sys.exit(status)


def warn(msg):
    """
    Print warning message, but do not abort execution.

    Honors the ``warnings`` output level, which is on by default. Used for
    recoverable conditions such as a flat parameter-selection objective or a
    solver that stopped without converging.
    """
    if output.warnings:
        msg = "\nWarning: %s\n" % msg
        if env.colors:
            msg = env.color_settings['warn'](msg)
        sys.stderr.write(msg + "\n")


def indent(text, spaces=4, strip=False):
    """
    Return ``text`` indented by the given number of spaces.

    If text is not a string, it is assumed to be a list of lines and will be
    joined by ``\\n`` prior to indenting.

    When ``strip`` is ``True``, a minimum amount of whitespace is removed from
    the left-hand side of the given string (so that relative indents are
    preserved, but otherwise things are left-stripped).
    """
    if not hasattr(text, 'splitlines'):
        text = '\n'.join(text)
    if strip:
        text = textwrap.dedent(text)
    prefix = ' ' * spaces
    result = '\n'.join(prefix + line for line in text.splitlines())
    # Strip out empty lines before/aft, then reintroduce the first indent
    return prefix + result.strip()


def puts(text, show_prefix=None, end="\n", flush=False):
    """
    An alias for ``print`` whose output is managed by the output controls.

    Prints to ``sys.stdout`` unless the ``user`` output level is off. A
    string ``show_prefix`` is rendered as ``[prefix] `` in front of the text;
    when it is left as ``None`` the currently running command name (see
    ``env.command``) is used, and ``False`` disables the prefix.

    Newlines may be disabled by setting ``end`` to the empty string.
    """
    if not output.user:
        return
    if show_prefix is None:
        show_prefix = env.command or False
    prefix = "[%s] " % show_prefix if show_prefix else ""
    if prefix and env.colors:
        prefix = env.color_settings['prefix'](prefix)
    sys.stdout.write(prefix + str(text) + end)
    if flush:
        sys.stdout.flush()


def fastprint(text, show_prefix=False, end="", flush=True):
    """
    Print ``text`` immediately, without any prefix or line ending.

    Simply `puts` with different defaults; handy for progress dots printed
    inside a solver loop. Subject to the ``user`` output level as well.
    """
    return puts(text, show_prefix, end, flush)
