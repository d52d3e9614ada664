"""
Context managers for use with the ``with`` statement.
"""

from contextlib import ExitStack, contextmanager

from kronprec.state import env, output


@contextmanager
def _set_output(groups, which):
    """
    Refactored subroutine used by ``hide`` and ``show``.
    """
    previous = {}
    for group in output.expand_aliases(groups):
        previous[group] = output[group]
        output[group] = which
    try:
        yield
    finally:
        output.update(previous)


def show(*groups):
    """
    Context manager for setting the given output ``groups`` to True.

    ``groups`` must be one or more strings naming the output groups defined in
    `~kronprec.state.output`. For example, to print one line per solver
    iteration (which is off by default)::

        with show('progress'):
            pcg(A, b, M, opts)
    """
    return _set_output(groups, True)


def hide(*groups):
    """
    Context manager for setting the given output ``groups`` to False.

    Sweeps use ``hide('running')`` so concurrent child runs do not interleave
    their start-up lines.
    """
    return _set_output(groups, False)


@contextmanager
def _setenv(**kwargs):
    """
    Context manager temporarily overriding ``env`` with given key/value pairs.

    Used internally by `settings`; keys absent before the block are removed
    again afterwards.
    """
    previous = {}
    missing = []
    for key, value in kwargs.items():
        if key in env:
            previous[key] = env[key]
        else:
            missing.append(key)
        env[key] = value
    try:
        yield
    finally:
        env.update(previous)
        for key in missing:
            del env[key]


def settings(*args, **kwargs):
    """
    Nest context managers and/or override ``env`` variables.

    Keyword arguments temporarily override ``env`` keys; positional arguments
    are other context managers entered in order, e.g.::

        with settings(hide('running', 'status'), command='sweep'):
            ...

    Everything is restored when the block exits, including on exceptions.
    """
    managers = list(args)
    if kwargs:
        managers.append(_setenv(**kwargs))
    return _nested(managers)


@contextmanager
def _nested(managers):
    with ExitStack() as stack:
        yield [stack.enter_context(manager) for manager in managers]
