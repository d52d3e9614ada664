"""
Decorators used to declare CLI verbs.
"""

from kronprec import state


def command(*args, **kwargs):
    """
    Register the decorated function as a ``kronprec`` verb.

    May be used bare (``@command``) or with a name and options
    (``@command('compare', hidden=True)``). The verb name defaults to the
    function name with a leading ``cmd_`` removed. Hidden verbs run normally
    but are left out of ``kronprec --list``.
    """
    hidden = kwargs.get('hidden', False)

    def register(func, name=None):
        if name is None:
            name = func.__name__
            if name.startswith('cmd_'):
                name = name[len('cmd_'):]
        func.__kronprec_command__ = name
        if hidden:
            func.__hide__ = True
        state.commands[name] = func
        return func

    if args and callable(args[0]):
        return register(args[0])
    name = args[0] if args else None
    return lambda func: register(func, name)


def requires(*keys):
    """
    Declare config keys that must be set (not ``None``) before a verb runs.

    For example, sweeping is meaningless without a field and values::

        @command
        @requires('sweep_field', 'sweep_values')
        def cmd_sweep(config):
            pass

    This only records ``func.required``; the
    check itself happens in `kronprec.main.check_requirements`. May be given
    either several names or a single iterable.
    """
    def attach(func):
        _keys = keys
        if len(_keys) == 1 and not isinstance(_keys[0], str):
            _keys = _keys[0]
        func.required = list(_keys)
        return func
    return attach
