"""
This module contains the ``kronprec`` command-line entry point plus related
subroutines.

`main` parses options, resolves the experiment configuration (defaults, then
an optional settings file, then command-line flags), and runs the requested
verb. Errors raised by the library are turned into an ``abort`` with the exit
status belonging to their class: 2 for configuration problems, 3 for I/O
problems and 4 for numerical failures.

The other callables defined in this module are internal only. Anything useful
to individuals using kronprec as a library should be kept elsewhere.
"""

import inspect
import sys
from optparse import OptionParser

import numpy as np

from kronprec.config import resolve_config
from kronprec.exceptions import EXIT_CODES, ConfigError, KronprecError
from kronprec.state import commands, config_options, env, output
from kronprec.utils import abort, indent, puts


USAGE = "kronprec [options] <generate|decompose|solve|compare|sweep>"


def parse_options(argv=None):
    """
    Handle command-line options with optparse.OptionParser.

    Return the parser, the parsed options and the positional arguments.
    """
    parser = OptionParser(usage=USAGE)

    #
    # Options that don't become config values (typically ones which cause
    # kronprec to do something other than its normal execution)
    #

    parser.add_option('-V', '--version',
        action='store_true',
        dest='show_version',
        default=False,
        help="show program's version number and exit"
    )

    parser.add_option('-l', '--list',
        action='store_true',
        dest='list_commands',
        default=False,
        help="print list of possible commands and exit"
    )

    parser.add_option('-d', '--display',
        metavar='COMMAND',
        help="print detailed info about a given command and exit"
    )

    parser.add_option('-c', '--config',
        metavar='PATH',
        help="settings file (key = value, or YAML for .yaml/.yml)"
    )

    parser.add_option('--show',
        metavar='LEVELS',
        help="comma-separated list of output levels to show"
    )

    parser.add_option('--hide',
        metavar='LEVELS',
        help="comma-separated list of output levels to hide"
    )

    parser.add_option('--colors',
        action='store_true',
        default=False,
        help="color aborts, warnings and prefixes when writing to a terminal"
    )

    #
    # Options which are also destined to show up as config values.
    #

    for option in config_options:
        parser.add_option(option)

    opts, args = parser.parse_args(argv)
    return parser, opts, args


def _load_commands():
    # Registers the verbs through the @command decorator.
    import kronprec.operations  # noqa


def _command_names():
    return sorted(commands.keys())


def list_commands():
    """
    Print all registered verbs, then exit. Invoked with ``-l/--list``.
    """
    print("Available commands:\n")
    max_len = max([len(name) for name in commands] or [0])
    sep = '  '
    trail = '...'
    for name in _command_names():
        func = commands[name]
        if hasattr(func, '__hide__'):
            continue
        if func.__doc__:
            lines = [line for line in func.__doc__.splitlines() if line.strip()]
            first_line = lines[0].strip()
            size = 75 - (max_len + len(sep) + len(trail))
            if len(first_line) > size:
                first_line = first_line[:size] + trail
            line = name.ljust(max_len) + sep + first_line
        else:
            line = name
        print(indent(line))
    print('')
    sys.exit(0)


def display_command(name):
    """
    Print a verb's docstring and required keys, then exit. Invoked with
    ``-d/--display``.
    """
    if name not in commands:
        abort("Command '%s' not found, exiting." % name,
              EXIT_CODES['config'])
    cmd = commands[name]
    required = getattr(cmd, 'required', [])
    args = "Requires: " + (", ".join(required) if required else "None")
    if cmd.__doc__:
        print("Displaying detailed information for command '%s':" % name)
        print(indent(args))
        print('')
        print(indent(inspect.cleandoc(cmd.__doc__)))
        print('')
    else:
        print("No detailed information available for command '%s':" % name)
        print(indent(args))
    sys.exit(0)


def update_output_levels(show, hide):
    """
    Update state.output values as per given comma-separated list of key names.

    For example, ``update_output_levels(show='progress,debug', hide=None)`` is
    functionally equivalent to ``state.output['progress'] = True ;
    state.output['debug'] = True``. Conversely, anything given to ``hide``
    sets the values to ``False``.
    """
    if show:
        for key in show.split(','):
            output[key] = True
    if hide:
        for key in hide.split(','):
            output[key] = False


def check_requirements(func, config):
    """Raise `ConfigError` for keys the verb requires but ``config`` lacks."""
    missing = [key for key in getattr(func, 'required', [])
               if config.get(key) is None]
    if missing:
        raise ConfigError("command '%s' requires %s"
                          % (func.__kronprec_command__, ", ".join(missing)))


def execute_command(name, config):
    func = commands[name]
    check_requirements(func, config)
    env.command = name
    try:
        if output.running:
            puts("running %s" % name)
        return func(config)
    finally:
        env.command = None


def main(argv=None):
    """
    Main command-line execution loop.
    """
    try:
        parser, options, arguments = parse_options(argv)

        update_output_levels(show=options.show, hide=options.hide)
        if options.colors:
            env.colors = True

        if options.show_version:
            print("kronprec %s" % env.version)
            sys.exit(0)

        _load_commands()

        # Handle the non-execution flow
        if not arguments:
            if options.display:
                display_command(options.display)
            list_commands()

        if len(arguments) > 1:
            abort("Only one command may be given, got: %s"
                  % ", ".join(arguments), EXIT_CODES['config'])
        name = arguments[0]
        if name not in commands:
            abort("Command '%s' not found (try --list)" % name,
                  EXIT_CODES['config'])

        overrides = dict((option.dest, getattr(options, option.dest))
                         for option in config_options)
        config = resolve_config(options.config, overrides)
        if output.debug:
            puts("effective config:\n%s" % indent(
                ["%s = %r" % item for item in config.as_dict().items()]),
                show_prefix=False)

        execute_command(name, config)
        if output.status:
            print("\nDone.")
    except SystemExit:
        # a number of internal functions might raise this one.
        raise
    except KeyboardInterrupt:
        if output.status:
            sys.stderr.write("\nStopped.\n")
        sys.exit(1)
    except KronprecError as e:
        abort(str(e), e.exit_code)
    except (IOError, OSError) as e:
        abort("I/O error: %s" % e, EXIT_CODES['io'])
    except np.linalg.LinAlgError as e:
        abort("linear algebra failure: %s" % e, EXIT_CODES['numerical'])
    sys.exit(0)


if __name__ == '__main__':
    main()
