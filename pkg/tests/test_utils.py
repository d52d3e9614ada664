import sys

from fudge import Fake, patched_context, verify, clear_expectations
from fudge.patcher import with_patched_object
from nose.tools import eq_
from nose.tools import raises

from kronprec.state import env, output
from kronprec.utils import warn, indent, abort, puts, fastprint
from kronprec import utils # For patching
from kronprec.context_managers import settings
from utils import mock_streams, restoring_state


@mock_streams('stderr')
@with_patched_object(output, 'warnings', True)
def test_warn():
    """
    warn() should print 'Warning' plus given text
    """
    warn("Test")
    assert "\nWarning: Test\n\n" == sys.stderr.getvalue()


@mock_streams('stderr')
@with_patched_object(output, 'warnings', False)
def test_warn_honors_output_level():
    warn("Test")
    eq_(sys.stderr.getvalue(), "")


@restoring_state
@mock_streams('stderr')
@with_patched_object(output, 'warnings', True)
def test_warn_uses_the_warn_color():
    env.colors = True
    terminal = Fake('stdout').provides('isatty').returns(True)
    with patched_context(sys, 'stdout', terminal):
        warn("Test")
    eq_(sys.stderr.getvalue(), "\033[33m\nWarning: Test\n\033[0m\n")


def test_every_color_setting_has_a_user():
    eq_(sorted(env.color_settings), ['abort', 'prefix', 'warn'])


def test_indent():
    eq_(indent('Test'), '    Test')
    eq_(indent(["Test", "Test"]), '    Test\n    Test')
    eq_(indent('Test', spaces=2), '  Test')


def test_indent_with_strip():
    eq_(indent('Test', strip=True), '    Test')
    eq_(indent(["Test", "Test"], strip=True), '    Test\n    Test')
    eq_(indent(["        Test", "        Test"], strip=True),
        '    Test\n    Test')


@mock_streams('stderr')
@raises(SystemExit)
def test_abort():
    """
    abort() should raise SystemExit
    """
    abort("Test")


@mock_streams('stderr')
def test_abort_exit_status():
    try:
        abort("bad config", 2)
    except SystemExit as e:
        eq_(e.code, 2)


@mock_streams('stderr')
@with_patched_object(output, 'aborts', True)
def test_abort_message():
    """
    abort() should print 'Fatal error' plus exception value
    """
    try:
        abort("Test")
    except SystemExit:
        pass
    result = sys.stderr.getvalue()
    eq_("\nFatal error: Test\n\nAborting.\n", result)


@restoring_state
@mock_streams('stdout')
def test_puts_with_user_output_on():
    """
    puts() should print input to sys.stdout if "user" output level is on
    """
    s = "string!"
    output.user = True
    puts(s, show_prefix=False)
    eq_(sys.stdout.getvalue(), s + "\n")


@restoring_state
@mock_streams('stdout')
def test_puts_with_user_output_off():
    """
    puts() shouldn't print input to sys.stdout if "user" output level is off
    """
    output.user = False
    puts("You aren't reading this.")
    eq_(sys.stdout.getvalue(), "")


@mock_streams('stdout')
def test_puts_with_prefix():
    """
    puts() should prefix output with env.command if non-empty
    """
    s = "my output"
    with settings(command='solve'):
        puts(s)
    eq_(sys.stdout.getvalue(), "[solve] %s" % (s + "\n"))


@mock_streams('stdout')
def test_puts_without_prefix():
    """
    puts() shouldn't prefix output with env.command if show_prefix is False
    """
    s = "my output"
    with settings(command='solve'):
        puts(s, show_prefix=False)
    eq_(sys.stdout.getvalue(), "%s" % (s + "\n"))


@mock_streams('stdout')
def test_puts_with_explicit_prefix():
    puts("lambda=0.1", show_prefix='gcv')
    eq_(sys.stdout.getvalue(), "[gcv] lambda=0.1\n")


def test_fastprint_calls_puts():
    """
    fastprint() is just an alias to puts()
    """
    text = "Some output"

    fake_puts = Fake('puts', expect_call=True).with_args(
        text, False, "", True
    )
    with patched_context(utils, 'puts', fake_puts):
        try:
            fastprint(text)
            verify()
        finally:
            clear_expectations()
