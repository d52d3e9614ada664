"""
Current kronprec version constant plus version pretty-print method.

Kept in its own module so ``setup.py`` can read the version without importing
numpy, scipy or the rest of the package.
"""


VERSION = (0, 1, 0, 'final', 0)

def get_version(form='short'):
    """
    Return a version string for this package, based on `VERSION`.

    Takes a single argument, ``form``, which should be one of the following
    strings:

    * ``branch``: just the major + minor, e.g. "0.1", "1.0".
    * ``short`` (default): compact, e.g. "0.1rc1", "0.1.0". Used for package
      filenames and in ``summary.json`` provenance.
    * ``normal``: human readable, e.g. "0.1", "0.1.1", "0.1 beta 1".
    * ``verbose``: like ``normal`` but fully explicit, e.g. "0.1 final".
    """
    major, minor, tertiary, type_, type_num = VERSION
    branch = "%s.%s" % (major, minor)
    final = (type_ == "final")
    firsts = "".join(word[0] for word in type_.split())

    versions = {'branch': branch}

    v = branch
    if tertiary or final:
        v += "." + str(tertiary)
    if not final:
        v += firsts + (str(type_num) if type_num else "dev")
    versions['short'] = v

    v = branch
    if tertiary:
        v += "." + str(tertiary)
    if not final:
        if type_num:
            v += " %s %s" % (type_, type_num)
        else:
            v += " pre-" + type_
    versions['normal'] = v

    versions['verbose'] = v if not final else v + " final"

    try:
        return versions[form]
    except KeyError:
        raise TypeError('"%s" is not a valid form specifier.' % form)

__version__ = get_version('short')
