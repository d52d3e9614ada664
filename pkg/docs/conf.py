# -*- coding: utf-8 -*-
#
# kronprec documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing
# dir. Only values that differ from the Sphinx defaults are set here.

import os
import sys
from datetime import datetime


# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.mathjax']

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = u'kronprec'
year = datetime.now().year
copyright = u'%d, the kronprec developers' % year

# The version info for the project you're documenting, acts as replacement for
# |version| and |release|, also used in various other places throughout the
# built documents.
#
# Add this checkout's local package to the path so we can import it.
sys.path.insert(0, os.path.abspath(os.path.join(os.getcwd(), '..')))
from kronprec.version import get_version
# The short X.Y version.
version = get_version('branch')
# The full version, including alpha/beta/rc tags.
release = get_version('normal')

exclude_trees = ['_build']

default_role = 'obj'

pygments_style = 'sphinx'

# numpy and scipy are heavy to install on a docs builder; autodoc only needs
# the signatures.
autodoc_mock_imports = ['numpy', 'scipy', 'yaml', 'PIL']


# -- Options for HTML output ---------------------------------------------------

html_theme = 'default'

html_static_path = ['_static']

htmlhelp_basename = 'kronprecdoc'


# -- Options for LaTeX output --------------------------------------------------

latex_documents = [
  ('index', 'kronprec.tex', u'kronprec Documentation',
   u'the kronprec developers', 'manual'),
]
