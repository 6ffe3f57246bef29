# -*- coding: utf-8 -*-
#
# hebbnet documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import re

on_rtd = os.environ.get('READTHEDOCS') == 'True'

extensions = []
templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'hebbnet'
copyright = u'2014, Salesforce.com'

# The short X.Y version and the full release are read from the package.
_init = os.path.join(os.path.dirname(__file__), '..', 'hebbnet', '__init__.py')
with open(_init) as f:
    release = re.search(r"__version__ = '(\S+)'", f.read()).group(1)
version = '.'.join(release.split('.')[:2])

exclude_patterns = ['_build']
pygments_style = 'sphinx'

if not on_rtd:
    import sphinx_rtd_theme
    html_theme = 'sphinx_rtd_theme'
    html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]

html_static_path = ['_static']
htmlhelp_basename = 'hebbnetdoc'

latex_documents = [
    ('index', 'hebbnet.tex', u'hebbnet Documentation',
     u'Salesforce.com', 'manual'),
]
man_pages = [
    ('index', 'hebbnet', u'hebbnet Documentation',
     [u'Salesforce.com'], 1)
]
