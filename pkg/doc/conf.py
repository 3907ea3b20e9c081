import param

param.parameterized.docstring_signature = False
param.parameterized.docstring_describe_params = False

import qbm

project = 'qbm'
description = 'Exact decoherence of a free quantum Brownian particle in a harmonic heat bath'
version = release = qbm.__version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx_copybutton',
]

autodoc_member_order = 'bysource'
napoleon_numpy_docstring = True

html_theme = "pydata_sphinx_theme"
