# Configuration file for the Sphinx documentation builder.
#
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

import os
import sys

sys.path.insert(0, os.path.abspath(".."))
import fcmstab

# -- Project information -----------------------------------------------------

project = "fcmstab"
copyright = "2023, fcmstab developers"
author = "fcmstab developers"
release = fcmstab.__version__

# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",  # Core library for html generation from docstrings
    "sphinx.ext.autosectionlabel",
    "sphinx.ext.autosummary",  # Create neat summary tables
    "sphinx_copybutton",
    "sphinx.ext.doctest",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
    "sphinx_autodoc_typehints",  # needs to be AFTER napoleon
]

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

# Auto-Doc Options
# ----------------
autodoc_member_order = "groupwise"
autoclass_content = "both"
autosummary_generate = True
autosectionlabel_prefix_document = True
set_type_checking_flag = True

# the docs build without the numerical stack installed
autodoc_mock_imports = [
    "joblib",
    "matplotlib",
    "numpy",
    "pandas",
    "scipy",
    "sklearn",
]

# copy button properties
copybutton_prompt_text = r">>> |\.\.\. |\$ "
copybutton_prompt_is_regexp = True

# -- Options for HTML output -------------------------------------------------

# documentation for furo: https://pradyunsg.me/furo/quickstart/
html_theme = "furo"
