# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Project information -----------------------------------------------------
from typing import Any

from spoofaudit import __version__

project = "spoofaudit"
author = "spoofaudit contributors"
copyright = f"2026, {author}"

release = __version__
version = __version__

# -- General configuration ---------------------------------------------------

extensions = [
    "myst_parser",
    "sphinx.ext.viewcode",
    "sphinx_copybutton",
]

templates_path = ["_templates"]
exclude_patterns = []

myst_enable_extensions = [
    "colon_fence",
    "deflist",
    "dollarmath",
    "fieldlist",
    "linkify",
    "smartquotes",
]

# -- Options for HTML output -------------------------------------------------

html_theme = "furo"
html_title = "spoofaudit"
html_theme_options: dict[str, Any] = {
    "source_directory": "docs/source",
}
