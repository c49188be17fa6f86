"""Sphinx configuration for the rydberg_squeezing API reference."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from rydberg_squeezing import __version__  # noqa: E402

project = "rydberg_squeezing"
author = "Zulko"
copyright = f"2025, {author}"
release = __version__
version = ".".join(release.split(".")[:2])

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
    "myst_parser",
]

# numpy-style sections (Raises, Returns, Attributes) in the docstrings
napoleon_google_docstring = False
autodoc_member_order = "bysource"
autodoc_typehints = "description"
myst_enable_extensions = ["dollarmath"]

language = "en"
html_theme = "shibuya"
html_title = f"rydberg_squeezing {release}"
