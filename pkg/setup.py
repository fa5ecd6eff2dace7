"""
Setup script for h2xr (for backwards compatibility).
"""

from setuptools import setup

# Configuration is in pyproject.toml
setup()
