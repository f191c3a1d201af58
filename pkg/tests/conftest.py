"""Shared test configuration.

Nothing lives here beyond making the sibling ``_reference`` module (the
independent oracle implementations) importable by every test module.
"""
