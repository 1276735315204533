"""Passive network tomography over linear network codes."""
