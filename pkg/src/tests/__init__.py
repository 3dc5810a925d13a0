"""
Test package for Traj Forge.

Shared fixtures live in ``conftest.py``.
"""
