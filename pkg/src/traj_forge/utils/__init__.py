"""
Traj Forge utilities - workdir paths and seeded RNG streams.
"""

from .paths import ensure_dir, get_workdir, resolve_path, set_workdir
from .seeding import derive_seed, stream

__all__ = ["ensure_dir", "get_workdir", "resolve_path", "set_workdir", "derive_seed", "stream"]
