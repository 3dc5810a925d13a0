#!/usr/bin/env python3
# 🌀 Eidosian Version System - Single Source of Truth
"""
Version information for Traj Forge.

One place for the version components; everything else (the CLI banner,
sequence manifests, packaging) reads from here.
"""

import os
import re
from typing import Dict, Tuple, Union

VERSION_MAJOR = 0
VERSION_MINOR = 2
VERSION_PATCH = 0
VERSION_LABEL = "alpha"  # "alpha", "beta", "rc" or ""
VERSION_LABEL_NUM = 0


def _assemble(major: int, minor: int, patch: int, label: str, label_num: int) -> Tuple[str, str]:
    """Build the display version and its PEP 440 counterpart."""
    display = f"{major}.{minor}.{patch}"
    pep440 = display
    if label:
        display += f"-{label}"
        if label_num > 0:
            display += f".{label_num}"
        short = {"alpha": "a", "beta": "b", "rc": "rc"}.get(label)
        if short is not None:
            pep440 += f"{short}{label_num}"
        else:
            pep440 += f".{label}{label_num}"
    return display, pep440


VERSION, PEP440_VERSION = _assemble(
    VERSION_MAJOR, VERSION_MINOR, VERSION_PATCH, VERSION_LABEL, VERSION_LABEL_NUM
)
__version__ = VERSION

# Release builds pin the version through the environment
_override = os.environ.get("TRAJ_FORGE_VERSION")
if _override:
    _match = re.match(r"(\d+)\.(\d+)\.(\d+)(?:-([a-zA-Z]+)\.?(\d+)?)?$", _override)
    if _match:
        _groups = _match.groups()
        VERSION_MAJOR, VERSION_MINOR, VERSION_PATCH = (int(g) for g in _groups[:3])
        VERSION_LABEL = _groups[3] or ""
        VERSION_LABEL_NUM = int(_groups[4]) if _groups[4] else 0
        VERSION, PEP440_VERSION = _assemble(
            VERSION_MAJOR, VERSION_MINOR, VERSION_PATCH, VERSION_LABEL, VERSION_LABEL_NUM
        )
        __version__ = VERSION


def get_version_string() -> str:
    """
    Get the full version string.

    Returns:
        Version string such as ``0.2.0-alpha``
    """
    return VERSION


def get_version_info() -> Dict[str, Union[int, str]]:
    """
    Get complete version information as a dictionary.

    Returns:
        Dictionary with version components
    """
    return {
        "major": VERSION_MAJOR,
        "minor": VERSION_MINOR,
        "patch": VERSION_PATCH,
        "label": VERSION_LABEL,
        "label_num": VERSION_LABEL_NUM,
        "version": VERSION,
        "pep440_version": PEP440_VERSION,
    }


if __name__ == "__main__":
    print(f"Traj Forge v{VERSION} (PEP440: {PEP440_VERSION})")
