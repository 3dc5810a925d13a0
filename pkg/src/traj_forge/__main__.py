#!/usr/bin/env python3
# 🌀 Eidosian Module Entry Point
"""
Entry point for ``python -m traj_forge``.

Examples:
    .. code-block:: bash

        $ python -m traj_forge genscene --seed 3 --out scene.txt
        $ python -m traj_forge pipeline --config sequence.yaml --out seq_000
"""

import logging
import sys

from .run import main
from .version import get_version_string

logger = logging.getLogger("traj_forge.__main__")


def module_entry_point() -> int:
    """
    Run the CLI, mapping an interrupt to exit code 130.

    Returns:
        int: Exit code (0 for success, non-zero for failure)
    """
    try:
        logger.debug(f"🌀 Traj Forge v{get_version_string()} module entry point activated")
        return main()
    except KeyboardInterrupt:
        logger.info("⌨️  Interrupted by user")
        return 130
    except Exception as e:
        logger.error(f"💥 Execution failed: {e}", exc_info=True)
        print("📜 Run with TRAJ_FORGE_DEBUG=1 for verbose output")
        return 1


if __name__ == "__main__":
    sys.exit(module_entry_point())
