#!/usr/bin/env python3
# 🌀 Eidosian Sequence Manifest
"""
Sequence Manifest - the index of a sequence directory.

Every artifact the pipeline writes is registered with its format tag, the
stream it belongs to and its frame index. The manifest is written as
sorted JSON without timestamps so two runs of the same configuration
produce byte-identical files.
"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .errors import FormatError
from .version import VERSION

logger = logging.getLogger("traj_forge.sequence_manifest")

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1

# Format tag per file kind
FORMAT_TAGS = {
    "ttnr": "TTNR raster",
    "tocc": "TOCC occupancy grid",
    "tldr": "TLDR point cloud",
    "poses": "pose text",
    "scene": "scene text",
    "report": "verify report",
    "csv": "csv",
    "yaml": "yaml config",
}


@dataclass(frozen=True)
class ArtifactEntry:
    path: str
    format: str
    stream: str
    frame: Optional[int] = None


class SequenceManifest:
    """
    Registry of the artifacts of one sequence directory.

    Paths are stored relative to the sequence root with forward slashes.
    """

    def __init__(self, root: Union[str, Path], metadata: Optional[Dict[str, Any]] = None):
        self.root = Path(root)
        self.metadata: Dict[str, Any] = dict(metadata or {})
        self.entries: Dict[str, ArtifactEntry] = {}

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST_NAME

    def add(self, path: Union[str, Path], fmt: str, stream: str, frame: Optional[int] = None) -> ArtifactEntry:
        """
        Register an artifact.

        Raises:
            FormatError: For an unknown format tag or a path outside the root
        """
        if fmt not in FORMAT_TAGS:
            raise FormatError(f"Unknown artifact format '{fmt}'")
        path = Path(path)
        if path.is_absolute():
            try:
                path = path.relative_to(self.root)
            except ValueError as e:
                raise FormatError(f"Artifact {path} is outside {self.root}") from e
        entry = ArtifactEntry(path.as_posix(), fmt, stream, None if frame is None else int(frame))
        self.entries[entry.path] = entry
        return entry

    def by_stream(self, stream: str) -> List[ArtifactEntry]:
        """Entries of one stream, ordered by frame then path."""
        chosen = [e for e in self.entries.values() if e.stream == stream]
        return sorted(chosen, key=lambda e: (-1 if e.frame is None else e.frame, e.path))

    def streams(self) -> List[str]:
        return sorted({e.stream for e in self.entries.values()})

    def missing(self) -> List[str]:
        """Registered paths that do not exist on disk."""
        return [p for p in sorted(self.entries) if not (self.root / p).exists()]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "manifest_version": MANIFEST_VERSION,
            "generator": f"traj_forge {VERSION}",
            "metadata": self.metadata,
            "artifacts": [asdict(self.entries[p]) for p in sorted(self.entries)],
        }

    def save(self) -> Path:
        """Write ``manifest.json`` into the sequence root."""
        self.root.mkdir(parents=True, exist_ok=True)
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        with open(self.manifest_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        logger.info(f"✅ Saved manifest with {len(self.entries)} artifacts to {self.manifest_path}")
        return self.manifest_path

    @classmethod
    def load(cls, root: Union[str, Path]) -> "SequenceManifest":
        """
        Read ``manifest.json`` from a sequence root.

        Raises:
            FormatError: If the file is missing or malformed
        """
        manifest = cls(root)
        try:
            with open(manifest.manifest_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise FormatError(f"Cannot read manifest {manifest.manifest_path}: {e}") from e
        if data.get("manifest_version") != MANIFEST_VERSION:
            raise FormatError(f"Unsupported manifest version {data.get('manifest_version')}")
        manifest.metadata = data.get("metadata", {})
        for item in data.get("artifacts", []):
            try:
                manifest.add(item["path"], item["format"], item["stream"], item.get("frame"))
            except KeyError as e:
                raise FormatError(f"Manifest entry is missing {e}") from e
        logger.debug(f"📚 Loaded manifest with {len(manifest.entries)} artifacts")
        return manifest
