#!/usr/bin/env python3
"""
Artifact writer for run outputs
Writes metrics CSVs, summaries and formation traces atomically
"""
import csv
import json
import logging
import threading
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

from utils import format_float


logger = logging.getLogger("coalspec.artifacts")

ARTIFACT_SCHEMA_VERSION = 1


class ArtifactError(Exception):
    """Raised when an output file cannot be written"""
    pass


class ArtifactWriter:
    """
    Thread-safe writer of output files

    Every file is written to a temp file first, then renamed over the target,
    so readers never see a partial file.
    """

    def __init__(self, output_dir: Path):
        """
        Initialize writer

        Args:
            output_dir: Directory receiving the artifacts (created if missing)
        """
        self.output_dir = Path(output_dir)
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ArtifactError(f"Output directory {self.output_dir} is not writable: {e}") from e
        self.lock = threading.RLock()
        self.written: List[Path] = []

    def _replace(self, name: str, write) -> Path:
        """Write through a temp file (assumes lock is held)"""
        target = self.output_dir / name
        temp_file = target.with_suffix(target.suffix + ".tmp")
        try:
            with open(temp_file, "w", encoding="utf-8", newline="") as f:
                write(f)
            temp_file.replace(target)
        except OSError as e:
            raise ArtifactError(f"Failed to write {target}: {e}") from e
        self.written.append(target)
        logger.debug(f"Wrote {target}")
        return target

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
        """
        Write rows as CSV with a header row

        Args:
            name: File name inside the output directory
            columns: Column order
            rows: Dicts keyed by column

        Returns:
            Path of the written file
        """
        def write(f):
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_cell(row.get(c, "")) for c in columns])

        with self.lock:
            return self._replace(name, write)

    def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        """Write a JSON document carrying the artifact schema version"""
        document = {"schema_version": ARTIFACT_SCHEMA_VERSION, **data}

        def write(f):
            json.dump(document, f, indent=2, ensure_ascii=False)
            f.write("\n")

        with self.lock:
            return self._replace(name, write)


def _cell(value: Any) -> str:
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    return format_float(value)


def read_json(path: Path) -> Dict[str, Any]:
    """Load an artifact JSON file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ArtifactError(f"Cannot read {path}: {e}") from e
