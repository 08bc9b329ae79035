"""CSV output with embedded run metadata.

Files start with comment lines ``# key = <json>`` carrying the resolved
configuration and derived quantities, followed by a header row and the
data.  Floats are written as their shortest round-trip decimal, so files
are byte-identical across runs with the same configuration and seed.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = ["write_table", "read_table"]


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(float(value))  # shortest round-trip decimal


def write_table(path, columns: dict, metadata: dict | None = None) -> None:
    """Write named columns with '#'-prefixed metadata header lines."""
    path = Path(path)
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    n_rows = len(arrays[0])
    if any(len(a) != n_rows for a in arrays):
        raise ValueError("columns have unequal lengths")
    lines = []
    for key, value in (metadata or {}).items():
        lines.append(f"# {key} = {json.dumps(value)}")
    lines.append(",".join(names))
    for i in range(n_rows):
        lines.append(",".join(_fmt(a[i]) for a in arrays))
    path.write_text("\n".join(lines) + "\n")


def read_table(path) -> tuple[dict, dict]:
    """Read a table written by write_table: (metadata, column arrays)."""
    metadata: dict = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, raw = line[1:].partition("=")
            metadata[key.strip()] = json.loads(raw.strip())
        elif header is None:
            header = [c.strip() for c in line.split(",")]
        else:
            rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: no header row found")
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return metadata, {name: data[:, i] for i, name in enumerate(header)}
