"""
Writers for run artifacts: CSV audit tables, ASCII OBJ meshes and the summary report.
"""

import csv
import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np

from . import exceptions
from .surfgeo import Immersion

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_value(value: Any) -> str:
    """Text for one CSV cell; floats use a fixed 12-significant-digit format."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def write_csv(
    path: PathLike, rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None
) -> Path:
    """
    Write rows as an RFC 4180 CSV table (CRLF line ends, minimal quoting).

    Args:
        path: Output file; parent directories are created
        rows: One mapping per row
        columns: Column order; defaults to first-seen key order across rows

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in columns])
    logger.debug(f"Wrote {len(rows)} rows to {path}")
    return path


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def with_differences(
    rows: Sequence[Mapping[str, Any]], columns: Iterable[str]
) -> List[Dict[str, Any]]:
    """Add ``d_<column>`` finite differences between consecutive rows."""
    columns = list(columns)
    out: List[Dict[str, Any]] = []
    for i, row in enumerate(rows):
        extended = dict(row)
        for c in columns:
            if i == 0 or row.get(c) is None or rows[i - 1].get(c) is None:
                extended[f"d_{c}"] = None
            else:
                extended[f"d_{c}"] = float(row[c]) - float(rows[i - 1][c])
        out.append(extended)
    return out


def format_obj(immersions: Sequence[Immersion], names: Optional[Sequence[str]] = None) -> str:
    """
    ASCII OBJ of one or more immersions, (x, y, t) taken directly as 3D coordinates.

    Each immersion becomes an ``o`` group; face indices are 1-based and offset
    across groups.
    """
    lines = ["# h2xr mesh: (x, y, t) in the solid-cylinder model"]
    offset = 0
    for i, imm in enumerate(immersions):
        lines.append(f"o {names[i] if names else f'piece_{i}'}")
        for z, t in zip(imm.z, imm.t):
            lines.append(f"v {z.real:.12g} {z.imag:.12g} {t:.12g}")
        for a, b, c in imm.triangles + offset + 1:
            lines.append(f"f {a} {b} {c}")
        offset += imm.n_vertices
    return "\n".join(lines) + "\n"


def write_obj(
    path: PathLike,
    immersions: Union[Immersion, Sequence[Immersion]],
    names: Optional[Sequence[str]] = None,
) -> Path:
    """Write an ASCII OBJ file (see :func:`format_obj`)."""
    if isinstance(immersions, Immersion):
        immersions = [immersions]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_obj(immersions, names), encoding="utf-8")
    logger.debug(f"Wrote OBJ with {len(immersions)} groups to {path}")
    return path


def file_digest(path: PathLike) -> str:
    """SHA-256 of a file's bytes."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class SummaryEntry:
    """One number in the summary report with the CSV row it comes from."""

    name: str
    value: float
    source: str
    """CSV file name, relative to the output directory"""

    row: int
    """1-based data row in that file"""

    passed: Optional[bool] = None
    """Gate outcome; None for informational numbers"""


@dataclass
class Summary:
    """Plain-text run summary; every number cites a CSV file and row."""

    title: str
    entries: List[SummaryEntry] = field(default_factory=list)

    def add(
        self, name: str, value: float, source: str, row: int, passed: Optional[bool] = None
    ) -> None:
        if row < 1:
            raise exceptions.DomainError(f"summary rows are 1-based, got {row}")
        self.entries.append(SummaryEntry(name, float(value), source, row, passed))

    @property
    def gates(self) -> List[SummaryEntry]:
        return [e for e in self.entries if e.passed is not None]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.gates)

    def render(self) -> str:
        width = max((len(e.name) for e in self.entries), default=0)
        lines = [f"# {self.title}"]
        for e in self.entries:
            verdict = "" if e.passed is None else ("  PASS" if e.passed else "  FAIL")
            cite = f"[{e.source}:{e.row}]"
            lines.append(f"{e.name.ljust(width)} = {format_value(e.value)}  {cite}{verdict}")
        if self.gates:
            lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def write(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8")
        return path
