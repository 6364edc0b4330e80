"""Reading count tables from CSV and the bundled admissions case study.

The on-disk format is one row per cell: header ``x,y,count`` for plain
(X, Y) tables or ``z,x,y,count`` when an instrument column is present.
Category order is first-appearance order; rows repeating a label combination
are aggregated by summing.

The package ships the classic 1973 Berkeley graduate admissions aggregate
(2 applicant sexes x 6 largest departments x admit/reject, 4526 applicants),
a public dataset distributed with R as ``UCBAdmissions``.  It serves as the
worked example for the instrument-validity test, with sex in the instrument
role, department as the treatment and admission as the outcome.
"""

from __future__ import annotations

import csv
import hashlib
from importlib import resources
from typing import IO

import numpy as np

from ._version import __version__
from .errors import ParseError, ValidationError
from .procedures import iv_ternary
from .stats import ContingencyTable

__all__ = [
    "load_table",
    "parse_table",
    "as_binary_table",
    "berkeley_table",
    "berkeley_digest",
    "berkeley_analysis",
    "file_digest",
]

_BERKELEY_RESOURCE = "berkeley.csv"


def parse_table(fh: IO[str], with_instrument: bool) -> ContingencyTable:
    """Parse an open text stream in the CSV cell format.

    See :func:`load_table` for the format; this variant exists so callers
    can read from bundled resources or in-memory buffers.
    """
    expected_header = ["z", "x", "y", "count"] if with_instrument else ["x", "y", "count"]
    n_fields = len(expected_header)
    reader = csv.reader(fh)
    try:
        first = next(reader)
    except StopIteration:
        raise ParseError("empty file", line=1) from None
    header = [p.strip().lower() for p in first]
    if header != expected_header:
        raise ParseError(
            f"expected header {','.join(expected_header)!r}, got {','.join(first)!r}", line=1
        )
    axis_labels: list = [[] for _ in range(n_fields - 1)]
    index_of: list = [{} for _ in range(n_fields - 1)]
    cells: dict = {}
    for row in reader:
        if not row:
            continue
        lineno = reader.line_num
        if len(row) != n_fields:
            raise ParseError(
                f"expected {n_fields} comma-separated fields, got {len(row)}", line=lineno
            )
        *labels, count_text = [p.strip() for p in row]
        try:
            count = int(count_text)
        except ValueError:
            raise ParseError(f"count must be an integer, got {count_text!r}", line=lineno) from None
        if count < 0:
            raise ValidationError(f"line {lineno}: count must be nonnegative, got {count}")
        key = []
        for axis, label in enumerate(labels):
            if label not in index_of[axis]:
                index_of[axis][label] = len(axis_labels[axis])
                axis_labels[axis].append(label)
            key.append(index_of[axis][label])
        cells[tuple(key)] = cells.get(tuple(key), 0) + count
    if not cells:
        raise ParseError("no data rows", line=reader.line_num or 1)
    shape = tuple(len(a) for a in axis_labels)
    counts = np.zeros(shape, dtype=np.int64)
    for key, count in cells.items():
        counts[key] = count
    return ContingencyTable(counts, labels=tuple(tuple(a) for a in axis_labels))


def load_table(path, with_instrument: bool) -> ContingencyTable:
    """Read a count table from a CSV file.

    The header must be exactly ``z,x,y,count`` when ``with_instrument`` is
    true, else ``x,y,count``.  Every data row gives one cell's labels and a
    nonnegative integer count; repeated label combinations are summed.
    Categories are ordered by first appearance and recorded on the returned
    table's ``labels``.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_table(fh, with_instrument)


def as_binary_table(table: ContingencyTable) -> ContingencyTable:
    """Reindex a loaded (X, Y) table with labels "0"/"1" into literal 0/1 cells.

    The efficacy procedures interpret row 1 as treated and column 1 as
    success, so the file's categories must be named "0" and "1"; categories
    absent from the file get zero counts.
    """
    if table.has_instrument:
        raise ValidationError("expected a table without an instrument column")
    if table.labels is None:
        raise ValidationError("table carries no category labels to reindex by")
    x_labels, y_labels = table.labels
    for axis_name, labels in (("x", x_labels), ("y", y_labels)):
        extra = set(labels) - {"0", "1"}
        if extra:
            raise ValidationError(
                f"{axis_name} categories must be named '0' and '1', found {sorted(extra)}"
            )
    counts = np.zeros((2, 2), dtype=np.int64)
    for xi, xl in enumerate(x_labels):
        for yi, yl in enumerate(y_labels):
            counts[int(xl), int(yl)] = table.counts[xi, yi]
    return ContingencyTable(counts, labels=(("0", "1"), ("0", "1")))


def file_digest(path) -> str:
    """Hex SHA-256 of a file's bytes, for report provenance."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _berkeley_resource():
    return resources.files(__package__).joinpath("data").joinpath(_BERKELEY_RESOURCE)


def berkeley_table() -> ContingencyTable:
    """The bundled admissions table as a (Z, X, Y) = (sex, department, decision) table."""
    with _berkeley_resource().open("r", encoding="utf-8") as fh:
        return parse_table(fh, with_instrument=True)


def berkeley_digest() -> str:
    """Hex SHA-256 of the bundled admissions CSV."""
    return hashlib.sha256(_berkeley_resource().read_bytes()).hexdigest()


def berkeley_analysis(alpha: float, bootstrap: int, seed: int) -> dict:
    """Instrument-validity test on the bundled admissions data, as a report.

    Treats sex as the instrument for department choice and admission as the
    outcome, and asks whether a model where sex influences admission only
    through department is refutable.  The report carries the verdicts, the
    inequality statistic and the bootstrap p-value; interpreting them is
    left to the reader, and the outcome is data, never a judgment call made
    here.
    """
    table = berkeley_table()
    result = iv_ternary(table, alpha=alpha, bootstrap=bootstrap, seed=seed)
    return {
        "schema": 1,
        "version": __version__,
        "command": "berkeley",
        "args": {"alpha": alpha, "bootstrap": bootstrap},
        "seed": seed,
        "input": {
            "source": "bundled UC Berkeley 1973 admissions aggregate",
            "sha256": berkeley_digest(),
            "n": table.n,
            "card": {"z": table.z_card, "x": table.x_card, "y": table.y_card},
            "z_labels": list(table.labels[0]),
            "x_labels": list(table.labels[1]),
            "y_labels": list(table.labels[2]),
        },
        "result": result.to_json_dict(),
    }
