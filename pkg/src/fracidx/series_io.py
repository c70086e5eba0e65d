"""Series and report file handling.

Series files are plain text, one observation per line, with optional
``#``-prefixed ``key: value`` header comments recording provenance.  Values
are written with repr-level precision so a written series re-estimates
bit-identically.  JSON results carry a ``schema_version`` field.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import ValidationError

SCHEMA_VERSION = 1


def write_series(filename: str, values, header: dict | None = None) -> None:
    values = np.asarray(values, dtype=np.float64)
    with open(filename, "w") as fh:
        for key, value in (header or {}).items():
            fh.write(f"# {key}: {value}\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")


def read_series(filename: str) -> tuple[np.ndarray, dict]:
    """Read a one-column series file; returns (values, header dict).

    Raises ValidationError listing the offending line numbers if any
    non-comment line fails to parse as a number.
    """
    values = []
    header = {}
    bad_lines = []
    with open(filename) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                key, sep, value = stripped[1:].partition(":")
                if sep:
                    header[key.strip()] = value.strip()
                continue
            try:
                values.append(float(stripped))
            except ValueError:
                bad_lines.append(lineno)
    if bad_lines:
        shown = ", ".join(str(x) for x in bad_lines[:20])
        more = "" if len(bad_lines) <= 20 else f" (+{len(bad_lines) - 20} more)"
        raise ValidationError(f"non-numeric rows at line(s) {shown}{more} in {filename}")
    return np.asarray(values, dtype=np.float64), header


def read_column(filename: str, column=0, delimiter: str | None = None) -> np.ndarray:
    """Read one numeric column from a delimited text file.

    ``column`` may be an integer index or a header name (the first
    non-comment line is treated as a header when it is non-numeric).
    Comment lines starting with '#' are skipped; parse failures raise with
    line numbers.
    """
    values = []
    bad_lines = []
    col_index = column if isinstance(column, int) else None
    with open(filename) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split(delimiter) if delimiter else stripped.replace(",", " ").split()
            if col_index is None:
                names = [f.strip() for f in fields]
                if column not in names:
                    raise ValidationError(
                        f"column {column!r} not found in header {names} of {filename}"
                    )
                col_index = names.index(column)
                continue
            if col_index >= len(fields):
                bad_lines.append(lineno)
                continue
            try:
                values.append(float(fields[col_index]))
            except ValueError:
                if not values and not bad_lines:
                    # tolerate a single leading header row when indexing by number
                    continue
                bad_lines.append(lineno)
    if col_index is None:
        raise ValidationError(f"column {column!r} not found in {filename}")
    if bad_lines:
        shown = ", ".join(str(x) for x in bad_lines[:20])
        more = "" if len(bad_lines) <= 20 else f" (+{len(bad_lines) - 20} more)"
        raise ValidationError(f"non-numeric rows at line(s) {shown}{more} in {filename}")
    if not values:
        raise ValidationError(f"no numeric data found in {filename}")
    return np.asarray(values, dtype=np.float64)


def write_json_result(filename: str, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    with open(filename, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def dump_json(payload: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# study reports: CSV with '#' header comments, one row per grid cell
# ---------------------------------------------------------------------------

class ReportWriter:
    """Incremental, resumable CSV report.

    Rows are keyed by a 'cell' column; when the output file already exists,
    completed cells are loaded and skipped, which is what makes long study
    runs resumable.  The file is rewritten in grid order on close so the
    final artifact is stable.
    """

    def __init__(self, filename: str, header: dict, columns: list[str]):
        self.filename = filename
        self.header = dict(header)
        self.columns = list(columns)
        self.rows: dict[str, list[str]] = {}
        self._load_existing()
        self._fh = None

    def _load_existing(self):
        if not self.filename or not os.path.exists(self.filename):
            return
        try:
            with open(self.filename) as fh:
                cols = None
                for line in fh:
                    stripped = line.strip()
                    if not stripped or stripped.startswith("#"):
                        continue
                    fields = stripped.split(",")
                    if cols is None:
                        cols = fields
                        if cols != self.columns:
                            self.rows = {}
                            return
                        continue
                    if len(fields) == len(self.columns):
                        self.rows[fields[0]] = fields
        except OSError:
            self.rows = {}

    def done(self, cell_key: str) -> bool:
        return cell_key in self.rows

    def add(self, row: dict) -> None:
        fields = [str(row.get(c, "")) for c in self.columns]
        self.rows[fields[0]] = fields
        if self.filename:
            self._flush()

    def _flush(self):
        tmp = self.filename + ".tmp"
        with open(tmp, "w") as fh:
            for key, value in self.header.items():
                fh.write(f"# {key}: {value}\n")
            fh.write(",".join(self.columns) + "\n")
            for fields in self.rows.values():
                fh.write(",".join(fields) + "\n")
        os.replace(tmp, self.filename)
