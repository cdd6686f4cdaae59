import csv
import io
import json
import logging
import math
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, TextIO

import numpy as np

from .errors import InputFileError
from .stepwise import PValueSample

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PVALUE_HEADER = "p"


def read_pvalues(path: str | Path) -> PValueSample:
    """Read a one-column CSV of p-values with header `p`.

    Blank lines are skipped. Errors name the 1-based line of the offending row.
    """
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise InputFileError(f"cannot read {path}: {e.strerror}") from e

    values: list[float] = []
    with handle:
        reader = csv.reader(handle)
        header_seen = False
        for row in reader:
            line = reader.line_num
            cells = [cell.strip() for cell in row]
            if not cells or cells == [""]:
                continue
            if not header_seen:
                if cells != [PVALUE_HEADER]:
                    raise InputFileError(f"expected header '{PVALUE_HEADER}', got {','.join(row)!r}", line)
                header_seen = True
                continue
            if len(cells) != 1:
                raise InputFileError(f"expected one value, got {len(cells)}", line)
            try:
                value = float(cells[0])
            except ValueError as e:
                raise InputFileError(f"not a number: {cells[0]!r}", line) from e
            if math.isnan(value) or not 0.0 <= value <= 1.0:
                raise InputFileError(f"p-value {cells[0]} outside [0, 1]", line)
            values.append(value)

    if not values:
        raise InputFileError("no p-values")
    log.info("Read %d p-values from %s", len(values), path)
    return PValueSample(np.array(values))


def format_number(value: Any) -> str:
    """17 significant digits for floats so values round-trip exactly; blanks for None."""
    if value is None:
        return ""
    if isinstance(value, bool | np.bool_):
        return "1" if value else "0"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return format(float(value), ".17g")
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(value) for value in row])
    return buffer.getvalue()


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def render_json(payload: dict[str, Any]) -> str:
    """Versioned JSON document: the payload with a leading `schema` key."""
    document = {"schema": SCHEMA_VERSION, **_jsonable(payload)}
    return json.dumps(document, sort_keys=False, allow_nan=False) + "\n"


def write_text(text: str, path: Path | None, stream: TextIO | None = None):
    """Write to `path`, or to `stream` (stdout by default) when no path is given."""
    if path is None:
        (stream or sys.stdout).write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("Wrote %s", path)


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: Path | None = None):
    write_text(render_csv(header, rows), path)


def write_json(payload: dict[str, Any], path: Path | None = None, stream: TextIO | None = None):
    write_text(render_json(payload), path, stream)


def error_document(error: Exception) -> str:
    details = {"type": type(error).__name__, "message": str(error)}
    if isinstance(error, InputFileError):
        details.update(error.details())
    return json.dumps({"schema": SCHEMA_VERSION, "error": details}) + "\n"
