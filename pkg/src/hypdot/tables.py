"""Deterministic CSV/JSON tables with a provenance record, and a reader for both."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

SCHEMA_VERSION = 1
PROVENANCE_PREFIX = "# provenance: "


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _parse_cell(text):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _from_json_value(value):
    if value in ("inf", "-inf", "nan"):
        return float(value)
    return value


def render_csv(columns, rows, provenance):
    buf = io.StringIO()
    buf.write(PROVENANCE_PREFIX + json.dumps(provenance, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def render_json(columns, rows, provenance):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "provenance": provenance,
        "columns": list(columns),
        "records": [{c: _json_value(row[c]) for c in columns} for row in rows],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_table(path):
    """(provenance, columns, rows) from a CSV or JSON file written by this module."""
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    if path.endswith(".json"):
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
        rows = [{k: _from_json_value(v) for k, v in rec.items()} for rec in doc["records"]]
        return doc["provenance"], doc["columns"], rows
    lines = text.splitlines()
    if not lines or not lines[0].startswith(PROVENANCE_PREFIX):
        raise ValueError("missing provenance line")
    provenance = json.loads(lines[0][len(PROVENANCE_PREFIX):])
    reader = csv.reader(lines[1:])
    columns = next(reader)
    rows = [{c: _parse_cell(v) for c, v in zip(columns, rec)} for rec in reader]
    return provenance, columns, rows
