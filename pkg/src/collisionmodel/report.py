"""CSV / JSON writers. Every file carries the full parameter set."""

import io
import json
import sys
from contextlib import contextmanager

_FLOAT_FMT = "%.17g"


def _cell(v):
    if isinstance(v, float):
        return _FLOAT_FMT % v
    return str(v)


def render_csv(columns, rows, provenance, summary=None):
    buf = io.StringIO()
    buf.write("# provenance: " + json.dumps(provenance, sort_keys=True) + "\n")
    if summary is not None:
        buf.write("# summary: " + json.dumps(summary, sort_keys=True) + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def render_json(columns, rows, provenance, summary=None):
    doc = {
        "provenance": provenance,
        "steps": [dict(zip(columns, row)) for row in rows],
        "summary": summary or {},
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def render(fmt, columns, rows, provenance, summary=None):
    rows = [[v.item() if hasattr(v, "item") else v for v in row] for row in rows]
    if fmt == "json":
        return render_json(columns, rows, provenance, summary)
    return render_csv(columns, rows, provenance, summary)


@contextmanager
def _open(path):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    with fh:
        yield fh


def write_report(path, fmt, columns, rows, provenance, summary=None):
    text = render(fmt, columns, rows, provenance, summary)
    with _open(path) as fh:
        fh.write(text)
    return text


def read_csv(path):
    """Read a CSV report back as ``(meta, columns, rows)`` (rows of strings)."""
    meta = {}
    columns = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, payload = line[2:].partition(": ")
                meta[key] = json.loads(payload)
            elif columns is None:
                columns = line.split(",")
            elif line:
                rows.append(line.split(","))
    return meta, columns, rows
