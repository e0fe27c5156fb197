"""Deterministic text serialization helpers.

Every file the CLI writes goes through these functions so that reruns with
identical arguments produce byte-identical output: floats are always printed
with 17 significant digits, files are written to a temporary path and renamed
into place only on success.
"""

from __future__ import annotations

import os
import tempfile


def fmt_float(x) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return "%.17g" % x


def _json_fragment(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt_float(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            _json_fragment(str(k), out)
            out.append(": ")
            _json_fragment(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _json_fragment(v, out)
        out.append("]")
    else:
        # numpy scalars land here; cast through float/int
        try:
            if float(obj) == int(obj) and not isinstance(obj, float):
                _json_fragment(int(obj), out)
                return
        except (TypeError, ValueError, OverflowError):
            pass
        _json_fragment(float(obj), out)


def json_dumps(obj) -> str:
    """JSON with floats at 17 significant digits and stable key order
    (insertion order of the dicts passed in)."""
    out: list[str] = []
    _json_fragment(obj, out)
    return "".join(out)


def csv_line(values) -> str:
    parts = []
    for v in values:
        if isinstance(v, str):
            parts.append(v)
        elif isinstance(v, int):
            parts.append(str(v))
        else:
            parts.append(fmt_float(v))
    return ",".join(parts)


def atomic_write_text(path: str, text: str) -> None:
    """Write to a sibling temp file, fsync, then rename over the target."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
