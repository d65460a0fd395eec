"""
Matrix files and deterministic report output.

A matrix file is JSON ``{"dim": n, "re": [[...]], "im": [[...]]}``.  Reports
are written with sorted keys and every float at 17 significant digits, so
identical inputs give byte-identical files.  Writes go to a temporary file
in the target directory that is renamed into place only on success.
"""

import json
import math
import os
import tempfile

import numpy as np

__all__ = [
    "MatrixFileError",
    "parse_matrix",
    "read_matrix",
    "matrix_to_json",
    "dumps",
    "atomic_write",
]


class MatrixFileError(ValueError):
    pass


def _grid(doc, key, dim, where):
    rows = doc.get(key)
    if not isinstance(rows, list) or len(rows) != dim:
        raise MatrixFileError(f"{where}: '{key}' must be a list of {dim} rows")
    out = np.empty((dim, dim))
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise MatrixFileError(f"{where}: '{key}' row {i} has {got} entries, expected {dim}")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise MatrixFileError(f"{where}: '{key}'[{i}][{j}] is not a number: {x!r}")
            if not math.isfinite(x):
                raise MatrixFileError(f"{where}: '{key}'[{i}][{j}] is not finite")
            out[i, j] = x
    return out


def parse_matrix(text, where="<matrix>"):
    """Parse matrix-file text into a complex array; errors carry line and column."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise MatrixFileError(f"{where}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise MatrixFileError(f"{where}: top level must be an object")
    dim = doc.get("dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise MatrixFileError(f"{where}: 'dim' must be a positive integer")
    re = _grid(doc, "re", dim, where)
    im = _grid(doc, "im", dim, where) if "im" in doc else np.zeros((dim, dim))
    return re + 1j * im


def read_matrix(path):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise MatrixFileError(f"{path}: {e.strerror}") from None
    return parse_matrix(text, str(path))


def matrix_to_json(a):
    a = np.asarray(a, dtype=complex)
    return {"dim": a.shape[0], "re": a.real.tolist(), "im": a.imag.tolist()}


def _encode(x):
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        s = format(x, ".17g")
        # Keep floats recognizable as floats when read back.
        return s if any(c in s for c in ".en") else s + ".0"
    if isinstance(x, (complex, np.complexfloating)):
        return _encode([x.real, x.imag])
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, np.ndarray):
        return _encode(x.tolist())
    if isinstance(x, dict):
        items = sorted((str(k), v) for k, v in x.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(doc):
    """JSON with sorted keys and floats at 17 significant digits; non-finite floats become null."""
    return _encode(doc) + "\n"


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary sibling file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
