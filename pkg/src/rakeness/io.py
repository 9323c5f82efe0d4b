"""Plain-text artifacts: CSV tables and ``key = value`` files.

All files are UTF-8 with LF line endings and numbers written as ``%.12g``.
"""
import os

import numpy as np

from .exceptions import InvalidInputError
from .spectral import SpectralDensity


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % value
    return str(value)


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def write_table(path, header, rows):
    lines = [",".join(header)] if header else []
    lines += [",".join(fmt(v) for v in row) for row in rows]
    _write(path, "\n".join(lines) + "\n")


def read_table(path):
    """``(header, rows)`` with every cell as a string."""
    with open(path, encoding="utf-8") as f:
        lines = [ln.rstrip("\n") for ln in f if ln.strip()]
    if not lines:
        raise InvalidInputError(f"{path} is empty")
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def write_matrix(path, M):
    M = np.atleast_2d(np.asarray(M))
    write_table(path, None, M.tolist())


def read_matrix(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_vector_rows(path, X):
    """One vector per row, e.g. a signal corpus or chip sequences."""
    write_matrix(path, X)


def write_keyvalue(path, items):
    _write(path, "".join(f"{k} = {fmt(v)}\n" for k, v in items.items()))


def parse_keyvalue(text, source="<text>"):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{source}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise InvalidInputError(f"{source}:{n}: empty key")
        if key in out:
            raise InvalidInputError(f"{source}:{n}: duplicate key {key!r}")
        out[key] = value
    return out


def read_keyvalue(path):
    with open(path, encoding="utf-8") as f:
        return parse_keyvalue(f.read(), source=os.fspath(path))


SPECTRUM_HEADER = ("f_center_hz", "psd")


def write_spectrum(path, sd):
    write_table(path, SPECTRUM_HEADER, zip(sd.frequencies, sd.values))


def read_spectrum(path):
    header, rows = read_table(path)
    if tuple(header) != SPECTRUM_HEADER:
        raise InvalidInputError(f"{path}: not a spectral density file")
    data = np.array(rows, dtype=float)
    f, v = data[:, 0], data[:, 1]
    if f.size < 2:
        return SpectralDensity.from_values(v, bandwidth=1.0)
    df = f[1] - f[0]
    return SpectralDensity.from_values(v, bandwidth=0.5 * f.size * df)
