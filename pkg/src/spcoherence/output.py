"""CSV output with a config-echo header, written atomically."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .config import RunConfig


def format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path: str | Path, columns: dict, config: RunConfig | None = None, notes=()) -> Path:
    """Write equal-length ``columns`` to ``path`` via a temporary file and rename.

    The header holds ``# key = value`` lines for ``config`` followed by
    ``## note`` lines, then the column names.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    data = [np.asarray(columns[n]) for n in names]
    if len({d.shape[0] for d in data}) > 1:
        raise ValueError("columns must have equal length")
    lines = []
    if config is not None:
        lines += [f"# {ln}" for ln in config.echo_lines()]
    lines += [f"## {n}" for n in notes]
    lines.append(",".join(names))
    for row in zip(*data):
        lines.append(",".join(format_value(v.item() if hasattr(v, "item") else v) for v in row))
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_csv(path: str | Path):
    """Return (header lines, {column: values}); numeric columns become float arrays."""
    header, rows, names = [], [], None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            header.append(line)
        elif names is None:
            names = line.split(",")
        elif line:
            rows.append(line.split(","))
    cols = {}
    for i, n in enumerate(names or []):
        vals = [r[i] for r in rows]
        try:
            cols[n] = np.array([float(v) for v in vals])
        except ValueError:
            cols[n] = np.array(vals, dtype=object)
    return header, cols


def write_near_field(path: str | Path, line, config: RunConfig | None = None) -> Path:
    """Store a near-field phasor line as (coordinate, real, imag)."""
    notes = [f"height = {line.height!r}", f"wavelength = {line.wavelength!r}"]
    return write_csv(path, {"coordinate": line.x, "real": line.phasor.real, "imag": line.phasor.imag},
                     config, notes)


def read_near_field(path: str | Path):
    """Inverse of :func:`write_near_field`."""
    from .fdtd.transverse import NearFieldLine

    header, cols = read_csv(path)
    notes = dict(ln[2:].strip().split(" = ", 1) for ln in header if ln.startswith("## "))
    return NearFieldLine(cols["coordinate"], cols["real"] + 1j * cols["imag"],
                         float(notes["height"]), float(notes["wavelength"]))
