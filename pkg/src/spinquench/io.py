"""Deterministic file output, config parsing, and table round-tripping.

Data files are the contract: CSV tables with exact header rows, JSON
summaries with a top-level schema_version, and no wall-clock content
anywhere, so identical configs produce byte-identical artifacts.  Floats
are written with repr (shortest round-trip form).
"""

from __future__ import annotations

import configparser
import dataclasses
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError

SCHEMA_VERSION = 1


def fmt(value) -> str:
    """Round-trip text form of one cell."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv_columns(path):
    """(header, columns) of a CSV written by write_csv; empty cells -> nan."""
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln]
    if not lines:
        raise ConfigError(f"{path}: empty table")
    header = lines[0].split(",")
    cols = [[] for _ in header]
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ConfigError(f"{path}: ragged row {ln!r}")
        for c, cell in zip(cols, cells):
            c.append(float(cell) if cell else np.nan)
    return header, [np.array(c) for c in cols]


def jsonable(obj):
    """Recursively convert dataclasses / numpy values for json.dumps."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload: dict) -> None:
    body = {"schema_version": SCHEMA_VERSION}
    body.update(jsonable(payload))
    Path(path).write_text(json.dumps(body, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def error_json(exc: BaseException) -> str:
    return json.dumps({
        "schema_version": SCHEMA_VERSION,
        "error": type(exc).__name__,
        "message": str(exc),
    }, sort_keys=True)


def write_operator_csv(path, op) -> None:
    """Tridiagonal operator dump: one row per basis index k."""
    rows = ((k, op.diagonal[k],
             op.offdiagonal[k] if k < op.offdiagonal.size else None)
            for k in range(op.dim))
    write_csv(path, ["k", "diagonal", "offdiagonal"], rows)


def write_spectrum_csv(path, values) -> None:
    """Eigenvalue dump: alpha (1-based, ascending) and energy."""
    write_csv(path, ["alpha", "energy"],
              ((a + 1, e) for a, e in enumerate(values)))


def load_config(path) -> dict:
    """INI-style key = value configuration as {section: {key: value}} strings."""
    parser = configparser.ConfigParser()
    read = parser.read(str(path))
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    return {section: dict(parser.items(section)) for section in parser.sections()}


def write_config(path, sections: dict) -> None:
    parser = configparser.ConfigParser()
    for section in sorted(sections):
        parser[section] = {k: fmt(v) for k, v in sorted(sections[section].items())}
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def write_plot_script(path, csv_name: str, x: str, y, title: str,
                      kind: str = "line", logx: bool = False, logy: bool = False) -> None:
    """Standalone matplotlib script next to the data file (a convenience;
    the CSV is the contract)."""
    ys = [y] if isinstance(y, str) else list(y)
    lines = [
        "#!/usr/bin/env python3",
        f'"""Plot {title} from {csv_name}."""',
        "import csv",
        "import matplotlib.pyplot as plt",
        "",
        f"rows = list(csv.DictReader(open({csv_name!r})))",
        f"x = [float(r[{x!r}]) for r in rows]",
    ]
    for i, col in enumerate(ys):
        lines.append(f"y{i} = [float(r[{col!r}]) for r in rows if r[{col!r}]]")
    lines.append("fig, ax = plt.subplots()")
    if kind == "map":
        lines += [
            f"import numpy as np",
            f"qi = sorted(set(x))",
            f"qf = sorted(set(float(r[{ys[0]!r}]) for r in rows))",
            f"z = np.full((len(qi), len(qf)), float('nan'))",
            f"val = dict((((float(r[{x!r}]), float(r[{ys[0]!r}]))), float(r[{ys[1]!r}])) for r in rows)",
            "for i, a in enumerate(qi):",
            "    for j, b in enumerate(qf):",
            "        z[i, j] = val.get((a, b), float('nan'))",
            "m = ax.pcolormesh(qf, qi, z, shading='nearest')",
            "fig.colorbar(m, ax=ax)",
            f"ax.set_xlabel({ys[0]!r})",
            f"ax.set_ylabel({x!r})",
        ]
    else:
        for i, col in enumerate(ys):
            lines.append(f"ax.plot(x[:len(y{i})], y{i}, label={col!r})")
        lines.append(f"ax.set_xlabel({x!r})")
        if len(ys) > 1:
            lines.append("ax.legend()")
        else:
            lines.append(f"ax.set_ylabel({ys[0]!r})")
        if logx:
            lines.append("ax.set_xscale('log')")
        if logy:
            lines.append("ax.set_yscale('log')")
    lines += [
        f"ax.set_title({title!r})",
        "plt.show()",
        "",
    ]
    Path(path).write_text("\n".join(lines), encoding="utf-8")
