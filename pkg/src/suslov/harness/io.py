"""Trajectory tables, CSV and JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from ..dynamics import FullState, ReducedState, Trajectory, energy
from ..integrable import integrals_fi
from ..liealg import InertiaSpec
from ..potentials import Potential
from ..reduction import CanonicalState

__all__ = ["trajectory_columns", "trajectory_table", "monitors_table", "write_csv", "read_csv",
           "dumps_json", "write_json"]


def trajectory_columns(n: int) -> list[str]:
    return (["t", "tau"] + [f"q_{i}" for i in range(1, n + 1)]
            + [f"omega_{i}{n}" for i in range(1, n)]
            + [f"p_{i}" for i in range(1, n)]
            + ["energy"] + [f"f_{i}" for i in range(1, n)])


def _fi_supported(inertia: InertiaSpec, pot: Potential) -> bool:
    return inertia.kind == "physical" and pot.kind != "lagrange_top"


def trajectory_table(traj: Trajectory, inertia: InertiaSpec, pot: Potential) -> dict[str, np.ndarray]:
    """Columns of the trajectory CSV; absent quantities are NaN (written empty)."""
    n = inertia.n
    cols = {name: np.full(len(traj), np.nan) for name in trajectory_columns(n)}
    cols["t"] = traj.times.copy()
    if traj.tau is not None:
        cols["tau"] = np.asarray(traj.tau, dtype=float).copy()
    with_f = _fi_supported(inertia, pot)
    for k, s in enumerate(traj.states):
        if isinstance(s, FullState):
            q, w = s.g[-1], s.omega
            p = -(inertia.J @ w)
        elif isinstance(s, ReducedState):
            q, p = s.q, s.p
            w = -(inertia.A @ p)
        elif isinstance(s, CanonicalState):
            q, p = s.axis, s.p
            w = -(inertia.A @ p)
        else:
            raise TypeError(f"unsupported state type {type(s).__name__}")
        for i in range(n):
            cols[f"q_{i + 1}"][k] = q[i]
        for i in range(n - 1):
            cols[f"omega_{i + 1}{n}"][k] = w[i]
            cols[f"p_{i + 1}"][k] = p[i]
        cols["energy"][k] = energy(ReducedState(q, p), inertia, pot)
        if with_f:
            f = integrals_fi(q, p, inertia, pot)
            for i in range(n - 1):
                cols[f"f_{i + 1}"][k] = f[i]
    return cols


def monitors_table(traj: Trajectory) -> dict[str, np.ndarray]:
    cols = {"t": traj.times.copy()}
    cols.update({k: np.asarray(v, dtype=float) for k, v in traj.monitors.items()})
    if "energy" in cols:
        cols["energy_error"] = cols["energy"] - cols["energy"][0]
    return cols


def _fmt(x: float) -> str:
    if math.isnan(x):
        return ""
    return repr(float(x))


def write_csv(table: dict[str, np.ndarray], path: Optional[Path] = None) -> str:
    """Write columns as RFC 4180 CSV; floats use shortest round-trip repr."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    names = list(table)
    writer.writerow(names)
    length = len(next(iter(table.values()))) if table else 0
    for k in range(length):
        row = []
        for name in names:
            val = table[name][k]
            row.append(val if isinstance(val, str) else _fmt(val))
        writer.writerow(row)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, newline="")
    return text


def read_csv(source) -> dict[str, np.ndarray]:
    """Inverse of :func:`write_csv` for numeric tables (empty cells become NaN)."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text()
    else:
        text = source
    rows = list(csv.reader(io.StringIO(text)))
    names = rows[0]
    data = [[float(cell) if cell != "" else np.nan for cell in row] for row in rows[1:]]
    arr = np.array(data, dtype=float).reshape(len(data), len(names))
    return {name: arr[:, j] for j, name in enumerate(names)}


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, default=_default) + "\n"


def write_json(obj, path: Path) -> None:
    Path(path).write_text(dumps_json(obj))
