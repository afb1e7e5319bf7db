"""Implementations behind the CLI subcommands; the CLI only parses and prints."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from ..dynamics import (
    FullState,
    FullSystem,
    ReducedSystem,
    full_to_reduced,
    integrate,
    lambda_crossings,
    reduced_to_full,
    relative_drift,
)
from ..integrable import classify_topology, kappa, sigma_residual
from ..liealg import InertiaSpec
from ..reduction import OnBoundary, hamiltonized_oracle
from .config import ConfigError, RunConfig
from .io import monitors_table, trajectory_table, write_csv, write_json
from .plots import plot_columns_svg

__all__ = ["simulate", "compare", "classify", "scan", "scan_csv", "parse_grid"]


def _column_alias(name: str, n: int) -> str:
    return f"q_{n}" if name == "q_n" else name


def simulate(cfg: RunConfig, base_dir: Optional[Path] = None) -> dict:
    """Run one propagation and write the requested outputs. Returns the report."""
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    inertia = cfg.build_inertia()
    pot = cfg.build_potential()
    s0 = cfg.initial_state()
    system = FullSystem(inertia, pot) if isinstance(s0, FullState) else ReducedSystem(inertia, pot)
    it = cfg.integrator
    traj = integrate(system, s0, it.dt, it.steps, record_every=it.record_every, reproject=it.reproject)
    table = trajectory_table(traj, inertia, pot)
    n = cfg.n

    drifts = {"energy": relative_drift(table["energy"])}
    if not np.isnan(table["f_1"]).any():
        drifts["f"] = [relative_drift(table[f"f_{i}"]) for i in range(1, n)]
    crossings = lambda_crossings(system, traj, it.dt)
    qs = np.column_stack([table[f"q_{i}"] for i in range(1, n + 1)])
    ps = np.column_stack([table[f"p_{i}"] for i in range(1, n)])
    sigma = [max(sigma_residual(q, p, inertia, pot)) for q, p in zip(qs, ps)]
    report = {
        "config": cfg.model_dump(mode="json", exclude_none=True),
        "system": "full" if isinstance(s0, FullState) else "reduced",
        "samples": len(traj),
        "t_final": float(traj.times[-1]),
        "drifts": drifts,
        "max_energy_error": float(np.abs(table["energy"] - table["energy"][0]).max()),
        "lambda_crossings": crossings,
        "sigma_proximity": {
            "min_sample_residual": float(min(sigma)),
            "min_crossing_ap_dot_q": min((c["ap_dot_q"] for c in crossings), default=None),
        },
    }
    if "orthogonality" in traj.monitors:
        report["max_orthogonality_error"] = float(np.max(traj.monitors["orthogonality"]))
    if "norm_error" in traj.monitors:
        report["max_norm_error"] = float(np.max(traj.monitors["norm_error"]))

    out = cfg.outputs
    if out.trajectory_csv:
        write_csv(table, base_dir / out.trajectory_csv)
    if out.monitors_csv:
        write_csv(monitors_table(traj), base_dir / out.monitors_csv)
    if out.plot_svg:
        plot_columns_svg(table, [_column_alias(c, n) for c in out.plot_columns], base_dir / out.plot_svg)
    if out.report_json:
        write_json(report, base_dir / out.report_json)
    return report


def compare(cfg: RunConfig, window: float = 0.1) -> dict:
    """Full vs reduced vs Hamiltonized propagation from matched initial data."""
    inertia = cfg.build_inertia()
    pot = cfg.build_potential()
    s0 = cfg.initial_state()
    if isinstance(s0, FullState):
        full0, red0 = s0, full_to_reduced(s0, inertia)
    else:
        red0, full0 = s0, reduced_to_full(s0, inertia)
    if abs(red0.q[-1]) <= window:
        raise OnBoundary(f"initial data on Lambda: |q_n| = {abs(red0.q[-1]):.3g} <= {window}")
    it = cfg.integrator
    full = integrate(FullSystem(inertia, pot), full0, it.dt, it.steps)
    red = integrate(ReducedSystem(inertia, pot), red0, it.dt, it.steps)
    full_axis = full.axes()
    full_p = np.array([-(inertia.J @ s.omega) for s in full.states])
    red_axis = red.axes()
    red_p = np.array([s.p for s in red.states])
    ham = hamiltonized_oracle(inertia, pot, red0, it.dt, it.steps, window=window, reduced=red)
    return {
        "full_vs_reduced": {
            "sup_axis_error": float(np.abs(full_axis - red_axis).max()),
            "sup_momentum_error": float(np.abs(full_p - red_p).max()),
            "t_final": float(red.times[-1]),
        },
        "hamiltonized_vs_reduced": ham,
        "window": {"threshold": window, "t_start": 0.0, "t_end": ham["window_end_t"]},
    }


def classify(c, masses, B, tol: float = 1e-9) -> dict:
    inertia = InertiaSpec.physical(masses)
    B = np.asarray(B, dtype=float)
    c = np.asarray(c, dtype=float)
    if B.size != inertia.n or c.size != inertia.n - 1:
        raise ConfigError(f"need len(inertia) = len(B) = len(c) + 1, got {inertia.n}, {B.size}, {c.size}")
    k = kappa(inertia, B)
    if np.any(k <= 0):
        raise ConfigError(f"kappa must be positive (B_i > B_n); got kappa = {k.tolist()}")
    result = classify_topology(c, k, tol).to_dict()
    result["kappa"] = k.tolist()
    return result


def _axis_values(spec) -> list[float]:
    if isinstance(spec, dict):
        return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"])).tolist()
    return [float(v) for v in spec]


def parse_grid(grid: dict) -> tuple[InertiaSpec, np.ndarray, list[list[float]], float]:
    try:
        inertia = InertiaSpec.physical(grid["inertia"])
        B = np.asarray(grid["B"], dtype=float)
        axes = [_axis_values(a) for a in grid["c"]]
    except KeyError as exc:
        raise ConfigError(f"missing required field '{exc.args[0]}'") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid grid: {exc}") from None
    if len(axes) != inertia.n - 1 or B.size != inertia.n:
        raise ConfigError("grid needs one c axis per index i < n and len(B) == n")
    if any(len(a) == 0 for a in axes):
        raise ConfigError("grid axes must be non-empty")
    k = kappa(inertia, B)
    if np.any(k <= 0):
        raise ConfigError(f"kappa must be positive (B_i > B_n); got kappa = {k.tolist()}")
    return inertia, k, axes, float(grid.get("tol", 1e-9))


def scan(grid: dict, workers: int = 1) -> list[dict]:
    """Classify every grid point, row-major; row order does not depend on ``workers``."""
    _, k, axes, tol = parse_grid(grid)
    points = list(itertools.product(*axes))

    def one(c):
        cls = classify_topology(np.array(c), k, tol)
        row = {f"c_{i + 1}": v for i, v in enumerate(c)}
        row["sum_ratio"] = cls.certificate["sum_ratios"]
        row["tag"] = cls.tag
        detail = cls.l if cls.l is not None else cls.count if cls.count is not None else cls.torus_dim
        row["detail"] = cls.reason if cls.reason is not None else ("" if detail is None else str(detail))
        return row

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, points))
    return [one(c) for c in points]


def scan_csv(rows: list[dict]) -> str:
    import csv
    import io

    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
