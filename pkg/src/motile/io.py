"""CSV and directory persistence for curves, graph states and trajectories."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .geometry import DiscreteCurve, build_curve, centroid, circularity
from .interface_solver import SimConfig, StepReport, Trajectory


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_curve_csv(curve: DiscreteCurve, path: str | Path) -> Path:
    """One vertex per row under an ``x,y`` header; closure is implied."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("x,y\n")
        for x, y in curve.points:
            fh.write(f"{_fmt(x)},{_fmt(y)}\n")
    return path


def read_curve_csv(path: str | Path) -> DiscreteCurve:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header != ["x", "y"]:
            raise ValueError(f"{path}: expected header 'x,y', found {','.join(header)!r}")
        rows = [(float(a), float(b)) for a, b in reader if a.strip()]
    return build_curve(np.array(rows))


def write_graph_csv(sigma: np.ndarray, u: np.ndarray, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("sigma,u\n")
        for s, v in zip(sigma, u):
            fh.write(f"{_fmt(s)},{_fmt(v)}\n")
    return path


def read_graph_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return np.atleast_1d(data["sigma"]), np.atleast_1d(data["u"])


def write_rows(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (_fmt(v) if isinstance(v, float) else v) for v in row])
    return path


def save_trajectory(traj: Trajectory, out_dir: str | Path) -> list[Path]:
    """Write ``meta.json``, ``snap_<k>.csv`` and ``reports.csv``; returns the files written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for k, curve in enumerate(traj.snapshots):
        files.append(write_curve_csv(curve, out / f"snap_{k}.csv"))
    rows = []
    for t, curve, rep in zip(traj.times[1:], traj.snapshots[1:], traj.reports):
        c = centroid(curve)
        rows.append([t, rep.C, rep.area_residual, rep.fixed_point_iters, rep.area_iters,
                     circularity(curve), c.x, c.y])
    files.append(write_rows(out / "reports.csv",
                            ["t", "C", "area_residual", "fixed_point_iters", "area_iters",
                             "circularity", "centroid_x", "centroid_y"], rows))
    meta = {
        "config": traj.config.to_dict() if traj.config is not None else None,
        "initial_area": traj.initial_area,
        "snapshot_times": traj.times,
        "summary": traj.summary,
    }
    meta_path = out / "meta.json"
    meta_path.write_text(json.dumps(meta, indent=1))
    files.append(meta_path)
    return files


def load_trajectory(out_dir: str | Path) -> Trajectory:
    """Read back a directory written by :func:`save_trajectory` (velocities are not stored)."""
    out = Path(out_dir)
    meta = json.loads((out / "meta.json").read_text())
    times = meta["snapshot_times"]
    snaps = [read_curve_csv(out / f"snap_{k}.csv") for k in range(len(times))]
    reports = []
    with (out / "reports.csv").open(newline="") as fh:
        for row in csv.DictReader(fh):
            reports.append(StepReport(velocities=np.empty(0), C=float(row["C"]),
                                      area_residual=float(row["area_residual"]),
                                      fixed_point_iters=int(row["fixed_point_iters"]),
                                      area_iters=int(row["area_iters"])))
    cfg = SimConfig.from_dict(meta["config"]) if meta.get("config") else None
    return Trajectory(times=times, snapshots=snaps, reports=reports,
                      initial_area=meta["initial_area"], config=cfg, summary=meta.get("summary", {}))
