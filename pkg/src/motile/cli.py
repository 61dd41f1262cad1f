"""Command-line entry point: ``motile <subcommand> [--config cfg.json] [--out dir]``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import (CONVERGE, DRIFT, GRAPH, PHI_TABLE, SIMULATE, SUBCOMMANDS, WAVE, DriftSettings,
                     GraphSettings, SimulateSettings, WaveSettings, config_from_dict, load_json)
from .errors import MotileError, NoBlowUp, ValidationError
from .experiments import (beta_sweep, convergence_study, four_ellipse_curve, sample_four_ellipse,
                          zeta_sweep)
from .geometry import DiscreteCurve, build_curve, circle_points, ellipse_points, shoelace_area
from .graph_solver import CurveChart, GraphState, embed, graph_state_from_function, run_graph
from .interface_solver import run
from .io import read_curve_csv, read_graph_csv, save_trajectory, write_graph_csv, write_rows
from .phi import phi0_table, save_table
from .svg import emit_svg
from .traveling_wave import closure_obstruction, sweep

log = logging.getLogger("motile")

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class Outputs:
    """Tracks every file a subcommand writes, for the manifest inventory."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.root / name
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def add(self, *paths) -> None:
        self.files.extend(Path(p) for p in paths)

    def inventory(self) -> list[str]:
        return sorted({str(p.relative_to(self.root)) for p in self.files})


def initial_curve(settings: SimulateSettings) -> DiscreteCurve:
    init = settings.initial
    n = settings.config.n
    kind = init["kind"]
    if kind == "four_ellipse":
        zeta = float(init.get("zeta", 2.0))
        return four_ellipse_curve(zeta, n) if n >= 64 else sample_four_ellipse(zeta, n)
    if kind == "ellipse":
        return build_curve(ellipse_points(n, float(init.get("a", 2.0)), float(init.get("b", 1.0))))
    if kind == "circle":
        return build_curve(circle_points(n, float(init.get("radius", 1.0))))
    return read_curve_csv(init["path"])


def cmd_simulate(settings: SimulateSettings, args, out: Outputs) -> dict:
    curve0 = initial_curve(settings)
    try:
        traj = run(curve0, settings.config)
    except MotileError as exc:
        partial = getattr(exc, "trajectory", None)
        if partial is not None:
            out.add(*save_trajectory(partial, out.path("trajectory")))
        raise
    out.add(*save_trajectory(traj, out.path("trajectory")))
    drift = abs(shoelace_area(traj.final) - traj.initial_area) / traj.initial_area
    if drift > settings.config.tol:
        raise ValidationError(f"final relative area error {drift:.3e} exceeds tol {settings.config.tol:g}")
    if args.svg:
        emit_svg([traj.snapshots[0], traj.final],
                 [{"label": "t = 0"}, {"label": f"t = {traj.times[-1]:g}"}], out.path("overlay.svg"))
        out.add(out.path("overlay.svg"))
    return {"final_time": traj.times[-1], "relative_area_error": drift, **traj.summary}


def _u0(settings: GraphSettings, chart: CurveChart) -> GraphState:
    u0 = settings.u0
    if u0["kind"] == "cosine":
        a = float(u0.get("amplitude", 0.1))
        k = int(u0.get("mode", 2))
        return graph_state_from_function(lambda s: a * np.cos(k * s / chart.R), chart)
    sigma, u = read_graph_csv(u0["path"])
    if u.size != chart.n:
        raise ValidationError(f"u0 has {u.size} samples, chart has n = {chart.n}")
    return GraphState(u=u)


def cmd_graph(settings: GraphSettings, args, out: Outputs) -> dict:
    cfg = settings.config
    chart = CurveChart.circle(settings.R, cfg.n, settings.delta0)
    state = _u0(settings, chart)
    total = cfg.n_steps
    marks = sorted({round(total * (k + 1) / settings.checkpoints) for k in range(settings.checkpoints)})
    out.add(write_graph_csv(chart.sigma_grid, state.u, out.path("state_0.csv")))
    curves = [embed(state, chart)]
    done = 0
    for k, mark in enumerate(marks, start=1):
        state = run_graph(state, chart, cfg, mark - done)
        done = mark
        out.add(write_graph_csv(chart.sigma_grid, state.u, out.path(f"state_{k}.csv")))
        curves.append(embed(state, chart))
        log.info("graph checkpoint %d at t = %.6g, lambda = %.10g", k, state.t, state.lam)
    if args.svg:
        styles = [{"label": "t = 0"}] + [{"label": f"checkpoint {k}"} for k in range(1, len(curves))]
        emit_svg(curves, styles, out.path("overlay.svg"))
        out.add(out.path("overlay.svg"))
    return {"final_time": state.t, "lambda": state.lam, "max_abs_u": float(np.max(np.abs(state.u)))}


def cmd_converge(settings, args, out: Outputs) -> dict:
    details: dict = {}
    rows = convergence_study(settings.zeta, settings.beta, lambda n: 0.5 / (n * n), settings.T, settings.Ns,
                             settings.base, args.jobs, details)
    out.add(write_rows(out.path("convergence.csv"), ["N", "err", "rho"],
                       [[r.N, r.err, r.rho] for r in rows]))
    for r in rows:
        print(f"{r.N:5d}  {r.err:.7f}  {'' if r.rho is None else f'{r.rho:.7f}'}")
    return {"rows": [[r.N, r.err, r.rho] for r in rows],
            "centers": {str(k): v["center"] for k, v in details.items()}}


def cmd_drift(settings: DriftSettings, args, out: Outputs) -> dict:
    if settings.mode == "beta":
        reports = beta_sweep(settings.zeta, settings.betas, settings.base, args.jobs)
    else:
        reports = zeta_sweep(settings.beta, settings.zetas, settings.base, args.jobs)
    out.add(write_rows(out.path("drift.csv"), ["beta", "zeta", "drift_x", "drift_y", "drift"],
                       [[r.beta, r.zeta, r.drift_x, r.drift_y, r.drift] for r in reports]))
    if args.svg:
        n = settings.base.n
        curves, styles = [], []
        for r in reports:
            c0 = four_ellipse_curve(r.zeta, n) if n >= 64 else sample_four_ellipse(r.zeta, n)
            radius = math.sqrt(shoelace_area(c0) / math.pi)
            if settings.mode == "zeta" or not curves:
                curves.append(c0)
                styles.append({"label": f"initial, zeta = {r.zeta:g}"})
            curves.append(build_curve(circle_points(n, radius, tuple(r.center_beta))))
            styles.append({"label": f"steady, beta = {r.beta:g}, zeta = {r.zeta:g}"})
        emit_svg(curves, styles, out.path("overlay.svg"))
        out.add(out.path("overlay.svg"))
    return {"drifts": [r.drift for r in reports]}


def cmd_wave(settings: WaveSettings, args, out: Outputs) -> dict:
    p = settings.params
    if settings.sweep is not None:
        rows = sweep(settings.sweep["c"], settings.sweep["lambda"], settings.sweep["beta"], p.model)
        keys = ["c", "lambda", "beta", "x_star_B", "x_star_F", "gap", "pointwise_ok"]
        out.add(write_rows(out.path("sweep.csv"), keys, [[r[k] for k in keys] for r in rows]))
        comparable = [r for r in rows if r["comparable"]]
        return {"points": len(rows), "comparable": len(comparable),
                "comparable_gaps_positive": all(r["gap"] > 0 for r in comparable)}
    try:
        rep = closure_obstruction(p)
        status = "blow-up"
    except NoBlowUp as exc:
        rep = exc.report
        status = "no-blow-up"
    x_end = min(rep.back.x_end, rep.front.x_end)
    xs = np.linspace(0.0, x_end, 401)
    out.add(write_rows(out.path("profile.csv"), ["x", "w_B", "w_F", "y_B", "y_F"],
                       zip(xs, rep.back.w(xs), rep.front.w(xs), rep.back.y(xs), rep.front.y(xs))))
    row = {**rep.as_row(p), "status": status}
    p_report = out.path("report.json")
    p_report.write_text(json.dumps(row, indent=1))
    out.add(p_report)
    print(json.dumps(row))
    return row


def cmd_phi_table(settings, args, out: Outputs) -> dict:
    model = phi0_table(settings.v_min, settings.v_max, settings.k, settings.Z, settings.m)
    save_table(model, out.path("phi0_table.json"))
    out.add(out.path("phi0_table.json"))
    out.add(write_rows(out.path("phi0.csv"), ["V", "phi0"], zip(model.v_grid, model.values)))
    return {"phi0_at_0": float(model.values[settings.k // 2]) if settings.k % 2 else None}


HANDLERS = {SIMULATE: cmd_simulate, GRAPH: cmd_graph, CONVERGE: cmd_converge, DRIFT: cmd_drift,
            WAVE: cmd_wave, PHI_TABLE: cmd_phi_table}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="motile", description="Motile interface simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON configuration (defaults when omitted)")
        sp.add_argument("--out", type=Path, default=Path("out") / name, help="output directory")
        sp.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
        sp.add_argument("--svg", action="store_true", help="write an overlay.svg of the curves")
        sp.add_argument("--seed", type=int, default=None, help="reserved; all algorithms are deterministic")
        if name == WAVE:
            sp.add_argument("--c", type=float)
            sp.add_argument("--lambda", dest="lam", type=float)
            sp.add_argument("--beta", type=float)
            sp.add_argument("--model", choices=["gaussian", "phi0"])
            sp.add_argument("--sweep", action="store_true",
                            help="run the grid given under 'sweep' in the config (or a default grid)")
    return parser


DEFAULT_WAVE_GRID = {"c": [0.5, 1.0, 2.0], "lambda": [0.5, 1.0, 2.0], "beta": [0.0, 0.5, 1.0]}


def resolve_config(args) -> object:
    data = load_json(args.config) if args.config else {}
    if args.command == WAVE:
        for key, val in (("c", args.c), ("lambda", args.lam), ("beta", args.beta), ("model", args.model)):
            if val is not None:
                data[key] = val
        if args.sweep and "sweep" not in data:
            data["sweep"] = DEFAULT_WAVE_GRID
        if not args.sweep:
            data.pop("sweep", None)
    return config_from_dict(data, args.command)


def _configure_logging() -> None:
    level = os.environ.get("MOTILE_LOG", "error").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("ValidationError: --jobs must be >= 1", file=sys.stderr)
        return 2
    out = Outputs(args.out)
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    manifest = {"subcommand": args.command, "version": __version__, "config": None}
    code = 0
    try:
        settings = resolve_config(args)
        manifest["config"] = settings.to_dict()
        manifest["result"] = HANDLERS[args.command](settings, args, out)
        manifest["status"] = "ok"
    except (MotileError, OSError) as exc:
        manifest["status"] = "error"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        print(manifest["error"], file=sys.stderr)
        code = 1
    manifest["wall_seconds"] = time.perf_counter() - t0
    manifest["files"] = out.inventory()
    (args.out / "manifest.json").write_text(json.dumps(manifest, indent=1, default=_jsonable))
    return code


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


if __name__ == "__main__":
    sys.exit(main())
