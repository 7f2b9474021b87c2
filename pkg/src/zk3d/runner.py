"""Experiment orchestration: ground state, initial data, evolution, output files."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import diagnostics as diag
from . import io
from .config import RunConfig
from .errors import (
    BlowUpError,
    DegenerateSolutionError,
    KrylovStagnationError,
    NonConvergenceError,
    SnapshotFormatError,
)
from .etd import EvolutionConfig, evolve
from .groundstate import GroundStateParams, solve_ground_state
from .scenarios import build_initial_data
from .spectral import RealField, forward_transform

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_EVOLUTION = 4
EXIT_IO = 5


@dataclass
class RunReport:
    exit_code: int
    message: str
    out_dir: str
    series: list = field(default_factory=list)
    final: RealField | None = None
    reference: RealField | None = None
    fit: dict | None = None


def snapshot_name(t: float) -> str:
    return f"snapshot_t{t:.6f}.zk3d"


def load_reference(cfg: RunConfig) -> RealField:
    snap = io.read_snapshot(cfg.reference)
    if snap.field.grid != cfg.grid:
        raise SnapshotFormatError(
            f"reference grid {snap.field.grid} does not match run grid {cfg.grid}")
    return snap.field


def _solve(cfg: RunConfig, c: float = 1.0) -> RealField:
    res = solve_ground_state(cfg.grid, GroundStateParams(c=c, newton_tol=cfg.newton_tol))
    log.info("ground state c=%g: residual %.2e after %d Newton steps",
             c, res.residual_norm, res.newton_iters)
    return res.q


def fit_report(u: RealField, q: RealField, mode: str, refine: bool = False) -> dict:
    if mode == "pair":
        front, back, both = diag.fit_two_solitons(u, q, refine=refine)
        return {"mode": "pair", "front": asdict(front), "back": asdict(back),
                "combined_residual_inf": both.residual_inf,
                "combined_residual_l2": both.residual_l2,
                "combined_relative_residual": both.relative_residual}
    return {"mode": "single", **asdict(diag.fit_soliton(u, q, refine=refine))}


def run(cfg: RunConfig) -> RunReport:
    """Execute one configured run and write its outputs to ``cfg.out_dir``.

    Never raises for solver, evolution or I/O failures; these map to the
    exit codes EXIT_SOLVER, EXIT_EVOLUTION and EXIT_IO in the report.
    """
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise PermissionError(f"output directory {out} is not writable")
    except OSError as err:
        return RunReport(EXIT_IO, f"cannot use output directory: {err}", str(out))

    spec = cfg.scenario
    q = q_c = None
    try:
        if spec.needs_soliton or cfg.fit != "off":
            q = load_reference(cfg) if cfg.reference else _solve(cfg)
        if spec.kind == "head_on_pair":
            q_c = _solve(cfg, spec.params["c"])
    except (NonConvergenceError, DegenerateSolutionError, KrylovStagnationError) as err:
        return RunReport(EXIT_SOLVER, f"ground state failed: {err}", str(out))
    except (OSError, SnapshotFormatError) as err:
        return RunReport(EXIT_IO, f"cannot read reference: {err}", str(out))

    u0 = build_initial_data(cfg.grid, spec, q, q_c)
    ecfg = EvolutionConfig(cfg.t_end, cfg.n_steps, cfg.v_x, cfg.dealias,
                           cfg.sample_every, cfg.snapshot_times)
    decay = []
    snaps = []

    def on_sample(t, u):
        decay.append((t, diag.spectral_decay_report(forward_transform(u))))

    def on_snapshot(t, u):
        snaps.append((t, u))

    log.info("evolving %s on %s: t_end=%g, %d steps, v_x=%g",
             cfg.preset or spec.kind, cfg.grid, cfg.t_end, cfg.n_steps, cfg.v_x)
    code, message = EXIT_OK, "ok"
    final = None
    try:
        final, series = evolve(u0, ecfg, observers=[on_sample], on_snapshot=on_snapshot,
                               cone=cfg.cone)
    except BlowUpError as err:
        series = err.series
        code, message = EXIT_EVOLUTION, f"evolution failed: {err}"

    report = RunReport(code, message, str(out), series, final, q)
    try:
        io.write_timeseries(out / "timeseries.csv", series)
        if decay:
            io.write_spectral_decay(out / "spectral_decay.csv", decay)
        for t, u in snaps:
            io.write_snapshot(out / snapshot_name(t), u, t, cfg.v_x)
        if q is not None:
            io.write_snapshot(out / "reference.zk3d", q, 0.0, 0.0)
        if final is not None:
            io.write_snapshot(out / "final.zk3d", final, cfg.t_end, cfg.v_x)
            if cfg.fit != "off":
                report.fit = fit_report(final, q, cfg.fit, cfg.refine_fit)
                report.fit["t"] = cfg.t_end
                with open(out / "fit_report.json", "w") as f:
                    json.dump(report.fit, f, indent=2, sort_keys=True)
                    f.write("\n")
    except OSError as err:
        report.exit_code, report.message = EXIT_IO, f"write failed: {err}"
    if series and code == EXIT_OK:
        last = series[-1]
        report.message = (f"ok: t={last.t:g} linf={last.linf:.6g} "
                          f"mass_drift={max(r.mass_drift for r in series):.3e} "
                          f"energy_drift={max(r.energy_drift for r in series):.3e}")
    return report
