"""Command line entry point: ``zk3d <subcommand>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import diagnostics as diag
from . import io
from .config import parse_config, preset_config_text
from .errors import (
    ConeParameterError,
    ConfigError,
    DegenerateSolutionError,
    InvalidGridError,
    KrylovStagnationError,
    NonConvergenceError,
    SnapshotFormatError,
)
from .groundstate import GroundStateParams, solve_ground_state
from .runner import EXIT_IO, EXIT_OK, EXIT_PARSE, EXIT_SOLVER, fit_report, run
from .scenarios import desk_settings, preset, preset_names
from .spectral import forward_transform, make_grid, set_threads


def _common(top: bool) -> argparse.ArgumentParser:
    # sub-parsers must not reset flags given before the subcommand
    kw = {} if top else {"default": argparse.SUPPRESS}
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="run configuration file", **kw)
    p.add_argument("--out", metavar="DIR", help="output directory", **kw)
    p.add_argument("--threads", type=int, metavar="N", help="FFT worker threads", **kw)
    p.add_argument("--quiet", action="store_true", help="only print errors", **kw)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common(False)
    ap = argparse.ArgumentParser(prog="zk3d", description=__doc__, parents=[_common(True)])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("soliton", parents=[common], help="solve for the soliton profile Q_c")
    s.add_argument("--c", type=float, default=1.0, help="wave speed (default 1)")
    s.add_argument("--n", type=int, nargs="+", default=[64], help="modes per axis (1 or 3)")
    s.add_argument("--l", type=float, nargs="+", default=[3.0], help="scale factors (1 or 3)")
    s.add_argument("--tol", type=float, default=1e-10, help="Newton residual tolerance")

    sub.add_parser("evolve", parents=[common], help="run a configuration (needs --config)")

    f = sub.add_parser("fit", parents=[common], help="fit soliton(s) to a snapshot")
    f.add_argument("snapshot")
    f.add_argument("--reference", help="unit-speed profile snapshot (solved if omitted)")
    f.add_argument("--pair", action="store_true", help="two-soliton fit")
    f.add_argument("--refine", action="store_true", help="locate peaks between grid nodes")

    d = sub.add_parser("diag", parents=[common], help="mass, energy, cone and spectral report")
    d.add_argument("snapshot")
    d.add_argument("--cone", type=float, nargs=2, metavar=("DELTA", "THETA"),
                   help="cone parameters (soliton frame, centred on the peak)")
    d.add_argument("--bands", type=int, default=8)

    sub.add_parser("presets", parents=[common], help="list scenario presets")
    return ap


def _emit(obj, out_dir, name):
    text = json.dumps(obj, indent=2, sort_keys=True)
    print(text)
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / name).write_text(text + "\n")


def _cmd_soliton(args) -> int:
    grid = make_grid(args.n if len(args.n) > 1 else args.n[0],
                     args.l if len(args.l) > 1 else args.l[0])
    res = solve_ground_state(grid, GroundStateParams(c=args.c, newton_tol=args.tol))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"soliton_c{args.c:g}.zk3d"
    io.write_snapshot(path, res.q, 0.0, 0.0)
    logging.info("residual %.3e after %d Newton steps", res.residual_norm, res.newton_iters)
    print(f"{path}  peak={res.q.max():.12g}  mass={diag.mass(res.q):.12g}  "
          f"energy={diag.energy(res.q):.12g}  residual={res.residual_norm:.3e}")
    return EXIT_OK


def _cmd_evolve(args) -> int:
    if not args.config:
        raise ConfigError("evolve needs --config PATH")
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    if args.out:
        cfg.out_dir = args.out
    report = run(cfg)
    stream = sys.stdout if report.exit_code == EXIT_OK else sys.stderr
    if report.exit_code != EXIT_OK or not args.quiet:
        print(report.message, file=stream)
    return report.exit_code


def _reference_for(grid, path):
    if path:
        ref = io.read_snapshot(path).field
        if ref.grid != grid:
            raise SnapshotFormatError("reference and snapshot grids differ")
        return ref
    return solve_ground_state(grid).q


def _cmd_fit(args) -> int:
    snap = io.read_snapshot(args.snapshot)
    q = _reference_for(snap.field.grid, args.reference)
    rep = fit_report(snap.field, q, "pair" if args.pair else "single", args.refine)
    rep["t"] = snap.time
    _emit(rep, args.out, "fit_report.json")
    return EXIT_OK


def _cmd_diag(args) -> int:
    snap = io.read_snapshot(args.snapshot)
    u = snap.field
    dec = diag.spectral_decay_report(forward_transform(u), args.bands)
    rep = {
        "t": snap.time,
        "v_x": snap.v_x,
        "linf": u.max(),
        "argmax": diag.node_coordinates(u.grid, diag.peak(u)),
        "mass": diag.mass(u),
        "energy": diag.energy(u),
        "spectral_bands": dec.band_max.tolist(),
        "spectral_outer_relative": float(dec.relative[-1]),
    }
    if args.cone:
        p = diag.ConeParams(delta=args.cone[0], theta=args.cone[1])
        inside, outside = diag.cone_norms(u, snap.time, p, rep["argmax"])
        rep["cone_inside"], rep["cone_outside"] = inside, outside
    _emit(rep, args.out, "diag_report.json")
    return EXIT_OK


def _cmd_presets(args) -> int:
    for name in preset_names():
        s, d = preset(name), desk_settings(name)
        params = " ".join(f"{k}={v:g}" for k, v in s.params.items())
        print(f"{name:24s} {s.kind:24s} {params:18s} v_x={s.v_x:g}  "
              f"desk: n={d.n[0]} l={d.l[0]:g} t_end={d.t_end:g} steps={d.n_steps}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name in preset_names():
            (out / f"{name}.cfg").write_text(
                preset_config_text(name, **{"output.dir": str(out / name)}))
    return EXIT_OK


_COMMANDS = {
    "soliton": _cmd_soliton,
    "evolve": _cmd_evolve,
    "fit": _cmd_fit,
    "diag": _cmd_diag,
    "presets": _cmd_presets,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        set_threads(args.threads)
    try:
        return _COMMANDS[args.command](args)
    except SnapshotFormatError as err:
        print(f"snapshot error: {err}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, InvalidGridError, ConeParameterError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (NonConvergenceError, DegenerateSolutionError, KrylovStagnationError) as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
