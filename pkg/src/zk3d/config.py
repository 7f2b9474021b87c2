"""Run configuration: a line-oriented ``section.key = value`` text format.

Example::

    # Gaussian resolution run
    grid.n = 64 64 64
    grid.l = 3
    scenario.preset = gaussian_A10
    evolution.t_end = 12
    evolution.n_steps = 8000
    diagnostics.fit = single
    output.dir = runs/gauss

Omitted grid and evolution keys fall back to the preset's desk settings
(see ``scenarios.desk_settings``); for an explicit ``scenario.kind`` they
must be given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .diagnostics import ConeParams
from .errors import ConfigError, ConeParameterError, InvalidGridError, ScenarioError
from .scenarios import KINDS, ScenarioSpec, desk_settings, preset
from .spectral import Grid, make_grid


@dataclass
class RunConfig:
    grid: Grid
    scenario: ScenarioSpec
    preset: str | None
    t_end: float
    n_steps: int
    v_x: float
    dealias: bool = False
    sample_every: int = 10
    snapshot_times: tuple[float, ...] = ()
    cone: ConeParams | None = None
    fit: str = "single"
    refine_fit: bool = False
    reference: str | None = None
    out_dir: str = "zk3d_out"
    seed: int = 0
    newton_tol: float = 1e-10

    @property
    def h(self) -> float:
        return self.t_end / self.n_steps


def _floats(v, lineno, count=None):
    try:
        out = [float(t) for t in v.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"expected number(s), got {v!r}", lineno) from None
    if not out or (count is not None and len(out) not in count):
        raise ConfigError(f"expected {' or '.join(map(str, count))} number(s), got {v!r}", lineno)
    if not all(math.isfinite(x) for x in out):
        raise ConfigError(f"non-finite number in {v!r}", lineno)
    return out


def _int(v, lineno):
    try:
        return int(v)
    except ValueError:
        raise ConfigError(f"expected an integer, got {v!r}", lineno) from None


def _bool(v, lineno):
    s = v.lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {v!r}", lineno)


_KEYS = {
    "grid.n", "grid.l",
    "scenario.preset", "scenario.kind", "scenario.v_x",
    "evolution.t_end", "evolution.n_steps", "evolution.v_x", "evolution.dealias",
    "evolution.sample_every", "evolution.snapshot_times",
    "diagnostics.cone", "diagnostics.cone_delta", "diagnostics.cone_theta",
    "diagnostics.cone_frame", "diagnostics.fit", "diagnostics.refine", "diagnostics.reference",
    "groundstate.newton_tol",
    "output.dir", "run.seed",
}
_PARAM_NAMES = {p for ps in KINDS.values() for p in ps} | {"flat", "wrap"}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration; errors name the offending line."""
    raw: dict[str, tuple[str, int]] = {}
    params: dict[str, tuple[float, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not value:
            raise ConfigError(f"empty value for {key}", lineno)
        if key.startswith("scenario.") and key[len("scenario."):] in _PARAM_NAMES:
            params[key[len("scenario."):]] = (_floats(value, lineno, (1,))[0], lineno)
            continue
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        raw[key] = (value, lineno)

    get = lambda k: raw.get(k, (None, None))

    name, ln = get("scenario.preset")
    kind, kln = get("scenario.kind")
    if name is None and kind is None:
        raise ConfigError("scenario required (set scenario.preset or scenario.kind)")
    if name is not None and kind is not None:
        raise ConfigError("give either scenario.preset or scenario.kind, not both", kln)
    desk = None
    try:
        if name is not None:
            spec = preset(name)
            desk = desk_settings(name)
            for k, (v, pl) in params.items():
                spec.params[k] = v
            spec = ScenarioSpec(spec.kind, spec.params, spec.v_x)
        else:
            spec = ScenarioSpec(kind, {k: v for k, (v, _) in params.items()}, 0.0)
    except ScenarioError as err:
        line = ln if name is not None else kln
        if params and "parameter" in str(err):
            line = max(pl for _, pl in params.values())
        raise ConfigError(str(err), line) from None
    v, vl = get("scenario.v_x")
    if v is not None:
        spec.v_x = _floats(v, vl, (1,))[0]

    def need(key, fallback):
        value, lineno = get(key)
        if value is None and fallback is None:
            raise ConfigError(f"{key} is required for an explicit scenario.kind")
        return value, lineno, fallback

    value, lineno, fb = need("grid.n", desk and desk.n)
    if value is None:
        n = fb
    else:
        nf = _floats(value, lineno, (1, 3))
        if any(int(x) != x for x in nf):
            raise ConfigError(f"grid.n must be integers, got {value!r}", lineno)
        n = [int(x) for x in nf]
    value, l_line, fb = need("grid.l", desk and desk.l)
    l = fb if value is None else _floats(value, l_line, (1, 3))
    try:
        grid = make_grid(n, l)
    except InvalidGridError as err:
        raise ConfigError(str(err), lineno if get("grid.n")[0] is not None else l_line) from None

    value, lineno, fb = need("evolution.t_end", desk and desk.t_end)
    t_end = fb if value is None else _floats(value, lineno, (1,))[0]
    if not t_end > 0:
        raise ConfigError("evolution.t_end must be positive", lineno)
    value, lineno, fb = need("evolution.n_steps", desk and desk.n_steps)
    n_steps = fb if value is None else _int(value, lineno)
    if n_steps < 1:
        raise ConfigError("evolution.n_steps must be >= 1", lineno)

    v, vl = get("evolution.v_x")
    v_x = spec.v_x if v is None else _floats(v, vl, (1,))[0]
    v, vl = get("evolution.dealias")
    dealias = (desk.dealias if desk else False) if v is None else _bool(v, vl)
    v, vl = get("evolution.sample_every")
    sample_every = max(1, n_steps // 200) if v is None else _int(v, vl)
    if sample_every < 1:
        raise ConfigError("evolution.sample_every must be >= 1", vl)
    v, vl = get("evolution.snapshot_times")
    snaps = () if v is None else tuple(_floats(v, vl))
    for t in snaps:
        if not 0 <= t <= t_end:
            raise ConfigError(f"snapshot time {t} outside [0, {t_end}]", vl)

    v, vl = get("diagnostics.cone")
    cone = None
    if v is not None and _bool(v, vl):
        kw = {}
        for k in ("delta", "theta"):
            cv, cl = get(f"diagnostics.cone_{k}")
            if cv is not None:
                kw[k] = _floats(cv, cl, (1,))[0]
        if "delta" in kw and "theta" not in kw:
            kw["theta"] = max(0.0, math.pi / 3 - kw["delta"])  # widest admissible cone
        cv, cl = get("diagnostics.cone_frame")
        if cv is not None:
            kw["frame"] = cv
        try:
            cone = ConeParams(**kw)
        except ConeParameterError as err:
            raise ConfigError(str(err), vl) from None
    v, vl = get("diagnostics.fit")
    fit = "single" if v is None else v.lower()
    if fit not in ("single", "pair", "off"):
        raise ConfigError(f"diagnostics.fit must be single, pair or off, got {v!r}", vl)
    v, vl = get("diagnostics.refine")
    refine_fit = False if v is None else _bool(v, vl)
    reference, _ = get("diagnostics.reference")

    v, vl = get("groundstate.newton_tol")
    newton_tol = 1e-10 if v is None else _floats(v, vl, (1,))[0]
    if not 0 < newton_tol < 1:
        raise ConfigError("groundstate.newton_tol must lie in (0, 1)", vl)
    out_dir, _ = get("output.dir")
    v, vl = get("run.seed")
    seed = 0 if v is None else _int(v, vl)

    return RunConfig(
        grid=grid, scenario=spec, preset=name, t_end=t_end, n_steps=n_steps, v_x=v_x,
        dealias=dealias, sample_every=sample_every, snapshot_times=snaps, cone=cone,
        fit=fit, refine_fit=refine_fit, reference=reference, out_dir=out_dir or "zk3d_out", seed=seed,
        newton_tol=newton_tol,
    )


def preset_config_text(name: str, **overrides) -> str:
    """Config text for a preset at its desk settings, with optional overrides."""
    d = desk_settings(name)
    lines = {
        "grid.n": " ".join(map(str, d.n)),
        "grid.l": " ".join("%g" % v for v in d.l),
        "scenario.preset": name,
        "evolution.t_end": "%r" % d.t_end,
        "evolution.n_steps": str(d.n_steps),
        "evolution.dealias": "on" if d.dealias else "off",
        "diagnostics.fit": d.fit,
    }
    lines.update(overrides)
    return "".join(f"{k} = {v}\n" for k, v in lines.items())
