"""Initial data families and the named parameter sets of the reference runs."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ScenarioError
from .groundstate import dilate
from .spectral import Grid, RealField, field_from_function, forward_transform, inverse_transform, translate

KINDS = {
    "scaled_soliton": ("lambda",),
    "asym_perturbed_soliton": ("alpha",),
    "gaussian": ("A",),
    "flat_gaussian": ("A",),
    "wall": ("A", "a"),
    "super_lorentzian": ("A", "p"),
    "flat_polynomial": ("A", "p"),
    "head_on_pair": ("c", "a"),
    "twin_pair": ("a",),
    "offset_pair": ("a",),
}

SOLITON_KINDS = {"scaled_soliton", "asym_perturbed_soliton", "head_on_pair", "twin_pair", "offset_pair"}


@dataclass
class ScenarioSpec:
    kind: str
    params: dict = field(default_factory=dict)
    v_x: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}")
        missing = [p for p in KINDS[self.kind] if p not in self.params]
        if missing:
            raise ScenarioError(f"{self.kind} needs parameter(s) {', '.join(missing)}")
        for k, v in self.params.items():
            if not math.isfinite(v):
                raise ScenarioError(f"parameter {k} must be finite")
        if self.kind in ("wall",) and self.params["a"] < 0:
            raise ScenarioError("wall half-width a must be >= 0")
        if "p" in self.params:
            p = self.params["p"]
            if p < 1 or int(p) != p:
                raise ScenarioError("algebraic decay power p must be an integer >= 1")

    @property
    def needs_soliton(self) -> bool:
        return self.kind in SOLITON_KINDS


def _shifted(q: RealField, shift) -> RealField:
    return inverse_transform(translate(forward_transform(q), shift))


def _check_overlap(a: RealField, b: RealField, q_ref: RealField):
    overlap = float(np.max(np.minimum(np.abs(a.values), np.abs(b.values))))
    if overlap > 1e-12 * q_ref.max():
        warnings.warn(
            f"soliton pair overlaps: min-profile maximum {overlap:.3e} exceeds "
            f"1e-12 of the soliton height",
            stacklevel=3,
        )


def _wall(grid: Grid, A: float, a: float, wrap: bool):
    if wrap and grid.l[1] != grid.l[2]:
        raise ScenarioError("periodic wall data needs l_y == l_z")
    per = grid.periods[1]

    def f(x, y, z):
        s = y + z
        if wrap:
            s = np.mod(s + per / 2, per) - per / 2
        out = np.where(np.abs(s) <= a, 0.0,
                       np.where(s > a, (s - a) ** 8, (s + a) ** 8))
        return A * np.exp(-(x * x + out))

    return f


def build_initial_data(grid: Grid, spec: ScenarioSpec, q_ref: RealField | None = None,
                       q_c: RealField | None = None) -> RealField:
    """Sample the initial field for ``spec`` on ``grid``.

    ``q_ref`` is the unit-speed soliton on ``grid`` (needed for soliton-based
    kinds). ``q_c`` optionally supplies Q_c for head-on data; otherwise it
    is produced by dilating ``q_ref``. Soliton shifts are phase shifts.
    """
    k, p = spec.kind, spec.params
    if spec.needs_soliton:
        if q_ref is None:
            raise ScenarioError(f"{k} needs a reference soliton")
        if q_ref.grid != grid:
            raise ScenarioError("reference soliton lives on a different grid")
    r2 = lambda x, y, z: x * x + y * y + z * z

    if k == "scaled_soliton":
        return RealField(grid, p["lambda"] * q_ref.values)
    if k == "asym_perturbed_soliton":
        al = p["alpha"]
        bump = field_from_function(grid, lambda x, y, z: np.exp(-(x * x + y * y + al * z * z)))
        return RealField(grid, q_ref.values + bump.values)
    if k == "gaussian":
        return field_from_function(grid, lambda x, y, z: p["A"] * np.exp(-r2(x, y, z)))
    if k == "flat_gaussian":
        flat = p.get("flat", 0.05)
        return field_from_function(
            grid, lambda x, y, z: p["A"] * np.exp(-(x * x + flat * (y * y + z * z))))
    if k == "wall":
        return field_from_function(grid, _wall(grid, p["A"], p["a"], bool(p.get("wrap", 1))))
    if k == "super_lorentzian":
        n = int(p["p"])
        return field_from_function(grid, lambda x, y, z: p["A"] / (1 + r2(x, y, z)) ** n)
    if k == "flat_polynomial":
        n = int(p["p"])
        return field_from_function(grid, lambda x, y, z: p["A"] / (1 + r2(x, y, z) ** n))
    if k == "head_on_pair":
        c = p["c"]
        if q_c is None:
            q_c = dilate(q_ref, c)
        first = _shifted(q_c, (p["a"], 0.0, 0.0))
        _check_overlap(first, q_ref, q_ref)
        return RealField(grid, first.values + q_ref.values)
    if k == "twin_pair":
        a = p["a"]
        up, down = _shifted(q_ref, (0.0, a, 0.0)), _shifted(q_ref, (0.0, -a, 0.0))
        _check_overlap(up, down, q_ref)
        return RealField(grid, up.values + down.values)
    if k == "offset_pair":
        a = p["a"]
        other = _shifted(q_ref, (-a, -a, 0.0))
        _check_overlap(q_ref, other, q_ref)
        return RealField(grid, q_ref.values + other.values)
    raise ScenarioError(f"unknown scenario kind {k!r}")


_PRESETS = {
    "soliton_test": ScenarioSpec("scaled_soliton", {"lambda": 1.0}, 1.0),
    "stability_1.1Q": ScenarioSpec("scaled_soliton", {"lambda": 1.1}, 1.0),
    "stability_0.9Q": ScenarioSpec("scaled_soliton", {"lambda": 0.9}, 1.0),
    "asym_alpha4": ScenarioSpec("asym_perturbed_soliton", {"alpha": 4.0}, 1.0),
    "gaussian_A10": ScenarioSpec("gaussian", {"A": 10.0}, 2.0),
    "flat_gaussian_A5": ScenarioSpec("flat_gaussian", {"A": 5.0}, 0.0),
    "wall_A3.6": ScenarioSpec("wall", {"A": 3.6, "a": 1.5}, 0.0),
    "super_lorentzian_A20": ScenarioSpec("super_lorentzian", {"A": 20.0, "p": 10}, 0.0),
    "super_lorentzian_A10": ScenarioSpec("super_lorentzian", {"A": 10.0, "p": 10}, 0.0),
    "super_lorentzian_p20": ScenarioSpec("super_lorentzian", {"A": 20.0, "p": 20}, 0.0),
    "flat_polynomial_A10": ScenarioSpec("flat_polynomial", {"A": 10.0, "p": 10}, 0.0),
    "head_on_c2": ScenarioSpec("head_on_pair", {"c": 2.0, "a": -10.0}, 1.0),
    "twin": ScenarioSpec("twin_pair", {"a": math.pi * 6 / 8}, 1.0),
    "offset": ScenarioSpec("offset_pair", {"a": 3 * math.pi / 8}, 2.5),
}


def preset_names() -> list[str]:
    return list(_PRESETS)


def preset(name: str) -> ScenarioSpec:
    """Parameters of a named reference run (a fresh copy)."""
    try:
        s = _PRESETS[name]
    except KeyError:
        raise ScenarioError(
            f"unknown preset {name!r}; choose from {', '.join(_PRESETS)}") from None
    return ScenarioSpec(s.kind, dict(s.params), s.v_x)


@dataclass(frozen=True)
class DeskSettings:
    """Grid and horizon for running a preset in minutes on one core."""

    n: tuple[int, int, int]
    l: tuple[float, float, float]
    t_end: float
    n_steps: int
    fit: str = "single"
    dealias: bool = False


def _desk(n, l, t_end, n_steps, fit="single", dealias=False):
    n = (n,) * 3 if isinstance(n, int) else tuple(n)
    l = (float(l),) * 3 if isinstance(l, (int, float)) else tuple(map(float, l))
    return DeskSettings(n, l, float(t_end), n_steps, fit, dealias)


_DESK = {
    "soliton_test": _desk(64, 3, 1, 1000),
    "stability_1.1Q": _desk(64, 3, 12, 4000),
    "stability_0.9Q": _desk(64, 3, 12, 4000),
    "asym_alpha4": _desk(64, 3, 12, 4000),
    "gaussian_A10": _desk(64, 3, 12, 6000, dealias=True),
    "flat_gaussian_A5": _desk((64, 96, 96), (3, 6, 6), 4, 4000, dealias=True),
    "wall_A3.6": _desk(64, 3, 5, 4000, dealias=True),
    # on smaller boxes the shed radiation wraps around and bumps L_inf up
    "super_lorentzian_A20": _desk(128, 3, 0.5, 1000, dealias=True),
    "super_lorentzian_A10": _desk(96, 2.25, 0.5, 1000, dealias=True),
    "super_lorentzian_p20": _desk(96, 2.25, 0.5, 1000, dealias=True),
    "flat_polynomial_A10": _desk(64, 2, 0.5, 2000, dealias=True),
    "head_on_c2": _desk((128, 64, 64), (6, 3, 3), 15, 4000, "pair"),
    "twin": _desk(64, 3, 15, 4000),
    # the pair separates at relative speed ~4.5, so the horizon is cut to
    # what a 25-long box can hold
    "offset": _desk((128, 64, 64), (4, 2, 2), 4, 4000, "pair", dealias=True),
}


def desk_settings(name: str) -> DeskSettings:
    preset(name)  # validates the name
    return _DESK[name]
