"""
Measurements on snapshots: conserved quantities, peak tracking, soliton
fits, radiation-cone norms and spectral resolution indicators.

Nothing here modifies its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConeParameterError, DriftUndefinedError, NoRadiationError
from .groundstate import dilate
from .spectral import (
    Grid,
    RealField,
    SpectralField,
    forward_transform,
    gradient,
    integrate,
    node_coordinates,
    point_jet,
    translate,
)


@dataclass
class DiagnosticsRecord:
    t: float
    linf: float
    argmax: tuple[float, float, float]
    mass: float
    energy: float
    mass_drift: float
    energy_drift: float
    cone_inside_l2: float = math.nan
    cone_outside_l2: float = math.nan


def mass(u: RealField) -> float:
    return integrate(RealField(u.grid, u.values * u.values))


def energy(u: RealField) -> float:
    ux, uy, uz = gradient(u)
    g = u.grid
    grad2 = ux * ux + uy * uy + uz * uz
    return float(g.cell_volume * (0.5 * np.sum(grad2) - np.sum(u.values**3) / 3.0))


def drift(values) -> np.ndarray:
    """|x(t)/x(0) - 1| for a series of conserved-quantity samples."""
    v = np.asarray(values, dtype=float)
    if v.size == 0 or v[0] == 0:
        raise DriftUndefinedError("drift is undefined when the initial value is zero")
    return np.abs(v / v[0] - 1.0)


def peak(u: RealField) -> tuple[int, int, int]:
    """Index of max |u|; ties resolve to the lowest flattened index."""
    return np.unravel_index(int(np.argmax(np.abs(u.values))), u.grid.shape)


def record(t: float, u: RealField, ref: dict, cone=None) -> DiagnosticsRecord:
    """Build one time-series entry; ``ref`` caches the t = 0 mass and energy."""
    idx = peak(u)
    m = mass(u)
    e = energy(u)
    ref.setdefault("mass", m)
    ref.setdefault("energy", e)
    md = abs(m / ref["mass"] - 1.0) if ref["mass"] else math.nan
    ed = abs(e / ref["energy"] - 1.0) if ref["energy"] else math.nan
    rec = DiagnosticsRecord(t, float(abs(u.values[idx])), node_coordinates(u.grid, idx),
                            m, e, md, ed)
    if cone is not None:
        rec.cone_inside_l2, rec.cone_outside_l2 = cone_norms(u, t, cone, rec.argmax)
    return rec


# -- soliton fitting --------------------------------------------------------


@dataclass
class SolitonFit:
    c: float
    center: tuple[float, float, float]
    residual_inf: float
    residual_l2: float
    relative_residual: float


def soliton_model(q_ref: RealField, c: float, center) -> RealField:
    """Q_c translated so its peak sits at ``center``."""
    return translate(dilate(q_ref, c), center)


def refine_peak(u: RealField, idx=None, max_iters: int = 20):
    """Locate a maximum of |u| off the grid by Newton ascent on the interpolant.

    Starts from the node ``idx`` (default: the grid argmax) and keeps the
    iterate within one cell of it. Returns ``(value, point)``; falls back to
    the node itself when the local Hessian is not definite.
    """
    g = u.grid
    idx = peak(u) if idx is None else idx
    start = np.array(node_coordinates(g, idx))
    sign = 1.0 if u.values[idx] >= 0 else -1.0
    full = forward_transform(u).full_cube()
    p = start.copy()
    best = (float(abs(u.values[idx])), tuple(start))
    for _ in range(max_iters):
        jet = sign * point_jet(full, g, p)
        grad = np.array([jet[1, 0, 0], jet[0, 1, 0], jet[0, 0, 1]])
        hess = np.array([
            [jet[2, 0, 0], jet[1, 1, 0], jet[1, 0, 1]],
            [jet[1, 1, 0], jet[0, 2, 0], jet[0, 1, 1]],
            [jet[1, 0, 1], jet[0, 1, 1], jet[0, 0, 2]],
        ])
        if jet[0, 0, 0] > best[0]:
            best = (float(jet[0, 0, 0]), tuple(p))
        if np.any(np.linalg.eigvalsh(hess) >= 0):
            break
        step = -np.linalg.solve(hess, grad)
        p = np.clip(p + step, start - np.array(g.spacing), start + np.array(g.spacing))
        if np.max(np.abs(step)) < 1e-13 * max(1.0, np.max(np.abs(p))):
            break
    jet = sign * point_jet(full, g, p)
    if jet[0, 0, 0] >= best[0]:
        best = (float(jet[0, 0, 0]), tuple(float(v) for v in p))
    return best


def _fit_at(u: RealField, q_ref: RealField, idx, refine: bool = False):
    if refine:
        value, center = refine_peak(u, idx)
    else:
        value, center = float(abs(u.values[idx])), node_coordinates(u.grid, idx)
    c = value / q_ref.max()
    return c, center, soliton_model(q_ref, c, center)


def _residual_fit(u, c, center, resid) -> SolitonFit:
    r_inf = float(np.max(np.abs(resid)))
    r_l2 = math.sqrt(u.grid.cell_volume * float(np.sum(resid * resid)))
    return SolitonFit(c, center, r_inf, r_l2, r_inf / u.max())


def fit_soliton(u: RealField, q_ref: RealField, refine: bool = False) -> SolitonFit:
    """Fit a single rescaled, shifted soliton at the peak of ``u``.

    ``q_ref`` must be a unit-speed profile centred at the origin node. By
    default the peak is the grid maximum; ``refine`` locates it between
    nodes on the interpolant (see ``refine_peak``).
    """
    c, center, model = _fit_at(u, q_ref, peak(u), refine)
    return _residual_fit(u, c, center, u.values - model.values)


def _periodic_distance(grid: Grid, center) -> np.ndarray:
    d2 = 0.0
    for a, (x, p) in enumerate(zip(grid.coords, grid.periods)):
        d = np.mod(x - center[a] + p / 2, p) - p / 2
        d2 = d2 + d * d
    return np.sqrt(d2)


def fit_two_solitons(u: RealField, q_ref: RealField, exclusion_radius: float = 3.0,
                     refine: bool = False):
    """Fit the global peak, then the highest peak outside a ball around it.

    Returns ``(front, back, combined)`` where front/back are the individual
    fits ordered by speed (front has the larger c) and ``combined`` measures
    ``u`` minus both model solitons.
    """
    idx1 = peak(u)
    c1, x1, m1 = _fit_at(u, q_ref, idx1, refine)
    away = _periodic_distance(u.grid, x1) > exclusion_radius
    masked = np.where(away, np.abs(u.values), -np.inf)
    idx2 = np.unravel_index(int(np.argmax(masked)), u.grid.shape)
    c2, x2, m2 = _fit_at(u, q_ref, idx2, refine)
    f1 = _residual_fit(u, c1, x1, u.values - m1.values)
    f2 = _residual_fit(u, c2, x2, u.values - m2.values)
    both = _residual_fit(u, c1, x1, u.values - m1.values - m2.values)
    both.c = math.nan
    front, back = (f1, f2) if c1 >= c2 else (f2, f1)
    return front, back, both


# -- radiation cone ---------------------------------------------------------


@dataclass(frozen=True)
class ConeParams:
    delta: float = 0.05
    theta: float = math.pi / 3 - 0.05
    frame: str = "soliton"

    def __post_init__(self):
        if not 0 <= self.delta < 1:
            raise ConeParameterError(f"delta must lie in [0, 1), got {self.delta}")
        if not 0 <= self.theta <= math.pi / 3 - self.delta + 1e-15:
            raise ConeParameterError(
                f"theta must lie in [0, pi/3 - delta] = [0, {math.pi / 3 - self.delta:.6f}], "
                f"got {self.theta}"
            )
        if self.frame not in ("soliton", "lab"):
            raise ConeParameterError(f"frame must be 'soliton' or 'lab', got {self.frame!r}")


def cone_mask(grid: Grid, t: float, p: ConeParams, center) -> np.ndarray:
    """True on nodes of the conic right half space (relative to ``center``)."""
    rel = []
    for a, (x, per) in enumerate(zip(grid.coords, grid.periods)):
        rel.append(np.mod(x - center[a] + per / 2, per) - per / 2)
    x, y, z = rel
    rho = np.sqrt(y * y + z * z)
    apex = (-1 + p.delta) * t if p.frame == "soliton" else p.delta * t
    return x > apex - rho * math.tan(p.theta)


def cone_norms(u: RealField, t: float, p: ConeParams, center=(0.0, 0.0, 0.0)):
    """L2 norms of ``u`` on the cone region and on its complement."""
    if not isinstance(p, ConeParams):
        raise ConeParameterError("expected ConeParams")
    inside = cone_mask(u.grid, t, p, center)
    sq = u.values * u.values
    dv = u.grid.cell_volume
    return math.sqrt(dv * float(np.sum(sq[inside]))), math.sqrt(dv * float(np.sum(sq[~inside])))


def _edge_crossing(col, y, thr, upper):
    """Outermost threshold crossing of a 1D profile, linearly interpolated."""
    above = np.nonzero(col > thr)[0]
    if above.size == 0:
        return None
    j = above[-1] if upper else above[0]
    nb = j + 1 if upper else j - 1
    if nb < 0 or nb >= col.size:
        return None  # touches the box edge
    f0, f1 = col[j], col[nb]
    s = (f0 - thr) / (f0 - f1)
    return y[j] + s * (y[nb] - y[j])


def radiation_front_angle(u: RealField, threshold: float | None = None, center=None,
                          relative_threshold: float = 0.05, min_columns: int = 4) -> float:
    """Half-opening angle (radians, from the negative x axis) of trailing radiation.

    Works in the z = 0 slice. The slice is mirrored through the peak in x and
    the mirrored leading side is subtracted from the trailing side, which
    removes the symmetric soliton body and leaves the radiation behind it.
    The edges of the set where this excess exceeds ``threshold`` (default:
    ``relative_threshold`` times its own maximum) are located column by
    column with linear interpolation, and straight lines are fitted to the
    upper and lower edges; the two slope angles are averaged.
    """
    g = u.grid
    kz = g.n[2] // 2
    s = np.abs(u.values[:, :, kz])
    x, y = g.nodes(0), g.nodes(1)
    if center is None:
        ix, iy = np.unravel_index(int(np.argmax(s)), s.shape)
    else:
        ix = int(np.argmin(np.abs(x - center[0])))
        iy = int(np.argmin(np.abs(y - center[1])))
    nx = g.n[0]
    half = nx // 2
    behind = (ix - np.arange(1, half)) % nx
    ahead = (ix + np.arange(1, half)) % nx
    excess = np.clip(s[behind] - s[ahead], 0.0, None)
    # tolerate roundoff-level asymmetry of a pure soliton
    if excess.max() <= 1e-8 * max(s[ix, iy], 1e-300):
        raise NoRadiationError("no trailing radiation behind the peak")
    thr = threshold if threshold is not None else relative_threshold * excess.max()
    yrel = np.roll(y - y[iy], -iy + g.n[1] // 2)
    excess = np.roll(excess, -iy + g.n[1] // 2, axis=1)
    dx = -np.arange(1, half) * g.spacing[0]
    ups, lows = [], []
    for i in range(excess.shape[0]):
        hi = _edge_crossing(excess[i], yrel, thr, upper=True)
        lo = _edge_crossing(excess[i], yrel, thr, upper=False)
        if hi is not None and lo is not None:
            ups.append((dx[i], hi))
            lows.append((dx[i], lo))
    if len(ups) < min_columns:
        raise NoRadiationError(
            f"trailing set above threshold {thr:.3e} spans only {len(ups)} columns"
        )
    ups, lows = np.array(ups), np.array(lows)
    b_up = np.polyfit(ups[:, 0], ups[:, 1], 1)[0]
    b_lo = np.polyfit(lows[:, 0], lows[:, 1], 1)[0]
    return 0.5 * (math.atan(-b_up) + math.atan(b_lo))


def radiation_cone_angle(u: RealField, q_ref: RealField, fraction: float = 0.9,
                         core_radius: float = 3.0) -> float:
    """Polar angle (radians, from the negative x axis) enclosing ``fraction``
    of the radiation energy.

    The radiation is u minus the refined single-soliton fit, restricted to
    points farther than ``core_radius`` from the fitted centre (periodic
    distance). Angles are measured in 3D about the line through the centre
    parallel to x.
    """
    if not 0 < fraction < 1:
        raise ValueError("fraction must be in (0, 1)")
    g = u.grid
    fit = fit_soliton(u, q_ref, refine=True)
    res = u.values - soliton_model(q_ref, fit.c, fit.center).values
    d = []
    for a, (x, p) in enumerate(zip(g.coords, g.periods)):
        d.append(np.broadcast_to(np.mod(x - fit.center[a] + p / 2, p) - p / 2, g.shape))
    rho = np.hypot(d[1], d[2])
    far = np.hypot(d[0], rho) > core_radius
    w = res[far] ** 2
    if w.sum() == 0.0:
        raise NoRadiationError("no energy outside the soliton core")
    theta = np.arctan2(rho[far], -d[0][far])
    order = np.argsort(theta, kind="stable")
    cum = np.cumsum(w[order])
    return float(theta[order][np.searchsorted(cum, fraction * cum[-1])])


# -- invariants and resolution ----------------------------------------------


def xline_integrals(u: RealField) -> np.ndarray:
    """Integral over x of u for every (y, z) node pair."""
    return u.grid.spacing[0] * np.sum(u.values, axis=0)


@dataclass
class SpectralDecay:
    band_edges: np.ndarray
    band_max: np.ndarray
    peak: float

    @property
    def outer(self) -> float:
        return float(self.band_max[-1])

    @property
    def relative(self) -> np.ndarray:
        return self.band_max / self.peak if self.peak > 0 else np.zeros_like(self.band_max)


def spectral_decay_report(uh: SpectralField, n_bands: int = 8) -> SpectralDecay:
    """Max coefficient modulus in nested shells of normalized mode index.

    A mode belongs to band b when max_axis |k_axis| / (n_axis / 2) lies in
    (b / n_bands, (b + 1) / n_bands]; the zero mode is in band 0. The last
    band holds the highest resolved modes and is the truncation indicator.
    """
    g = uh.grid
    ratio = np.zeros(g.spectral_shape)
    for a in range(3):
        k = np.abs(g.mode_indices(a)) / (g.n[a] / 2)
        ratio = np.maximum(ratio, g._broadcast(k, a))
    band = np.clip(np.ceil(ratio * n_bands).astype(int) - 1, 0, n_bands - 1)
    mag = np.abs(uh.coeffs)
    band_max = np.zeros(n_bands)
    np.maximum.at(band_max, band.ravel(), mag.ravel())
    edges = np.arange(n_bands + 1) / n_bands
    return SpectralDecay(edges, band_max, float(mag.max()))
