from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from zk3d.errors import BlowUpError
from zk3d.etd import (
    EvolutionConfig,
    LinearSymbol,
    etdrk4_step,
    evolve,
    linear_symbol,
    make_weights,
    nonlinear_term,
)
from zk3d.groundstate import gs_residual
from zk3d.spectral import (
    RealField,
    SpectralField,
    field_from_function,
    forward_transform,
    inverse_transform,
    make_grid,
    spectral_norm,
)


def at(grid, kx, ky, kz):
    return (kx % grid.n[0], ky % grid.n[1], kz)


def test_symbol_values():
    g = make_grid(8, 1)
    L = linear_symbol(g, 0.0).values
    assert L[at(g, 1, 0, 0)] == pytest.approx(1j)
    assert L[at(g, 1, 1, 1)] == pytest.approx(3j)
    assert L[at(g, -2, 1, 0)] == pytest.approx(-2j * 5)


def test_symbol_structure():
    g = make_grid((8, 6, 10), (1.0, 2.0, 0.5))
    L = linear_symbol(g, 1.3).values
    assert np.all(L.real == 0)
    assert np.all(L[0] == 0)
    # oddness: L(-k) = -L(k) away from the unpaired Nyquist planes
    assert L[at(g, 2, 1, 0)] == -L[at(g, -2, -1, 0)]
    assert L[at(g, 1, 0, 0)] == pytest.approx(1j * (1 + 1.3))


def scalar_symbol(values):
    return LinearSymbol(None, 0.0, np.asarray(values, dtype=complex))


def test_weights_at_zero_symbol():
    w = make_weights(scalar_symbol([0.0]), 0.01)
    assert w.E[0] == 1 and w.E2[0] == 1
    assert w.Q[0] == pytest.approx(0.005, rel=1e-15)
    assert w.f1[0] == pytest.approx(0.01 / 6, rel=1e-15)
    assert w.f2[0] == pytest.approx(0.01 / 3, rel=1e-15)
    assert w.f3[0] == pytest.approx(0.01 / 6, rel=1e-15)


def test_weights_exponential():
    w = make_weights(scalar_symbol([1j]), 0.1)
    assert w.E[0] == pytest.approx(np.exp(0.1j), rel=1e-15)
    assert w.E2[0] == pytest.approx(np.exp(0.05j), rel=1e-15)


def taylor(kind, z, terms=6):
    """Independent series for the weight brackets divided by h."""
    coeffs = []
    for m in range(terms):
        if kind == "Q":  # (e^{z/2} - 1) / z
            coeffs.append(Fraction(1, 2 ** (m + 1) * factorial(m + 1)))
            continue
        p = m + 3  # power of z in the bracket
        inv = lambda k: Fraction(1, factorial(k)) if k >= 0 else Fraction(0)
        if kind == "f1":  # -4 - z + e^z (4 - 3z + z^2)
            c = 4 * inv(p) - 3 * inv(p - 1) + inv(p - 2)
        elif kind == "f2":  # 2 (2 + z + e^z (z - 2))
            c = 2 * (inv(p - 1) - 2 * inv(p))
        else:  # -4 - 3z - z^2 + e^z (4 - z)
            c = 4 * inv(p) - inv(p - 1)
        coeffs.append(c)
    return sum(complex(float(c)) * z**m for m, c in enumerate(coeffs))


@pytest.mark.parametrize("z", [1e-6j, -1e-6j, 1e-6, 3e-3j, 0.3j])
def test_contour_matches_taylor(z):
    h = 0.01
    w = make_weights(scalar_symbol([z / h]), h)
    for name in ("Q", "f1", "f2", "f3"):
        got = getattr(w, name)[0] / h
        want = taylor(name, z, terms=12 if abs(z) > 0.1 else 6)
        assert abs(got - want) <= 1e-12 * abs(want), name


def test_taylor_leading_terms():
    assert taylor("f1", 0) == pytest.approx(1 / 6)
    assert taylor("f2", 0) == pytest.approx(1 / 3)
    assert taylor("f3", 0) == pytest.approx(1 / 6)
    assert taylor("Q", 0) == pytest.approx(1 / 2)


def test_direct_branch_continuous_at_threshold():
    h = 1.0
    below = make_weights(scalar_symbol([0.4999999j]), h)
    above = make_weights(scalar_symbol([0.5000001j]), h)
    for name in ("Q", "f1", "f2", "f3"):
        assert abs(getattr(below, name)[0] - getattr(above, name)[0]) < 1e-7


def test_weights_unimodular():
    g = make_grid(16, 1.3)
    w = make_weights(linear_symbol(g, 1.0), 0.01)
    assert np.max(np.abs(np.abs(w.E) - 1)) < 1e-14


def test_nonlinear_zero_and_constant():
    g = make_grid(8, 1)
    z = forward_transform(RealField(g, np.zeros(g.shape)))
    assert np.max(np.abs(nonlinear_term(z).coeffs)) == 0
    c = forward_transform(RealField(g, np.full(g.shape, 2.5)))
    assert np.max(np.abs(nonlinear_term(c).coeffs)) == 0


def test_nonlinear_matches_direct_formula():
    g = make_grid(16, 1)
    u = field_from_function(g, lambda x, y, z: np.cos(x) + 0.5 * np.sin(y) + 0 * z)
    n = inverse_transform(nonlinear_term(forward_transform(u))).values
    x = g.coords[0]
    # -(u^2)_x with u = cos x + 0.5 sin y
    want = 2 * (np.cos(x) + 0.5 * np.sin(g.coords[1])) * np.sin(x)
    assert np.max(np.abs(n - want)) < 1e-13


def test_dealias_mask_cuts_high_modes():
    g = make_grid(16, 1)
    u = field_from_function(g, lambda x, y, z: np.cos(7 * x) + 0 * y + 0 * z)
    # only roundoff from the transform of cos(7x) survives the mask
    assert np.max(np.abs(nonlinear_term(forward_transform(u), dealias=True).coeffs)) < 1e-15


def test_soliton_is_a_steady_state(grid32, q32):
    qh = forward_transform(q32)
    L = linear_symbol(grid32, 1.0).values
    rhs = L * qh.coeffs + nonlinear_term(qh).coeffs
    ident = -1j * grid32.xi_odd[0] * gs_residual(qh, 1.0).coeffs
    assert np.max(np.abs(rhs - ident)) < 1e-13
    xmax = np.max(np.abs(grid32.xi[0]))
    assert spectral_norm(SpectralField(grid32, rhs)) <= xmax * spectral_norm(gs_residual(qh, 1.0)) + 1e-15


def test_linear_hook_gives_exact_advance():
    g = make_grid(16, 1.2)
    uh = forward_transform(RealField(g, np.random.default_rng(0).standard_normal(g.shape)))
    w = make_weights(linear_symbol(g, 0.5), 0.02)
    out = etdrk4_step(uh, w, nonlinear=lambda v: SpectralField(g, 0 * v.coeffs))
    assert np.array_equal(out.coeffs, w.E * uh.coeffs)
    assert np.max(np.abs(np.abs(out.coeffs) - np.abs(uh.coeffs))) < 1e-15


def test_soliton_step(grid64, q64):
    qh = forward_transform(q64)
    w = make_weights(linear_symbol(grid64, 1.0), 1e-3)
    out = inverse_transform(etdrk4_step(qh, w))
    assert np.max(np.abs(out.values - q64.values)) <= 1e-11


def test_zero_plane_is_bitwise_constant(grid32, q32):
    u0 = RealField(grid32, 1.3 * q32.values + np.random.default_rng(1).standard_normal(grid32.shape) * 0.01)
    uh = forward_transform(u0)
    w = make_weights(linear_symbol(grid32, 0.7), 0.01)
    plane = uh.coeffs[0].copy()
    for k in range(20):
        uh = etdrk4_step(uh, w, step_index=k)
    assert np.array_equal(uh.coeffs[0], plane)


def test_zero_data_stays_zero(grid32):
    cfg = EvolutionConfig(0.1, 10, v_x=1.0)
    u, series = evolve(RealField(grid32, np.zeros(grid32.shape)), cfg, record=False)
    assert np.max(np.abs(u.values)) == 0


def test_evolve_sampling_and_snapshots(grid32, q32):
    seen, snaps = [], []
    cfg = EvolutionConfig(0.1, 10, v_x=1.0, sample_every=4, snapshot_times=(0.05,))
    u, series = evolve(q32, cfg, observers=[lambda t, f: seen.append(t)],
                       on_snapshot=lambda t, f: snaps.append((t, f)))
    assert [r.t for r in series] == pytest.approx([0, 0.04, 0.08, 0.1])
    assert series[-1].t == 0.1
    assert seen == [r.t for r in series]
    assert len(snaps) == 1 and snaps[0][0] == 0.05
    assert max(r.energy_drift for r in series) < 1e-12


def test_blow_up_reports_step_and_series(grid32):
    u0 = field_from_function(grid32, lambda x, y, z: 1e4 * np.exp(-(x * x + y * y + z * z)))
    cfg = EvolutionConfig(10.0, 20)
    with pytest.raises(BlowUpError) as info:
        evolve(u0, cfg)
    assert 1 <= info.value.step <= 20
    assert len(info.value.series) == info.value.step


@pytest.mark.parametrize("kw", [dict(t_end=0, n_steps=1), dict(t_end=1, n_steps=0),
                                dict(t_end=1, n_steps=1, sample_every=0),
                                dict(t_end=1, n_steps=1, snapshot_times=(2.0,))])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        EvolutionConfig(**kw)


def test_dealiased_run_starts_from_projection():
    g = make_grid(32, 2)
    u0 = field_from_function(g, lambda x, y, z: 6 * np.exp(-(x * x + y * y + z * z)))
    seen = []
    final, series = evolve(u0, EvolutionConfig(0.1, 100, dealias=True),
                           observers=[lambda t, u: seen.append((t, u))])
    mask = g.dealias_mask
    for u in (seen[0][1], final):
        c = forward_transform(u).coeffs
        assert np.abs(c[~np.broadcast_to(mask, c.shape)]).max() < 1e-13 * np.abs(c).max()
    assert series[0].mass < float(np.sum(u0.values**2)) * g.cell_volume
    # with the projection the only drift left is time-step error
    assert max(r.energy_drift for r in series) < 1e-9
    assert max(r.mass_drift for r in series) < 1e-10
