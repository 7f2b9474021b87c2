"""Gaussian data A exp(-r^2) sheds radiation into a cone behind the emerging soliton.

    python3 demos/gaussian_radiation.py

Prints the L_inf history, the cone split of the L2 norm and two estimates of
the radiation half-angle. Linear theory puts the edge of the radiation cone
at 30 degrees from the negative x axis; at these early times, on a 64^3 box,
neither estimate is close to that. About two minutes.
"""
import math

from zk3d import diagnostics as diag
from zk3d.errors import NoRadiationError
from zk3d.etd import EvolutionConfig, evolve
from zk3d.groundstate import solve_ground_state
from zk3d.scenarios import build_initial_data, preset
from zk3d.spectral import make_grid

grid = make_grid(64, 3)
spec = preset("gaussian_A10")
u0 = build_initial_data(grid, spec)
cone = diag.ConeParams()

snaps = {}
cfg = EvolutionConfig(1.0, 1000, spec.v_x, sample_every=100, snapshot_times=(0.35, 1.0))
u, series = evolve(u0, cfg, cone=cone, on_snapshot=lambda t, f: snaps.setdefault(round(t, 2), f))
print("     t      L_inf   inside L2  outside L2")
for r in series:
    print(f"{r.t:6.2f} {r.linf:10.4f} {r.cone_inside_l2:11.4f} {r.cone_outside_l2:11.4f}")

q = solve_ground_state(grid).q
for t, f in sorted(snaps.items()):
    a = diag.radiation_cone_angle(f, q)
    try:
        edge = f"{math.degrees(diag.radiation_front_angle(f)):.1f} deg"
    except NoRadiationError:
        edge = "undefined"
    print(f"t = {t}: 90% energy half-angle {math.degrees(a):.1f} deg, z = 0 edge {edge}")
