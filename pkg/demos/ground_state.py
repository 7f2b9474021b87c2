"""Compute the ZK ground state Q and compare it with a radial shooting solution.

Run from the repository root:

    python3 demos/ground_state.py

Takes a few seconds at 64^3.
"""
import sys
import time
from pathlib import Path

import numpy as np

from zk3d import diagnostics as diag
from zk3d.groundstate import GroundStateParams, dilate, solve_ground_state
from zk3d.spectral import make_grid

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from radial_oracle import ground_state_oracle  # noqa: E402

grid = make_grid(64, 3)
t0 = time.perf_counter()
res = solve_ground_state(grid, GroundStateParams(c=1.0))
print(f"Newton-Krylov: {res.newton_iters} steps, residual {res.residual_norm:.2e}, "
      f"{time.perf_counter() - t0:.1f} s")
for k, r in enumerate(res.history):
    print(f"  step {k}: residual {r:.3e}")

q = res.q
oracle = ground_state_oracle()
print(f"peak   {q.max():.10f}   shooting {oracle['peak']:.10f}")
print(f"mass   {diag.mass(q):.10f}   shooting {oracle['mass']:.10f}")
print(f"energy {diag.energy(q):.10f}   shooting {oracle['energy']:.10f}")

# Q_c = c Q(sqrt(c) x); the dilated profile should match a direct solve at c = 2
q2 = solve_ground_state(grid, GroundStateParams(c=2.0)).q
print(f"|dilate(Q, 2) - Q_2|_inf = {np.max(np.abs(dilate(q, 2.0).values - q2.values)):.2e}")
