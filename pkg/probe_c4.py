"""Scratch: replay the frozen two-rect planner setup and print per-seed stats."""
import numpy as np

from occupath import features as ft
from occupath import objective as obj
from occupath import planner as pl
from occupath import worldio as wio
from occupath import worlds
from occupath.occupancy import train_map

scans = worlds.two_blocks_scans()
pts = wio.scans_to_points(scans, bounds=worlds.two_blocks_world().bounds)
xs, ys = wio.points_to_arrays(pts)
lo = xs.min(axis=0) - 0.5
hi = xs.max(axis=0) + 0.5
print("bbox", lo, hi, "n", len(pts))
fmap = ft.build_rff(1000, 0.6, 0, domain=np.vstack([lo, hi]))
occ = train_map(xs, ys, fmap, epochs=5, step=0.02, l2=1e-4, batch=256, seed=0)

start, goal = worlds.two_blocks_endpoints()
line = start[None] + np.linspace(0, 1, 500)[:, None] * (goal - start)[None]
print("straight-line max occ:", round(float(occ.query_batch(line).max()), 4))

tf = ft.build_rff(100, 0.15, 0)
body = obj.disc_body(0.4)
print("body:", body.offsets.round(3).tolist())
for seed in range(5):
    cfg = pl.PlannerConfig(seed=seed, eps_w=0.03)
    res = pl.plan(occ, start, goal, body, tf, cfg)
    dense = pl.dense_max_occupancy(res.path, occ, 500)
    print(f"seed {seed}: {res.run.status} iters={res.run.iterations} "
          f"samples={res.run.samples_drawn} final={dense:.3f}")
