"""Probe the final office pipeline: log round trip, tuned map, both planners."""
import io

import numpy as np

from occupath import features as ft
from occupath.occupancy import train_map
from occupath.worldio import parse_carmen, scans_to_points, write_carmen
from occupath.worlds import office_endpoints, office_route, office_scans
from occupath.metrics import sweep_polyline

buf = io.StringIO()
write_carmen(office_scans(), buf)
buf.seek(0)
scans = parse_carmen(buf, max_range=12.0)
print("scans:", len(scans))
pts = scans_to_points(scans, free_per_beam=2)
X = np.array([p.x for p in pts])
y = np.array([p.y for p in pts])
print("points:", len(pts), "occupied:", int((y > 0).sum()))
dom = np.stack([X.min(axis=0) - 0.5, X.max(axis=0) + 0.5])
print("domain:", dom.tolist())
fmap = ft.build_rff(2000, 0.5, seed=0, domain=dom)
hm = train_map(X, y, fmap, epochs=6, step=0.02, l2=1e-4, batch=256, seed=0)

start, goal = office_endpoints()
route = office_route()
ys = np.linspace(2.9, 3.5, 49)
prof = hm.query_batch(np.stack([np.full_like(ys, 11.1), ys], axis=1))
pts_r = sweep_polyline(route, 1000)
occs = hm.query_batch(pts_r)
k = int(np.argmax(occs))
line = sweep_polyline(np.array([start, goal]), 1000)
print(f"gapmin={prof.min():.3f}@y={ys[np.argmin(prof)]:.2f} "
      f"routemax={occs.max():.3f}@{np.round(pts_r[k], 2)} "
      f"line={hm.query_batch(line).max():.3f} "
      f"s/g={hm.query(start):.3f}/{hm.query(goal):.3f}")
# second-highest route reading away from pinch2: what else binds?
away = np.linalg.norm(pts_r - [11.1, 3.2], axis=1) > 1.0
k2 = int(np.argmax(occs[away]))
print(f"route max away from pinch2: {occs[away].max():.3f}@{np.round(pts_r[away][k2], 2)}")
