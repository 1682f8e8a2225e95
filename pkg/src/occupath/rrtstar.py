"""RRT* baseline planner over the same occupancy model.

Collision checking is a threshold test on the occupancy probability: a
configuration is free iff the map reports occupancy <= p_safe.  Edges
are checked at a fixed spatial resolution.  The neighbor radius shrinks
as gamma * (log n / n)^(1/D), capped at the steer step, and the planner
keeps sampling for its whole budget, rewiring toward the minimum-cost
goal connection (anytime behavior).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, InvalidEndpointError
from .occupancy import HilbertMap

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RrtConfig:
    max_samples: int = 6000
    steer_step: float = 0.5
    neighbor_gamma: float = 2.0
    collision_resolution: float = 0.05
    p_safe: float = 0.55
    goal_bias: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.steer_step <= 0:
            raise InvalidArgumentError("steer_step must be positive")
        if not 0 < self.collision_resolution <= self.steer_step:
            raise InvalidArgumentError(
                "collision_resolution must lie in (0, steer_step]"
            )
        if self.max_samples < 1:
            raise InvalidArgumentError("max_samples must be >= 1")
        if not 0.0 <= self.goal_bias < 1.0:
            raise InvalidArgumentError("goal_bias must lie in [0, 1)")
        if not 0.0 < self.p_safe < 1.0:
            raise InvalidArgumentError("p_safe must lie in (0, 1)")
        if self.neighbor_gamma <= 0:
            raise InvalidArgumentError("neighbor_gamma must be positive")

    def to_doc(self) -> dict:
        return {
            "max_samples": self.max_samples,
            "steer_step": self.steer_step,
            "neighbor_gamma": self.neighbor_gamma,
            "collision_resolution": self.collision_resolution,
            "p_safe": self.p_safe,
            "goal_bias": self.goal_bias,
            "seed": self.seed,
        }

    @staticmethod
    def from_doc(doc: dict) -> "RrtConfig":
        return RrtConfig(**doc)


@dataclass
class RrtResult:
    """Tree, extracted polyline, and sampling statistics."""

    status: str  # "ok" or "no-path"
    polyline: np.ndarray | None  # (k, D) waypoints start..goal, or None
    cost: float  # polyline length, inf when no path
    samples_total: int
    samples_to_first: int  # -1 if the goal was never reached
    nodes: np.ndarray = field(repr=False, default=None)
    parents: np.ndarray = field(repr=False, default=None)
    costs: np.ndarray = field(repr=False, default=None)

    def to_doc(self) -> dict:
        return {
            "format": "occupath-rrt-run",
            "version": 1,
            "status": self.status,
            "cost": self.cost,
            "samples_total": self.samples_total,
            "samples_to_first": self.samples_to_first,
            "tree_size": 0 if self.nodes is None else int(self.nodes.shape[0]),
        }


def _edge_points(a: np.ndarray, b: np.ndarray, resolution: float) -> np.ndarray:
    """Points along segment a-b spaced at most `resolution` apart, incl. b."""
    dist = float(np.linalg.norm(b - a))
    n = max(int(np.ceil(dist / resolution)), 1)
    ts = np.linspace(0.0, 1.0, n + 1)[1:]
    return a[None, :] + ts[:, None] * (b - a)[None, :]


def edge_free(occ: HilbertMap, a, b, cfg: RrtConfig) -> bool:
    pts = _edge_points(np.asarray(a, float), np.asarray(b, float),
                       cfg.collision_resolution)
    return bool(np.all(occ.query_batch(pts) <= cfg.p_safe))


def rrt_star_plan(occ: HilbertMap, start, goal, cfg: RrtConfig,
                  bounds=None) -> RrtResult:
    """Plan with RRT* on the occupancy map.

    bounds is ((lo_x, lo_y, ...), (hi_x, hi_y, ...)) for the sampling
    box; defaults to the occupancy feature domain.  Exhausting the
    sample budget without reaching the goal returns a no-path result,
    not an exception.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if start.shape != goal.shape or start.ndim != 1:
        raise InvalidArgumentError("start and goal must be same-length vectors")
    for name, x in (("start", start), ("goal", goal)):
        p = occ.query(x)
        if p > cfg.p_safe:
            raise InvalidEndpointError(
                f"{name} {x.tolist()} has occupancy {p:.3f} > p_safe {cfg.p_safe}"
            )
    if bounds is None:
        lo, hi = occ.features.domain
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    dim = start.size

    nodes = np.empty((cfg.max_samples + 1, dim))
    parents = np.full(cfg.max_samples + 1, -1, dtype=int)
    costs = np.empty(cfg.max_samples + 1)
    nodes[0] = start
    costs[0] = 0.0
    size = 1

    rng = np.random.default_rng(cfg.seed)
    goal_parent = -1
    goal_cost = np.inf
    samples_to_first = -1

    for it in range(1, cfg.max_samples + 1):
        if rng.uniform() < cfg.goal_bias:
            target = goal
        else:
            target = rng.uniform(lo, hi)

        diffs = nodes[:size] - target
        nearest = int(np.argmin(np.einsum("nd,nd->n", diffs, diffs)))
        direction = target - nodes[nearest]
        dist = float(np.linalg.norm(direction))
        if dist < 1e-12:
            continue
        new = nodes[nearest] + direction * min(1.0, cfg.steer_step / dist)

        if occ.query(new) > cfg.p_safe:
            continue
        radius = min(
            cfg.neighbor_gamma * (np.log(size + 1) / (size + 1)) ** (1.0 / dim),
            cfg.steer_step,
        )
        d2 = np.einsum("nd,nd->n", nodes[:size] - new, nodes[:size] - new)
        near = np.flatnonzero(d2 <= radius * radius)
        if nearest not in near:
            near = np.append(near, nearest)

        # choose the cheapest collision-free parent among neighbors
        best_parent = -1
        best_cost = np.inf
        dists = np.sqrt(d2[near])
        order = np.argsort(costs[near] + dists)
        for k in order:
            j = int(near[k])
            c = costs[j] + dists[k]
            if c >= best_cost:
                break
            if edge_free(occ, nodes[j], new, cfg):
                best_parent = j
                best_cost = c
                break
        if best_parent < 0:
            continue

        idx = size
        nodes[idx] = new
        parents[idx] = best_parent
        costs[idx] = best_cost
        size += 1

        # rewire neighbors through the new node where cheaper
        for k, j in enumerate(near):
            j = int(j)
            c = best_cost + dists[k]
            if c + 1e-12 < costs[j] and edge_free(occ, new, nodes[j], cfg):
                parents[j] = idx
                _propagate_cost(parents, costs, size, j, c)

        # try to connect the goal through the new node
        gd = float(np.linalg.norm(goal - new))
        if gd <= cfg.steer_step and edge_free(occ, new, goal, cfg):
            if best_cost + gd < goal_cost:
                goal_parent = idx
                goal_cost = best_cost + gd
                if samples_to_first < 0:
                    samples_to_first = it

    if goal_parent < 0:
        log.warning("no path after %d samples", cfg.max_samples)
        return RrtResult(
            status="no-path", polyline=None, cost=float("inf"),
            samples_total=cfg.max_samples, samples_to_first=-1,
            nodes=nodes[:size].copy(), parents=parents[:size].copy(),
            costs=costs[:size].copy(),
        )

    # goal_parent's stored cost may have dropped after later rewires
    waypoints = [goal]
    j = goal_parent
    while j >= 0:
        waypoints.append(nodes[j].copy())
        j = parents[j]
    polyline = np.array(waypoints[::-1])
    seg = np.diff(polyline, axis=0)
    cost = float(np.sum(np.linalg.norm(seg, axis=1)))
    return RrtResult(
        status="ok", polyline=polyline, cost=cost,
        samples_total=cfg.max_samples, samples_to_first=samples_to_first,
        nodes=nodes[:size].copy(), parents=parents[:size].copy(),
        costs=costs[:size].copy(),
    )


def _propagate_cost(parents, costs, size, root, new_cost):
    """Update costs in the subtree under `root` after a rewire."""
    drop = costs[root] - new_cost
    costs[root] = new_cost
    # children lists are not maintained; scan is O(size) per rewire
    stack = [root]
    while stack:
        node = stack.pop()
        kids = np.flatnonzero(parents[:size] == node)
        for k in kids:
            costs[k] -= drop
            stack.append(int(k))


def export_polyline_csv(polyline: np.ndarray, file) -> None:
    """Write waypoints as CSV with header x_1..x_D."""
    polyline = np.asarray(polyline, dtype=float)
    cols = [f"x_{i + 1}" for i in range(polyline.shape[1])]
    with open(file, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in polyline:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
