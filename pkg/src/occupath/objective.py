"""Planning objective: obstacle cost plus smoothness penalty.

The obstacle term is the expected occupancy probability along the swept
body, estimated by averaging map queries over (time, body-point) pairs.
The smoothness term is the integrated squared velocity of the path,
0.5 * int ||xi'(t)||^2 dt.  Both terms expose the functional gradients
the planner consumes:

    obstacle:   J_body^T grad_x p   with J = identity (pure translation)
    smoothness: -xi''(t)            (negative acceleration)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .occupancy import HilbertMap
from .path import Path

# Default evaluation resolution for integrals and dense sweeps.
DENSE_SAMPLES = 500


@dataclass(frozen=True)
class BodyModel:
    """Rigid body swept along the path, translation only.

    Body points are offsets from the path point in workspace
    coordinates, so the Jacobian of each body point with respect to the
    path point is the identity.  A single zero offset models a point
    robot.
    """

    offsets: np.ndarray  # (B, D)

    def __post_init__(self):
        off = np.atleast_2d(np.asarray(self.offsets, dtype=float))
        if off.shape[0] < 1:
            raise InvalidArgumentError("body needs at least one point")
        if not np.all(np.isfinite(off)):
            raise InvalidArgumentError("body offsets must be finite")
        object.__setattr__(self, "offsets", off)

    @property
    def n_points(self) -> int:
        return self.offsets.shape[0]


def point_body(dim: int = 2) -> BodyModel:
    return BodyModel(offsets=np.zeros((1, dim)))


def disc_body(radius: float, rim_points: int = 6) -> BodyModel:
    """Planar disc: the center plus evenly spaced rim offsets."""
    if radius <= 0:
        raise InvalidArgumentError("radius must be positive")
    if rim_points < 1:
        raise InvalidArgumentError("rim_points must be >= 1")
    ang = np.linspace(0.0, 2.0 * np.pi, rim_points, endpoint=False)
    rim = radius * np.c_[np.cos(ang), np.sin(ang)]
    return BodyModel(offsets=np.vstack([np.zeros((1, 2)), rim]))


@dataclass(frozen=True)
class GradientSample:
    """One stochastic gradient observation at a (time, body point) draw.

    occ gates the update: accepted is occ <= p_safe at draw time, and
    rejected samples must never contribute to a weight update.  g_obs is
    the occupancy gradient pulled back onto the path point; g_dyn is the
    smoothness gradient -xi''(t).
    """

    t: float
    u: np.ndarray
    occ: float
    g_obs: np.ndarray
    g_dyn: np.ndarray
    accepted: bool


def obstacle_gradient(path: Path, occ: HilbertMap, t: float, u=None) -> np.ndarray:
    """Occupancy gradient at the body point xi(t) + u (identity Jacobian)."""
    x = path.evaluate(t)
    if u is not None:
        x = x + np.asarray(u, dtype=float)
    return occ.gradient(x)


def dynamics_gradient(path: Path, t) -> np.ndarray:
    """Functional gradient of the smoothness term: -xi''(t).

    Scalar t gives a (D,) vector; an array of times gives (n, D).
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    g = -path.evaluate_batch(ts, order=2)
    return g[0] if np.isscalar(t) or np.ndim(t) == 0 else g


def gradient_samples(path: Path, occ: HilbertMap, body: BodyModel,
                     ts, u_idx, p_safe: float) -> list[GradientSample]:
    """Evaluate gradient samples at paired (time, body-point) draws.

    ts are path times in [0, 1]; u_idx are indices into the body point
    set.  Every sample carries its occupancy and both gradient terms;
    accepted is occ <= p_safe.
    """
    ts = np.asarray(ts, dtype=float)
    u_idx = np.asarray(u_idx, dtype=int)
    if ts.shape != u_idx.shape:
        raise InvalidArgumentError("need one body-point index per time")
    us = body.offsets[u_idx]
    xs = path.evaluate_batch(ts) + us
    ps, grads = occ.gradient_batch(xs)
    g_dyn = -path.evaluate_batch(ts, order=2)
    return [
        GradientSample(
            t=float(ts[i]),
            u=us[i],
            occ=float(ps[i]),
            g_obs=grads[i],
            g_dyn=g_dyn[i],
            accepted=bool(ps[i] <= p_safe),
        )
        for i in range(ts.size)
    ]


def smoothness_cost(path: Path, n: int = DENSE_SAMPLES,
                    relative_to_offset: bool = False) -> float:
    """0.5 * int_0^1 ||xi'(t)||^2 dt by trapezoidal quadrature.

    With relative_to_offset the offset's velocity is subtracted first,
    so an unperturbed path scores zero regardless of endpoint distance.
    """
    if n < 2:
        raise InvalidArgumentError("resolution must be >= 2")
    ts = np.linspace(0.0, 1.0, n)
    vel = path.evaluate_batch(ts, order=1)
    if relative_to_offset:
        vel = vel - path.offset.evaluate_batch(ts, order=1)
    speed2 = np.sum(vel * vel, axis=1)
    return 0.5 * float(np.trapezoid(speed2, ts))


def obstacle_cost(path: Path, occ: HilbertMap, body: BodyModel,
                  n: int = DENSE_SAMPLES) -> float:
    """Mean occupancy over a uniform time grid and all body points."""
    if n < 2:
        raise InvalidArgumentError("resolution must be >= 2")
    ts = np.linspace(0.0, 1.0, n)
    pts = path.evaluate_batch(ts)
    xs = (pts[:, None, :] + body.offsets[None, :, :]).reshape(-1, pts.shape[1])
    return float(np.mean(occ.query_batch(xs)))


def evaluate_objective(path: Path, occ: HilbertMap, body: BodyModel,
                       smooth_weight: float, n: int = DENSE_SAMPLES,
                       relative_to_offset: bool = False) -> dict:
    """Deterministic objective report on a dense grid.

    Returns obstacle, smoothness, and total = obstacle + weight *
    smoothness.  Diagnostics only: the planner descends the stochastic
    sampled gradients, never this report.
    """
    u_obs = obstacle_cost(path, occ, body, n=n)
    u_dyn = smoothness_cost(path, n=n, relative_to_offset=relative_to_offset)
    return {
        "obstacle": u_obs,
        "smoothness": u_dyn,
        "total": u_obs + smooth_weight * u_dyn,
    }
