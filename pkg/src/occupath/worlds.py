"""Preset evaluation worlds and their scan routes.

Two environments back the test and benchmark suite:

* ``two_blocks``: an open room with two rectangular obstacles astride
  the straight start-goal line, forcing an S-shaped detour.
* ``office``: an L-shaped corridor run (about 20 m between endpoints)
  with doorway pinch points, scanned by a simulated robot drive whose
  log is written in CARMEN format; this serves as the repeatable
  stand-in for a real indoor laser dataset.

All generation is seed-fixed, so world files and logs are reproducible
byte for byte.
"""

from __future__ import annotations

import math

import numpy as np

from .worldio import LaserScan, Rect, SyntheticWorld, simulate_laser, write_carmen

OFFICE_SEED = 12061


def two_blocks_world() -> SyntheticWorld:
    return SyntheticWorld(
        bounds=(np.array([0.0, 0.0]), np.array([10.0, 10.0])),
        obstacles=(
            Rect(low=np.array([3.0, 1.5]), high=np.array([3.8, 5.15])),
            Rect(low=np.array([5.8, 4.85]), high=np.array([6.6, 8.5])),
        ),
    )


def two_blocks_endpoints() -> tuple[np.ndarray, np.ndarray]:
    return np.array([1.2, 5.0]), np.array([8.8, 5.0])


def two_blocks_scan_poses() -> list[np.ndarray]:
    """Coarse grid of free-space sensor poses covering the room."""
    world = two_blocks_world()
    poses = []
    for x in (1.2, 2.2, 5.1, 8.0, 8.8):
        for y in (1.2, 3.0, 5.0, 7.0, 8.8):
            if world.point_free((x, y)):
                poses.append(np.array([x, y, 0.0]))
    return poses


def two_blocks_scans(beams: int = 90, max_range: float = 14.0) -> list[LaserScan]:
    """Full-circle noise-free scans from the grid poses."""
    world = two_blocks_world()
    return [
        simulate_laser(world, pose, beams=beams, fov=2.0 * math.pi,
                       max_range=max_range, timestamp=0.1 * i)
        for i, pose in enumerate(two_blocks_scan_poses())
    ]


# -- office corridor ----------------------------------------------------------


def office_world() -> SyntheticWorld:
    """L-shaped corridor with doorway pinches, sealed by outer walls."""
    blocks = (
        # outer walls
        Rect(low=np.array([0.0, 0.0]), high=np.array([0.3, 12.0])),
        Rect(low=np.array([23.7, 0.0]), high=np.array([24.0, 12.0])),
        Rect(low=np.array([0.0, 0.0]), high=np.array([24.0, 0.3])),
        Rect(low=np.array([0.0, 11.7]), high=np.array([24.0, 12.0])),
        # solid fill around the corridors
        Rect(low=np.array([0.3, 0.3]), high=np.array([23.7, 2.2])),
        Rect(low=np.array([0.3, 4.2]), high=np.array([15.7, 11.7])),
        Rect(low=np.array([17.7, 2.2]), high=np.array([23.7, 11.7])),
        # doorway stubs along the horizontal corridor
        Rect(low=np.array([5.9, 2.2]), high=np.array([6.3, 2.8])),
        Rect(low=np.array([5.9, 3.8]), high=np.array([6.3, 4.2])),
        Rect(low=np.array([10.9, 2.2]), high=np.array([11.3, 3.0])),
        Rect(low=np.array([10.9, 3.4]), high=np.array([11.3, 4.2])),
        # doorway stubs in the vertical corridor
        Rect(low=np.array([15.7, 7.3]), high=np.array([16.2, 7.8])),
        Rect(low=np.array([17.2, 7.3]), high=np.array([17.7, 7.8])),
    )
    return SyntheticWorld(
        bounds=(np.array([0.0, 0.0]), np.array([24.0, 12.0])),
        obstacles=blocks,
    )


def office_endpoints() -> tuple[np.ndarray, np.ndarray]:
    return np.array([2.2, 3.2]), np.array([16.7, 10.2])


def office_route() -> np.ndarray:
    """Corridor-centerline waypoints from start to goal.

    The straight start-goal segment cuts through solid structure, so
    planners that refine a seed path use this L-shaped route as the
    initial mean.
    """
    return np.array([[2.2, 3.2], [16.7, 3.2], [16.7, 10.2]])


def office_route_poses() -> list[np.ndarray]:
    """Out-and-back drive along the corridor centerlines."""
    xs = np.arange(1.0, 16.8, 0.45)
    ys = np.arange(4.0, 10.9, 0.45)
    forward = [np.array([x, 3.2, 0.0]) for x in xs]
    forward += [np.array([16.7, y, math.pi / 2.0]) for y in ys]
    backward = [np.array([16.7, y, -math.pi / 2.0]) for y in ys[::-1]]
    backward += [np.array([x, 3.2, math.pi]) for x in xs[::-1]]
    return forward + backward


def office_scans(beams: int = 61, max_range: float = 12.0,
                 noise_sigma: float = 0.05) -> list[LaserScan]:
    world = office_world()
    rng = np.random.default_rng(OFFICE_SEED)
    scans = []
    for i, pose in enumerate(office_route_poses()):
        scans.append(simulate_laser(
            world, pose, beams=beams, fov=math.pi, max_range=max_range,
            noise_sigma=noise_sigma, rng=rng, timestamp=0.1 * i,
        ))
    return scans


def write_office_log(file) -> None:
    """Write the corridor drive as a CARMEN-format laser log."""
    with open(file, "w") as fh:
        write_carmen(office_scans(), fh)
