"""Laser-log ingestion and synthetic world simulation.

Reads CARMEN-format laser logs (FLASER records), converts scans to
labeled occupancy training points, and generates scans from synthetic
2-D worlds with exact ray casting against rectangles, discs, and convex
polygons.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyLogError,
    InvalidArgumentError,
    InvalidPoseError,
)
from .occupancy import LabeledPoint

log = logging.getLogger(__name__)

DEFAULT_MAX_RANGE = 80.0
FREE_PER_BEAM = 4
HIT_MARGIN = 0.05
SCAN_SUBSAMPLE = 5


@dataclass(frozen=True)
class LaserScan:
    """One planar scan: sensor pose, evenly spread beams over the fov."""

    pose: np.ndarray  # (3,) x, y, theta
    ranges: np.ndarray  # (n,) meters, clamped to [0, max_range]
    fov: float = math.pi
    max_range: float = DEFAULT_MAX_RANGE
    timestamp: float = 0.0

    def __post_init__(self):
        pose = np.asarray(self.pose, dtype=float)
        ranges = np.asarray(self.ranges, dtype=float)
        if pose.shape != (3,):
            raise InvalidArgumentError("pose must be (x, y, theta)")
        if np.any(ranges < 0) or np.any(ranges > self.max_range):
            raise InvalidArgumentError("ranges must lie in [0, max_range]")
        object.__setattr__(self, "pose", pose)
        object.__setattr__(self, "ranges", ranges)

    def beam_angles(self) -> np.ndarray:
        n = self.ranges.size
        if n == 1:
            return np.array([self.pose[2]])
        rel = np.linspace(-self.fov / 2.0, self.fov / 2.0, n)
        return self.pose[2] + rel

    def endpoints(self) -> np.ndarray:
        ang = self.beam_angles()
        return self.pose[:2] + self.ranges[:, None] * np.c_[np.cos(ang), np.sin(ang)]


# -- CARMEN log format --------------------------------------------------------

# FLASER n r_1 .. r_n x y theta odom_x odom_y odom_theta ts host logger_ts
_FLASER_TRAILER = 9


def parse_carmen(lines, max_range: float = DEFAULT_MAX_RANGE,
                 fov: float = math.pi, use_odometry: bool = False) -> list[LaserScan]:
    """Parse FLASER records from CARMEN log lines.

    Unknown record types are skipped (counted); malformed FLASER lines
    are reported with their line number and skipped.  Ranges above
    max_range are clamped (no-return readings).  The corrected pose
    triple is used unless use_odometry is set.
    """
    scans = []
    skipped = 0
    malformed = 0
    for lineno, line in enumerate(lines, start=1):
        tokens = line.split()
        if not tokens or tokens[0] != "FLASER":
            skipped += 1
            continue
        try:
            n = int(tokens[1])
            if n < 0 or len(tokens) != n + 2 + _FLASER_TRAILER:
                raise ValueError(f"expected {max(n, 0) + 11} fields, got {len(tokens)}")
            ranges = np.array([float(v) for v in tokens[2:2 + n]])
            if np.any(ranges < 0):
                raise ValueError("negative range reading")
            pose_fields = [float(v) for v in tokens[2 + n:2 + n + 6]]
            timestamp = float(tokens[2 + n + 6])
        except ValueError as exc:
            malformed += 1
            log.warning("line %d: malformed FLASER record (%s)", lineno, exc)
            continue
        pose = pose_fields[3:6] if use_odometry else pose_fields[0:3]
        scans.append(LaserScan(
            pose=np.array(pose),
            ranges=np.minimum(ranges, max_range),
            fov=fov,
            max_range=max_range,
            timestamp=timestamp,
        ))
    if skipped or malformed:
        log.info("parser skipped %d non-FLASER and %d malformed lines",
                 skipped, malformed)
    if not scans:
        raise EmptyLogError("no parseable FLASER records in input")
    return scans


def write_carmen(scans, fh) -> None:
    """Serialize scans as FLASER lines (odometry mirrors the pose)."""
    for scan in scans:
        fields = ["FLASER", str(scan.ranges.size)]
        fields += [repr(float(r)) for r in scan.ranges]
        fields += [repr(float(v)) for v in scan.pose]
        fields += [repr(float(v)) for v in scan.pose]
        fields += [repr(float(scan.timestamp)), "occupath", repr(float(scan.timestamp))]
        fh.write(" ".join(fields) + "\n")


def subsample_scans(scans, every: int = SCAN_SUBSAMPLE) -> list:
    """Every k-th scan, bounding training-set size on long logs."""
    if every < 1:
        raise InvalidArgumentError("subsample stride must be >= 1")
    return list(scans[::every])


def scans_to_points(scans, free_per_beam: int = FREE_PER_BEAM,
                    hit_margin: float = HIT_MARGIN,
                    max_range_discard: bool = False,
                    bounds=None) -> list[LabeledPoint]:
    """Convert scans to +-1 labeled occupancy training points.

    Each beam that terminates under max_range yields one occupied point
    at the endpoint plus free_per_beam free points evenly placed along
    the ray, all short of the final hit_margin.  Max-range beams yield
    free points only, or nothing when max_range_discard is set.  bounds,
    if given as (lo, hi), drops points outside the box.
    """
    if not scans:
        raise InvalidArgumentError("need at least one scan")
    if free_per_beam < 0:
        raise InvalidArgumentError("free_per_beam must be >= 0")
    out: list[LabeledPoint] = []
    frac = (np.arange(free_per_beam) + 0.5) / max(free_per_beam, 1)
    for scan in scans:
        ang = scan.beam_angles()
        dirs = np.c_[np.cos(ang), np.sin(ang)]
        origin = scan.pose[:2]
        hit = scan.ranges < scan.max_range * (1.0 - 1e-9)
        for i in range(scan.ranges.size):
            r = scan.ranges[i]
            if not hit[i] and max_range_discard:
                continue
            span = r - hit_margin
            if free_per_beam and span > 0:
                for d in frac * span:
                    out.append(LabeledPoint(x=origin + d * dirs[i], y=-1))
            if hit[i]:
                out.append(LabeledPoint(x=origin + r * dirs[i], y=1))
    if bounds is not None:
        lo = np.asarray(bounds[0], dtype=float)
        hi = np.asarray(bounds[1], dtype=float)
        out = [p for p in out
               if np.all(p.x >= lo) and np.all(p.x <= hi)]
    return out


def points_to_arrays(points) -> tuple[np.ndarray, np.ndarray]:
    xs = np.array([p.x for p in points])
    ys = np.array([p.y for p in points], dtype=float)
    return xs, ys


def write_points_csv(points, file) -> None:
    with open(file, "w") as fh:
        fh.write("x,y,label\n")
        for p in points:
            fh.write(f"{float(p.x[0])!r},{float(p.x[1])!r},{p.y:d}\n")


def read_points_csv(file) -> list[LabeledPoint]:
    out = []
    with open(file) as fh:
        header = fh.readline()
        if header.strip() != "x,y,label":
            raise InvalidArgumentError("expected header x,y,label")
        for line in fh:
            sx, sy, sl = line.strip().split(",")
            out.append(LabeledPoint(x=np.array([float(sx), float(sy)]), y=int(sl)))
    return out


# -- synthetic worlds ---------------------------------------------------------


@dataclass(frozen=True)
class Rect:
    low: np.ndarray  # (2,)
    high: np.ndarray  # (2,)

    def __post_init__(self):
        low = np.asarray(self.low, dtype=float)
        high = np.asarray(self.high, dtype=float)
        if np.any(high <= low):
            raise InvalidArgumentError("rect needs high > low on both axes")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.low) and np.all(p <= self.high))

    def raycast(self, origin, direction) -> float:
        # slab method; direction is unit length
        t_lo, t_hi = -np.inf, np.inf
        for k in range(2):
            if abs(direction[k]) < 1e-300:
                if origin[k] < self.low[k] or origin[k] > self.high[k]:
                    return np.inf
                continue
            t1 = (self.low[k] - origin[k]) / direction[k]
            t2 = (self.high[k] - origin[k]) / direction[k]
            t_lo = max(t_lo, min(t1, t2))
            t_hi = min(t_hi, max(t1, t2))
        if t_hi < max(t_lo, 0.0):
            return np.inf
        return max(t_lo, 0.0)

    def bbox(self):
        return self.low, self.high

    def to_doc(self) -> dict:
        return {"type": "rect", "low": self.low.tolist(), "high": self.high.tolist()}


@dataclass(frozen=True)
class Disc:
    center: np.ndarray  # (2,)
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidArgumentError("disc radius must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    def contains(self, p) -> bool:
        d = np.asarray(p, dtype=float) - self.center
        return bool(d @ d <= self.radius * self.radius)

    def raycast(self, origin, direction) -> float:
        oc = np.asarray(origin, dtype=float) - self.center
        b = float(oc @ direction)
        c = float(oc @ oc) - self.radius * self.radius
        disc = b * b - c
        if disc < 0:
            return np.inf
        root = math.sqrt(disc)
        t = -b - root
        if t < 0:
            t = -b + root  # origin inside or tangent from within
        return t if t >= 0 else np.inf

    def bbox(self):
        r = np.array([self.radius, self.radius])
        return self.center - r, self.center + r

    def to_doc(self) -> dict:
        return {"type": "disc", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: np.ndarray  # (k, 2), counter-clockwise

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise InvalidArgumentError("polygon needs >= 3 2-D vertices")
        edges = np.roll(v, -1, axis=0) - v
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] \
            - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
        if np.any(cross < -1e-12):
            raise InvalidArgumentError("vertices must wind counter-clockwise")
        object.__setattr__(self, "vertices", v)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        v = self.vertices
        edges = np.roll(v, -1, axis=0) - v
        rel = p[None, :] - v
        cross = edges[:, 0] * rel[:, 1] - edges[:, 1] * rel[:, 0]
        return bool(np.all(cross >= -1e-12))

    def raycast(self, origin, direction) -> float:
        origin = np.asarray(origin, dtype=float)
        best = np.inf
        v = self.vertices
        for i in range(v.shape[0]):
            a = v[i]
            b = v[(i + 1) % v.shape[0]]
            e = b - a
            denom = direction[0] * e[1] - direction[1] * e[0]
            if abs(denom) < 1e-300:
                continue
            diff = a - origin
            t = (diff[0] * e[1] - diff[1] * e[0]) / denom
            s = (diff[0] * direction[1] - diff[1] * direction[0]) / denom
            if t >= 0 and -1e-12 <= s <= 1 + 1e-12:
                best = min(best, t)
        return best

    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def to_doc(self) -> dict:
        return {"type": "polygon", "vertices": self.vertices.tolist()}


def obstacle_from_doc(doc: dict):
    kind = doc.get("type")
    if kind == "rect":
        return Rect(low=np.asarray(doc["low"]), high=np.asarray(doc["high"]))
    if kind == "disc":
        return Disc(center=np.asarray(doc["center"]), radius=float(doc["radius"]))
    if kind == "polygon":
        return ConvexPolygon(vertices=np.asarray(doc["vertices"]))
    raise InvalidArgumentError(f"unknown obstacle type {kind!r}")


@dataclass(frozen=True)
class SyntheticWorld:
    bounds: tuple  # (lo (2,), hi (2,))
    obstacles: tuple

    def __post_init__(self):
        lo = np.asarray(self.bounds[0], dtype=float)
        hi = np.asarray(self.bounds[1], dtype=float)
        if np.any(hi <= lo):
            raise InvalidArgumentError("world bounds must have hi > lo")
        object.__setattr__(self, "bounds", (lo, hi))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        for ob in self.obstacles:
            blo, bhi = ob.bbox()
            if np.any(blo < lo - 1e-9) or np.any(bhi > hi + 1e-9):
                raise InvalidArgumentError(
                    f"obstacle {ob.to_doc()} extends outside world bounds"
                )

    def point_free(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        lo, hi = self.bounds
        if np.any(p < lo) or np.any(p > hi):
            return False
        return not any(ob.contains(p) for ob in self.obstacles)

    def raycast(self, origin, direction) -> float:
        """Minimum hit distance over all obstacles; inf when clear."""
        if not self.obstacles:
            return np.inf
        return min(ob.raycast(origin, direction) for ob in self.obstacles)

    def to_doc(self) -> dict:
        lo, hi = self.bounds
        return {
            "format": "occupath-world",
            "version": 1,
            "bounds": [lo.tolist(), hi.tolist()],
            "obstacles": [ob.to_doc() for ob in self.obstacles],
        }

    @staticmethod
    def from_doc(doc: dict) -> "SyntheticWorld":
        if doc.get("format") != "occupath-world":
            raise InvalidArgumentError("not a world document")
        return SyntheticWorld(
            bounds=(np.asarray(doc["bounds"][0]), np.asarray(doc["bounds"][1])),
            obstacles=tuple(obstacle_from_doc(d) for d in doc["obstacles"]),
        )

    def save(self, file) -> None:
        import json

        with open(file, "w") as fh:
            json.dump(self.to_doc(), fh, sort_keys=True, indent=1)
            fh.write("\n")

    @staticmethod
    def load(file) -> "SyntheticWorld":
        import json

        with open(file) as fh:
            return SyntheticWorld.from_doc(json.load(fh))


def simulate_laser(world: SyntheticWorld, pose, beams: int, fov: float,
                   max_range: float, noise_sigma: float = 0.0,
                   rng: np.random.Generator | None = None,
                   timestamp: float = 0.0) -> LaserScan:
    """Cast beams from pose against the world's obstacles.

    Exact primitive intersections, minimum distance over obstacles,
    optional Gaussian range noise on the returns, clamped to
    [0, max_range].  Beams that miss stay exactly at max_range so noise
    cannot fabricate phantom returns in open space.  The pose must be
    in free space.
    """
    pose = np.asarray(pose, dtype=float)
    if beams < 1:
        raise InvalidArgumentError("need at least one beam")
    if not world.point_free(pose[:2]):
        raise InvalidPoseError(f"sensor pose {pose[:2].tolist()} is not in free space")
    if noise_sigma > 0 and rng is None:
        raise InvalidArgumentError("noise requires an explicit rng")
    rel = np.linspace(-fov / 2.0, fov / 2.0, beams) if beams > 1 else np.array([0.0])
    ranges = np.empty(beams)
    for i, a in enumerate(pose[2] + rel):
        d = np.array([math.cos(a), math.sin(a)])
        ranges[i] = min(world.raycast(pose[:2], d), max_range)
    if noise_sigma > 0:
        hit = ranges < max_range
        ranges[hit] += rng.normal(0.0, noise_sigma, size=int(hit.sum()))
    ranges = np.clip(ranges, 0.0, max_range)
    return LaserScan(pose=pose, ranges=ranges, fov=fov, max_range=max_range,
                     timestamp=timestamp)
