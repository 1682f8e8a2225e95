"""Path quality metrics shared by every planner.

Both planners are scored the same way: the path is sampled into a dense
point chain (kernel paths by uniform time, polylines by uniform arc
length), and all metrics are computed from that chain against the same
occupancy model.  This keeps the comparison free of per-method
measurement bias.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError
from .occupancy import HilbertMap
from .path import Path

SWEEP_RESOLUTION = 1000


def sweep_path(path: Path, n: int = SWEEP_RESOLUTION) -> np.ndarray:
    """Dense point chain along a kernel path, uniform in time."""
    if n < 2:
        raise InvalidArgumentError("sweep resolution must be >= 2")
    return path.evaluate_batch(np.linspace(0.0, 1.0, n))


def sweep_polyline(polyline: np.ndarray, n: int = SWEEP_RESOLUTION) -> np.ndarray:
    """Dense point chain along a waypoint polyline, uniform in arc length."""
    if n < 2:
        raise InvalidArgumentError("sweep resolution must be >= 2")
    polyline = np.asarray(polyline, dtype=float)
    if polyline.ndim != 2 or polyline.shape[0] < 2:
        raise InvalidArgumentError("polyline needs at least two waypoints")
    seg = np.linalg.norm(np.diff(polyline, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] <= 0:
        return np.repeat(polyline[:1], n, axis=0)
    grid = np.linspace(0.0, s[-1], n)
    return np.column_stack([
        np.interp(grid, s, polyline[:, d]) for d in range(polyline.shape[1])
    ])


def max_occupancy(points: np.ndarray, occ: HilbertMap) -> float:
    """Largest occupancy probability along the sampled chain."""
    return float(np.max(occ.query_batch(points)))


def chain_length(points: np.ndarray) -> float:
    """Length of the sampled chain (trapezoid-grade estimate in meters)."""
    seg = np.diff(np.asarray(points, dtype=float), axis=0)
    return float(np.sum(np.linalg.norm(seg, axis=1)))


def path_metrics(points: np.ndarray, occ: HilbertMap, samples: int,
                 method: str, seed: int, status: str,
                 resolution: int = SWEEP_RESOLUTION) -> dict:
    """Standard metrics document for one planning run."""
    return {
        "method": method,
        "seed": seed,
        "status": status,
        "max_occupancy": max_occupancy(points, occ),
        "length_m": chain_length(points),
        "samples": samples,
        "sweep_resolution": resolution,
    }


def mean_stderr(values) -> tuple[float, float]:
    """Sample mean and standard error (stddev / sqrt(n))."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise InvalidArgumentError("need at least one value")
    if v.size == 1:
        return float(v[0]), 0.0
    return float(np.mean(v)), float(np.std(v, ddof=1) / np.sqrt(v.size))


def smooth_trace(trace, window: int = 5) -> np.ndarray:
    """Moving average used when judging convergence monotonicity."""
    trace = np.asarray(trace, dtype=float)
    if window < 1 or trace.size < window:
        return trace.copy()
    kernel = np.ones(window) / window
    return np.convolve(trace, kernel, mode="valid")