"""Weighted-feature path representation.

A path maps t in [0, 1] to a configuration

    xi(t) = xi_o(t) + xi_b(t) + W Upsilon(t)

where ``xi_o`` is an offset path (straight line by default, or an
injected polyline), ``xi_b = W_b Upsilon_b(t)`` is a boundary-correction
term over its own small feature set, and ``W`` is the D x m weight
matrix the planner optimizes.  Everything is linear in the weights, so
evaluation and both time derivatives come straight from the feature
derivatives.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import features as ft
from .errors import InvalidArgumentError

DEFAULT_BOUNDARY_LENGTHSCALE = 0.25


# -- offset paths ---------------------------------------------------------


@dataclass(frozen=True)
class StraightOffset:
    """Straight-line interpolation start + t * (goal - start)."""

    start: np.ndarray
    goal: np.ndarray

    def evaluate_batch(self, ts: np.ndarray, order: int = 0) -> np.ndarray:
        ts = np.asarray(ts, dtype=float).ravel()
        if order == 0:
            return self.start[None, :] + ts[:, None] * (self.goal - self.start)[None, :]
        if order == 1:
            return np.broadcast_to((self.goal - self.start)[None, :], (ts.size, self.start.size)).copy()
        return np.zeros((ts.size, self.start.size))

    def spec(self) -> dict:
        return {"kind": "line", "start": self.start.tolist(), "goal": self.goal.tolist()}


@dataclass(frozen=True)
class PolylineOffset:
    """Piecewise-linear offset through vertices at uniform knots.

    Second derivatives are zero almost everywhere; knot points are
    resolved to the left segment.  Useful for seeding the planner with a
    crude initial path from any other planner.
    """

    vertices: np.ndarray  # (k, D), k >= 2

    def __post_init__(self):
        if self.vertices.ndim != 2 or self.vertices.shape[0] < 2:
            raise InvalidArgumentError("polyline offset needs at least two vertices")

    @property
    def start(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def goal(self) -> np.ndarray:
        return self.vertices[-1]

    def evaluate_batch(self, ts: np.ndarray, order: int = 0) -> np.ndarray:
        ts = np.clip(np.asarray(ts, dtype=float).ravel(), 0.0, 1.0)
        k = self.vertices.shape[0]
        pos = ts * (k - 1)
        idx = np.minimum(pos.astype(int), k - 2)
        frac = pos - idx
        seg = self.vertices[idx + 1] - self.vertices[idx]
        if order == 0:
            return self.vertices[idx] + frac[:, None] * seg
        if order == 1:
            return seg * (k - 1)
        return np.zeros((ts.size, self.vertices.shape[1]))

    def spec(self) -> dict:
        return {"kind": "polyline", "vertices": self.vertices.tolist()}


def offset_from_spec(spec: dict):
    if spec["kind"] == "line":
        return StraightOffset(np.asarray(spec["start"], float), np.asarray(spec["goal"], float))
    if spec["kind"] == "polyline":
        return PolylineOffset(np.asarray(spec["vertices"], float))
    raise InvalidArgumentError(f"unknown offset kind {spec['kind']!r}")


# -- metric tensor --------------------------------------------------------


class IdentityMetric:
    """Identity metric: M^{-1} v = v."""

    kind = "identity"

    def solve(self, v: np.ndarray) -> np.ndarray:
        return v

    def spec(self) -> dict:
        return {"kind": "identity"}


class GramMetric:
    """Gram-type metric: feature inner products on a uniform grid plus ridge."""

    kind = "gram"

    def __init__(self, fmap: ft.FeatureMap, grid: int = 256, ridge: float = 1e-6):
        ts = np.linspace(0.0, 1.0, grid)
        phi = fmap.evaluate_batch(ts)
        m = phi.T @ phi / grid + ridge * np.eye(fmap.m)
        self._factor = cho_factor(m, lower=True)
        self.grid = grid
        self.ridge = ridge

    def solve(self, v: np.ndarray) -> np.ndarray:
        return cho_solve(self._factor, np.asarray(v, float).T).T

    def spec(self) -> dict:
        return {"kind": "gram", "grid": self.grid, "ridge": self.ridge}


def metric_from_spec(spec: dict, fmap: ft.FeatureMap):
    if spec["kind"] == "identity":
        return IdentityMetric()
    if spec["kind"] == "gram":
        return GramMetric(fmap, grid=spec.get("grid", 256),
                          ridge=spec.get("ridge", 1e-6))
    raise InvalidArgumentError(f"unknown metric kind {spec['kind']!r}")


# -- path -----------------------------------------------------------------


def default_boundary_features(lengthscale: float = DEFAULT_BOUNDARY_LENGTHSCALE) -> ft.FeatureMap:
    """Two Nystrom landmarks at t = 0 and t = 1.

    Gives the boundary correction support exactly at the endpoints with
    negligible interior distortion (the landmark cross-kernel is
    exp(-1 / (2 lengthscale^2))).
    """
    return ft.build_nystrom([0.0, 1.0], lengthscale, jitter=1e-10, domain=(0.0, 1.0))


class Path:
    """Mutable weighted-feature path owned by a single planner run."""

    def __init__(self, features, offset, boundary_features=None, weights=None,
                 boundary_weights=None, metric=None):
        self.features = features
        self.offset = offset
        self.boundary_features = boundary_features or default_boundary_features()
        dim = offset.start.size
        if weights is None:
            weights = np.zeros((dim, features.m))
        if boundary_weights is None:
            boundary_weights = np.zeros((dim, self.boundary_features.m))
        self.weights = np.ascontiguousarray(weights, dtype=float)
        self.boundary_weights = np.ascontiguousarray(boundary_weights, dtype=float)
        if self.weights.shape != (dim, features.m):
            raise InvalidArgumentError(
                f"weight matrix shape {self.weights.shape} != {(dim, features.m)}"
            )
        if self.boundary_weights.shape != (dim, self.boundary_features.m):
            raise InvalidArgumentError("boundary weight shape mismatch")
        self.metric = metric or IdentityMetric()

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def start(self) -> np.ndarray:
        return self.offset.start

    @property
    def goal(self) -> np.ndarray:
        return self.offset.goal

    def evaluate(self, t: float, order: int = 0) -> np.ndarray:
        return self.evaluate_batch(np.atleast_1d(float(t)), order)[0]

    def evaluate_batch(self, ts, order: int = 0) -> np.ndarray:
        """Positions (order 0), velocities (1) or accelerations (2), shape (n, D)."""
        ts = np.asarray(ts, dtype=float).ravel()
        out = self.offset.evaluate_batch(ts, order)
        out = out + self.boundary_features.evaluate_batch(ts, order) @ self.boundary_weights.T
        out += self.features.evaluate_batch(ts, order) @ self.weights.T
        return out

    def copy(self) -> "Path":
        return Path(
            self.features,
            self.offset,
            boundary_features=self.boundary_features,
            weights=self.weights.copy(),
            boundary_weights=self.boundary_weights.copy(),
            metric=self.metric,
        )

    # -- serialization -----------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "format": "occupath-path",
            "version": 1,
            "dim": self.dim,
            "features": self.features.spec(),
            "boundary_features": self.boundary_features.spec(),
            "offset": self.offset.spec(),
            "metric": self.metric.spec(),
            "weights": self.weights.tolist(),
            "boundary_weights": self.boundary_weights.tolist(),
        }

    @staticmethod
    def from_doc(doc: dict) -> "Path":
        if doc.get("format") != "occupath-path":
            raise InvalidArgumentError("not a path document")
        fmap = ft.from_spec(doc["features"])
        return Path(
            fmap,
            offset_from_spec(doc["offset"]),
            boundary_features=ft.from_spec(doc["boundary_features"]),
            weights=np.asarray(doc["weights"], float),
            boundary_weights=np.asarray(doc["boundary_weights"], float),
            metric=metric_from_spec(doc["metric"], fmap),
        )

    def save(self, file) -> None:
        with open(file, "w") as fh:
            json.dump(self.to_doc(), fh, sort_keys=True, indent=1)
            fh.write("\n")

    @staticmethod
    def load(file) -> "Path":
        with open(file) as fh:
            return Path.from_doc(json.load(fh))


def export_csv(path: Path, file, resolution: int = 1000) -> None:
    """Dense CSV export with rows t, x_1 .. x_D."""
    if resolution < 2:
        raise InvalidArgumentError("resolution must be >= 2")
    ts = np.linspace(0.0, 1.0, resolution)
    pts = path.evaluate_batch(ts)
    with open(file, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x_{i + 1}" for i in range(path.dim)])
        for t, row in zip(ts, pts):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])
