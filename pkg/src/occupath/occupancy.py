"""Continuous occupancy model with closed-form spatial gradients.

The map is a logistic classifier over spatial kernel-approximating
features: p(occupied | x) = sigmoid(w . Phi(x) + b), trained by seeded
mini-batch SGD on +-1 labeled workspace points.  Because the feature map
is smooth, the spatial gradient of the probability is available in
closed form,

    grad p(x) = p (1 - p) * J(x)^T w,       J = dPhi/dx,

which is what gradient-based planners consume.  A grid-map adapter with
a Sobel-type gradient is provided for raster maps.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import _fast
from . import features as ft
from .errors import (
    DegenerateDataError,
    DomainError,
    InvalidArgumentError,
)

log = logging.getLogger(__name__)

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])


@dataclass(frozen=True)
class LabeledPoint:
    """A workspace point labeled +1 (occupied) or -1 (free)."""

    x: np.ndarray
    y: int

    def __post_init__(self):
        if self.y not in (1, -1):
            raise InvalidArgumentError(f"label must be +1 or -1, got {self.y}")


@dataclass(frozen=True)
class TrainMeta:
    epochs: int
    step: float
    l2: float
    batch: int
    seed: int
    n_points: int = 0
    final_logloss: float = float("nan")


@dataclass(frozen=True)
class HilbertMap:
    """Trained continuous occupancy model; immutable, safe to share."""

    features: ft.FeatureMap
    weights: np.ndarray
    bias: float
    meta: TrainMeta | None = field(default=None, repr=False)

    def query(self, x) -> float:
        return float(self.query_batch(np.asarray(x, float)[None, :])[0])

    def query_batch(self, points) -> np.ndarray:
        """Occupancy probabilities in (0, 1) for each row of points."""
        points = np.asarray(points, dtype=float)
        self._check_finite(points)
        f = self.features
        if f.kind == "rff":
            return _fast.map_query(f.omega, f.phase, self.weights, self.bias, points)
        logits = f.evaluate_batch(points) @ self.weights + self.bias
        return expit(logits)

    def gradient(self, x) -> np.ndarray:
        return self.gradient_batch(np.asarray(x, float)[None, :])[1][0]

    def gradient_batch(self, points):
        """(probabilities, gradients) with gradients of shape (n, D).

        gradients[i] = p (1 - p) * J(x_i)^T w, the exact spatial gradient
        of the occupancy probability.
        """
        points = np.asarray(points, dtype=float)
        self._check_finite(points)
        f = self.features
        if f.kind == "rff":
            return _fast.map_query_grad(f.omega, f.phase, self.weights, self.bias, points)
        p = self.query_batch(points)
        jac = f.jacobian_batch(points)  # (n, m, D)
        df = np.einsum("nmd,m->nd", jac, self.weights)
        return p, (p * (1.0 - p))[:, None] * df

    @staticmethod
    def _check_finite(points):
        if not np.all(np.isfinite(points)):
            raise InvalidArgumentError("query points must be finite")

    # -- serialization -----------------------------------------------------

    def to_doc(self) -> dict:
        doc = {
            "format": "occupath-map",
            "version": 1,
            "features": self.features.spec(),
            "weights": self.weights.tolist(),
            "bias": self.bias,
        }
        if self.meta is not None:
            doc["train_meta"] = {
                "epochs": self.meta.epochs,
                "step": self.meta.step,
                "l2": self.meta.l2,
                "batch": self.meta.batch,
                "seed": self.meta.seed,
                "n_points": self.meta.n_points,
                "final_logloss": self.meta.final_logloss,
            }
        return doc

    @staticmethod
    def from_doc(doc: dict) -> "HilbertMap":
        if doc.get("format") != "occupath-map":
            raise InvalidArgumentError("not an occupancy map document")
        meta = None
        if "train_meta" in doc:
            meta = TrainMeta(**doc["train_meta"])
        return HilbertMap(
            features=ft.from_spec(doc["features"]),
            weights=np.asarray(doc["weights"], float),
            bias=float(doc["bias"]),
            meta=meta,
        )

    def save(self, file) -> None:
        with open(file, "w") as fh:
            json.dump(self.to_doc(), fh, sort_keys=True, indent=1)
            fh.write("\n")

    @staticmethod
    def load(file) -> "HilbertMap":
        with open(file) as fh:
            return HilbertMap.from_doc(json.load(fh))


def untrained_map(features: ft.FeatureMap) -> HilbertMap:
    """Zero-weight map: returns the 0.5 prior everywhere."""
    return HilbertMap(features=features, weights=np.zeros(features.m), bias=0.0)


def train_map(points, labels, features: ft.FeatureMap, epochs: int = 5,
              step: float = 0.01, l2: float = 1e-4, batch: int = 256,
              seed: int = 0, fit_bias: bool = False) -> HilbertMap:
    """Fit the logistic occupancy model by seeded mini-batch SGD.

    Points are canonically sorted before the seeded shuffle, so the fit
    is invariant to the input ordering.  The L2 penalty acts on the
    feature weights only, not the bias.  The bias stays at zero unless
    fit_bias is set: with local (kernel) features a zero bias keeps
    unobserved regions at the 0.5 prior instead of letting the free/
    occupied class imbalance leak everywhere.
    """
    points = np.ascontiguousarray(points, dtype=float)
    labels = np.asarray(labels, dtype=float).ravel()
    if points.ndim != 2 or points.shape[0] != labels.size:
        raise InvalidArgumentError("points must be (n, D) with one label per row")
    if points.shape[0] == 0:
        raise DegenerateDataError("empty training set")
    if not np.all(np.isfinite(points)):
        raise InvalidArgumentError("training points must be finite")
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise InvalidArgumentError("labels must be +1 or -1")
    if not (np.any(labels > 0) and np.any(labels < 0)):
        raise DegenerateDataError("training data must contain both labels")
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    dlo, dhi = features.domain[0], features.domain[1]
    if np.any(lo < dlo - 1e-9) or np.any(hi > dhi + 1e-9):
        raise InvalidArgumentError(
            f"feature domain {features.domain.tolist()} does not cover the "
            f"point bounding box [{lo.tolist()}, {hi.tolist()}]"
        )

    order = np.lexsort((labels,) + tuple(points[:, d] for d in reversed(range(points.shape[1]))))
    points = points[order]
    labels = labels[order]

    n = points.shape[0]
    w = np.zeros(features.m)
    b = 0.0
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        perm = rng.permutation(n)
        for lo_i in range(0, n, batch):
            idx = perm[lo_i:lo_i + batch]
            phi = _design(features, points[idx])
            y = labels[idx]
            margin = y * (phi @ w + b)
            s = expit(-margin)  # d/df log(1 + exp(-y f)) = -y * sigmoid(-y f)
            # per-sample gradients summed: batching changes grouping only,
            # not the total step an epoch applies
            gw = -(phi.T @ (y * s)) + l2 * w
            w -= step * gw
            if fit_bias:
                b -= step * -np.sum(y * s)

    logloss = _mean_logloss(features, w, b, points, labels, batch=4096)
    meta = TrainMeta(epochs=epochs, step=step, l2=l2, batch=batch, seed=seed,
                     n_points=n, final_logloss=logloss)
    return HilbertMap(features=features, weights=w, bias=b, meta=meta)


def _design(features: ft.FeatureMap, points: np.ndarray) -> np.ndarray:
    if features.kind == "rff":
        return _fast.spatial_design(features.omega, features.phase, points)
    return features.evaluate_batch(points)


def _mean_logloss(features, w, b, points, labels, batch=4096) -> float:
    total = 0.0
    for lo_i in range(0, points.shape[0], batch):
        phi = _design(features, points[lo_i:lo_i + batch])
        margin = labels[lo_i:lo_i + batch] * (phi @ w + b)
        total += np.sum(np.logaddexp(0.0, -margin))
    return float(total / points.shape[0])


# -- grid-map adapter -------------------------------------------------------


@dataclass(frozen=True)
class GridMap:
    """Raster occupancy map; values in [0, 1], 0.5 = unobserved."""

    origin: np.ndarray  # (2,) world coordinates of the low corner
    resolution: float  # meters per cell
    values: np.ndarray  # (rows, cols), row-major, y increases with row

    def __post_init__(self):
        if self.resolution <= 0:
            raise InvalidArgumentError("resolution must be positive")
        if np.any(self.values < 0) or np.any(self.values > 1):
            raise InvalidArgumentError("grid values must lie in [0, 1]")


def grid_gradient(grid: GridMap, x) -> np.ndarray:
    """Sobel gradient of the raster, bilinearly interpolated at x.

    The 3x3 Sobel response at the four cell centers around x is blended
    bilinearly and scaled by 1 / (8 * resolution) so the result has
    units of probability per meter.  Border cells use replicated edges.
    """
    x = np.asarray(x, dtype=float)
    rows, cols = grid.values.shape
    size = np.array([cols, rows]) * grid.resolution
    if np.any(x < grid.origin) or np.any(x > grid.origin + size):
        raise DomainError(f"point {x.tolist()} outside grid bounds")
    # fractional cell-center indices
    u = (x[0] - grid.origin[0]) / grid.resolution - 0.5
    v = (x[1] - grid.origin[1]) / grid.resolution - 0.5
    j0 = int(np.clip(np.floor(u), 0, max(cols - 2, 0)))
    i0 = int(np.clip(np.floor(v), 0, max(rows - 2, 0)))
    fu = np.clip(u - j0, 0.0, 1.0)
    fv = np.clip(v - i0, 0.0, 1.0)

    def sobel(i, j):
        ii = np.clip(np.arange(i - 1, i + 2), 0, rows - 1)
        jj = np.clip(np.arange(j - 1, j + 2), 0, cols - 1)
        patch = grid.values[np.ix_(ii, jj)]
        gx = np.sum(patch * SOBEL_X)
        gy = np.sum(patch * SOBEL_X.T)
        return np.array([gx, gy])

    g00 = sobel(i0, j0)
    g01 = sobel(i0, j0 + 1)
    g10 = sobel(i0 + 1, j0)
    g11 = sobel(i0 + 1, j0 + 1)
    g = (g00 * (1 - fu) * (1 - fv) + g01 * fu * (1 - fv)
         + g10 * (1 - fu) * fv + g11 * fu * fv)
    return g / (8.0 * grid.resolution)


def load_grid(raster_file, meta_file=None) -> GridMap:
    """Load a raster map from text or grayscale PNG plus a metadata sidecar.

    The sidecar (default ``<raster>.json``) holds ``origin`` and
    ``resolution``.  Text rasters are whitespace-separated rows of
    probabilities with row 0 at minimum y; PNG rasters follow image
    convention (row 0 at top) and are flipped on load, with pixel/255 as
    the occupancy probability.
    """
    raster_file = str(raster_file)
    meta_file = meta_file or raster_file + ".json"
    with open(meta_file) as fh:
        meta = json.load(fh)
    if raster_file.lower().endswith(".png"):
        from PIL import Image

        img = Image.open(raster_file).convert("L")
        values = np.asarray(img, dtype=float)[::-1] / 255.0
    else:
        values = np.loadtxt(raster_file, dtype=float)
        values = np.atleast_2d(values)
    return GridMap(
        origin=np.asarray(meta["origin"], dtype=float),
        resolution=float(meta["resolution"]),
        values=values,
    )
