"""Finite feature sets approximating an RBF-kernel RKHS.

Two constructions are provided:

* random Fourier features: frequencies drawn from the RBF spectral
  density (normal with standard deviation 1/lengthscale), phases uniform
  on [0, 2*pi).  The feature dot product is an unbiased estimate of
  exp(-(x - x')^2 / (2 * lengthscale^2)).
* Nystrom features: Upsilon(x) = L^{-1} k(landmarks, x) with L the lower
  Cholesky factor of the jittered landmark Gram matrix, so the induced
  kernel is the standard Nystrom approximation and is exact on the
  landmark set (up to jitter).

Feature maps over a scalar domain (a time interval) support exact
analytic first and second derivatives; maps over a spatial box support
the feature Jacobian.  Both are immutable and cheap to share.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import _fast
from .errors import InvalidArgumentError, NumericalError, UnsupportedOrderError

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FeatureMap:
    """A finite feature set with an induced approximate RBF kernel.

    Instances are built through :func:`build_rff` / :func:`build_nystrom`
    and should be treated as immutable.  ``domain`` is ``(lo, hi)`` for
    scalar (time) maps and a ``(2, D)`` row-stacked ``[lo; hi]`` box for
    spatial maps.
    """

    kind: str
    lengthscale: float
    domain: np.ndarray
    omega: np.ndarray | None = None
    phase: np.ndarray | None = None
    landmarks: np.ndarray | None = None
    chol: np.ndarray | None = field(default=None, repr=False)
    seed: int | None = None
    jitter: float | None = None

    @property
    def m(self) -> int:
        """Number of features."""
        if self.kind == "rff":
            return self.omega.shape[0]
        return self.landmarks.shape[0]

    @property
    def input_dim(self) -> int:
        return 1 if self.domain.ndim == 1 else self.domain.shape[1]

    # -- evaluation ------------------------------------------------------

    def evaluate(self, x, order: int = 0) -> np.ndarray:
        """Feature vector (length m) at a single scalar time or point."""
        if self.input_dim == 1:
            return self.evaluate_batch(np.atleast_1d(float(x)), order)[0]
        return self.evaluate_batch(np.asarray(x, dtype=float)[None, :], order)[0]

    def evaluate_batch(self, xs, order: int = 0) -> np.ndarray:
        """Feature matrix (n, m) for a batch of times or points.

        For scalar-domain maps ``order`` selects the analytic derivative
        (0, 1 or 2) of every feature with respect to the argument.
        Spatial maps only support order 0 here; use
        :meth:`jacobian_batch` for spatial derivatives.
        """
        if order not in (0, 1, 2):
            raise UnsupportedOrderError(f"derivative order {order} not supported")
        if self.input_dim == 1:
            ts = self._clamped(np.asarray(xs, dtype=float).ravel())
            if self.kind == "rff":
                return _fast.time_features(self.omega, self.phase, ts, order)
            return self._nystrom_time(ts, order)
        if order != 0:
            raise UnsupportedOrderError(
                "spatial feature maps expose derivatives via jacobian_batch"
            )
        pts = np.ascontiguousarray(xs, dtype=float)
        if self.kind == "rff":
            return _fast.spatial_design(self.omega, self.phase, pts)
        return self._apply_inv_factor(self._spatial_gram(pts))

    def jacobian_batch(self, xs) -> np.ndarray:
        """Feature Jacobians, shape (n, m, D), for a spatial map."""
        if self.input_dim == 1:
            raise InvalidArgumentError("jacobian_batch is for spatial maps; use order=1")
        pts = np.ascontiguousarray(xs, dtype=float)
        if self.kind == "rff":
            scale = np.sqrt(2.0 / self.m)
            arg = pts @ self.omega.T + self.phase
            return -scale * np.sin(arg)[:, :, None] * self.omega[None, :, :]
        diff = pts[:, None, :] - self.landmarks[None, :, :]  # (n, m, D)
        k = self._spatial_gram(pts)
        jac = -(diff / self.lengthscale**2) * k[:, :, None]
        n, m, d = jac.shape
        flat = solve_triangular(self.chol, jac.transpose(1, 0, 2).reshape(m, n * d), lower=True)
        return flat.reshape(m, n, d).transpose(1, 0, 2)

    # -- helpers ---------------------------------------------------------

    def _clamped(self, ts: np.ndarray) -> np.ndarray:
        lo, hi = self.domain
        if ts.size and (ts.min() < lo or ts.max() > hi):
            n_out = int(np.sum((ts < lo) | (ts > hi)))
            log.warning("clamped %d evaluation point(s) into [%g, %g]", n_out, lo, hi)
            return np.clip(ts, lo, hi)
        return ts

    def _nystrom_time(self, ts: np.ndarray, order: int) -> np.ndarray:
        ell2 = self.lengthscale**2
        diff = ts[:, None] - self.landmarks[None, :]
        k = np.exp(-(diff**2) / (2.0 * ell2))
        if order == 1:
            k = (-diff / ell2) * k
        elif order == 2:
            k = (diff**2 / ell2**2 - 1.0 / ell2) * k
        return self._apply_inv_factor(k)

    def _spatial_gram(self, pts: np.ndarray) -> np.ndarray:
        d2 = np.sum((pts[:, None, :] - self.landmarks[None, :, :]) ** 2, axis=2)
        return np.exp(-d2 / (2.0 * self.lengthscale**2))

    def _apply_inv_factor(self, k: np.ndarray) -> np.ndarray:
        return solve_triangular(self.chol, k.T, lower=True).T

    # -- serialization ---------------------------------------------------

    def spec(self) -> dict:
        """Generating parameters; feeds :func:`from_spec` bit-identically."""
        out = {
            "kind": self.kind,
            "lengthscale": self.lengthscale,
            "domain": self.domain.tolist(),
        }
        if self.kind == "rff":
            out["m"] = self.m
            out["seed"] = self.seed
        else:
            out["landmarks"] = self.landmarks.tolist()
            out["jitter"] = self.jitter
        return out


def from_spec(spec: dict) -> FeatureMap:
    """Reconstruct a feature map from its :meth:`FeatureMap.spec` document."""
    domain = np.asarray(spec["domain"], dtype=float)
    if spec["kind"] == "rff":
        return build_rff(spec["m"], spec["lengthscale"], spec["seed"], domain=domain)
    if spec["kind"] == "nystrom":
        return build_nystrom(
            spec["landmarks"], spec["lengthscale"], jitter=spec["jitter"], domain=domain
        )
    raise InvalidArgumentError(f"unknown feature kind {spec['kind']!r}")


def build_rff(m: int, lengthscale: float, seed: int, domain=(0.0, 1.0)) -> FeatureMap:
    """Draw a random Fourier feature map for the RBF kernel.

    Frequencies are normal with standard deviation ``1/lengthscale``
    (the RBF spectral density), phases uniform on [0, 2*pi); the feature
    dot product approximates ``exp(-(x - x')^2 / (2 lengthscale^2))``.
    The draw order (frequencies, then phases) is fixed so that a map is
    reconstructed bit-identically from ``(m, lengthscale, seed)``.
    """
    if m < 1:
        raise InvalidArgumentError(f"feature count must be >= 1, got {m}")
    if lengthscale <= 0:
        raise InvalidArgumentError(f"lengthscale must be positive, got {lengthscale}")
    domain = np.asarray(domain, dtype=float)
    rng = np.random.default_rng(seed)
    if domain.ndim == 1:
        omega = rng.normal(0.0, 1.0 / lengthscale, size=m)
    else:
        omega = rng.normal(0.0, 1.0 / lengthscale, size=(m, domain.shape[1]))
    phase = rng.uniform(0.0, TWO_PI, size=m)
    return FeatureMap(
        kind="rff",
        lengthscale=float(lengthscale),
        domain=domain,
        omega=omega,
        phase=phase,
        seed=int(seed),
    )


def build_nystrom(landmarks, lengthscale: float, jitter: float = 1e-8, domain=None) -> FeatureMap:
    """Build Nystrom features from a landmark set.

    The landmark Gram matrix (RBF kernel) gets ``jitter`` added to its
    diagonal before Cholesky factorization; on failure the jitter is
    escalated by factors of 10 a few times before giving up.
    """
    z = np.asarray(landmarks, dtype=float)
    if z.ndim == 2 and z.shape[1] == 1:
        z = z.ravel()
    if z.size == 0:
        raise InvalidArgumentError("need at least one landmark")
    if lengthscale <= 0:
        raise InvalidArgumentError(f"lengthscale must be positive, got {lengthscale}")
    if jitter < 0:
        raise InvalidArgumentError(f"jitter must be >= 0, got {jitter}")
    if domain is None:
        if z.ndim == 1:
            domain = np.array([min(0.0, z.min()), max(1.0, z.max())])
        else:
            domain = np.vstack([z.min(axis=0), z.max(axis=0)])
    domain = np.asarray(domain, dtype=float)

    if z.ndim == 1:
        d2 = (z[:, None] - z[None, :]) ** 2
    else:
        d2 = np.sum((z[:, None, :] - z[None, :, :]) ** 2, axis=2)
    gram = np.exp(-d2 / (2.0 * lengthscale**2))

    j = max(jitter, 0.0)
    chol = None
    for _ in range(7):
        try:
            chol = np.linalg.cholesky(gram + j * np.eye(z.shape[0]))
            break
        except np.linalg.LinAlgError:
            j = max(j * 10.0, 1e-12)
    if chol is None:
        raise NumericalError(
            f"landmark Gram factorization failed for {z.shape[0]} landmarks "
            f"(lengthscale {lengthscale}, jitter escalated to {j:g}); "
            "landmarks may be duplicated or too close"
        )
    return FeatureMap(
        kind="nystrom",
        lengthscale=float(lengthscale),
        domain=domain,
        landmarks=z,
        chol=chol,
        jitter=float(jitter),
    )


def kernel_matrix(f: FeatureMap, xs, ys=None) -> np.ndarray:
    """Induced approximate kernel k_hat(x, y) = Upsilon(x) . Upsilon(y)."""
    a = f.evaluate_batch(np.asarray(xs, dtype=float))
    b = a if ys is None else f.evaluate_batch(np.asarray(ys, dtype=float))
    return a @ b.T
