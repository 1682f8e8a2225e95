"""Stochastic functional-gradient path planner.

Each iteration draws a mini-batch of (time, body-point) samples over
the whole time domain, queries the occupancy map at the corresponding
workspace points, and applies a gated weight update: samples whose
occupancy exceeds the safety threshold are rejected outright, because
inside obstacles the map gradient points deeper in, not out.  Accepted
samples push the weights along

    W <- W - eta_n (g_obs + lambda g_dyn) (M^-1 feat(t))^T

with a decaying step size satisfying the Robbins-Monro conditions
(sum eta = inf, sum eta^2 < inf).  Endpoints are re-pinned after every
update through the boundary correction weights.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _fast
from . import objective as obj
from .errors import (
    BoundaryEnforcementError,
    InvalidArgumentError,
    InvalidEndpointError,
    NumericalError,
)
from .features import FeatureMap
from .occupancy import HilbertMap
from .path import (
    IdentityMetric,
    Path,
    StraightOffset,
    default_boundary_features,
    metric_from_spec,
)

log = logging.getLogger(__name__)

STALL_WINDOW = 50
STALL_ACCEPT_RATE = 0.01


@dataclass(frozen=True)
class Schedule:
    """Step-size schedule eta_n = eta0 / (1 + n / tau)^decay.

    decay in (0.5, 1] makes the sequence square-summable but not
    summable, the classic stochastic-approximation requirement.
    """

    eta0: float = 0.45
    tau: float = 8.0
    decay: float = 1.0

    def __post_init__(self):
        if self.eta0 <= 0:
            raise InvalidArgumentError("eta0 must be positive")
        if self.tau <= 0:
            raise InvalidArgumentError("tau must be positive")
        if not 0.5 < self.decay <= 1.0:
            raise InvalidArgumentError("decay must lie in (0.5, 1]")


def learning_rate(schedule: Schedule, n: int) -> float:
    """Step size at iteration n (n = 0 gives eta0 exactly)."""
    if n < 0:
        raise InvalidArgumentError("iteration must be >= 0")
    return schedule.eta0 / (1.0 + n / schedule.tau) ** schedule.decay


@dataclass(frozen=True)
class PlannerConfig:
    p_safe: float = 0.55
    batch: int = 20
    smooth_weight: float = 1e-2
    schedule: Schedule = field(default_factory=Schedule)
    max_iters: int = 150
    eps_w: float = 1e-3
    patience: int = 10
    dense: int = 500
    seed: int = 0
    eps_b: float = 1e-6
    metric: str = "identity"
    boundary_each_sample: bool = False
    snapshot_every: int = 0  # 0 disables objective snapshots
    dyn_relative_to_offset: bool = False

    def __post_init__(self):
        if not 0.0 < self.p_safe < 1.0:
            raise InvalidArgumentError("p_safe must lie in (0, 1)")
        if self.batch < 1:
            raise InvalidArgumentError("batch must be >= 1")
        if self.smooth_weight < 0:
            raise InvalidArgumentError("smooth_weight must be >= 0")
        if self.max_iters < 1:
            raise InvalidArgumentError("max_iters must be >= 1")
        if self.patience < 1:
            raise InvalidArgumentError("patience must be >= 1")
        if self.dense < 2:
            raise InvalidArgumentError("dense must be >= 2")
        if self.eps_w <= 0 or self.eps_b <= 0:
            raise InvalidArgumentError("tolerances must be positive")

    def to_doc(self) -> dict:
        return {
            "p_safe": self.p_safe,
            "batch": self.batch,
            "smooth_weight": self.smooth_weight,
            "schedule": {
                "eta0": self.schedule.eta0,
                "tau": self.schedule.tau,
                "decay": self.schedule.decay,
            },
            "max_iters": self.max_iters,
            "eps_w": self.eps_w,
            "patience": self.patience,
            "dense": self.dense,
            "seed": self.seed,
            "eps_b": self.eps_b,
            "metric": self.metric,
            "boundary_each_sample": self.boundary_each_sample,
            "snapshot_every": self.snapshot_every,
            "dyn_relative_to_offset": self.dyn_relative_to_offset,
        }

    @staticmethod
    def from_doc(doc: dict) -> "PlannerConfig":
        doc = dict(doc)
        sched = doc.pop("schedule", None)
        if sched is not None:
            doc["schedule"] = Schedule(**sched)
        return PlannerConfig(**doc)


@dataclass
class IterationRecord:
    n: int
    ts: np.ndarray
    u_idx: np.ndarray
    occ: np.ndarray
    accepted: np.ndarray
    eta: float
    boundary_residual: float
    max_occ: float
    objective: dict | None = None

    def to_doc(self) -> dict:
        doc = {
            "n": self.n,
            "ts": self.ts.tolist(),
            "u_idx": self.u_idx.tolist(),
            "occ": self.occ.tolist(),
            "accepted": [bool(a) for a in self.accepted],
            "eta": self.eta,
            "boundary_residual": self.boundary_residual,
            "max_occ": self.max_occ,
        }
        if self.objective is not None:
            doc["objective"] = self.objective
        return doc


@dataclass
class PlanRun:
    """Full audit trail of one planning run."""

    config: PlannerConfig
    records: list[IterationRecord] = field(default_factory=list)
    status: str = "max-iters"
    stalled: bool = False

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def samples_drawn(self) -> int:
        return int(sum(r.ts.size for r in self.records))

    @property
    def samples_accepted(self) -> int:
        return int(sum(np.count_nonzero(r.accepted) for r in self.records))

    def max_occ_trace(self) -> np.ndarray:
        """Per-iteration max occupancy along the dense path sweep."""
        return np.array([r.max_occ for r in self.records])

    def to_doc(self) -> dict:
        return {
            "format": "occupath-plan-run",
            "version": 1,
            "config": self.config.to_doc(),
            "status": self.status,
            "stalled": self.stalled,
            "iterations": self.iterations,
            "samples_drawn": self.samples_drawn,
            "samples_accepted": self.samples_accepted,
            "iteration_records": [r.to_doc() for r in self.records],
        }


@dataclass(frozen=True)
class PlanResult:
    path: Path
    run: PlanRun


def sgd_step(path: Path, samples: list[obj.GradientSample], eta: float,
             smooth_weight: float) -> Path:
    """Apply one gated stochastic update to the path weights in place.

    Accepted samples are summed; rejected samples contribute nothing and
    the boundary weights are untouched.  A non-finite gradient in an
    accepted sample aborts the whole update, leaving the path unchanged.
    """
    accepted = [s for s in samples if s.accepted]
    if not accepted or eta == 0.0:
        return path
    grads = np.array([s.g_obs + smooth_weight * s.g_dyn for s in accepted])
    if not np.all(np.isfinite(grads)):
        raise NumericalError("non-finite gradient in accepted sample")
    ts = np.array([s.t for s in accepted])
    feats = path.features.evaluate_batch(ts)  # (k, M)
    feats = np.ascontiguousarray(path.metric.solve(feats.T).T)
    _fast.rank1_updates(path.weights, grads, feats, eta)
    return path


def boundary_residual(path: Path, start: np.ndarray, goal: np.ndarray) -> float:
    """Largest endpoint error, max(|xi(0) - start|, |xi(1) - goal|)."""
    ends = path.evaluate_batch(np.array([0.0, 1.0]))
    r0 = float(np.linalg.norm(ends[0] - start))
    r1 = float(np.linalg.norm(ends[1] - goal))
    return max(r0, r1)


def enforce_boundary(path: Path, start, goal, eps_b: float = 1e-6,
                     max_passes: int = 10) -> Path:
    """Re-pin the endpoints through the boundary correction weights.

    Each pass applies, per endpoint, W_b <- W_b - delta x outer feat_b(t_b).
    The boundary features are near-orthonormal at their own anchor
    times, so the endpoint error contracts by roughly the squared cross
    covariance per pass and a handful of passes reach eps_b.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    t_ends = np.array([0.0, 1.0])
    targets = (start, goal)
    for _ in range(max_passes):
        residual = boundary_residual(path, start, goal)
        if residual <= eps_b:
            return path
        for t_b, desired in zip(t_ends, targets):
            phi = path.boundary_features.evaluate(t_b)  # (Mb,)
            delta = path.evaluate(t_b) - desired
            path.boundary_weights -= np.outer(delta, phi)
    residual = boundary_residual(path, start, goal)
    if residual > eps_b:
        raise BoundaryEnforcementError(
            f"endpoint residual {residual:.3e} above {eps_b:.3e} "
            f"after {max_passes} passes"
        )
    return path


def make_path(start, goal, features: FeatureMap, metric_spec: str = "identity",
              offset=None) -> Path:
    """Fresh path: zero weights, default boundary features.

    The offset defaults to the straight segment from start to goal.  Any
    other offset (a polyline detour around large structure, say) may be
    passed instead as long as its endpoints coincide with start and goal.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if start.shape != goal.shape or start.ndim != 1:
        raise InvalidArgumentError("start and goal must be same-length vectors")
    dim = start.size
    if offset is None:
        offset = StraightOffset(start=start, goal=goal)
    else:
        ends = offset.evaluate_batch(np.array([0.0, 1.0]))
        if (np.linalg.norm(ends[0] - start) > 1e-9
                or np.linalg.norm(ends[1] - goal) > 1e-9):
            raise InvalidArgumentError(
                "offset endpoints must coincide with start and goal")
    if metric_spec == "identity":
        metric = IdentityMetric()
    else:
        metric = metric_from_spec({"kind": metric_spec}, features)
    boundary = default_boundary_features()
    return Path(
        features=features,
        offset=offset,
        boundary_features=boundary,
        weights=np.zeros((dim, features.m)),
        boundary_weights=np.zeros((dim, boundary.m)),
        metric=metric,
    )


def dense_max_occupancy(path: Path, occ: HilbertMap, n: int) -> float:
    """Max occupancy along the path centerline, the per-iteration trace metric."""
    ts = np.linspace(0.0, 1.0, n)
    return float(np.max(occ.query_batch(path.evaluate_batch(ts))))


def plan(occ: HilbertMap, start, goal, body: obj.BodyModel,
         features: FeatureMap, cfg: PlannerConfig, offset=None) -> PlanResult:
    """Run the stochastic planner to convergence or the iteration cap.

    Fixed seed gives bit-identical output.  Endpoints with occupancy
    above p_safe are refused up front.  Status is one of converged,
    max-iters, or infeasible-boundary.  An explicit offset seeds the
    path mean with a route other than the straight segment.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    for name, x in (("start", start), ("goal", goal)):
        p = occ.query(x)
        if p > cfg.p_safe:
            raise InvalidEndpointError(
                f"{name} {x.tolist()} has occupancy {p:.3f} > p_safe {cfg.p_safe}"
            )

    path = make_path(start, goal, features, cfg.metric, offset=offset)
    run = PlanRun(config=cfg)
    rng = np.random.default_rng(cfg.seed)
    streak = 0
    recent_drawn: list[int] = []
    recent_accepted: list[int] = []

    for n in range(cfg.max_iters):
        eta = learning_rate(cfg.schedule, n)
        ts = rng.uniform(0.0, 1.0, size=cfg.batch)
        u_idx = rng.integers(0, body.n_points, size=cfg.batch)
        samples = obj.gradient_samples(path, occ, body, ts, u_idx, cfg.p_safe)
        prev = path.weights.copy()
        try:
            if cfg.boundary_each_sample:
                for s in samples:
                    sgd_step(path, [s], eta, cfg.smooth_weight)
                    enforce_boundary(path, start, goal, cfg.eps_b)
            else:
                sgd_step(path, samples, eta, cfg.smooth_weight)
                enforce_boundary(path, start, goal, cfg.eps_b)
        except BoundaryEnforcementError as exc:
            log.error("boundary enforcement failed at iteration %d: %s", n, exc)
            run.status = "infeasible-boundary"
            _record(run, n, ts, u_idx, samples, eta,
                    boundary_residual(path, start, goal),
                    dense_max_occupancy(path, occ, cfg.dense), None)
            return PlanResult(path=path, run=run)

        snapshot = None
        if cfg.snapshot_every and (n + 1) % cfg.snapshot_every == 0:
            snapshot = obj.evaluate_objective(
                path, occ, body, cfg.smooth_weight, n=cfg.dense,
                relative_to_offset=cfg.dyn_relative_to_offset,
            )
        max_occ = dense_max_occupancy(path, occ, cfg.dense)
        _record(run, n, ts, u_idx, samples, eta,
                boundary_residual(path, start, goal), max_occ, snapshot)

        recent_drawn.append(cfg.batch)
        recent_accepted.append(sum(1 for s in samples if s.accepted))
        if len(recent_drawn) > STALL_WINDOW:
            recent_drawn.pop(0)
            recent_accepted.pop(0)
        if (not run.stalled and len(recent_drawn) == STALL_WINDOW
                and sum(recent_accepted) < STALL_ACCEPT_RATE * sum(recent_drawn)):
            run.stalled = True
            log.warning(
                "planner stalled: under %.0f%% of samples accepted over "
                "the last %d iterations", 100 * STALL_ACCEPT_RATE, STALL_WINDOW,
            )

        delta = float(np.linalg.norm(path.weights - prev))
        scale = max(float(np.linalg.norm(path.weights)), 1e-12)
        streak = streak + 1 if delta / scale < cfg.eps_w else 0
        if streak >= cfg.patience and max_occ <= cfg.p_safe:
            run.status = "converged"
            return PlanResult(path=path, run=run)

    run.status = "max-iters"
    return PlanResult(path=path, run=run)


def _record(run, n, ts, u_idx, samples, eta, residual, max_occ, snapshot):
    run.records.append(IterationRecord(
        n=n,
        ts=ts,
        u_idx=u_idx,
        occ=np.array([s.occ for s in samples]),
        accepted=np.array([s.accepted for s in samples], dtype=bool),
        eta=eta,
        boundary_residual=residual,
        max_occ=max_occ,
        objective=snapshot,
    ))
