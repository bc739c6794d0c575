"""Extended Kalman filter tracking with a constant-velocity motion model.

State ``x = [px, py, vx, vy]``. Observations are distances to anchors (BSs
for conventional ranging, BSs and virtual anchors for MINT).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .association import Correspondences, associate_at
from .estimation import (
    DEFAULT_GAMMA, DEFAULT_K_MAX, DEFAULT_SEARCHBACK, PRELOS_WINDOW, MpcEstimateSet, RangingOutage,
    extract_mpcs, jbsf_range, ml_range, noise_threshold,
)
from .geometry import FloorPlan, VaTable
from .waveform import Pulse, SignalFrame

#: Anchors closer than this to the predicted position are skipped (meters).
MIN_ANCHOR_DISTANCE = 1e-6


@dataclass
class TrackerState:
    mean_x: np.ndarray
    covariance_P: np.ndarray
    info: dict = field(default_factory=dict, repr=False)

    @property
    def position(self) -> np.ndarray:
        return self.mean_x[:2]

    @classmethod
    def initial(cls, position, pos_std: float = 0.1, vel_std: float = 1.0) -> TrackerState:
        """Start at ``position`` with zero velocity."""
        x = np.array([position[0], position[1], 0.0, 0.0], dtype=np.float64)
        P = np.diag([pos_std ** 2, pos_std ** 2, vel_std ** 2, vel_std ** 2])
        return cls(x, P)


@dataclass(frozen=True)
class MotionModel:
    dT: float
    sigma_a2: float
    F: np.ndarray
    G: np.ndarray
    Q: np.ndarray

    @classmethod
    def constant_velocity(cls, dT: float, sigma_a2: float) -> MotionModel:
        F = np.eye(4)
        F[0, 2] = F[1, 3] = dT
        G = np.array([[dT ** 2 / 2, 0.0], [0.0, dT ** 2 / 2], [dT, 0.0], [0.0, dT]])
        return cls(dT, sigma_a2, F, G, sigma_a2 * G @ G.T)


@dataclass
class ObservationBatch:
    anchors: np.ndarray
    distances: np.ndarray
    noise_var_sigma_z2: float

    def __post_init__(self):
        self.anchors = np.asarray(self.anchors, dtype=np.float64).reshape(-1, 2)
        self.distances = np.asarray(self.distances, dtype=np.float64).ravel()
        if self.anchors.shape[0] != self.distances.size or self.distances.size == 0:
            raise ValueError("observation batch needs >= 1 anchor and one distance per anchor")


def sigma_a_from_vmax(v_max: float, dT: float) -> float:
    """Acceleration noise variance placing ``v_max`` at the 3-sigma point: ``(v_max / (3 dT))**2``."""
    if dT <= 0:
        raise ValueError("dT must be positive")
    return (v_max / (3.0 * dT)) ** 2


def _sym(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


def predict(state: TrackerState, model: MotionModel) -> TrackerState:
    x = model.F @ state.mean_x
    P = model.F @ state.covariance_P @ model.F.T + model.Q
    return TrackerState(x, _sym(P))


def update(state: TrackerState, batch: ObservationBatch) -> TrackerState:
    """Range-measurement EKF update (Joseph form).

    Rows whose anchor coincides with the predicted position are dropped with
    a warning; if none remain the state is returned unchanged.
    """
    p = state.mean_x[:2]
    diff = p[None, :] - batch.anchors
    rng = np.hypot(diff[:, 0], diff[:, 1])
    keep = rng > MIN_ANCHOR_DISTANCE
    if not keep.all():
        warnings.warn(f"skipping {int((~keep).sum())} anchor(s) at the predicted position", RuntimeWarning)
    if not keep.any():
        return TrackerState(state.mean_x.copy(), state.covariance_P.copy(), {"rows": 0})
    diff, rng, z = diff[keep], rng[keep], batch.distances[keep]
    m = z.size
    H = np.zeros((m, 4))
    H[:, :2] = diff / rng[:, None]
    R = batch.noise_var_sigma_z2 * np.eye(m)
    P = state.covariance_P
    S = H @ P @ H.T + R
    K = np.linalg.solve(S, H @ P).T
    x = state.mean_x + K @ (z - rng)
    A = np.eye(4) - K @ H
    P_new = A @ P @ A.T + K @ R @ K.T
    return TrackerState(x, _sym(P_new), {"rows": m})


@dataclass
class TrackerConfig:
    """Per-pulse processing parameters shared by all tracker variants."""

    pulse: Pulse
    model: MotionModel
    sigma_z2: float
    dc: float
    xi: float
    gamma: float = DEFAULT_GAMMA
    K_max: int = DEFAULT_K_MAX
    searchback: float = DEFAULT_SEARCHBACK
    prelos_window: object = PRELOS_WINDOW

    def extract(self, frame: SignalFrame) -> MpcEstimateSet:
        thr = noise_threshold(frame, self.gamma, self.prelos_window)
        return extract_mpcs(frame, self.pulse, self.K_max, thr)


def conventional_ranges(frames: Sequence[SignalFrame], method: str, config: TrackerConfig,
                        estimates: Optional[Sequence[MpcEstimateSet]] = None) -> list[Optional[float]]:
    """One LOS range per frame (``None`` for a ranging outage)."""
    out: list[Optional[float]] = []
    for i, frame in enumerate(frames):
        try:
            if method == "ML":
                est = estimates[i] if estimates is not None else config.extract(frame)
                out.append(ml_range(est).distance)
            elif method == "JBSF":
                out.append(jbsf_range(frame, config.xi, config.searchback, config.prelos_window).distance)
            else:
                raise ValueError(f"unknown ranging method {method!r}")
        except RangingOutage:
            out.append(None)
    return out


def step_with_ranges(state: TrackerState, bss: Sequence, ranges: Sequence[Optional[float]],
                     config: TrackerConfig) -> TrackerState:
    """Predict, then update with every available BS range (outages dropped)."""
    pred = predict(state, config.model)
    used = [(bs, r) for bs, r in zip(bss, ranges) if r is not None]
    if not used:
        pred.info = {"rows": 0, "ranges": []}
        return pred
    anchors = np.array([u[0] for u in used], dtype=np.float64)
    out = update(pred, ObservationBatch(anchors, [u[1] for u in used], config.sigma_z2))
    out.info["ranges"] = list(ranges)
    return out


def step_conventional(state: TrackerState, frames: Sequence[SignalFrame], bss: Sequence, method: str,
                      config: TrackerConfig, estimates: Optional[Sequence[MpcEstimateSet]] = None) -> TrackerState:
    """Conventional ranging EKF step: ML or JBSF ranging to every BS, one frame per BS."""
    if len(frames) != len(bss):
        raise ValueError("need one frame per BS")
    return step_with_ranges(state, bss, conventional_ranges(frames, method, config, estimates), config)


def step_mint_from_estimates(state: TrackerState, estimates: Sequence[MpcEstimateSet], tables: Sequence[VaTable],
                             plan: FloorPlan, config: TrackerConfig, da_mode: str = "DA",
                             true_position=None, position_index: int = 0):
    """MINT step given extracted MPC sets (one per BS, aligned with ``tables``)."""
    if da_mode not in ("DA", "GADA"):
        raise ValueError(f"unknown DA mode {da_mode!r}")
    if da_mode == "GADA" and true_position is None:
        raise ValueError("GADA needs the true position")
    pred = predict(state, config.model)
    where = pred.mean_x[:2] if da_mode == "DA" else np.asarray(true_position, dtype=np.float64)
    corrs: list[Correspondences] = []
    anchors, dists = [], []
    for est, table in zip(estimates, tables):
        Z = est.distances()
        corr = associate_at(where, table, plan, Z, config.dc, position_index)
        corrs.append(corr)
        pos_of = {va.id: va.position for va in corr.expected.vas}
        for mi, va_id in corr.assignments:
            anchors.append(pos_of[va_id])
            dists.append(Z[mi])
    if not anchors:
        pred.info = {"rows": 0}
        return pred, corrs
    out = update(pred, ObservationBatch(np.array(anchors), dists, config.sigma_z2))
    out.info["anchors"] = np.array(anchors)
    out.info["distances"] = np.array(dists)
    return out, corrs


def step_mint(state: TrackerState, frames: Sequence[SignalFrame], tables: Sequence[VaTable], plan: FloorPlan,
              config: TrackerConfig, da_mode: str = "DA", true_position=None,
              estimates: Optional[Sequence[MpcEstimateSet]] = None):
    """MINT EKF step: per-BS MPC extraction, association, stacked VA update.

    Returns ``(state, correspondences_per_bs)``.
    """
    if estimates is None:
        estimates = [config.extract(f) for f in frames]
    idx = frames[0].position_index if frames else 0
    return step_mint_from_estimates(state, estimates, tables, plan, config, da_mode, true_position, idx)


def position_error(state: TrackerState, truth) -> float:
    return math.hypot(state.mean_x[0] - truth[0], state.mean_x[1] - truth[1])
