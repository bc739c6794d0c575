"""Scenario orchestration: trajectories, obstruction, sweeps, metrics and CSV output.

A run covers every combination of tracker variant, pulse duration and
obstruction state. Randomness is keyed so that one seed fixes the channel
(path phases) for all pulse durations and the noise/DM realization is shared
between the obstructed and unobstructed runs of a pulse duration.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .association import Correspondences
from .constants import SPEED_OF_LIGHT
from .estimation import MpcEstimateSet, RangingOutage, jbsf_range, ml_range
from .geometry import FloorPlan, Point2D, VaTable, WallSegment, generate_vas, load_floor_plan
from .tracking import (
    MotionModel, TrackerConfig, TrackerState, sigma_a_from_vmax, step_mint_from_estimates, step_with_ranges,
)
from .waveform import (
    AmplitudeModel, DiffuseModel, Mpc, Pulse, SignalFrame, add_mpcs, make_pulse, make_rng, synthesize,
)

log = logging.getLogger(__name__)

TRACKERS = ("MINT-DA", "MINT-GADA", "EKF-ML", "EKF-JBSF")
CSV_SCHEMA = "mintloc-results-v1"
DEFAULT_CDF_GRID = tuple(np.round(np.arange(0.0, 2.0001, 0.05), 4))


class ConfigError(ValueError):
    pass


@dataclass
class ObstructionSpec:
    segments: list[WallSegment]
    attenuation_dB: float = 10.0

    def __post_init__(self):
        if self.attenuation_dB < 0:
            raise ConfigError("obstruction attenuation must be >= 0 dB")

    @property
    def amplitude_factor(self) -> float:
        return 10.0 ** (-self.attenuation_dB / 20.0)


def _box(x0, y0, x1, y1):
    return [
        [x0, y0, x1, y0], [x1, y0, x1, y1], [x1, y1, x0, y1], [x0, y1, x0, y0],
    ]


def default_plan_path() -> str:
    return str(resources.files("mintloc").joinpath("data/default_plan.txt"))


@dataclass
class ScenarioConfig:
    """Full experiment description. JSON keys match the field names."""

    plan_path: Optional[str] = None
    base_stations: Optional[list] = None
    waypoints: list = field(default_factory=lambda: [[2.5, 2.0], [21.5, 2.0], [21.5, 4.9]])
    spacing: float = 0.1
    dT: float = 0.1
    n_positions: Optional[int] = None  # truncate the trajectory (debug runs)
    pulses_ns: list = field(default_factory=lambda: [0.2, 0.5, 1.0, 2.0, 4.0])
    center_freq_ghz: list = field(default_factory=lambda: [6.85, 7.0, 7.0, 7.0, 7.0])
    rolloff: float = 0.5
    sigma_z2: list = field(default_factory=lambda: [0.01, 0.01, 0.04, 0.04, 0.09])
    dc: list = field(default_factory=lambda: [0.3, 0.3, 0.5, 0.5, 0.6])
    xi: list = field(default_factory=lambda: [0.4, 0.4, 0.3, 0.3, 0.3])
    gamma: float = 0.1
    K_max: int = 20
    searchback_ns: float = 100.0
    v_max: float = 1.5
    init_pos_std: float = 0.1
    init_vel_std: float = 1.0
    max_order: int = 2
    g0: float = 1.0
    eta: float = 0.6
    N0: float = 2e-6
    dm_power_ratio: float = 0.05  # DM energy relative to the unobstructed LOS energy
    dm_decay_ns: float = 20.0
    frame_t0_ns: float = -20.0
    frame_duration_ns: float = 250.0
    prelos_ns: float = 10.0
    obstruction: bool = True
    obstruction_segments: list = field(default_factory=lambda: _box(11.5, 2.6, 13.5, 3.6) + _box(11.5, 1.25, 13.5, 1.75))
    obstruction_attenuation_db: float = 10.0
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> ScenarioConfig:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        cfg = cls.from_dict(data)
        if cfg.plan_path and not Path(cfg.plan_path).is_absolute():
            cfg.plan_path = str((Path(path).parent / cfg.plan_path).resolve())
        return cfg

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def validate(self) -> None:
        n = len(self.pulses_ns)
        if n == 0:
            raise ConfigError("no pulse durations configured")
        for name in ("center_freq_ghz", "sigma_z2", "dc", "xi"):
            if len(getattr(self, name)) != n:
                raise ConfigError(f"{name} has {len(getattr(self, name))} entries for {n} pulse durations")
        if self.spacing <= 0 or self.dT <= 0:
            raise ConfigError("spacing and dT must be positive")
        if self.spacing / self.dT > self.v_max:
            raise ConfigError(f"trajectory speed {self.spacing / self.dT} m/s exceeds v_max {self.v_max} m/s")
        if any(v <= 0 for v in self.pulses_ns):
            raise ConfigError("pulse durations must be positive")
        if any(v <= 0 for v in self.dc) or any(v <= 0 for v in self.sigma_z2):
            raise ConfigError("dc and sigma_z2 must be positive")
        if any(not 0 < v < 1 for v in self.xi) or not 0 < self.gamma < 1:
            raise ConfigError("xi and gamma must lie in (0, 1)")
        if self.N0 < 0 or self.dm_power_ratio < 0 or self.dm_decay_ns <= 0:
            raise ConfigError("N0 and DM power must be >= 0, DM decay > 0")
        if self.prelos_ns <= 0 or self.prelos_ns > self.frame_duration_ns:
            raise ConfigError("pre-LOS window must lie inside the frame")
        if self.frame_t0_ns + self.prelos_ns > 0:
            raise ConfigError("pre-LOS window must end before delay 0")
        if self.K_max < 1 or self.max_order < 0:
            raise ConfigError("K_max >= 1 and max_order >= 0 required")
        if len(self.waypoints) < 2:
            raise ConfigError("need at least two waypoints")
        plan = self.floor_plan()
        if len(self.stations(plan)) == 0:
            raise ConfigError("no base stations configured")
        if not plan.reflective_indices:
            raise ConfigError("floor plan has no reflective wall")
        build_trajectory(self.waypoints, self.spacing)

    def floor_plan(self) -> FloorPlan:
        try:
            return load_floor_plan(self.plan_path or default_plan_path())
        except OSError as exc:
            raise ConfigError(f"cannot read floor plan: {exc}") from None

    def stations(self, plan: FloorPlan) -> list[Point2D]:
        if self.base_stations is not None:
            return [Point2D(float(b[0]), float(b[1])) for b in self.base_stations]
        return list(plan.base_stations)

    def obstruction_spec(self) -> ObstructionSpec:
        segs = [WallSegment(Point2D(*s[:2]), Point2D(*s[2:4]), False) for s in self.obstruction_segments]
        return ObstructionSpec(segs, self.obstruction_attenuation_db)

    def pulse(self, k: int) -> Pulse:
        return make_pulse(self.pulses_ns[k] * 1e-9, self.rolloff, self.center_freq_ghz[k] * 1e9)

    def tracker_config(self, k: int) -> TrackerConfig:
        model = MotionModel.constant_velocity(self.dT, sigma_a_from_vmax(self.v_max, self.dT))
        return TrackerConfig(self.pulse(k), model, self.sigma_z2[k], self.dc[k], self.xi[k], self.gamma,
                             self.K_max, self.searchback_ns * 1e-9, self.prelos_ns * 1e-9)


def build_trajectory(waypoints, spacing: float) -> list[Point2D]:
    """Points every ``spacing`` meters of arc length along the waypoint polyline.

    The last waypoint is included when the total length is a multiple of the
    spacing (within 1e-9 m).
    """
    if spacing <= 0:
        raise ConfigError("spacing must be positive")
    wp = np.asarray(waypoints, dtype=np.float64).reshape(-1, 2)
    seg = np.diff(wp, axis=0)
    lens = np.hypot(seg[:, 0], seg[:, 1])
    if np.any(lens == 0):
        raise ConfigError("duplicate consecutive waypoints")
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    n = int(math.floor(cum[-1] / spacing + 1e-9))
    s = np.arange(n + 1) * spacing
    out = []
    for si in s:
        j = min(int(np.searchsorted(cum, si, side="right")) - 1, len(lens) - 1)
        f = (si - cum[j]) / lens[j]
        p = wp[j] + f * seg[j]
        out.append(Point2D(float(p[0]), float(p[1])))
    return out


@dataclass
class Geometry:
    """Scenario geometry shared by all runs: VAs, trajectory and per-position visibility."""

    plan: FloorPlan
    bss: list[Point2D]
    tables: list[VaTable]
    trajectory: list[Point2D]
    visible: list[list[np.ndarray]]  # [position][bs] indices into tables[bs].vas (obstruction-free)
    blocked: list[list[np.ndarray]]  # [position][bs] bool over visible: path crosses the obstruction

    @classmethod
    def build(cls, config: ScenarioConfig) -> Geometry:
        plan = config.floor_plan().without_obstructions()
        bss = config.stations(config.floor_plan())
        tables, nid = [], 0
        for i, bs in enumerate(bss):
            vas = generate_vas(plan, bs, i, config.max_order, first_id=nid)
            nid += len(vas)
            tables.append(VaTable(vas))
        traj = build_trajectory(config.waypoints, config.spacing)
        if config.n_positions is not None:
            traj = traj[: config.n_positions]
        obstructed = plan.with_obstructions(config.obstruction_spec().segments)
        visible, blocked = [], []
        for p in traj:
            vrow, brow = [], []
            for t in tables:
                m = t.visible(p, plan)
                idx = np.nonzero(m)[0]
                mo = t.visible(p, obstructed)
                vrow.append(idx)
                brow.append(~mo[idx])
            visible.append(vrow)
            blocked.append(brow)
        return cls(plan, bss, tables, traj, visible, blocked)


def attenuate_blocked(mpcs: Sequence[Mpc], blocked: Sequence[bool], spec: ObstructionSpec) -> list[Mpc]:
    """Scale flagged paths so their energy, hence SINR, drops by ``spec.attenuation_dB``; phase kept."""
    a = spec.amplitude_factor
    return [Mpc(m.delay, m.amplitude * a, m.va_id) if b else m for m, b in zip(mpcs, blocked)]


def blocked_by(spec: ObstructionSpec, plan: FloorPlan, position, vas) -> np.ndarray:
    """Per anchor: visible in ``plan`` but not once the obstruction segments are added."""
    table = vas if isinstance(vas, VaTable) else VaTable(list(vas))
    base = plan.without_obstructions()
    return table.visible(position, base) & ~table.visible(position, base.with_obstructions(spec.segments))


def apply_obstruction(mpcs: Sequence[Mpc], plan: FloorPlan, spec: ObstructionSpec, position, vas) -> list[Mpc]:
    """Attenuate every MPC whose path the obstruction blocks at ``position``.

    ``vas`` supplies the anchors referenced by ``Mpc.va_id``; MPCs without an
    anchor id are left alone. Returns the input list unchanged when nothing is
    blocked.
    """
    vas = list(vas.vas if isinstance(vas, VaTable) else vas)
    blk = blocked_by(spec, plan, position, vas)
    hit = {va.id for va, b in zip(vas, blk) if b}
    if not any(m.va_id in hit for m in mpcs):
        return list(mpcs)
    return attenuate_blocked(mpcs, [m.va_id in hit for m in mpcs], spec)


def apply_obstruction_frame(frame: SignalFrame, pulse: Pulse, est: MpcEstimateSet, blocked_delays: Sequence[float],
                            spec: ObstructionSpec) -> SignalFrame:
    """Signal-level obstruction for measured frames.

    For each blocked path delay, the nearest extracted component (within one
    pulse duration) is subtracted and added back scaled, keeping its phase.
    """
    out = frame.samples.copy()
    t = frame.times
    Tp = pulse.duration_Tp
    taken = set()
    for tau in blocked_delays:
        if not est.delays:
            break
        k = int(np.argmin([abs(d - tau) for d in est.delays]))
        if k in taken or abs(est.delays[k] - tau) > Tp:
            continue
        taken.add(k)
        d = est.delays[k]
        s = pulse(t - d)
        alpha = complex(np.dot(out, s) / np.dot(s, s))
        out += (spec.amplitude_factor - 1.0) * alpha * s
    return replace(frame, samples=out)


@dataclass
class PairMeasurement:
    """What the trackers see of one (position, BS) frame."""

    est: MpcEstimateSet
    jbsf: Optional[float]


def pair_channel(config: ScenarioConfig, geo: Geometry, li: int, i: int, obstructed: bool, pulse: Pulse, seed: int,
             tp_key: int):
    """MPC list and DM model of one (position, BS) pair, plus the noise RNG."""
    p = geo.trajectory[li]
    bs = geo.bss[i]
    table = geo.tables[i]
    idx = geo.visible[li][i]
    amp = AmplitudeModel(config.g0, config.eta)
    phase_rng = make_rng((seed, li, i))
    t_end = (config.frame_t0_ns + config.frame_duration_ns) * 1e-9 - 8 * pulse.duration_Tp
    mpcs = []
    keep = []
    for j in idx:
        va = table.vas[j]
        d = math.hypot(p.x - va.position.x, p.y - va.position.y)
        alpha = amp(d, va.order, phase_rng)
        tau = d / SPEED_OF_LIGHT
        if tau < t_end:
            mpcs.append(Mpc(tau, alpha, va.id))
            keep.append(True)
        else:
            keep.append(False)
    if obstructed:
        blk = [b for b, k in zip(geo.blocked[li][i], keep) if k]
        mpcs = attenuate_blocked(mpcs, blk, config.obstruction_spec())
    d_los = max(math.dist(p, bs), 1e-3)
    dm = DiffuseModel(d_los / SPEED_OF_LIGHT, config.dm_power_ratio * (config.g0 / d_los) ** 2,
                      config.dm_decay_ns * 1e-9)
    return mpcs, dm, make_rng((seed, li, i, 1000 + tp_key))


def pair_frame(config: ScenarioConfig, geo: Geometry, li: int, i: int, k: int, obstructed: bool,
               seed: int) -> SignalFrame:
    pulse = config.pulse(k)
    mpcs, dm, rng = pair_channel(config, geo, li, i, obstructed, pulse, seed, k)
    return synthesize(mpcs, dm, config.N0, pulse, config.frame_duration_ns * 1e-9, rng,
                      config.frame_t0_ns * 1e-9, li, i)


def simulate_measurements(config: ScenarioConfig, geo: Geometry, k: int, obstructed: bool,
                          seed: int) -> list[list[PairMeasurement]]:
    """Synthesize, extract and range every (position, BS) frame for pulse ``k``."""
    tc = config.tracker_config(k)
    out = []
    for li in range(len(geo.trajectory)):
        row = []
        for i in range(len(geo.bss)):
            frame = pair_frame(config, geo, li, i, k, obstructed, seed)
            est = tc.extract(frame)
            jb = jbsf_range(frame, tc.xi, tc.searchback, tc.prelos_window).distance
            row.append(PairMeasurement(est, jb))
        out.append(row)
    return out


@dataclass
class MetricsRecord:
    tracker: str
    Tp_ns: float
    obstructed: bool
    seed: int
    true_positions: np.ndarray
    est_positions: np.ndarray
    errors: np.ndarray
    hdop: np.ndarray  # nan where undefined
    n_assoc: np.ndarray  # [position, bs]: associated MPCs (MINT) or ranges used (EKF)
    ranging_errors: np.ndarray  # all used range errors (meters)
    runtime_s: float = 0.0

    @property
    def rmse(self) -> float:
        return float(np.sqrt(np.mean(self.errors ** 2)))

    @property
    def mean_hdop(self) -> float:
        h = self.hdop[np.isfinite(self.hdop)]
        return float(np.mean(h)) if h.size else math.nan

    @property
    def mean_assoc(self) -> float:
        """Mean over positions of the total number of associated MPCs (all BSs)."""
        return float(np.mean(self.n_assoc.sum(axis=1)))

    def ranging_cdf(self, grid=DEFAULT_CDF_GRID) -> np.ndarray:
        if self.ranging_errors.size == 0:
            return np.full(len(grid), math.nan)
        return ranging_error_cdf(np.abs(self.ranging_errors), grid)


def ranging_error_cdf(errors: Sequence[float], grid: Sequence[float]) -> np.ndarray:
    """Empirical CDF ``P(error <= g)`` on an ascending grid."""
    e = np.sort(np.asarray(errors, dtype=np.float64))
    if e.size == 0:
        raise ValueError("no ranging errors")
    g = np.asarray(grid, dtype=np.float64)
    if np.any(np.diff(g) < 0):
        raise ValueError("grid must be ascending")
    return np.searchsorted(e, g, side="right") / e.size


def run_tracker(tracker: str, meas: list[list[PairMeasurement]], geo: Geometry, tc: TrackerConfig,
                config: ScenarioConfig, Tp_ns: float, obstructed: bool, seed: int) -> MetricsRecord:
    t_start = time.perf_counter()
    traj = geo.trajectory
    n, nb = len(traj), len(geo.bss)
    state = TrackerState.initial(traj[0], config.init_pos_std, config.init_vel_std)
    est_pos = np.zeros((n, 2))
    hd = np.full(n, math.nan)
    n_assoc = np.zeros((n, nb), dtype=np.int64)
    rerrs: list[float] = []
    bss_arr = np.array(geo.bss)
    for li, p in enumerate(traj):
        row = meas[li]
        errs_here: list[float] = []
        if tracker in ("EKF-ML", "EKF-JBSF"):
            ranges = []
            for pm in row:
                if tracker == "EKF-JBSF":
                    ranges.append(pm.jbsf)
                else:
                    try:
                        ranges.append(ml_range(pm.est).distance)
                    except RangingOutage:
                        ranges.append(None)
            state = step_with_ranges(state, geo.bss, ranges, tc)
            for i, r in enumerate(ranges):
                if r is not None:
                    n_assoc[li, i] = 1
                    errs_here.append(r - math.hypot(p.x - bss_arr[i, 0], p.y - bss_arr[i, 1]))
        else:
            mode = "GADA" if tracker == "MINT-GADA" else "DA"
            state, corrs = step_mint_from_estimates(state, [pm.est for pm in row], geo.tables, geo.plan, tc,
                                                    mode, p, li)
            for i, (pm, corr) in enumerate(zip(row, corrs)):
                n_assoc[li, i] = len(corr.assignments)
                errs_here.extend(_assoc_errors(pm.est, corr, p))
        est_pos[li] = state.mean_x[:2]
        err = math.hypot(state.mean_x[0] - p.x, state.mean_x[1] - p.y)
        if errs_here:
            rms = math.sqrt(sum(e * e for e in errs_here) / len(errs_here))
            if rms > 0:
                hd[li] = err / rms
        rerrs.extend(errs_here)
    true = np.array(traj, dtype=np.float64)
    errors = np.hypot(est_pos[:, 0] - true[:, 0], est_pos[:, 1] - true[:, 1])
    return MetricsRecord(tracker, Tp_ns, obstructed, seed, true, est_pos, errors, hd, n_assoc,
                         np.array(rerrs), time.perf_counter() - t_start)


def _assoc_errors(est: MpcEstimateSet, corr: Correspondences, p: Point2D) -> list[float]:
    pos_of = {va.id: va.position for va in corr.expected.vas}
    Z = est.distances()
    out = []
    for mi, va_id in corr.assignments:
        a = pos_of[va_id]
        out.append(float(Z[mi]) - math.hypot(p.x - a.x, p.y - a.y))
    return out


def run_combination(config: ScenarioConfig, k: int, obstructed: bool, trackers: Sequence[str] = TRACKERS,
                    seed: Optional[int] = None, geo: Optional[Geometry] = None) -> list[MetricsRecord]:
    """All requested trackers for one (pulse, obstruction) pair, sharing one set of frames."""
    seed = config.seed if seed is None else seed
    geo = geo or Geometry.build(config)
    meas = simulate_measurements(config, geo, k, obstructed, seed)
    tc = config.tracker_config(k)
    return [run_tracker(t, meas, geo, tc, config, config.pulses_ns[k], obstructed, seed) for t in trackers]


def _combo_job(args):
    config, k, obstructed, trackers, seed = args
    return run_combination(config, k, obstructed, trackers, seed)


def run_scenario(config: ScenarioConfig, trackers: Sequence[str] = TRACKERS, pulses: Optional[Sequence[float]] = None,
                 obstruction: Optional[Sequence[bool]] = None, seed: Optional[int] = None,
                 workers: int = 1) -> list[MetricsRecord]:
    """Run every (tracker, Tp, obstruction) combination; records come back in a fixed order.

    By default the obstruction is run both off and on when ``config.obstruction``
    is set, otherwise off only.
    """
    config.validate()
    if obstruction is None:
        obstruction = (False, True) if config.obstruction else (False,)
    bad = [t for t in trackers if t not in TRACKERS]
    if bad:
        raise ConfigError(f"unknown tracker(s) {bad}; choose from {TRACKERS}")
    if pulses is None:
        ks = list(range(len(config.pulses_ns)))
    else:
        ks = []
        for tp in pulses:
            match = [k for k, v in enumerate(config.pulses_ns) if abs(v - tp) < 1e-9]
            if not match:
                raise ConfigError(f"pulse {tp} ns not in config {config.pulses_ns}")
            ks.append(match[0])
    seed = config.seed if seed is None else seed
    jobs = [(config, k, obs, tuple(trackers), seed) for k in ks for obs in obstruction]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_combo_job, jobs))
    else:
        geo = Geometry.build(config)
        results = [run_combination(c, k, obs, tr, s, geo) for c, k, obs, tr, s in jobs]
    records = [r for rs in results for r in rs]
    for r in records:
        log.info("%-9s Tp=%.1f ns obstruction=%s  RMSE=%.3f m  HDOP=%.2f  assoc=%.1f", r.tracker, r.Tp_ns,
                 r.obstructed, r.rmse, r.mean_hdop, r.mean_assoc)
    return records


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.9g}"


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def write_results(records: Sequence[MetricsRecord], outdir, grid=DEFAULT_CDF_GRID) -> list[Path]:
    """Write ``summary.csv``, ``trace.csv`` and ``ranging_cdf.csv``; returns the paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    summary = csv_text(
        ["tracker", "Tp_ns", "obstructed", "seed", "rmse_m", "mean_hdop", "mean_assoc", "n_positions"],
        ([r.tracker, r.Tp_ns, r.obstructed, r.seed, r.rmse, r.mean_hdop, r.mean_assoc, len(r.errors)]
         for r in records),
    )
    nb = records[0].n_assoc.shape[1] if records else 0
    trace_rows = []
    for r in records:
        for li in range(len(r.errors)):
            trace_rows.append([r.tracker, r.Tp_ns, r.obstructed, r.seed, li, *r.true_positions[li],
                               *r.est_positions[li], r.errors[li], r.hdop[li], *r.n_assoc[li]])
    trace = csv_text(
        ["tracker", "Tp_ns", "obstructed", "seed", "position_index", "true_x", "true_y", "est_x", "est_y",
         "error_m", "hdop"] + [f"n_assoc_bs{i}" for i in range(nb)],
        trace_rows,
    )
    cdf = csv_text(
        ["tracker", "Tp_ns", "obstructed", "seed"] + [f"le_{g:g}" for g in grid],
        ([r.tracker, r.Tp_ns, r.obstructed, r.seed, *r.ranging_cdf(grid)] for r in records),
    )
    paths = []
    for name, text in (("summary.csv", summary), ("trace.csv", trace), ("ranging_cdf.csv", cdf)):
        p = out / name
        p.write_text(text)
        paths.append(p)
    return paths
