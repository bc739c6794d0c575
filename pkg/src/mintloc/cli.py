"""Command line interface: ``mintloc {run,vas,crlb,range-test}``."""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .bounds import MpcSinr, UnboundedCrlb, effective_bandwidth, efim, position_crlb, sinr
from .constants import SPEED_OF_LIGHT
from .estimation import (
    RangingOutage, estimate_klos, extract_mpcs, jbsf_range, ml_range, noise_threshold,
)
from .geometry import GeometryError, generate_vas, load_floor_plan, path_angle
from .harness import (
    TRACKERS, ConfigError, Geometry, ScenarioConfig, csv_text, default_plan_path, pair_channel, pair_frame,
    run_scenario, write_results,
)
from .waveform import WaveformError, load_frame

log = logging.getLogger("mintloc")


def _load_config(path) -> ScenarioConfig:
    cfg = ScenarioConfig.load(path) if path else ScenarioConfig()
    cfg.validate()
    return cfg


def _pulse_index(cfg: ScenarioConfig, tp_ns: float) -> int:
    for k, v in enumerate(cfg.pulses_ns):
        if abs(v - tp_ns) < 1e-9:
            return k
    raise ConfigError(f"pulse {tp_ns} ns not in config {cfg.pulses_ns}")


def _write(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    trackers = args.trackers.split(",") if args.trackers else list(TRACKERS)
    pulses = [float(p) for p in args.pulses.split(",")] if args.pulses else None
    obs = {"off": (False,), "on": (True,), "both": (False, True), None: None}[args.obstruction]
    records = run_scenario(cfg, trackers, pulses, obs, args.seed, args.workers)
    for p in write_results(records, args.out):
        log.info("wrote %s", p)
    return 0


def cmd_vas(args) -> int:
    if args.config:
        cfg = _load_config(args.config)
        plan = cfg.floor_plan()
        bss = cfg.stations(plan)
        order = cfg.max_order if args.max_order is None else args.max_order
    else:
        plan = load_floor_plan(args.plan or default_plan_path())
        bss, order = list(plan.base_stations), args.max_order if args.max_order is not None else 2
    rows, nid = [], 0
    for i, bs in enumerate(bss):
        vas = generate_vas(plan, bs, i, order, first_id=nid)
        nid += len(vas)
        for va in vas:
            rows.append([va.id, va.bs_id, va.order, va.position.x, va.position.y,
                         " ".join(str(w) for w in va.mirror_walls) or "-"])
    _write(csv_text(["va_id", "bs_id", "order", "x", "y", "mirror_walls"], rows), args.out)
    return 0


def cmd_crlb(args) -> int:
    """Position error bound along the trajectory from the configured channel model."""
    cfg = _load_config(args.config)
    k = _pulse_index(cfg, args.pulse)
    pulse = cfg.pulse(k)
    beta = effective_bandwidth(pulse)
    geo = Geometry.build(cfg)
    rows = []
    for li, p in enumerate(geo.trajectory):
        terms = []
        for i in range(len(geo.bss)):
            mpcs, dm, _ = pair_channel(cfg, geo, li, i, args.obstruction, pulse, cfg.seed, k)
            pos_of = {va.id: va.position for va in geo.tables[i].vas}
            for m in mpcs:
                s = sinr(m.amplitude, cfg.N0, pulse.duration_Tp, float(dm.pdp(m.delay)))
                terms.append(MpcSinr(m.va_id, s, path_angle(pos_of[m.va_id], p)))
        try:
            c = position_crlb(efim(terms, beta))
            vals = [c.trace, math.sqrt(c.trace), c.var_x, c.var_y]
        except UnboundedCrlb:
            vals = [math.inf] * 4
        rows.append([li, p.x, p.y, len(terms), *vals])
    _write(csv_text(["position_index", "x", "y", "n_paths", "crlb_trace_m2", "peb_m", "var_x_m2", "var_y_m2"],
                     rows), args.out)
    return 0


def cmd_range_test(args) -> int:
    """Extract paths from one frame and dump them with the ML/JBSF ranges."""
    cfg = _load_config(args.config)
    k = _pulse_index(cfg, args.pulse)
    tc = cfg.tracker_config(k)
    truth = None
    if args.frame:
        frame = load_frame(args.frame)
        window = tc.prelos_window if args.prelos is None else args.prelos * 1e-9
    else:
        geo = Geometry.build(cfg)
        if not 0 <= args.position < len(geo.trajectory) or not 0 <= args.bs < len(geo.bss):
            raise ConfigError("position or BS index out of range")
        frame = pair_frame(cfg, geo, args.position, args.bs, k, args.obstruction, cfg.seed)
        truth = math.dist(geo.trajectory[args.position], geo.bss[args.bs])
        window = tc.prelos_window
    thr = noise_threshold(frame, tc.gamma, window)
    est = extract_mpcs(frame, tc.pulse, tc.K_max, thr)
    lines = [f"# threshold={thr:.6g}", f"# K_LOS_dB={estimate_klos(frame, tc.pulse, window, tc.gamma, tc.K_max, est):.3f}"]
    try:
        lines.append(f"# ml_range_m={ml_range(est).distance:.6f}")
    except RangingOutage:
        lines.append("# ml_range_m=nan")
    lines.append(f"# jbsf_range_m={jbsf_range(frame, tc.xi, tc.searchback, window).distance:.6f}")
    if truth is not None:
        lines.append(f"# true_range_m={truth:.6f}")
    rows = [[j, d, d * SPEED_OF_LIGHT, abs(a), float(np.angle(a))] for j, (d, a) in
            enumerate(zip(est.delays, est.amplitudes))]
    body = csv_text(["k", "delay_s", "distance_m", "abs_amplitude", "phase_rad"], rows)
    _write("\n".join(lines) + "\n" + body, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mintloc", description="Multipath-assisted UWB tracking simulator.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the tracker / pulse / obstruction sweep")
    p.add_argument("--config", help="scenario JSON (defaults built in)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trackers", help=f"comma list from {','.join(TRACKERS)}")
    p.add_argument("--pulses", help="comma list of pulse durations in ns")
    p.add_argument("--obstruction", choices=["off", "on", "both"], default=None,
                   help="default: both when the config enables the obstruction, else off")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("vas", help="dump the virtual anchor table")
    p.add_argument("--plan", help="floor plan file")
    p.add_argument("--config", help="take plan, BSs and order from a scenario JSON")
    p.add_argument("--max-order", type=int, default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_vas)

    p = sub.add_parser("crlb", help="position error bound along the trajectory")
    p.add_argument("--config")
    p.add_argument("--pulse", type=float, default=0.5, help="pulse duration in ns")
    p.add_argument("--obstruction", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_crlb)

    p = sub.add_parser("range-test", help="single-frame extraction and ranging dump")
    p.add_argument("--config")
    p.add_argument("--pulse", type=float, default=0.5, help="pulse duration in ns")
    p.add_argument("--position", type=int, default=0)
    p.add_argument("--bs", type=int, default=0)
    p.add_argument("--obstruction", action="store_true")
    p.add_argument("--frame", help="frame file instead of a synthetic frame")
    p.add_argument("--prelos", type=float, default=None, help="pre-LOS window length in ns (frame files)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_range_test)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, GeometryError, WaveformError, OSError) as exc:
        print(f"mintloc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
