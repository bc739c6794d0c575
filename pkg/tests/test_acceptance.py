"""End-to-end acceptance checks; each test prints one PASS/FAIL line.

The sweep-based checks share one fixture that runs the ``run`` command for
ten seeds on the default scenario, so the slow part is paid once.
"""
from __future__ import annotations

import csv
import io
import math
import os
import time
from collections import defaultdict

import numpy as np
import pytest

from oracles import brute_force_min_cost, enumerate_vas
from mintloc.association import AssociationProblem, assign, cost_matrix
from mintloc.bounds import effective_bandwidth, ranging_crlb
from mintloc.cli import main
from mintloc.constants import SPEED_OF_LIGHT
from mintloc.estimation import estimate_klos, extract_mpcs
from mintloc.geometry import FloorPlan, Point2D, WallSegment, generate_vas
from mintloc.harness import Geometry, ScenarioConfig, pair_frame
from mintloc.waveform import NO_DM, Mpc, make_pulse, synthesize

SEEDS = range(10)
PULSES = (0.2, 0.5, 1.0, 2.0, 4.0)
slow = pytest.mark.slow


def test_assignment_optimality(acceptance):
    rng = np.random.default_rng(2024)
    problems = []
    for _ in range(1000):
        k, kh = int(rng.integers(1, 8)), int(rng.integers(0, 10))
        D = list(enumerate(rng.uniform(0, 10, k)))
        Z = list(rng.uniform(0, 10, kh))
        problems.append(AssociationProblem(Z, D, float(rng.uniform(0.2, 2.0))))
    t0 = time.perf_counter()
    results = [assign(p) for p in problems]
    elapsed = time.perf_counter() - t0
    mismatches = sum(r.total_cost != brute_force_min_cost(cost_matrix(p)) for p, r in zip(problems, results))
    ok = mismatches == 0 and elapsed < 5.0
    assert acceptance(1, ok, f"{1000 - mismatches}/1000 exact matches, assign runtime {elapsed:.2f} s")


def _random_plan(rng):
    walls = []
    n = int(rng.integers(3, 9))
    while len(walls) < n:
        a, b = rng.uniform(0, 10, 2), rng.uniform(0, 10, 2)
        if np.hypot(*(a - b)) > 0.5:
            walls.append(WallSegment(Point2D(*a), Point2D(*b)))
    return FloorPlan(walls)


def test_geometry_oracle(acceptance):
    rng = np.random.default_rng(7)
    bad = []
    for n in range(20):
        plan = _random_plan(rng)
        bs = tuple(rng.uniform(0, 10, 2))
        vas = generate_vas(plan, bs, 0, 2)
        ref = enumerate_vas([(w.endpoint_a, w.endpoint_b) for w in plan.walls], bs, 2)
        got = [(complex(*va.position), va.order) for va in vas]
        same = len(got) == len(ref) and all(
            [o for q, o in ref if abs(q - z) <= 1e-9] == [order] for z, order in got)
        if not same:
            bad.append(n)
    assert acceptance(2, not bad, f"{20 - len(bad)}/20 plans match the enumeration oracle to 1e-9 m")


def test_estimation_round_trip(acceptance):
    rng = np.random.default_rng(11)
    worst_d, worst_a, failures = 0.0, 0.0, 0
    for n in range(100):
        p = make_pulse(PULSES[n % len(PULSES)] * 1e-9)
        Tp = p.duration_Tp
        k = int(rng.integers(1, 21))
        gaps = 16 * Tp + rng.uniform(0, 4 * Tp, k)
        delays = 10 * Tp + np.cumsum(gaps)
        amps = rng.uniform(0.1, 1.0, k) * np.exp(2j * np.pi * rng.random(k))
        fr = synthesize([Mpc(d, a) for d, a in zip(delays, amps)], NO_DM, 0.0, p, delays[-1] + 10 * Tp)
        est = extract_mpcs(fr, p, k, 0.0)
        if len(est) != k:
            failures += 1
            continue
        dd = np.max(np.abs(np.array(est.delays) - delays)) / p.sample_interval_dtau
        da = np.max(np.abs(np.array(est.amplitudes) - amps) / np.abs(amps))
        worst_d, worst_a = max(worst_d, dd), max(worst_a, da)
        failures += dd > 1 or da > 1e-3
    ok = failures == 0
    assert acceptance(3, ok, f"{100 - failures}/100 channels; worst delay error {worst_d:.3f} dtau, "
                             f"worst relative amplitude error {worst_a:.2e}")


def test_crlb_consistency(acceptance):
    t0 = time.perf_counter()
    p = make_pulse(0.5e-9)
    beta = effective_bandwidth(p)
    ratios = {}
    for snr_db in (25, 35):
        snr = 10 ** (snr_db / 10)
        rng = np.random.default_rng(snr_db)
        err = []
        for trial in range(500):
            tau = 20e-9 + rng.uniform(0, p.sample_interval_dtau)
            fr = synthesize([Mpc(tau, np.exp(2j * np.pi * rng.random()))], NO_DM, 1 / snr, p, 40e-9,
                            (snr_db, trial))
            err.append(extract_mpcs(fr, p, 1, 0.0).delays[0] - tau)
        bound = ranging_crlb(snr, beta) / SPEED_OF_LIGHT ** 2
        ratios[snr_db] = 10 * math.log10(np.var(err) / bound)
    elapsed = time.perf_counter() - t0
    ok = all(abs(r) <= 3.0 for r in ratios.values()) and elapsed < 60
    detail = ", ".join(f"{s} dB SNR: {r:+.2f} dB from the bound" for s, r in ratios.items())
    assert acceptance(4, ok, f"{detail}; {elapsed:.1f} s")


def _read_summary(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


@pytest.fixture(scope="module")
def sweep(tmp_path_factory):
    """Full default sweep through the ``run`` command, one output directory per seed."""
    root = tmp_path_factory.mktemp("sweep")
    workers = str(os.cpu_count() or 1)
    stats = defaultdict(list)  # (tracker, Tp, obstructed) -> [(rmse, mean_hdop)] over seeds
    timing = None
    for seed in SEEDS:
        t0 = time.perf_counter()
        assert main(["run", "--out", str(root / f"seed{seed}"), "--seed", str(seed), "--workers", workers]) == 0
        if timing is None:
            timing = time.perf_counter() - t0
        for row in _read_summary(root / f"seed{seed}" / "summary.csv"):
            key = (row["tracker"], float(row["Tp_ns"]), row["obstructed"] == "1")
            stats[key].append((float(row["rmse_m"]), float(row["mean_hdop"])))
    return {"root": root, "stats": stats, "seconds": timing, "workers": workers}


def _median_rmse(stats, tracker, tp, obstructed=False):
    return float(np.median([r for r, _ in stats[(tracker, tp, obstructed)]]))


@slow
def test_trend_reproduction(sweep, acceptance):
    st = sweep["stats"]
    gada = [_median_rmse(st, "MINT-GADA", tp) for tp in PULSES]
    monotone = all(b >= a for a, b in zip(gada, gada[1:]))
    g, ml, jb = (_median_rmse(st, t, 0.5) for t in ("MINT-GADA", "EKF-ML", "EKF-JBSF"))
    ok = monotone and g < ml < jb
    curve = " ".join(f"{v:.3f}" for v in gada)
    assert acceptance(5, ok, f"MINT-GADA median RMSE over Tp [{curve}] m; at 0.5 ns GADA {g:.3f} < ML {ml:.3f} "
                             f"< JBSF {jb:.3f} m")


@slow
def test_robustness_reproduction(sweep, acceptance):
    st = sweep["stats"]
    inc = {t: _median_rmse(st, t, 0.5, True) / _median_rmse(st, t, 0.5, False) - 1 for t in ("MINT-GADA", "EKF-JBSF")}
    ok = inc["MINT-GADA"] < 0.15 and inc["EKF-JBSF"] > 0.30
    assert acceptance(6, ok, f"RMSE increase under obstruction: MINT-GADA {100 * inc['MINT-GADA']:.1f}%, "
                             f"EKF-JBSF {100 * inc['EKF-JBSF']:.1f}%")


@slow
def test_hdop_ordering(sweep, acceptance):
    st = sweep["stats"]
    mean = lambda t: float(np.mean([h for tp in PULSES for _, h in st[(t, tp, False)]]))  # noqa: E731
    g, ml = mean("MINT-GADA"), mean("EKF-ML")
    assert acceptance(7, g < ml, f"average HDOP MINT-GADA {g:.2f} < EKF-ML {ml:.2f}")


@slow
def test_obstruction_calibration(acceptance):
    cfg = ScenarioConfig()
    geo = Geometry.build(cfg)
    k = cfg.pulses_ns.index(0.5)
    tc = cfg.tracker_config(k)
    pairs = [(li, i) for li in range(len(geo.trajectory)) for i in range(len(geo.bss))
             if len(geo.visible[li][i]) and geo.tables[i].vas[geo.visible[li][i][0]].order == 0
             and geo.blocked[li][i][0]]
    drops = []
    seed = 0
    while len(drops) < 200:
        for li, i in pairs[: 200 - len(drops)]:
            clear = estimate_klos(pair_frame(cfg, geo, li, i, k, False, seed), tc.pulse, tc.prelos_window)
            blocked = estimate_klos(pair_frame(cfg, geo, li, i, k, True, seed), tc.pulse, tc.prelos_window)
            drops.append(clear - blocked)
        seed += 1
    m = float(np.mean(drops))
    ok = abs(m - 10.0) <= 1.0
    assert acceptance(8, ok, f"mean K_LOS drop {m:.2f} dB (std {np.std(drops):.2f}) over {len(drops)} frames")


@slow
def test_determinism(sweep, tmp_path, acceptance):
    first = sweep["root"] / f"seed{SEEDS[0]}"
    again = tmp_path / "again"
    assert main(["run", "--out", str(again), "--seed", str(SEEDS[0]), "--workers", sweep["workers"]]) == 0
    names = ("summary.csv", "trace.csv", "ranging_cdf.csv")
    same = [(first / n).read_bytes() == (again / n).read_bytes() for n in names]
    assert acceptance(9, all(same), f"{sum(same)}/{len(names)} output files byte-identical")


@slow
def test_full_sweep_runtime(sweep, acceptance):
    s = sweep["seconds"]
    assert acceptance(10, s < 600, f"full default sweep in {s:.1f} s with {sweep['workers']} worker(s)")
