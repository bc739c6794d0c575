from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import room
from oracles import rc_rms_bandwidth
from mintloc.bounds import (
    Efim, MpcSinr, UnboundedCrlb, effective_bandwidth, efim, hdop, position_crlb, position_sinrs, ranging_crlb,
    ranging_direction_matrix, separability_violations, sinr,
)
from mintloc.constants import SPEED_OF_LIGHT
from mintloc.geometry import expected_visible_set, generate_vas
from mintloc.harness import ObstructionSpec
from mintloc.waveform import DiffuseModel, make_pulse

C = SPEED_OF_LIGHT


class TestSinr:
    def test_values(self):
        assert sinr(1.0, 1e-9, 1e-9, 0.0) == pytest.approx(1e9)
        assert sinr(1.0, 0.5, 1.0, 0.5) == pytest.approx(1.0)
        assert sinr(2j, 1.0, 0.0, 7.0) == pytest.approx(4.0)

    def test_infinite(self):
        with pytest.raises(ZeroDivisionError):
            sinr(1.0, 0.0, 1e-9, 0.0)

    def test_obstruction_costs_exactly_its_attenuation(self):
        f = ObstructionSpec([], 10.0).amplitude_factor
        a = 0.3 - 0.2j
        ratio = sinr(a, 1e-6, 1e-9, 2.0) / sinr(a * f, 1e-6, 1e-9, 2.0)
        assert 10 * math.log10(ratio) == pytest.approx(10.0, abs=1e-12)

    def test_position_sinrs_use_dm_profile(self):
        plan = room(0, 0, 10, 8)
        vas = generate_vas(plan, (1, 1), 0, 1)
        vis = expected_visible_set((4, 3), 0, vas, plan)
        amps = [1.0] * len(vis.vas)
        clean = position_sinrs(vis, amps, 1e-6, 1e-9)
        assert [m.sinr for m in clean] == pytest.approx([1e6] * len(amps))
        dm = DiffuseModel(vis.distances[0] / C, 1e-3, 20e-9)
        dirty = position_sinrs(vis, amps, 1e-6, 1e-9, dm)
        assert dirty[0].sinr == pytest.approx(1.0 / (1e-6 + 1e-9 * 1e-3 / 20e-9))
        assert all(d.sinr < c.sinr for d, c in zip(dirty, clean))
        assert [m.va_id for m in dirty] == [va.id for va in vis.vas]


class TestDirectionMatrix:
    @pytest.mark.parametrize("phi,expected", [(0.0, [[1, 0], [0, 0]]), (math.pi / 2, [[0, 0], [0, 1]]),
                                              (math.pi / 4, [[0.5, 0.5], [0.5, 0.5]])])
    def test_examples(self, phi, expected):
        np.testing.assert_allclose(ranging_direction_matrix(phi), expected, atol=1e-15)

    @given(st.floats(-10, 10))
    def test_projector(self, phi):
        J = ranging_direction_matrix(phi)
        np.testing.assert_allclose(J @ J, J, atol=1e-12)
        assert np.trace(J) == pytest.approx(1.0)
        assert np.array_equal(J, J.T)
        assert np.linalg.matrix_rank(J, tol=1e-9) == 1


class TestEfim:
    def test_term_by_term(self):
        rng = np.random.default_rng(0)
        beta = 1.3e9
        for _ in range(20):
            k = int(rng.integers(1, 8))
            mpcs = [MpcSinr(i, float(rng.uniform(1, 1e4)), float(rng.uniform(-math.pi, math.pi))) for i in range(k)]
            ref = np.zeros((2, 2))
            for m in mpcs:
                u = np.array([math.cos(m.angle_phi), math.sin(m.angle_phi)])
                ref += 8 * math.pi ** 2 * beta ** 2 / C ** 2 * m.sinr * np.outer(u, u)
            np.testing.assert_allclose(efim(mpcs, beta).matrix_J, ref, rtol=1e-12)

    @given(st.integers(0, 10_000))
    def test_additive(self, seed):
        rng = np.random.default_rng(seed)
        mk = lambda n: [MpcSinr(None, float(rng.uniform(0.1, 100)), float(rng.uniform(0, 6.3))) for _ in range(n)]  # noqa: E731
        a, b = mk(int(rng.integers(0, 5))), mk(int(rng.integers(0, 5)))
        np.testing.assert_allclose(efim(a + b, 1e9).matrix_J, efim(a, 1e9).matrix_J + efim(b, 1e9).matrix_J,
                                   rtol=1e-12, atol=1e-30)

    def test_orthogonal_closed_form(self):
        beta, s = 1e9, 1000.0
        crlb = position_crlb(efim([MpcSinr(0, s, 0.0), MpcSinr(1, s, math.pi / 2)], beta))
        assert crlb.trace == pytest.approx(2 * C ** 2 / (8 * math.pi ** 2 * beta ** 2 * s))
        assert crlb.var_x == pytest.approx(ranging_crlb(s, beta))
        assert crlb.var_y == pytest.approx(crlb.var_x)

    def test_rank_one_unbounded(self):
        with pytest.raises(UnboundedCrlb):
            position_crlb(efim([MpcSinr(0, 100.0, 0.3), MpcSinr(1, 50.0, 0.3 + math.pi)], 1e9))
        with pytest.raises(UnboundedCrlb):
            position_crlb(efim([], 1e9))
        with pytest.raises(UnboundedCrlb):
            position_crlb(Efim(np.full((2, 2), np.nan), 1e9))

    @given(st.integers(0, 10_000))
    def test_sinr_scaling(self, seed):
        rng = np.random.default_rng(seed)
        mpcs = [MpcSinr(None, float(rng.uniform(1, 100)), float(a)) for a in rng.uniform(0, 6.3, 4)]
        scaled = [MpcSinr(None, 10 * m.sinr, m.angle_phi) for m in mpcs]
        try:
            t1 = position_crlb(efim(mpcs, 1e9)).trace
        except UnboundedCrlb:
            return
        assert position_crlb(efim(scaled, 1e9)).trace == pytest.approx(t1 / 10, rel=1e-9)

    def test_extra_path_never_hurts(self):
        base = [MpcSinr(0, 10.0, 0.1), MpcSinr(1, 10.0, 1.7)]
        t0 = position_crlb(efim(base, 1e9)).trace
        t1 = position_crlb(efim(base + [MpcSinr(2, 1.0, 2.5)], 1e9)).trace
        assert t1 < t0


class TestHdop:
    def test_values(self):
        assert hdop(0.2, 0.1) == pytest.approx(2.0)
        assert hdop(0.0, 0.5) == 0.0
        assert hdop(0.2, 0.0) is None
        assert hdop(0.2, float("nan")) is None


class TestEffectiveBandwidth:
    @pytest.mark.parametrize("Tp", [0.2e-9, 0.5e-9, 1e-9, 2e-9, 4e-9])
    def test_matches_quadrature(self, Tp):
        beta = effective_bandwidth(make_pulse(Tp, 0.5))
        assert beta == pytest.approx(rc_rms_bandwidth(Tp, 0.5), rel=0.01)

    def test_scales_inversely_with_duration(self):
        prods = [effective_bandwidth(make_pulse(Tp)) * Tp for Tp in (0.2e-9, 0.5e-9, 1e-9, 2e-9, 4e-9)]
        assert max(prods) / min(prods) - 1 < 0.01
        betas = [p / Tp for p, Tp in zip(prods, (0.2e-9, 0.5e-9, 1e-9, 2e-9, 4e-9))]
        assert all(np.diff(betas) < 0)

    def test_flat_band(self):
        # a zero-rolloff pulse has a flat spectrum of width 1/Tp
        Tp = 1e-9
        assert effective_bandwidth(make_pulse(Tp, 0.0)) == pytest.approx(1 / Tp / math.sqrt(12), rel=0.02)


class TestSeparability:
    def test_counts(self):
        Tp = 1e-9
        assert separability_violations([0, 2e-9, 4e-9], Tp) == 0
        assert separability_violations([0, 0.5e-9, 4e-9, 4.2e-9], Tp) == 2
        assert separability_violations([4e-9, 0.0, 0.5e-9], Tp) == 1
        assert separability_violations([], Tp) == 0
