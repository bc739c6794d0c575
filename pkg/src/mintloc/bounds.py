"""Position error bounds: per-path SINR, ranging direction matrices, EFIM/CRLB, HDOP.

The EFIM decomposition below is valid when the deterministic paths do not
overlap in delay; :func:`separability_violations` flags frames where they do.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .constants import SPEED_OF_LIGHT
from .waveform import Pulse

MAX_CONDITION = 1e12


class UnboundedCrlb(ArithmeticError):
    """The EFIM is singular: the position is not identifiable."""


@dataclass(frozen=True)
class MpcSinr:
    va_id: Optional[int]
    sinr: float
    angle_phi: float


@dataclass(frozen=True)
class Efim:
    matrix_J: np.ndarray
    effective_bandwidth_beta: float


@dataclass(frozen=True)
class Crlb:
    trace: float
    var_x: float
    var_y: float
    covariance: np.ndarray


def sinr(alpha: complex, N0: float, Tp: float, S_nu_at_tau: float) -> float:
    """``|alpha|**2 / (N0 + Tp * S_nu(tau))``."""
    den = N0 + Tp * S_nu_at_tau
    if den <= 0:
        raise ZeroDivisionError("infinite SINR: no noise and no diffuse multipath")
    return abs(alpha) ** 2 / den


def ranging_direction_matrix(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c * c, c * s], [c * s, s * s]])


def efim(mpcs: Sequence[MpcSinr], beta: float) -> Efim:
    J = np.zeros((2, 2))
    for m in mpcs:
        J += m.sinr * ranging_direction_matrix(m.angle_phi)
    J *= 8.0 * math.pi ** 2 * beta ** 2 / SPEED_OF_LIGHT ** 2
    return Efim(J, beta)


def position_crlb(J: Efim) -> Crlb:
    """Trace and per-axis variances of ``J**-1`` (square meters)."""
    M = J.matrix_J
    if not np.all(np.isfinite(M)) or np.linalg.cond(M) >= MAX_CONDITION:
        raise UnboundedCrlb("EFIM is singular or ill-conditioned")
    C = np.linalg.inv(M)
    return Crlb(float(np.trace(C)), float(C[0, 0]), float(C[1, 1]), C)


def ranging_crlb(sinr_value: float, beta: float) -> float:
    """Distance-variance bound ``c**2 / (8 pi**2 beta**2 SINR)`` of a single path."""
    return SPEED_OF_LIGHT ** 2 / (8.0 * math.pi ** 2 * beta ** 2 * sinr_value)


def hdop(instantaneous_position_error: float, rms_ranging_error: float) -> Optional[float]:
    """Empirical HDOP: position error over RMS ranging error; ``None`` when undefined.

    Unlike the classical geometry-only DOP this is a snapshot ratio of actual
    errors. For MINT, the ranging error is taken over the associated paths only.
    """
    if not rms_ranging_error > 0:
        return None
    return instantaneous_position_error / rms_ranging_error


def effective_bandwidth(pulse: Pulse, nfft: int = 1 << 16) -> float:
    """RMS bandwidth ``sqrt(int f^2 |S|^2 df / int |S|^2 df)`` about baseband center."""
    S = np.fft.fft(pulse.samples, nfft)
    f = np.fft.fftfreq(nfft, pulse.sample_interval_dtau)
    P = np.abs(S) ** 2
    return float(math.sqrt(np.sum(f ** 2 * P) / np.sum(P)))


def separability_violations(delays: Sequence[float], Tp: float) -> int:
    """Number of adjacent path pairs closer than one pulse duration."""
    d = np.sort(np.asarray(delays, dtype=np.float64))
    return int(np.sum(np.diff(d) < Tp))


def position_sinrs(vis, amplitudes: Sequence[complex], N0: float, Tp: float, dm=None) -> list[MpcSinr]:
    """Per-path SINRs for a visible set, using the true DM profile when given."""
    out = []
    for va, d, phi, a in zip(vis.vas, vis.distances, vis.angles, amplitudes):
        s_nu = float(dm.pdp(d / SPEED_OF_LIGHT)) if dm is not None else 0.0
        out.append(MpcSinr(va.id, sinr(a, N0, Tp, s_nu), phi))
    return out
