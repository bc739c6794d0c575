"""Channel estimation and ranging on received frames.

``extract_mpcs`` is a greedy (path-per-path) maximum-likelihood estimator for
separable channels: pick the delay whose shifted pulse correlates best with the
residual, project to get the amplitude, subtract, repeat. Delays closer than
one pulse duration to an accepted path are excluded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .constants import SPEED_OF_LIGHT
from .waveform import Pulse, SignalFrame

#: Default pre-LOS noise window length for synthetic frames (seconds).
PRELOS_WINDOW = 10e-9
DEFAULT_GAMMA = 0.1
DEFAULT_K_MAX = 20
DEFAULT_SEARCHBACK = 100e-9
KLOS_CAP_DB = 60.0
KLOS_FLOOR_DB = -60.0


class RangingOutage(RuntimeError):
    """No path could be extracted, so no range is available."""


@dataclass
class MpcEstimateSet:
    delays: list[float]
    amplitudes: list[complex]
    position_index: int = 0
    bs_id: int = 0
    residual_energies: list[float] = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.delays)

    def distances(self) -> np.ndarray:
        return np.asarray(self.delays, dtype=np.float64) * SPEED_OF_LIGHT


@dataclass(frozen=True)
class RangeEstimate:
    distance: float
    method: str
    position_index: int = 0
    bs_id: int = 0


def _window_slice(frame: SignalFrame, prelos_window) -> slice:
    """Sample slice of the pre-LOS window: a length from frame start or a (t_start, t_end) pair."""
    if np.isscalar(prelos_window):
        start, stop = frame.t0, frame.t0 + float(prelos_window)
    else:
        start, stop = prelos_window
    dt = frame.sample_interval_dtau
    i0 = int(math.ceil((start - frame.t0) / dt - 1e-9))
    i1 = int(math.floor((stop - frame.t0) / dt + 1e-9))
    if i0 < 0 or i1 > frame.samples.size or i1 <= i0:
        raise ValueError(f"pre-LOS window [{start:.3e}, {stop:.3e}] s outside frame")
    return slice(i0, i1)


def noise_threshold(frame: SignalFrame, gamma: float = DEFAULT_GAMMA, prelos_window=PRELOS_WINDOW) -> float:
    """Amplitude threshold ``gamma * (max|r| - <|w|>) + <|w|>`` with ``<|w|>`` from the pre-LOS part."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    mag = np.abs(frame.samples)
    floor = float(np.mean(mag[_window_slice(frame, prelos_window)]))
    return gamma * (float(mag.max()) - floor) + floor


def extract_mpcs(frame: SignalFrame, pulse: Pulse, K_max: int = DEFAULT_K_MAX, threshold: float = 0.0,
                 return_residual: bool = False):
    """Greedy ML extraction of up to ``K_max`` paths.

    The search stops early when the next path's peak amplitude
    ``|alpha| * max|s|`` falls below ``threshold``. The correlation peak is
    refined with a parabola through the three samples around the grid maximum.
    Returns an :class:`MpcEstimateSet` (delays ascending), plus the residual
    signal if ``return_residual``.
    """
    if K_max < 1:
        raise ValueError("K_max must be >= 1")
    dt = frame.sample_interval_dtau
    Tp = pulse.duration_Tp
    n = frame.samples.size
    h = int(math.floor(8 * Tp / dt + 1e-9))
    s_grid = pulse(np.arange(-h, h + 1) * dt)
    s_rev = s_grid[::-1]
    s_peak = pulse.peak

    r_pad = np.zeros(n + 2 * h, dtype=np.complex128)
    r_pad[h:h + n] = frame.samples
    corr = fftconvolve(r_pad, s_rev, mode="valid") * dt
    times = frame.times
    allowed = np.ones(n, dtype=bool)
    energy = float(np.sum(np.abs(frame.samples) ** 2) * dt)
    residual_energies = [energy]
    delays: list[float] = []
    amps: list[complex] = []

    for _ in range(K_max):
        metric = np.where(allowed, np.abs(corr), -1.0)
        k = int(np.argmax(metric))
        if metric[k] < 0:
            break
        tau = times[k]
        if 0 < k < n - 1 and allowed[k - 1] and allowed[k + 1]:
            y0, y1, y2 = metric[k - 1], metric[k], metric[k + 1]
            den = y0 - 2.0 * y1 + y2
            if den < 0:
                off = 0.5 * (y0 - y2) / den
                if abs(off) <= 0.5:
                    cand = tau + off * dt
                    if all(abs(cand - d) >= Tp for d in delays):
                        tau = cand
        lo = max(k - h - 1, 0)
        hi = min(k + h + 2, n)
        s_loc = pulse(times[lo:hi] - tau)
        norm = float(np.dot(s_loc, s_loc))
        if norm <= 0:
            allowed[k] = False
            continue
        seg = r_pad[h + lo:h + hi]
        alpha = complex(np.dot(seg, s_loc) / norm)
        if alpha == 0 or abs(alpha) * s_peak < threshold:
            break
        seg -= alpha * s_loc
        energy -= abs(alpha) ** 2 * norm * dt
        residual_energies.append(max(energy, 0.0))
        delays.append(float(tau))
        amps.append(alpha)
        allowed &= np.abs(times - tau) >= Tp
        a = max(lo - h, 0)
        b = min(hi + h, n)
        corr[a:b] = np.convolve(r_pad[a:b + 2 * h], s_rev, mode="valid") * dt

    order = np.argsort(delays)
    est = MpcEstimateSet([delays[i] for i in order], [amps[i] for i in order], frame.position_index,
                         frame.bs_id, residual_energies)
    if return_residual:
        return est, r_pad[h:h + n].copy()
    return est


def ml_range(est: MpcEstimateSet) -> RangeEstimate:
    """Distance of the earliest extracted path."""
    if len(est) == 0:
        raise RangingOutage(f"no MPC extracted (position {est.position_index}, BS {est.bs_id})")
    return RangeEstimate(max(SPEED_OF_LIGHT * min(est.delays), 0.0), "ML", est.position_index, est.bs_id)


def jbsf_range(frame: SignalFrame, xi: float, searchback_tau_sb: float = DEFAULT_SEARCHBACK,
               prelos_window=PRELOS_WINDOW) -> RangeEstimate:
    """Jump back ``tau_sb`` from the signal maximum and search forward for the first threshold crossing."""
    if not 0.0 < xi < 1.0:
        raise ValueError("xi must lie in (0, 1)")
    mag = np.abs(frame.samples)
    a_xi = noise_threshold(frame, xi, prelos_window)
    k_peak = int(np.argmax(mag))
    k_start = max(k_peak - int(math.floor(searchback_tau_sb / frame.sample_interval_dtau + 1e-9)), 0)
    above = np.nonzero(mag[k_start:k_peak + 1] >= a_xi)[0]
    k = k_start + int(above[0]) if above.size else k_peak
    tau = frame.t0 + k * frame.sample_interval_dtau
    return RangeEstimate(max(SPEED_OF_LIGHT * tau, 0.0), "JBSF", frame.position_index, frame.bs_id)


def project_amplitude(samples: np.ndarray, t: np.ndarray, pulse: Pulse, tau: float) -> tuple[complex, np.ndarray]:
    """Least-squares amplitude of ``s(t - tau)`` in ``samples`` and the shifted pulse."""
    s = pulse(t - tau)
    return complex(np.dot(samples, s) / np.dot(s, s)), s


def estimate_klos(frame: SignalFrame, pulse: Pulse, prelos_window=PRELOS_WINDOW, gamma: float = DEFAULT_GAMMA,
                  K_max: int = DEFAULT_K_MAX, est: Optional[MpcEstimateSet] = None) -> float:
    """LOS K-factor in dB: LOS energy over the energy of everything else.

    The LOS is the earliest path from :func:`extract_mpcs`; its amplitude is
    re-projected onto the received frame. Capped at +60 dB; -60 dB when no
    path is found.
    """
    if est is None:
        est = extract_mpcs(frame, pulse, K_max, noise_threshold(frame, gamma, prelos_window))
    if len(est) == 0:
        return KLOS_FLOOR_DB
    tau = min(est.delays)
    alpha, s = project_amplitude(frame.samples, frame.times, pulse, tau)
    rest = float(np.sum(np.abs(frame.samples - alpha * s) ** 2) * frame.sample_interval_dtau)
    los = abs(alpha) ** 2
    if los == 0:
        return KLOS_FLOOR_DB
    if rest <= los * 10 ** (-KLOS_CAP_DB / 10):
        return KLOS_CAP_DB
    return float(min(10 * math.log10(los / rest), KLOS_CAP_DB))


def ranging_errors(ranges: Sequence[float], truths: Sequence[float]) -> np.ndarray:
    return np.asarray(ranges, dtype=np.float64) - np.asarray(truths, dtype=np.float64)
