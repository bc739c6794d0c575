"""Pulse shaping, synthetic received signals and frequency-response ingestion.

Signals are complex baseband sampled every ``dtau`` seconds. The pulse is
energy-normalized so that ``sum(|s|**2) * dtau == 1``; a path with complex
amplitude ``alpha`` therefore carries energy ``|alpha|**2``.

Noise convention: the complex AWGN ``w(t)`` has ``E[w(t) w*(t')] = N0 d(t-t')``
(two-sided PSD ``N0/2`` per quadrature). Sampled every ``dtau`` this gives a
per-sample variance of ``N0 / dtau``, split evenly between I and Q.

Text formats (``#`` lines are headers, data rows are whitespace separated)::

    # mintloc frequency response v1
    # position_index=3 df=2e+06 start_freq=3.1e+09
    k re_H im_H
    ...                                   (further blocks may follow)

    # mintloc signal frame v1
    # position_index=3 bs_id=0 dtau=3.125e-11 t0=-2e-08 N0=1e-12
    n t re im
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .constants import SPEED_OF_LIGHT

#: Pulse support is truncated to |t| <= PULSE_SPAN * Tp.
PULSE_SPAN = 8


class WaveformError(ValueError):
    pass


def make_rng(seed) -> np.random.Generator:
    """Generator from an int, a tuple of ints (substream key) or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng(np.random.SeedSequence([int(s) for s in seed]))
    return np.random.default_rng(seed)


def raised_cosine(t, Tp: float, beta: float) -> np.ndarray:
    """Un-normalized time-domain raised-cosine pulse (peak 1 at t=0)."""
    x = np.asarray(t, dtype=np.float64) / Tp
    den = 1.0 - (2.0 * beta * x) ** 2
    sing = np.abs(den) < 1e-10
    out = np.sinc(x) * np.cos(np.pi * beta * x) / np.where(sing, 1.0, den)
    if beta > 0:
        out = np.where(sing, np.pi / 4.0 * np.sinc(1.0 / (2.0 * beta)), out)
    return out


def raised_cosine_spectrum(f, Tp: float, beta: float) -> np.ndarray:
    """Fourier transform of :func:`raised_cosine` (real, peak ``Tp``)."""
    af = np.abs(np.asarray(f, dtype=np.float64))
    f1 = (1.0 - beta) / (2.0 * Tp)
    f2 = (1.0 + beta) / (2.0 * Tp)
    out = np.zeros_like(af)
    out[af <= f1] = Tp
    roll = (af > f1) & (af <= f2)
    if beta > 0:
        out[roll] = Tp / 2.0 * (1.0 + np.cos(np.pi * Tp / beta * (af[roll] - f1)))
    return out


@dataclass(frozen=True)
class Pulse:
    duration_Tp: float
    rolloff_betaR: float
    center_freq_fc: float
    band_edge_f0: float
    sample_interval_dtau: float
    norm: float = field(default=1.0, repr=False)

    @property
    def half_len(self) -> int:
        """Number of samples on each side of the peak."""
        return int(math.floor(PULSE_SPAN * self.duration_Tp / self.sample_interval_dtau + 1e-9))

    @property
    def offsets(self) -> np.ndarray:
        h = self.half_len
        return np.arange(-h, h + 1) * self.sample_interval_dtau

    @property
    def samples(self) -> np.ndarray:
        return self(self.offsets)

    @property
    def peak(self) -> float:
        return float(self(0.0))

    @property
    def bandwidth(self) -> float:
        """Occupied two-sided bandwidth ``(1 + betaR) / Tp``."""
        return (1.0 + self.rolloff_betaR) / self.duration_Tp

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        s = raised_cosine(t, self.duration_Tp, self.rolloff_betaR) / self.norm
        return np.where(np.abs(t) <= PULSE_SPAN * self.duration_Tp * (1 + 1e-12), s, 0.0)

    def spectrum(self, f) -> np.ndarray:
        """Baseband spectrum consistent with the energy normalization."""
        return raised_cosine_spectrum(f, self.duration_Tp, self.rolloff_betaR) / self.norm


def make_pulse(Tp: float, betaR: float = 0.5, fc: float = 7e9, f0: Optional[float] = None,
               dtau: Optional[float] = None) -> Pulse:
    """Energy-normalized raised-cosine pulse, truncated to |t| <= 8 Tp.

    ``f0`` defaults to the lower band edge ``fc - (1 + betaR) / (2 Tp)`` and
    ``dtau`` to ``Tp / 16``.
    """
    if not 0.0 <= betaR <= 1.0:
        raise WaveformError(f"roll-off {betaR} outside [0, 1]")
    if Tp <= 0:
        raise WaveformError("pulse duration must be positive")
    if dtau is None:
        dtau = Tp / 16.0
    if dtau > Tp / 8.0 * (1 + 1e-12):
        raise WaveformError("sample interval must be <= Tp/8")
    if f0 is None:
        f0 = fc - (1.0 + betaR) / (2.0 * Tp)
    raw = Pulse(Tp, betaR, fc, f0, dtau)
    energy = float(np.sum(raw.samples ** 2) * dtau)
    return Pulse(Tp, betaR, fc, f0, dtau, norm=math.sqrt(energy))


def bandwidth_3db(pulse: Pulse, nfft: int = 1 << 16) -> float:
    """Two-sided width of the band where the pulse spectrum is within 3 dB of its peak.

    The dB scale is taken on the spectrum value itself (``10 log10 |S|``), i.e.
    the half-amplitude points of the raised-cosine shape.
    """
    S = np.abs(np.fft.fft(pulse.samples, nfft))
    f = np.fft.fftfreq(nfft, pulse.sample_interval_dtau)
    inband = f[S >= 0.5 * S.max()]
    return float(inband.max() - inband.min())


@dataclass(frozen=True)
class Mpc:
    delay: float
    amplitude: complex
    va_id: Optional[int] = None

    def __post_init__(self):
        if self.delay < 0:
            raise WaveformError("MPC delay must be >= 0")


@dataclass(frozen=True)
class DiffuseModel:
    """Exponential power delay profile of the diffuse multipath (DM)."""

    onset_delay: float
    total_power_Omega: float
    decay_const_gamma_d: float

    def __post_init__(self):
        if self.total_power_Omega < 0 or self.decay_const_gamma_d <= 0:
            raise WaveformError("DM power must be >= 0 and decay constant > 0")

    def pdp(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=np.float64)
        g = self.decay_const_gamma_d
        val = self.total_power_Omega / g * np.exp(-(np.maximum(tau, self.onset_delay) - self.onset_delay) / g)
        return np.where(tau >= self.onset_delay, val, 0.0)


NO_DM = DiffuseModel(0.0, 0.0, 1.0)


@dataclass
class SignalFrame:
    samples: np.ndarray
    sample_interval_dtau: float
    position_index: int = 0
    bs_id: int = 0
    noise_psd_N0: float = 0.0
    t0: float = 0.0  # time of samples[0], seconds

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.size == 0:
            raise WaveformError("empty frame")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) * self.sample_interval_dtau

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.sample_interval_dtau)

    def index_of(self, t: float) -> int:
        return int(round((t - self.t0) / self.sample_interval_dtau))


@dataclass
class FrequencyResponse:
    values_H: np.ndarray
    freq_spacing_df: float
    start_freq: float
    position_index: int = 0

    def __post_init__(self):
        self.values_H = np.asarray(self.values_H, dtype=np.complex128)

    @property
    def frequencies(self) -> np.ndarray:
        return self.start_freq + np.arange(self.values_H.size) * self.freq_spacing_df

    @property
    def max_delay(self) -> float:
        return 1.0 / self.freq_spacing_df


def add_mpcs(buf: np.ndarray, t0: float, mpcs: Sequence[Mpc], pulse: Pulse) -> None:
    """Add ``alpha * s(t - tau)`` of every MPC into ``buf`` in place."""
    dt = pulse.sample_interval_dtau
    h = pulse.half_len + 1
    n = buf.size
    for m in mpcs:
        c = int(round((m.delay - t0) / dt))
        lo, hi = max(c - h, 0), min(c + h + 1, n)
        if lo >= hi:
            continue
        t = t0 + np.arange(lo, hi) * dt
        buf[lo:hi] += m.amplitude * pulse(t - m.delay)


def synthesize(mpcs: Sequence[Mpc], dm: DiffuseModel, N0: float, pulse: Pulse, duration: float,
               rng_seed=None, t0: float = 0.0, position_index: int = 0, bs_id: int = 0) -> SignalFrame:
    """Sample ``r(t) = sum_k alpha_k s(t - tau_k) + (s * nu)(t) + w(t)`` on [t0, t0 + duration)."""
    if N0 < 0:
        raise WaveformError("noise PSD must be >= 0")
    dt = pulse.sample_interval_dtau
    n = int(round(duration / dt))
    if n <= 0:
        raise WaveformError("duration shorter than one sample")
    t_end = t0 + n * dt
    for m in mpcs:
        if m.delay >= t_end:
            raise WaveformError(f"MPC delay {m.delay:.3e} s beyond frame end {t_end:.3e} s")
    r = np.zeros(n, dtype=np.complex128)
    add_mpcs(r, t0, mpcs, pulse)
    rng = make_rng(rng_seed) if (N0 > 0 or dm.total_power_Omega > 0) else None
    if dm.total_power_Omega > 0:
        t = t0 + np.arange(n) * dt
        var = dm.pdp(t) / dt
        first = int(np.argmax(var > 0)) if np.any(var > 0) else n
        k = n - first
        nu = np.zeros(n, dtype=np.complex128)
        nu[first:] = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) * np.sqrt(var[first:] / 2.0)
        h = pulse.half_len
        r += fftconvolve(nu, pulse.samples, mode="full")[h:h + n] * dt
    if N0 > 0:
        sigma = math.sqrt(N0 / dt / 2.0)
        r += (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * sigma
    return SignalFrame(r, dt, position_index, bs_id, N0, t0)


def frequency_response_from_mpcs(mpcs: Sequence[Mpc], df: float, start_freq: float, n_bins: int,
                                 position_index: int = 0) -> FrequencyResponse:
    """Transfer function ``H[k] = sum alpha exp(-j 2 pi f_k tau)`` of a specular channel."""
    f = start_freq + np.arange(n_bins) * df
    H = np.zeros(n_bins, dtype=np.complex128)
    for m in mpcs:
        H += m.amplitude * np.exp(-2j * np.pi * f * m.delay)
    return FrequencyResponse(H, df, start_freq, position_index)


def band_extract(H: FrequencyResponse, pulse: Pulse, bs_id: int = 0) -> SignalFrame:
    """Cut the pulse band out of a measured transfer function and go to baseband.

    Bins in ``[f0, f0 + B]`` are weighted with the pulse spectrum and inverse
    transformed with ``N = ceil(1 / (df * dtau))`` points; the result is shifted
    by ``exp(-j 2 pi (fc - f0) t)``. The output repeats every ``1 / df`` and its
    sample interval is ``1 / (N df)``.
    """
    df = H.freq_spacing_df
    f = H.frequencies
    lo_f = pulse.band_edge_f0
    hi_f = lo_f + pulse.bandwidth
    tol = 1e-6 * df
    if lo_f < f[0] - tol or hi_f > f[-1] + tol:
        raise WaveformError(
            f"pulse band [{lo_f:.4g}, {hi_f:.4g}] Hz not inside measured band [{f[0]:.4g}, {f[-1]:.4g}] Hz"
        )
    k0 = int(math.ceil((lo_f - f[0]) / df - 1e-9))
    k1 = int(math.floor((hi_f - f[0]) / df + 1e-9))
    sel = slice(k0, k1 + 1)
    fb = f[sel]
    X = H.values_H[sel] * pulse.spectrum(fb - pulse.center_freq_fc)
    n_fft = int(math.ceil(1.0 / (df * pulse.sample_interval_dtau) - 1e-9))
    if n_fft < X.size:
        raise WaveformError("FFT size smaller than number of extracted bins")
    dt = 1.0 / (n_fft * df)
    t = np.arange(n_fft) * dt
    r = n_fft * df * np.fft.ifft(X, n_fft) * np.exp(-2j * np.pi * (pulse.center_freq_fc - fb[0]) * t)
    return SignalFrame(r, dt, H.position_index, bs_id, 0.0, 0.0)


@dataclass
class AmplitudeModel:
    """Synthetic specular amplitudes ``|alpha| = g0 / d * eta**order``, uniform random phase."""

    g0: float = 1.0
    eta: float = 0.5

    def __call__(self, distance: float, order: int, rng: np.random.Generator) -> complex:
        mag = self.g0 / max(distance, 1e-3) * self.eta ** order
        return complex(mag * np.exp(2j * np.pi * rng.random()))


def mpcs_for_visible(vis, amplitude_model: AmplitudeModel, rng: np.random.Generator,
                     max_delay: Optional[float] = None) -> list[Mpc]:
    """MPC list of a :class:`~mintloc.geometry.VisibleSet` (one phase draw per anchor)."""
    out = []
    for va, d in zip(vis.vas, vis.distances):
        alpha = amplitude_model(d, va.order, rng)
        tau = d / SPEED_OF_LIGHT
        if max_delay is not None and tau >= max_delay:
            continue
        if alpha != 0:
            out.append(Mpc(tau, alpha, va.id))
    return out


def scenario_signals(plan, trajectory, bss, pulse: Pulse, dm, N0: float,
                     amplitude_model: Optional[AmplitudeModel] = None, rng_seed: int = 0,
                     max_order: int = 2, duration: float = 250e-9, t0: float = -20e-9) -> list[SignalFrame]:
    """Frames for every (position, BS) pair from the plan's visible anchors.

    Visibility uses ``plan`` as given, obstructions included, so blocked paths
    are absent. ``dm`` is a :class:`DiffuseModel` or a callable
    ``(los_delay, los_amplitude) -> DiffuseModel``. Each pair draws from the RNG
    substream ``(rng_seed, position_index, bs_id)``. Frames are ordered
    position-major.
    """
    from .geometry import VaTable, expected_visible_set, generate_vas

    if len(trajectory) == 0:
        raise WaveformError("empty trajectory")
    amplitude_model = amplitude_model or AmplitudeModel()
    tables = []
    next_id = 0
    for i, bs in enumerate(bss):
        vas = generate_vas(plan, bs, i, max_order, first_id=next_id)
        next_id += len(vas)
        tables.append(VaTable(vas))
    frames = []
    for li, p in enumerate(trajectory):
        for i, bs in enumerate(bss):
            rng = make_rng((rng_seed, li, i))
            vis = expected_visible_set(p, li, tables[i], plan)
            mpcs = mpcs_for_visible(vis, amplitude_model, rng, max_delay=t0 + duration)
            if callable(dm):
                d_los = math.dist(p, bs)
                dmi = dm(d_los / SPEED_OF_LIGHT, amplitude_model.g0 / max(d_los, 1e-3))
            else:
                dmi = dm
            frames.append(synthesize(mpcs, dmi, N0, pulse, duration, rng, t0, li, i))
    return frames


def save_frequency_responses(path, responses: Sequence[FrequencyResponse]) -> None:
    lines = ["# mintloc frequency response v1"]
    for H in responses:
        lines.append(f"# position_index={H.position_index} df={float(H.freq_spacing_df)!r} start_freq={float(H.start_freq)!r}")
        for k, v in enumerate(H.values_H):
            lines.append(f"{k} {float(v.real)!r} {float(v.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_header(line: str) -> dict:
    out = {}
    for tok in line.lstrip("#").split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
    return out


def load_frequency_responses(path) -> list[FrequencyResponse]:
    """Read every block of a frequency-response file, in file order."""
    blocks: list[tuple[dict, list]] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            hdr = _parse_header(line)
            if "df" in hdr:
                blocks.append((hdr, []))
            continue
        if not blocks:
            raise WaveformError(f"{path}:{lineno}: data before header")
        parts = line.split()
        if len(parts) != 3:
            raise WaveformError(f"{path}:{lineno}: expected 'k re im'")
        blocks[-1][1].append((int(parts[0]), float(parts[1]), float(parts[2])))
    out = []
    for hdr, rows in blocks:
        rows.sort()
        if [r[0] for r in rows] != list(range(len(rows))):
            raise WaveformError(f"{path}: non-contiguous bin indices in block {hdr}")
        vals = np.array([complex(r[1], r[2]) for r in rows])
        out.append(FrequencyResponse(vals, float(hdr["df"]), float(hdr["start_freq"]),
                                     int(hdr.get("position_index", 0))))
    return out


def save_frame(path, frame: SignalFrame) -> None:
    lines = [
        "# mintloc signal frame v1",
        f"# position_index={frame.position_index} bs_id={frame.bs_id} dtau={float(frame.sample_interval_dtau)!r} "
        f"t0={float(frame.t0)!r} N0={float(frame.noise_psd_N0)!r}",
        "# n t re im",
    ]
    for n, (t, v) in enumerate(zip(frame.times, frame.samples)):
        lines.append(f"{n} {float(t)!r} {float(v.real)!r} {float(v.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_frame(path) -> SignalFrame:
    hdr: dict = {}
    vals = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            hdr.update(_parse_header(line))
            continue
        _, _, re, im = line.split()
        vals.append(complex(float(re), float(im)))
    return SignalFrame(np.array(vals), float(hdr["dtau"]), int(hdr.get("position_index", 0)),
                       int(hdr.get("bs_id", 0)), float(hdr.get("N0", 0.0)), float(hdr.get("t0", 0.0)))


DmFactory = Callable[[float, float], DiffuseModel]
