"""Uniformly sampled multichannel time series and excitation generators.

Covers the synthetic loading profiles used by the numerical experiments
(a chirp-plus-tone family and band-limited random excitation), Gaussian
measurement-noise injection, SNR computation and the CSV interchange
format shared by every pipeline stage.

CSV schema: header ``t,<label1>,<label2>,...``, one row per sample,
RFC-4180 quoting, floats written with shortest round-trip formatting.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import GridMismatch, InvalidBand, ParseError, UnknownProfile

CHIRP_RATE_HZ_PER_S = 1000.0
TONE_HZ = 200.0


@dataclass(frozen=True)
class SignalSeries:
    """Multichannel samples on a uniform time grid starting at ``t0``."""

    dt: float
    labels: tuple
    data: np.ndarray
    kind: str = "displacement"
    t0: float = 0.0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            data = data.reshape(-1, len(self.labels))
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if data.shape[1] != len(self.labels):
            raise ValueError(
                f"{len(self.labels)} labels for {data.shape[1]} data columns"
            )

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    def channel(self, label: str) -> np.ndarray:
        try:
            return self.data[:, self.labels.index(label)]
        except ValueError:
            raise KeyError(label) from None

    def select(self, labels) -> "SignalSeries":
        """Sub-series with the given channels, in the given order."""
        cols = [self.labels.index(lab) for lab in labels]
        return replace(self, labels=tuple(labels), data=self.data[:, cols])


def _envelope(t):
    return 1.0 - np.exp(-t / 0.05)


_PROFILES = {
    "f1x": lambda t, w1, w2: _envelope(t)
    * (5500.0 * np.sin(2 * np.pi * w1 * t**2) + 5000.0 * np.sin(2 * np.pi * w2 * t)),
    "f1y": lambda t, w1, w2: _envelope(t)
    * (5500.0 * np.cos(2 * np.pi * w1 * t**2) + 5000.0 * np.sin(2 * np.pi * w2 * t)),
    "f2x": lambda t, w1, w2: _envelope(t)
    * (10000.0 * np.sin(2 * np.pi * w1 * t**2) + 5400.0 * np.sin(2 * np.pi * w2 * t)),
    "f2y": lambda t, w1, w2: _envelope(t)
    * (10000.0 * np.sin(2 * np.pi * w1 * t**2) + 5400.0 * np.sin(2 * np.pi * w2 * t)),
}


def chirp_tone_force(profile_id: str, t_grid) -> SignalSeries:
    """Chirp-plus-tone loading profile sampled on a uniform grid.

    Four profiles (``f1x``, ``f1y``, ``f2x``, ``f2y``) combine a
    quadratic-phase sweep at 1000 Hz/s with a 200 Hz tone under a
    soft-start envelope ``1 - exp(-t/0.05)``.
    """
    if profile_id not in _PROFILES:
        raise UnknownProfile(
            f"unknown profile {profile_id!r}; choose from {sorted(_PROFILES)}"
        )
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("t_grid must be a nonempty 1-D array")
    if np.any(t < 0):
        raise ValueError("t_grid must be nonnegative")
    if t.size > 1:
        steps = np.diff(t)
        dt = steps[0]
        if dt <= 0 or np.any(np.abs(steps - dt) > 1e-9 * dt):
            raise ValueError("t_grid must be uniformly spaced")
    else:
        dt = 1.0
    values = _PROFILES[profile_id](t, CHIRP_RATE_HZ_PER_S, TONE_HZ)
    return SignalSeries(
        dt=dt, labels=(profile_id,), data=values[:, None], kind="force", t0=float(t[0])
    )


def add_noise(clean: SignalSeries, sigma_fraction: float, seed: int) -> SignalSeries:
    """Add zero-mean Gaussian noise scaled per channel.

    The noise standard deviation of each channel is ``sigma_fraction``
    times that channel's sample standard deviation. Channels draw from
    independent streams derived deterministically from ``seed``.
    """
    if sigma_fraction < 0:
        raise ValueError("sigma_fraction must be nonnegative")
    if sigma_fraction == 0:
        return replace(clean, data=clean.data.copy())
    noisy = clean.data.copy()
    streams = np.random.SeedSequence(seed).spawn(clean.n_channels)
    for j, stream in enumerate(streams):
        sigma = sigma_fraction * np.std(clean.data[:, j])
        rng = np.random.default_rng(stream)
        noisy[:, j] += sigma * rng.standard_normal(clean.n_samples)
    return replace(clean, data=noisy)


def snr_db(noisy: SignalSeries, clean: SignalSeries) -> np.ndarray:
    """Per-channel signal-to-noise ratio in dB.

    ``20 log10(rms(noisy) / rms(noisy - clean))``; channels with zero
    noise report ``inf``.
    """
    if noisy.data.shape != clean.data.shape:
        raise GridMismatch(
            f"shapes differ: {noisy.data.shape} vs {clean.data.shape}"
        )
    if abs(noisy.dt - clean.dt) > 1e-12 * clean.dt:
        raise GridMismatch(f"sample intervals differ: {noisy.dt} vs {clean.dt}")
    out = np.empty(noisy.n_channels)
    for j in range(noisy.n_channels):
        signal_rms = math.sqrt(np.mean(noisy.data[:, j] ** 2))
        noise_rms = math.sqrt(np.mean((noisy.data[:, j] - clean.data[:, j]) ** 2))
        out[j] = math.inf if noise_rms == 0 else 20.0 * math.log10(signal_rms / noise_rms)
    return out


def bandlimited_random_force(
    band_hz, amplitude: float, duration: float, dt: float, seed: int, label: str = "f"
) -> SignalSeries:
    """Zero-mean random force with its spectrum confined to a band.

    White Gaussian noise is shaped in the frequency domain: bins outside
    ``[f_lo, f_hi]`` (and the DC bin) are zeroed, then the signal is
    rescaled so its RMS equals ``amplitude``.
    """
    f_lo, f_hi = band_hz
    nyquist = 0.5 / dt
    if not 0 <= f_lo < f_hi < nyquist:
        raise InvalidBand(
            f"band [{f_lo}, {f_hi}] Hz must satisfy 0 <= lo < hi < {nyquist} Hz"
        )
    n = int(round(duration / dt))
    if n < 2:
        raise ValueError("duration must cover at least two samples")
    rng = np.random.default_rng(seed)
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, dt)
    spectrum[(freqs < f_lo) | (freqs > f_hi)] = 0.0
    spectrum[0] = 0.0
    x = np.fft.irfft(spectrum, n)
    rms = math.sqrt(np.mean(x**2))
    if rms == 0:
        raise InvalidBand(f"band [{f_lo}, {f_hi}] Hz contains no resolvable bins")
    x *= amplitude / rms
    return SignalSeries(dt=dt, labels=(label,), data=x[:, None], kind="force")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(series: SignalSeries, path) -> None:
    """Write a series to CSV with a leading time column."""
    t = series.t
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *series.labels])
        for i in range(series.n_samples):
            writer.writerow([_fmt(t[i])] + [_fmt(v) for v in series.data[i]])


def read_csv(path, kind: str = "displacement") -> SignalSeries:
    """Read a series written by :func:`write_csv`.

    The time column must be uniformly spaced; its first value becomes the
    series origin ``t0``.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path} is empty") from None
        if not header or header[0] != "t":
            raise ParseError(f"{path}: first column must be 't', got {header[:1]}")
        labels = tuple(header[1:])
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path} contains a header but no samples")
    arr = np.asarray(rows)
    t = arr[:, 0]
    if t.size > 1:
        steps = np.diff(t)
        dt = steps[0]
        if dt <= 0 or np.any(np.abs(steps - dt) > 1e-6 * dt):
            raise ParseError(f"{path}: time column is not uniformly spaced")
    else:
        dt = 1.0
    return SignalSeries(dt=float(dt), labels=labels, data=arr[:, 1:], kind=kind, t0=float(t[0]))
