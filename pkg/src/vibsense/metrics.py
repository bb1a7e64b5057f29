"""Quantitative evaluation: frequency-domain error index and timing stats."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyBand, GridMismatch
from .signals import SignalSeries


@dataclass(frozen=True)
class FdeReport:
    """Frequency-domain error over a band: 0 for identical spectra, ~1 for unrelated."""

    value: float
    f0: float
    fmax: float
    n_bins: int


def _pick_channel(series: SignalSeries, channel):
    if channel is None:
        if series.n_channels != 1:
            raise ValueError("channel must be named for multichannel series")
        return series.data[:, 0]
    return series.channel(channel)


def fde(
    reference: SignalSeries,
    candidate: SignalSeries,
    channel: str | None = None,
    f0: float = 0.0,
    fmax: float | None = None,
) -> FdeReport:
    """Frequency-domain error index between two signals.

    Both signals are transformed over the full record (no windowing: they
    share the record, so leakage affects them identically) and compared
    bin-wise over ``[f0, fmax]``:

        sum |Z_ref - Z_cand| / sum (|Z_ref| + |Z_cand|)

    Identical signals give 0; a sign-flipped or zero candidate gives 1.
    """
    x = _pick_channel(reference, channel)
    y = _pick_channel(candidate, channel)
    if x.shape != y.shape:
        raise GridMismatch(f"lengths differ: {x.shape[0]} vs {y.shape[0]}")
    if abs(reference.dt - candidate.dt) > 1e-9 * reference.dt:
        raise GridMismatch(
            f"sample intervals differ: {reference.dt} vs {candidate.dt}"
        )
    nyquist = 0.5 / reference.dt
    if fmax is None:
        fmax = nyquist
    if not 0 <= f0 < fmax <= nyquist * (1 + 1e-12):
        raise EmptyBand(f"band [{f0}, {fmax}] is invalid for Nyquist {nyquist}")
    freqs = np.fft.rfftfreq(x.shape[0], reference.dt)
    sel = (freqs >= f0) & (freqs <= fmax)
    if not np.any(sel):
        raise EmptyBand(f"no spectrum bins in [{f0}, {fmax}] Hz")
    zx = np.fft.rfft(x)[sel]
    zy = np.fft.rfft(y)[sel]
    denom = np.sum(np.abs(zx)) + np.sum(np.abs(zy))
    numer = np.sum(np.abs(zx - zy))
    value = 0.0 if denom == 0 else float(numer / denom)
    return FdeReport(value=value, f0=float(f0), fmax=float(fmax), n_bins=int(sel.sum()))


@dataclass(frozen=True)
class TimingStats:
    total: float
    mean: float
    max: float
    p99: float


def timing_stats(per_step_times) -> TimingStats:
    """Aggregate per-step wall times; an empty input yields all zeros."""
    times = np.asarray(list(per_step_times), dtype=float)
    if times.size == 0:
        return TimingStats(total=0.0, mean=0.0, max=0.0, p99=0.0)
    return TimingStats(
        total=float(times.sum()),
        mean=float(times.mean()),
        max=float(times.max()),
        p99=float(np.percentile(times, 99)),
    )
