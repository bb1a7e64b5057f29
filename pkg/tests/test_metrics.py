"""Frequency-domain error index and timing statistics tests."""
import numpy as np
import pytest

from vibsense import EmptyBand, GridMismatch, SignalSeries, fde, timing_stats


def make_series(data, dt=1e-3):
    data = np.asarray(data, dtype=float)
    return SignalSeries(dt=dt, labels=("s",), data=data.reshape(-1, 1))


@pytest.fixture
def signal():
    t = np.arange(2000) * 1e-3
    return make_series(np.sin(2 * np.pi * 13.0 * t) + 0.4 * np.sin(2 * np.pi * 41.0 * t))


def test_identical_signals_zero(signal):
    assert fde(signal, signal).value == 0.0


def test_sign_flip_is_one(signal):
    flipped = make_series(-signal.data)
    assert abs(fde(signal, flipped).value - 1.0) < 1e-12


def test_zero_candidate_is_one(signal):
    zero = make_series(np.zeros(signal.n_samples))
    assert abs(fde(signal, zero).value - 1.0) < 1e-12


def test_symmetric_in_arguments(signal):
    rng = np.random.default_rng(0)
    other = make_series(signal.data[:, 0] + 0.3 * rng.standard_normal(signal.n_samples))
    assert fde(signal, other).value == fde(other, signal).value


def test_invariant_to_out_of_band_energy(signal):
    # content above fmax must not change the index
    t = np.arange(signal.n_samples) * signal.dt
    polluted = make_series(signal.data[:, 0] + 5.0 * np.sin(2 * np.pi * 200.0 * t))
    candidate = make_series(0.9 * signal.data[:, 0])
    a = fde(signal, candidate, f0=0.0, fmax=100.0)
    b = fde(polluted, candidate, f0=0.0, fmax=100.0)
    np.testing.assert_allclose(a.value, b.value, rtol=1e-9)


def test_band_selection_reported(signal):
    report = fde(signal, signal, f0=10.0, fmax=50.0)
    assert report.f0 == 10.0 and report.fmax == 50.0
    assert 0 < report.n_bins < signal.n_samples // 2 + 1


def test_multichannel_requires_name():
    series = SignalSeries(dt=1e-3, labels=("a", "b"), data=np.zeros((10, 2)))
    with pytest.raises(ValueError):
        fde(series, series)
    assert fde(series, series, channel="a").value == 0.0


def test_grid_mismatch_length(signal):
    short = make_series(signal.data[:100])
    with pytest.raises(GridMismatch):
        fde(signal, short)


def test_grid_mismatch_dt(signal):
    other = SignalSeries(dt=2e-3, labels=("s",), data=signal.data)
    with pytest.raises(GridMismatch):
        fde(signal, other)


def test_empty_band(signal):
    with pytest.raises(EmptyBand):
        fde(signal, signal, f0=0.21, fmax=0.34)  # between DC and the first bin
    with pytest.raises(EmptyBand):
        fde(signal, signal, f0=100.0, fmax=50.0)


def test_zero_signals_define_zero():
    zero = make_series(np.zeros(64))
    assert fde(zero, zero).value == 0.0


class TestTimingStats:
    def test_two_samples(self):
        stats = timing_stats([1e-3, 1e-3])
        assert stats.total == pytest.approx(2e-3)
        assert stats.mean == pytest.approx(1e-3)
        assert stats.max == pytest.approx(1e-3)

    def test_empty(self):
        stats = timing_stats([])
        assert (stats.total, stats.mean, stats.max, stats.p99) == (0.0, 0.0, 0.0, 0.0)

    def test_percentile_and_max(self):
        times = np.full(1000, 1e-4)
        times[-1] = 5e-3
        stats = timing_stats(times)
        assert stats.max == pytest.approx(5e-3)
        assert stats.p99 < 5e-3
        assert stats.total == pytest.approx(times.sum())
