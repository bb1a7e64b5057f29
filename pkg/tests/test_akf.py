"""Augmented Kalman filter tests against forward-simulation oracles."""
import numpy as np
import pytest

from vibsense import (
    AkfConfig,
    AugmentedKalmanFilter,
    NewmarkParams,
    NewmarkSimulator,
    PartitionedModel,
    SampleRateMismatch,
    SignalSeries,
    build_spring_mass_chain,
    fde,
    rayleigh_damping,
)


def chain_pm(n=3, stiffness=500.0, a=0.5, b=1e-5, n_measured=1):
    model = rayleigh_damping(build_spring_mass_chain(n, 1.0, stiffness), a, b)
    return PartitionedModel.from_matrices(model.m, model.c, model.k, n_measured, model.dof_labels)


def fine_truth(pm, dt, n, force_fn, oversample=20):
    """Near-exact sampled accelerations: integrate on a fine grid, decimate."""
    params = NewmarkParams(dt=dt / oversample)
    n_fine = n * oversample
    t = params.dt * (np.arange(n_fine) + 1)
    forces = np.zeros((n_fine, pm.n))
    forces[:, 0] = force_fn(t)
    _, _, acc = NewmarkSimulator.from_model(pm, params).simulate(forces)
    return forces[oversample - 1 :: oversample], acc[oversample - 1 :: oversample]


def test_config_validation():
    with pytest.raises(ValueError):
        AkfConfig(dt=0.0, process_noise_state=1.0, process_noise_force=1.0, measurement_noise=1.0)
    with pytest.raises(ValueError):
        AkfConfig(dt=1e-3, process_noise_state=-1.0, process_noise_force=1.0, measurement_noise=1.0)


def test_zero_propagation():
    pm = chain_pm(a=0.0, b=0.0)
    cfg = AkfConfig(dt=1e-3, process_noise_state=1e-12, process_noise_force=1.0, measurement_noise=1e-6)
    filt = AugmentedKalmanFilter(pm, cfg)
    force, _ = filt.step(np.zeros(1))
    assert not force.any()
    assert not filt.x.any()


def test_constant_force_converges():
    pm = PartitionedModel.from_matrices([[1.0]], [[1.0]], [[50.0]], 1)
    dt = 1e-3
    forces, acc = fine_truth(pm, dt, 1500, lambda t: np.full_like(t, 3.0))
    rng = np.random.default_rng(0)
    noisy = acc[:, :1] + 1e-4 * np.std(acc[:, 0]) * rng.standard_normal((1500, 1))
    meas = SignalSeries(dt=dt, labels=("0:x",), data=noisy, kind="acceleration", t0=dt)
    cfg = AkfConfig(dt=dt, process_noise_state=1e-18, process_noise_force=900.0,
                    measurement_noise=(1e-4 * np.std(acc)) ** 2, initial_covariance=9.0)
    ff, _, _ = AugmentedKalmanFilter(pm, cfg).run(meas)
    assert abs(ff.data[999, 0] - 3.0) / 3.0 < 0.02


def test_tracks_chain_truth_with_large_force_noise():
    pm = chain_pm()
    dt = 1e-3
    n = 4000
    forces, acc = fine_truth(pm, dt, n, lambda t: 5 * np.sin(2 * np.pi * 3 * t) + 2 * np.sin(2 * np.pi * 7.7 * t))
    meas = SignalSeries(dt=dt, labels=("0:x",), data=acc[:, :1], kind="acceleration", t0=dt)
    cfg = AkfConfig(dt=dt, process_noise_state=1e-18, process_noise_force=(100 * 5.0) ** 2,
                    measurement_noise=1e-12, initial_covariance=25.0)
    ff, states, _ = AugmentedKalmanFilter(pm, cfg).run(meas)
    truth = SignalSeries(dt=dt, labels=("0:x",), data=forces[:, :1], kind="force", t0=dt)
    assert fde(truth, ff).value <= 0.05


def test_covariance_stays_symmetric_psd():
    pm = chain_pm()
    cfg = AkfConfig(dt=1e-3, process_noise_state=1e-10, process_noise_force=100.0,
                    measurement_noise=1e-8, initial_covariance=1.0)
    filt = AugmentedKalmanFilter(pm, cfg)
    rng = np.random.default_rng(1)
    for i in range(10_000):
        filt.step(rng.standard_normal(1))
        if i % 500 == 0:
            p = filt.p
            assert np.abs(p - p.T).max() <= 1e-12 * max(np.abs(p).max(), 1e-300)
            assert np.linalg.eigvalsh(p).min() >= -1e-10 * np.trace(p)
    p = filt.p
    assert np.abs(p - p.T).max() <= 1e-12 * np.abs(p).max()
    assert np.linalg.eigvalsh(p).min() >= -1e-10 * np.trace(p)


def test_empty_input():
    pm = chain_pm()
    cfg = AkfConfig(dt=1e-3, process_noise_state=1e-12, process_noise_force=1.0, measurement_noise=1e-6)
    meas = SignalSeries(dt=1e-3, labels=("0:x",), data=np.zeros((0, 1)), kind="acceleration")
    forces, states, stats = AugmentedKalmanFilter(pm, cfg).run(meas)
    assert forces.n_samples == 0 and states.n_samples == 0
    assert stats.total == 0.0


def test_output_schema_matches_identify():
    pm = chain_pm()
    cfg = AkfConfig(dt=1e-3, process_noise_state=1e-12, process_noise_force=1.0, measurement_noise=1e-6)
    meas = SignalSeries(dt=1e-3, labels=("0:x",), data=np.zeros((50, 1)), kind="acceleration", t0=1e-3)
    forces, states, stats = AugmentedKalmanFilter(pm, cfg).run(meas)
    assert forces.labels == pm.measured_labels and forces.kind == "force"
    assert states.labels == pm.labels
    assert forces.t0 == meas.t0


def test_sample_rate_mismatch():
    pm = chain_pm()
    cfg = AkfConfig(dt=1e-3, process_noise_state=1e-12, process_noise_force=1.0, measurement_noise=1e-6)
    meas = SignalSeries(dt=2e-3, labels=("0:x",), data=np.zeros((10, 1)), kind="acceleration")
    with pytest.raises(SampleRateMismatch):
        AugmentedKalmanFilter(pm, cfg).run(meas)


def test_suggest_config():
    cfg = AkfConfig.suggest(dt=1e-4, measurement_noise_std=0.5, force_scale=100.0)
    assert cfg.dt == 1e-4
    assert cfg.measurement_noise == pytest.approx(0.25)
    assert cfg.process_noise_force == pytest.approx(1e6)
    assert cfg.process_noise_state > 0
