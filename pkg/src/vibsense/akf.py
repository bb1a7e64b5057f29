"""Augmented Kalman filter baseline for joint force/state estimation.

The unknown forces at the measured DOFs are appended to the structural
state as a random walk and estimated jointly from acceleration
measurements. Built on the same partitioned reduced matrices as the
identification session so the two methods compare like for like.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import numerics
from .errors import DimensionMismatch, DivergedFilter, SampleRateMismatch
from .metrics import timing_stats
from .partition import PartitionedModel
from .signals import SignalSeries

_COVARIANCE_GUARD = 1e30


@dataclass(frozen=True)
class AkfConfig:
    """Discretization step and noise intensities of the augmented filter.

    Noise intensities are continuous-time (per second); the per-step
    process covariance is ``intensity * dt``. The structural state and
    the random-walk force carry separate intensities. No universally
    correct values exist; see :meth:`suggest` for a workable default.
    """

    dt: float
    process_noise_state: float
    process_noise_force: float
    measurement_noise: float
    initial_covariance: float = 1.0

    def __post_init__(self):
        for name in (
            "dt",
            "process_noise_state",
            "process_noise_force",
            "measurement_noise",
            "initial_covariance",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def suggest(
        cls, dt: float, measurement_noise_std: float, force_scale: float
    ) -> "AkfConfig":
        """Defaults: measurement variance from a declared noise floor and
        force random-walk intensity sized to sweep (10 x force scale)^2
        per second. The state intensity is kept near-zero: the observation
        row weights displacement states by the squared natural
        frequencies, so any appreciable state noise absorbs the
        innovations that should drive the force estimate."""
        return cls(
            dt=dt,
            process_noise_state=1e-24 * max(force_scale, 1.0) ** 2,
            process_noise_force=(10.0 * force_scale) ** 2,
            measurement_noise=max(measurement_noise_std, 1e-12) ** 2,
            initial_covariance=max(force_scale, 1.0) ** 2,
        )


class AugmentedKalmanFilter:
    """Joint input/state estimator over a partitioned reduced model.

    The continuous-time state matrix over ``[u, du/dt, f]`` is
    discretized exactly with a matrix exponential (zero-order hold), so
    the only step-size effects are those inherent to the random-walk
    force model. Acceleration channels at the measured DOFs form the
    observation equation.
    """

    def __init__(self, model: PartitionedModel, cfg: AkfConfig):
        self.model = model
        self.cfg = cfg
        n = model.n
        nm = model.n_measured
        m_fact = numerics.factorize(model.m)
        minv_k = m_fact.solve(model.k)
        minv_c = m_fact.solve(model.c)
        select = np.zeros((n, nm))
        select[:nm, :nm] = np.eye(nm)
        minv_s = m_fact.solve(select)

        nx = 2 * n + nm
        a_cont = np.zeros((nx, nx))
        a_cont[:n, n : 2 * n] = np.eye(n)
        a_cont[n : 2 * n, :n] = -minv_k
        a_cont[n : 2 * n, n : 2 * n] = -minv_c
        a_cont[n : 2 * n, 2 * n :] = minv_s
        self.a_disc = scipy.linalg.expm(a_cont * cfg.dt)

        self.c_obs = np.zeros((nm, nx))
        self.c_obs[:, :n] = -minv_k[:nm]
        self.c_obs[:, n : 2 * n] = -minv_c[:nm]
        self.c_obs[:, 2 * n :] = minv_s[:nm]

        q = np.full(nx, cfg.process_noise_state)
        q[2 * n :] = cfg.process_noise_force
        self.q_disc = np.diag(q * cfg.dt)
        self.r_obs = cfg.measurement_noise * np.eye(nm)

        self.x = np.zeros(nx)
        # The structure starts at rest (tight prior); only the unknown
        # force carries the wide initial uncertainty. A flat prior would
        # let the first innovations be absorbed by the displacement states.
        p0 = np.full(nx, cfg.process_noise_state * cfg.dt)
        p0[2 * n :] = cfg.initial_covariance
        self.p = np.diag(p0)
        self.n_state = nx
        self.last_run_times = np.empty(0)

    @property
    def force(self) -> np.ndarray:
        return self.x[2 * self.model.n :]

    def step(self, measurement):
        """One predict/update cycle; returns (force estimate, elapsed seconds).

        The covariance update uses the Joseph form and explicit
        symmetrization so positive semidefiniteness survives long runs.
        """
        y = np.asarray(measurement, dtype=float).ravel()
        nm = self.model.n_measured
        if y.shape != (nm,):
            raise DimensionMismatch(f"expected {nm} channels, got {y.shape}")
        tic = time.perf_counter()
        x = self.a_disc @ self.x
        p = self.a_disc @ self.p @ self.a_disc.T + self.q_disc
        innovation = y - self.c_obs @ x
        s = self.c_obs @ p @ self.c_obs.T + self.r_obs
        gain = np.linalg.solve(s, self.c_obs @ p).T
        self.x = x + gain @ innovation
        ikc = np.eye(self.n_state) - gain @ self.c_obs
        p = ikc @ p @ ikc.T + gain @ self.r_obs @ gain.T
        self.p = 0.5 * (p + p.T)
        elapsed = time.perf_counter() - tic
        trace = np.trace(self.p)
        if not np.isfinite(trace) or trace > _COVARIANCE_GUARD:
            raise DivergedFilter(f"covariance trace {trace:.3e} exceeds guard")
        return self.force.copy(), elapsed

    def run(self, measurements: SignalSeries):
        """Filter a whole acceleration series.

        Returns force estimates, displacement estimates and timing stats
        in the same schema as the identification session.
        """
        if abs(measurements.dt - self.cfg.dt) > 1e-9 * self.cfg.dt:
            raise SampleRateMismatch(
                f"measurement dt {measurements.dt} != filter dt {self.cfg.dt}"
            )
        wanted = self.model.measured_labels
        if set(wanted) <= set(measurements.labels):
            samples = measurements.select(wanted).data
        else:
            samples = measurements.data
        n_steps = samples.shape[0]
        n = self.model.n
        nm = self.model.n_measured
        forces = np.empty((n_steps, nm))
        states = np.empty((n_steps, n))
        times = np.empty(n_steps)
        for i in range(n_steps):
            forces[i], times[i] = self.step(samples[i])
            states[i] = self.x[:n]
        self.last_run_times = times
        force_series = SignalSeries(
            dt=self.cfg.dt,
            labels=self.model.measured_labels,
            data=forces,
            kind="force",
            t0=measurements.t0,
        )
        state_series = SignalSeries(
            dt=self.cfg.dt,
            labels=self.model.labels,
            data=states,
            kind="displacement",
            t0=measurements.t0,
        )
        return force_series, state_series, timing_stats(times)


def akf_setup(model: PartitionedModel, cfg: AkfConfig) -> AugmentedKalmanFilter:
    """Create an :class:`AugmentedKalmanFilter` (alias constructor)."""
    return AugmentedKalmanFilter(model, cfg)


def akf_run(filter_: AugmentedKalmanFilter, measurements: SignalSeries):
    """Run a filter over a measurement series; see :meth:`AugmentedKalmanFilter.run`."""
    return filter_.run(measurements)
