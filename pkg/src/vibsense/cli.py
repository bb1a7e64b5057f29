"""Pipeline command line.

Offline stages (``build``, ``reduce``, ``calibrate``) prepare and
serialize the model artifacts; ``simulate`` generates synthetic truth
data; the online stages (``identify``, ``akf``) stream measurements into
force/response estimates; ``metrics`` and ``bench`` report accuracy and
latency, rendering figures alongside every delimited output.

All stages share one config file (see :mod:`vibsense.config`); any value
can be overridden with ``--set section.key=value``. Artifacts live in the
``--out`` directory so the stages chain without extra wiring.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import plots
from .akf import AkfConfig, AugmentedKalmanFilter
from .config import RunConfig
from .errors import ConfigError, SampleRateMismatch, UnknownLabel, VibsenseError
from .identify import IdentifySession, NewmarkParams, NewmarkSimulator
from .metrics import fde, timing_stats
from .model import (
    BeamSpec,
    build_cantilever_beam,
    build_spring_mass_chain,
    import_matrices,
    load_model,
    save_model,
)
from .partition import reorder
from .regularize import default_alpha_grid, lcurve_select
from .rom import eigenvalue_error, load_reduced, partition_by_labels, reduce_model, save_reduced
from .signals import SignalSeries, add_noise, bandlimited_random_force, chirp_tone_force, read_csv, snr_db, write_csv


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# config -> objects


def _model_from_config(cfg: RunConfig):
    kind = cfg.get_str("model", "kind", "beam")
    if kind == "beam":
        spec = BeamSpec(
            length=cfg.get_float("model", "length", 0.170),
            width=cfg.get_float("model", "width", 0.013),
            thickness=cfg.get_float("model", "thickness", 0.0012),
            youngs_modulus=cfg.get_float("model", "youngs_modulus", 69e9),
            density=cfg.get_float("model", "density", 2700.0),
            n_elements=cfg.get_int("model", "n_elements", 50),
            clamped_node=cfg.get_int("model", "clamped_node", 0),
        )
        return build_cantilever_beam(spec)
    if kind == "chain":
        return build_spring_mass_chain(
            n_masses=cfg.get_int("model", "n_masses"),
            mass=cfg.get_float("model", "mass", 1.0),
            stiffness=cfg.get_float("model", "stiffness", 1.0),
            fixed_ends=cfg.get_int("model", "fixed_ends", 1),
        )
    if kind == "import":
        return import_matrices(
            cfg.get_str("model", "mass_path"),
            cfg.get_str("model", "stiffness_path"),
            cfg.get_str("model", "labels_path", None),
        )
    raise ConfigError(f"model.kind must be beam, chain or import, got {kind!r}")


def _load_or_build_model(cfg: RunConfig, out: Path):
    model_dir = out / "model"
    if model_dir.exists():
        return load_model(model_dir)
    return _model_from_config(cfg)


def _load_or_build_reduced(cfg: RunConfig, out: Path):
    archive = out / "reduced.zip"
    if archive.exists():
        return load_reduced(archive)
    model = _load_or_build_model(cfg, out)
    part = partition_by_labels(model, cfg.get_list("partition", "masters"))
    return reduce_model(
        model,
        part,
        n_modes=cfg.get_int("reduction", "n_modes"),
        damping_a=cfg.get_float("reduction", "damping_a", 0.0),
        damping_b=cfg.get_float("reduction", "damping_b", 0.0),
    )


def _partitioned_from_config(cfg: RunConfig, out: Path):
    reduced = _load_or_build_reduced(cfg, out)
    measured = cfg.get_list("partition", "measured")
    if not measured:
        raise ConfigError("partition.measured must list at least one channel")
    return reorder(reduced, measured)


def _params_from_config(cfg: RunConfig) -> NewmarkParams:
    return NewmarkParams(
        dt=cfg.get_float("integrator", "dt"),
        beta=cfg.get_float("integrator", "beta", 0.25),
        delta=cfg.get_float("integrator", "delta", 0.5),
    )


def _input_kind(cfg: RunConfig) -> str:
    kind = cfg.get_str("integrator", "input", "displacement")
    if kind not in ("displacement", "acceleration"):
        raise ConfigError(f"integrator.input must be displacement or acceleration, got {kind!r}")
    return kind


def _alpha_from_config(cfg: RunConfig, out: Path) -> float:
    raw = cfg.get_str("regularization", "alpha", "0.0")
    if raw.strip().lower() == "lcurve":
        alpha_file = out / "alpha.json"
        if not alpha_file.exists():
            raise ConfigError(
                "regularization.alpha = lcurve but no alpha.json found; run calibrate first"
            )
        return float(json.loads(alpha_file.read_text())["alpha"])
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"regularization.alpha must be a number or 'lcurve', got {raw!r}") from None


def _figures_dir(out: Path) -> Path:
    fig_dir = out / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    return fig_dir


# ---------------------------------------------------------------------------
# subcommands


def cmd_build(cfg: RunConfig, out: Path, seed: int, args) -> int:
    model = _model_from_config(cfg)
    save_model(model, out / "model")
    print(f"built model: {model.n} DOFs -> {out / 'model'}")
    return 0


def cmd_reduce(cfg: RunConfig, out: Path, seed: int, args) -> int:
    model = _load_or_build_model(cfg, out)
    part = partition_by_labels(model, cfg.get_list("partition", "masters"))
    reduced = reduce_model(
        model,
        part,
        n_modes=cfg.get_int("reduction", "n_modes"),
        damping_a=cfg.get_float("reduction", "damping_a", 0.0),
        damping_b=cfg.get_float("reduction", "damping_b", 0.0),
    )
    save_reduced(reduced, out / "reduced.zip")
    count = min(cfg.get_int("reduction", "error_modes", 10), reduced.n_reduced, model.n)
    errors = eigenvalue_error(model, reduced, count)
    with open(out / "eigenvalue_errors.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "error_pct"])
        for i, err in enumerate(errors, start=1):
            writer.writerow([i, _fmt(err)])
    if not args.no_figures:
        plots.save_eigenvalue_errors(errors, _figures_dir(out) / "eigenvalue_errors.png")
    print(
        f"reduced {model.n} -> {reduced.n_reduced} DOFs "
        f"({reduced.n_master} master + {reduced.n_modes} modal); "
        f"max |error| over {count} modes: {np.abs(errors).max():.3e} %"
    )
    return 0


def _excitation_forces(cfg: RunConfig, pm, n_steps: int, dt: float, seed: int):
    """Force history (n_steps, n) plus the time grid it is sampled on."""
    t_grid = dt * (np.arange(n_steps) + 1)
    forces = np.zeros((n_steps, pm.n))
    kind = cfg.get_str("excitation", "kind", "chirp_tone")
    labels = list(pm.labels)

    def _target_column(label: str) -> int:
        if label not in labels:
            raise UnknownLabel(f"excitation target {label!r} is not a model channel")
        col = labels.index(label)
        if col >= pm.n_measured:
            raise ConfigError(
                f"excitation target {label!r} is not a measured channel; "
                "identified forces live on measured DOFs"
            )
        return col

    if kind == "chirp_tone":
        for item in cfg.get_list("excitation", "assignments"):
            if "@" not in item:
                raise ConfigError(
                    f"excitation.assignments entries must be profile@label, got {item!r}"
                )
            profile, label = (s.strip() for s in item.split("@", 1))
            series = chirp_tone_force(profile, t_grid)
            forces[:, _target_column(label)] += series.data[:, 0]
    elif kind == "bandlimited":
        targets = cfg.get_list("excitation", "targets")
        children = np.random.SeedSequence(seed).spawn(len(targets))
        for label, child in zip(targets, children):
            series = bandlimited_random_force(
                (
                    cfg.get_float("excitation", "band_lo", 5.0),
                    cfg.get_float("excitation", "band_hi", 160.0),
                ),
                amplitude=cfg.get_float("excitation", "amplitude", 1.0),
                duration=n_steps * dt,
                dt=dt,
                seed=child,
            )
            forces[: series.n_samples, _target_column(label)] += series.data[:, 0]
    else:
        raise ConfigError(f"excitation.kind must be chirp_tone or bandlimited, got {kind!r}")
    return forces, t_grid


def cmd_simulate(cfg: RunConfig, out: Path, seed: int, args) -> int:
    pm = _partitioned_from_config(cfg, out)
    params = _params_from_config(cfg)
    input_kind = _input_kind(cfg)
    duration = cfg.get_float("excitation", "duration", 0.1)
    n_steps = int(round(duration / params.dt))
    if n_steps < 1:
        raise ConfigError("excitation.duration must cover at least one step")
    forces, _ = _excitation_forces(cfg, pm, n_steps, params.dt, seed)

    sim = NewmarkSimulator.from_model(pm, params)
    disp, _, acc = sim.simulate(forces)

    common = dict(dt=params.dt, t0=params.dt)
    nm = pm.n_measured
    force_series = SignalSeries(
        labels=pm.measured_labels, data=forces[:, :nm], kind="force", **common
    )
    disp_series = SignalSeries(labels=pm.labels, data=disp, kind="displacement", **common)
    acc_series = SignalSeries(labels=pm.labels, data=acc, kind="acceleration", **common)
    source = disp_series if input_kind == "displacement" else acc_series
    clean = SignalSeries(
        labels=pm.measured_labels, data=source.data[:, :nm], kind=input_kind, **common
    )
    sigma = cfg.get_float("noise", "sigma_fraction", 0.0)
    noisy = add_noise(clean, sigma, seed) if sigma > 0 else clean

    write_csv(force_series, out / "true_forces.csv")
    write_csv(disp_series, out / "true_displacements.csv")
    write_csv(acc_series, out / "true_accelerations.csv")
    write_csv(clean, out / "clean_measurements.csv")
    write_csv(noisy, out / "measurements.csv")
    print(
        f"simulated {n_steps} steps at dt={params.dt:g} s "
        f"({input_kind} measurements, noise {sigma:g}) -> {out}"
    )
    return 0


def cmd_calibrate(cfg: RunConfig, out: Path, seed: int, args) -> int:
    pm = _partitioned_from_config(cfg, out)
    params = _params_from_config(cfg)
    input_kind = _input_kind(cfg)
    measurements = read_csv(out / "measurements.csv", kind=input_kind)
    window = cfg.get_int("regularization", "window", 200)
    window = min(window, measurements.n_samples)
    calibration = SignalSeries(
        dt=measurements.dt,
        labels=measurements.labels,
        data=measurements.data[:window],
        kind=input_kind,
        t0=measurements.t0,
    )
    session = IdentifySession(pm, params, alpha=0.0, input_kind=input_kind)
    grid = default_alpha_grid(session.h_eff, cfg.get_int("regularization", "grid_count", 50))
    result = lcurve_select(session, calibration, grid)
    (out / "alpha.json").write_text(
        json.dumps(
            {"alpha": result.alpha, "index": result.index, "degenerate": result.degenerate},
            indent=1,
        )
    )
    with open(out / "lcurve.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "residual_norm", "solution_norm"])
        for p in result.points:
            writer.writerow([_fmt(p.alpha), _fmt(p.residual_norm), _fmt(p.solution_norm)])
    if not args.no_figures:
        plots.save_lcurve(result.points, result.index, _figures_dir(out) / "lcurve.png")
    print(
        f"selected alpha = {result.alpha:.6e} "
        f"(grid point {result.index + 1}/{len(result.points)}"
        f"{', degenerate curve' if result.degenerate else ''})"
    )
    return 0


def _stream_identify(session: IdentifySession, in_path, force_path, resp_path, timing_path):
    """Row-by-row identification: read one sample, write one sample, flush."""
    wanted = list(session.model.measured_labels)
    times = []
    with open(in_path, newline="") as fin, open(force_path, "w", newline="") as ffor, open(
        resp_path, "w", newline=""
    ) as fres, open(timing_path, "w", newline="") as ftim:
        reader = csv.reader(fin)
        header = next(reader, None)
        if header is None or header[0] != "t":
            raise VibsenseError(f"{in_path}: malformed measurement CSV header")
        channels = header[1:]
        if set(wanted) <= set(channels):
            cols = [channels.index(lab) + 1 for lab in wanted]
        elif len(channels) == len(wanted):
            cols = list(range(1, len(channels) + 1))
        else:
            raise UnknownLabel(
                f"measurement channels {channels} do not cover measured DOFs {wanted}"
            )
        force_writer = csv.writer(ffor)
        force_writer.writerow(["t", *wanted])
        resp_writer = csv.writer(fres)
        resp_writer.writerow(["t", *session.model.labels])
        timing_writer = csv.writer(ftim)
        timing_writer.writerow(["step", "elapsed_s"])

        dt = session.params.dt
        t_prev = None
        for step_no, row in enumerate(reader, start=1):
            if not row:
                continue
            t_now = float(row[0])
            if t_prev is not None and abs((t_now - t_prev) - dt) > 1e-9 * dt:
                raise SampleRateMismatch(
                    f"sample interval {t_now - t_prev !r} != integrator dt {dt!r}"
                )
            t_prev = t_now
            y = np.array([float(row[c]) for c in cols])
            result = session.step(y)
            times.append(result.elapsed)
            force_writer.writerow([_fmt(t_now)] + [_fmt(v) for v in result.force])
            resp_writer.writerow([_fmt(t_now)] + [_fmt(v) for v in result.displacement])
            timing_writer.writerow([step_no, _fmt(result.elapsed)])
            ffor.flush()
            fres.flush()
    return times


def cmd_identify(cfg: RunConfig, out: Path, seed: int, args) -> int:
    pm = _partitioned_from_config(cfg, out)
    params = _params_from_config(cfg)
    session = IdentifySession(
        pm, params, alpha=_alpha_from_config(cfg, out), input_kind=_input_kind(cfg)
    )
    times = _stream_identify(
        session,
        out / "measurements.csv",
        out / "identified_forces.csv",
        out / "identified_responses.csv",
        out / "identify_timing.csv",
    )
    stats = timing_stats(times)
    print(
        f"identified {len(times)} steps: total {stats.total:.4f} s, "
        f"mean {stats.mean * 1e3:.4f} ms/step, p99 {stats.p99 * 1e3:.4f} ms"
    )
    return 0


def cmd_akf(cfg: RunConfig, out: Path, seed: int, args) -> int:
    if _input_kind(cfg) != "acceleration":
        raise ConfigError(
            "akf requires integrator.input = acceleration (acceleration observations)"
        )
    pm = _partitioned_from_config(cfg, out)
    akf_cfg = AkfConfig(
        dt=cfg.get_float("integrator", "dt"),
        process_noise_state=cfg.get_float("akf", "process_noise_state"),
        process_noise_force=cfg.get_float("akf", "process_noise_force"),
        measurement_noise=cfg.get_float("akf", "measurement_noise"),
        initial_covariance=cfg.get_float("akf", "initial_covariance", 1.0),
    )
    filt = AugmentedKalmanFilter(pm, akf_cfg)
    measurements = read_csv(out / "measurements.csv", kind="acceleration")
    forces, states, stats = filt.run(measurements)
    write_csv(forces, out / "akf_forces.csv")
    write_csv(states, out / "akf_states.csv")
    with open(out / "akf_timing.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "elapsed_s"])
        for i, t in enumerate(filt.last_run_times, start=1):
            writer.writerow([i, _fmt(t)])
    print(
        f"akf filtered {forces.n_samples} steps: total {stats.total:.4f} s, "
        f"mean {stats.mean * 1e3:.4f} ms/step"
    )
    return 0


def cmd_metrics(cfg: RunConfig, out: Path, seed: int, args) -> int:
    case_id = cfg.get_str("run", "case_id", "case")
    rows = []
    reference = read_csv(out / cfg.get_str("metrics", "reference", "true_forces.csv"), "force")
    candidate = read_csv(
        out / cfg.get_str("metrics", "candidate", "identified_forces.csv"), "force"
    )
    f0 = cfg.get_float("metrics", "f0", 0.0)
    fmax = cfg.get_float("metrics", "fmax", 0.0) or None
    common = [lab for lab in reference.labels if lab in candidate.labels]
    if not common:
        raise ConfigError("metrics.reference and metrics.candidate share no channels")
    fig_dir = _figures_dir(out) if not args.no_figures else None
    for lab in common:
        report = fde(reference, candidate, channel=lab, f0=f0, fmax=fmax)
        rows.append((case_id, lab, "fde", report.value))
        if fig_dir is not None:
            safe = lab.replace(":", "_").replace("/", "_")
            plots.save_channel_overlay(
                reference, candidate, lab, fig_dir / f"overlay_{safe}.png",
                title=f"{lab} (FDE {report.value:.4g})",
            )
    if cfg.has("metrics", "noisy") and cfg.has("metrics", "clean"):
        noisy = read_csv(out / cfg.get_str("metrics", "noisy"), "measurement")
        clean = read_csv(out / cfg.get_str("metrics", "clean"), "measurement")
        for lab, value in zip(noisy.labels, snr_db(noisy, clean)):
            rows.append((case_id, lab, "snr_db", value))
    eig_csv = out / "eigenvalue_errors.csv"
    if eig_csv.exists():
        with open(eig_csv, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for mode, err in reader:
                rows.append((case_id, f"mode{mode}", "eigenvalue_error_pct", float(err)))
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case_id", "channel", "metric", "value"])
        for case, lab, metric, value in rows:
            writer.writerow([case, lab, metric, _fmt(value)])
    for case, lab, metric, value in rows:
        print(f"{case} {lab} {metric} = {value:.6g}")
    return 0


def cmd_bench(cfg: RunConfig, out: Path, seed: int, args) -> int:
    pm = _partitioned_from_config(cfg, out)
    params = _params_from_config(cfg)
    session = IdentifySession(
        pm, params, alpha=_alpha_from_config(cfg, out), input_kind=_input_kind(cfg)
    )
    meas_path = out / "measurements.csv"
    steps = cfg.get_int("bench", "steps", 1000)
    if meas_path.exists():
        measurements = read_csv(meas_path, kind=_input_kind(cfg))
        data = measurements.data[:steps]
    else:
        data = np.zeros((steps, pm.n_measured))
    times = np.empty(data.shape[0])
    for i in range(data.shape[0]):
        times[i] = session.step(data[i]).elapsed
    with open(out / "bench_latency.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "elapsed_s"])
        for i, t in enumerate(times, start=1):
            writer.writerow([i, _fmt(t)])
    if not args.no_figures:
        plots.save_step_latency(times, _figures_dir(out) / "latency.png", budget=1e-3)
    stats = timing_stats(times)
    print(
        f"bench over {times.size} steps (n={pm.n}): mean {stats.mean * 1e3:.4f} ms, "
        f"max {stats.max * 1e3:.4f} ms, p99 {stats.p99 * 1e3:.4f} ms"
    )
    return 0


# ---------------------------------------------------------------------------
# argument parsing


_COMMANDS = {
    "build": cmd_build,
    "reduce": cmd_reduce,
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "identify": cmd_identify,
    "akf": cmd_akf,
    "metrics": cmd_metrics,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vibsense",
        description="Real-time virtual sensing: force identification and response reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in _COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__)
        p.add_argument("--config", required=True, help="experiment config file (INI)")
        p.add_argument("--out", default="out", help="artifact directory (default: out)")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable)",
        )
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config, args.set)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        seed = args.seed if args.seed is not None else cfg.get_int("run", "seed", 0)
        return args.func(cfg, out, seed, args) or 0
    except VibsenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
