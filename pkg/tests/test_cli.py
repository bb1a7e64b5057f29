"""End-to-end pipeline tests through the command line entry point."""
import numpy as np
import pytest

from vibsense import read_csv
from vibsense.cli import main

CHAIN_CONFIG = """
[run]
case_id = chain-demo
seed = 0

[model]
kind = chain
n_masses = 3
mass = 1.0
stiffness = 400.0

[partition]
masters = 0:x, 1:x
measured = 0:x

[reduction]
n_modes = 1
damping_a = 0.1
damping_b = 1e-4
error_modes = 3

[integrator]
dt = 1e-3
beta = 0.25
delta = 0.5
input = displacement

[excitation]
kind = chirp_tone
assignments = f1x@0:x
duration = 0.5

[noise]
sigma_fraction = 0.0

[regularization]
alpha = 0.0
window = 100

[metrics]
reference = true_forces.csv
candidate = identified_forces.csv
"""


@pytest.fixture
def chain_case(tmp_path):
    config = tmp_path / "case.ini"
    config.write_text(CHAIN_CONFIG)
    out = tmp_path / "out"
    return config, out


def run(config, out, *args):
    return main([*args, "--config", str(config), "--out", str(out)])


def test_full_pipeline_round_trip(chain_case, capsys):
    config, out = chain_case
    for cmd in ("build", "reduce", "simulate", "identify", "metrics"):
        assert run(config, out, cmd) == 0, cmd
    captured = capsys.readouterr().out
    assert "fde" in captured
    metrics = (out / "metrics.csv").read_text().splitlines()
    fde_rows = [line for line in metrics if ",fde," in line]
    assert fde_rows
    for row in fde_rows:
        assert float(row.rsplit(",", 1)[1]) < 1e-6


def test_artifacts_exist(chain_case):
    config, out = chain_case
    for cmd in ("build", "reduce", "simulate", "calibrate", "identify", "bench"):
        assert run(config, out, cmd) == 0, cmd
    for name in (
        "model/mass.mtx",
        "model/stiffness.mtx",
        "model/labels.txt",
        "reduced.zip",
        "eigenvalue_errors.csv",
        "true_forces.csv",
        "true_displacements.csv",
        "true_accelerations.csv",
        "clean_measurements.csv",
        "measurements.csv",
        "alpha.json",
        "lcurve.csv",
        "identified_forces.csv",
        "identified_responses.csv",
        "identify_timing.csv",
        "bench_latency.csv",
        "figures/eigenvalue_errors.png",
        "figures/lcurve.png",
        "figures/latency.png",
    ):
        assert (out / name).exists(), name


def test_simulate_deterministic(chain_case, tmp_path):
    config, out = chain_case
    assert run(config, out, "build") == 0
    assert run(config, out, "reduce") == 0
    assert run(config, out, "simulate", "--set", "noise.sigma_fraction=0.02") == 0
    first = (out / "measurements.csv").read_bytes()
    assert run(config, out, "simulate", "--set", "noise.sigma_fraction=0.02") == 0
    assert (out / "measurements.csv").read_bytes() == first
    assert run(config, out, "simulate", "--set", "noise.sigma_fraction=0.02", "--seed", "9") == 0
    assert (out / "measurements.csv").read_bytes() != first


def test_sample_rate_mismatch_fails(chain_case, capsys):
    config, out = chain_case
    for cmd in ("build", "reduce", "simulate"):
        assert run(config, out, cmd) == 0
    code = run(config, out, "identify", "--set", "integrator.dt=2e-3")
    assert code != 0
    assert "error:" in capsys.readouterr().err


def test_missing_config_value_names_key(tmp_path, capsys):
    config = tmp_path / "broken.ini"
    config.write_text("[model]\nkind = chain\n")
    code = main(["build", "--config", str(config), "--out", str(tmp_path / "out")])
    assert code != 0
    assert "model.n_masses" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    code = main(["build", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)])
    assert code != 0


def test_akf_requires_acceleration(chain_case, capsys):
    config, out = chain_case
    for cmd in ("build", "reduce", "simulate"):
        assert run(config, out, cmd) == 0
    code = run(config, out, "akf")
    assert code != 0
    assert "acceleration" in capsys.readouterr().err


def test_akf_pipeline(chain_case):
    config, out = chain_case
    overrides = ["--set", "integrator.input=acceleration"]
    for cmd in ("build", "reduce", "simulate"):
        assert run(config, out, cmd, *overrides) == 0
    code = run(
        config, out, "akf", *overrides,
        "--set", "akf.process_noise_state=1e-18",
        "--set", "akf.process_noise_force=1e8",
        "--set", "akf.measurement_noise=1e-10",
    )
    assert code == 0
    forces = read_csv(out / "akf_forces.csv", kind="force")
    truth = read_csv(out / "true_forces.csv", kind="force")
    assert forces.n_samples == truth.n_samples
    assert forces.labels == truth.labels


def test_identified_output_streams_rows(chain_case):
    config, out = chain_case
    for cmd in ("build", "reduce", "simulate", "identify"):
        assert run(config, out, cmd) == 0
    ident = read_csv(out / "identified_forces.csv", kind="force")
    truth = read_csv(out / "true_forces.csv", kind="force")
    np.testing.assert_allclose(ident.data, truth.data, atol=1e-7 * np.abs(truth.data).max())
    np.testing.assert_allclose(ident.t, truth.t, rtol=1e-12)


def test_stage_isolation(chain_case):
    # re-running a stage from the serialized artifacts of the previous one
    # reproduces identical outputs (wall-clock timing aside)
    config, out = chain_case
    for cmd in ("build", "reduce", "simulate", "identify"):
        assert run(config, out, cmd) == 0
    forces = (out / "identified_forces.csv").read_bytes()
    responses = (out / "identified_responses.csv").read_bytes()
    assert run(config, out, "identify") == 0
    assert (out / "identified_forces.csv").read_bytes() == forces
    assert (out / "identified_responses.csv").read_bytes() == responses


def test_no_figures_flag(chain_case):
    config, out = chain_case
    assert run(config, out, "build") == 0
    assert run(config, out, "reduce", "--no-figures") == 0
    assert not (out / "figures" / "eigenvalue_errors.png").exists()


def test_lcurve_alpha_flows_into_identify(chain_case):
    config, out = chain_case
    for cmd in ("build", "reduce", "simulate", "calibrate"):
        assert run(config, out, cmd) == 0
    assert run(config, out, "identify", "--set", "regularization.alpha=lcurve") == 0
    assert (out / "identified_forces.csv").exists()


def test_bandlimited_simulation(chain_case):
    config, out = chain_case
    overrides = [
        "--set", "excitation.kind=bandlimited",
        "--set", "excitation.targets=0:x",
        "--set", "excitation.band_lo=2",
        "--set", "excitation.band_hi=40",
        "--set", "excitation.amplitude=3.0",
    ]
    for cmd in ("build", "reduce", "simulate"):
        assert run(config, out, cmd, *overrides) == 0
    truth = read_csv(out / "true_forces.csv", kind="force")
    rms = float(np.sqrt(np.mean(truth.data**2)))
    assert abs(rms - 3.0) < 1e-6
