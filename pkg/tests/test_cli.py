import json
from pathlib import Path

import numpy as np
import pytest

import main as batch
from drt.errors import EXIT_CHECKS_FAILED, EXIT_CONFIG_ERROR, EXIT_OK
from helpers.file_utils import load_complex_csv
from isac_drt import run

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SKEWED = """
[scenario]
M = 2
N_s = 2
N_c = 2
T = 3
P_T = 1.0
sigma_s2 = 1.0
sigma_c2 = 0.1
R_h = 1, 0, 0, 0; 0, 2, 0, 0; 0, 0, 3, 0; 0, 0, 0, 4
comm_samples = 20

[run]
trials = 500
"""


@pytest.fixture
def skewed_config(tmp_path):
    path = tmp_path / "skewed.cfg"
    path.write_text(SKEWED, encoding="utf-8")
    return str(path)


def test_help_and_usage_errors(capsys):
    assert run(["--help"]) == EXIT_OK
    assert run([]) == EXIT_CONFIG_ERROR
    assert run(["verify", "everything", "--config", "x.cfg"]) == EXIT_CONFIG_ERROR
    assert run(["mi", "--config", "x.cfg", "--scheme", "gaussian_iid",
                "--trials", "0"]) == EXIT_CONFIG_ERROR
    capsys.readouterr()


def test_missing_config_file(tmp_path):
    missing = str(tmp_path / "absent.cfg")
    assert run(["optimize", "--config", missing]) == EXIT_CONFIG_ERROR


def test_verify_scalar_writes_report(tmp_path):
    out = tmp_path / "reports" / "scalar.json"
    code = run(["verify", "scalar", "--config", str(CONFIGS / "scalar.cfg"),
                "--trials", "50000", "--out", str(out)])
    report = json.loads(out.read_text(encoding="utf-8"))
    assert code == (EXIT_OK if report["pass"] else EXIT_CHECKS_FAILED)
    assert report["seed"] == 7
    assert report["scenario"]["M"] == 1
    assert {check["name"] for check in report["checks"]} >= {"prop2_psk_mse"}


def test_verify_scalar_rejects_vector_scenario():
    code = run(["verify", "scalar", "--config", str(CONFIGS / "trm.cfg"),
                "--trials", "100"])
    assert code == EXIT_CONFIG_ERROR


def test_optimize_methods(skewed_config, tmp_path):
    assert run(["optimize", "--config", skewed_config, "--method", "wf"]) == EXIT_CONFIG_ERROR

    out = tmp_path / "R.csv"
    assert run(["optimize", "--config", skewed_config, "--method", "pg",
                "--out", str(out)]) == EXIT_OK
    R = load_complex_csv(str(out))
    assert R.shape == (2, 2)
    assert np.trace(R).real == pytest.approx(1.0)


def test_optimize_closed_form(tmp_path):
    out = tmp_path / "R.csv"
    assert run(["optimize", "--config", str(CONFIGS / "trm.cfg"),
                "--out", str(out)]) == EXIT_OK
    np.testing.assert_allclose(load_complex_csv(str(out)), np.eye(2) / 2, atol=1e-12)


def test_capacity_payload(tmp_path):
    out = tmp_path / "capacity.json"
    assert run(["capacity", "--config", str(CONFIGS / "scalar.cfg"),
                "--trials", "2000", "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["high_snr"]["L"] == 1
    assert payload["high_snr"]["pre_log"] == pytest.approx(0.5)
    assert [p["scheme"] for p in payload["scalar_tradeoff"]] == [
        "psk2", "psk4", "psk8", "psk16", "gaussian"
    ]


def test_mi_command(skewed_config):
    assert run(["mi", "--config", skewed_config, "--scheme", "haar"]) == EXIT_OK
    assert run(["mi", "--config", skewed_config, "--scheme", "psk"]) == EXIT_CONFIG_ERROR


def test_drt_writes_curve(skewed_config, tmp_path):
    out = tmp_path / "curve.csv"
    assert run(["drt", "--config", skewed_config, "--points", "3",
                "--trials", "200", "--out", str(out)]) == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("alpha,scheme,")
    assert len(lines) == 7

    again = tmp_path / "again.csv"
    run(["drt", "--config", skewed_config, "--points", "3", "--trials", "200",
         "--jobs", "4", "--out", str(again)])
    assert again.read_text(encoding="utf-8") == out.read_text(encoding="utf-8")

    assert run(["drt", "--config", skewed_config, "--points", "1",
                "--out", str(out)]) == EXIT_CONFIG_ERROR


def test_batch_runner(skewed_config, tmp_path):
    listing = tmp_path / "Scenarios.txt"
    listing.write_text("# comment\n\nskewed.cfg\nabsent.cfg\n", encoding="utf-8")
    assert batch.read_scenario_list(str(listing)) == [
        str(tmp_path / "skewed.cfg"), str(tmp_path / "absent.cfg")
    ]

    reports = tmp_path / "Reports"
    assert batch.main(str(listing), str(reports)) == EXIT_CONFIG_ERROR
    written = sorted(path.name for path in reports.iterdir())
    assert written == ["skewed_bounds.json", "skewed_vector.json"]
