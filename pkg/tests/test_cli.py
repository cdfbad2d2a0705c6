"""
Tests for the command-line entry point
"""

import json

import pytest

import config
import modules.grid
from annuflow import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, main, parse_arguments
from modules.errors import NewtonDivergence
from modules.integrator import TRBDF2Integrator

QUICK_STUDY = """model = newtonian
cycles = 0, 0.05

[nondim]
re = 10
pe = 1000
p_f = 1
p_g = 5

[grid]
n_nodes = 11
"""


@pytest.fixture
def study_file(tmp_path):
    path = tmp_path / "quick.cfg"
    path.write_text(QUICK_STUDY, encoding="utf-8")
    return path


def test_parse_arguments():
    args = parse_arguments(['verify', '--fast', '--only', 'operators', 'temporal_order', '-v'])
    assert args.command == 'verify'
    assert args.fast
    assert args.only == ['operators', 'temporal_order']
    assert args.verbose
    assert args.out == config.OUTPUT_DIR


def test_out_after_subcommand():
    assert parse_arguments(['run', 'a.cfg', '--out', 'elsewhere']).out == 'elsewhere'


def test_usage_errors():
    assert main([]) == EXIT_CONFIG
    assert main(['run']) == EXIT_CONFIG
    assert main(['--help']) == EXIT_OK


def test_run_writes_outputs(study_file, tmp_path):
    out = tmp_path / "out"
    assert main(['run', str(study_file), '--out', str(out)]) == EXIT_OK
    assert (out / "quick_cycle_0.csv").is_file()
    assert (out / "quick_cycle_0p05.csv").is_file()
    assert (out / "quick_manifest.json").is_file()


def test_missing_config_file(tmp_path):
    assert main(['run', str(tmp_path / "absent.cfg"), '--out', str(tmp_path)]) == EXIT_IO


def test_invalid_config(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text(QUICK_STUDY.replace("pe = 1000", "pe = -1"), encoding="utf-8")
    assert main(['run', str(path), '--out', str(tmp_path)]) == EXIT_CONFIG


def test_aborted_run_keeps_partial_outputs(study_file, tmp_path, monkeypatch):
    def diverge(self, u, t, dt):
        raise NewtonDivergence("forced", 1)

    monkeypatch.setattr(TRBDF2Integrator, 'step', diverge)
    out = tmp_path / "out"
    assert main(['run', str(study_file), '--out', str(out)]) == EXIT_NUMERICAL
    assert (out / "quick_cycle_0.csv").is_file()
    assert not (out / "quick_cycle_0p05.csv").exists()


def test_verify_selected_checks(tmp_path):
    assert main(['verify', '--fast', '--only', 'operators', '--out', str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "verification_manifest.json").read_text(encoding="utf-8"))
    assert data['config_echo'] == {'mode': "fast", 'select': ['operators']}
    assert data['verification']['passed']
    assert [check['key'] for check in data['verification']['checks']] == ['operators']
    assert (tmp_path / "verification_manifest.html").is_file()


def test_verify_reports_failure(tmp_path, monkeypatch):
    monkeypatch.setattr(modules.grid, 'theta_shear',
                        lambda grid, v: (v[1:] - v[:-1]) / grid.h + 0.5 * (v[:-1] + v[1:]) / grid.rho_half)
    assert main(['verify', '--fast', '--only', 'operators', '--out', str(tmp_path)]) == EXIT_NUMERICAL
    data = json.loads((tmp_path / "verification_manifest.json").read_text(encoding="utf-8"))
    assert not data['verification']['passed']
    assert "FAIL" in (tmp_path / "verification_manifest.html").read_text(encoding="utf-8")


def test_sweep(study_file, tmp_path, monkeypatch):
    monkeypatch.setenv(config.THREADS_ENV_VAR, "1")
    second = tmp_path / "other.cfg"
    second.write_text(QUICK_STUDY.replace("newtonian", "model1"), encoding="utf-8")
    out = tmp_path / "out"

    assert main(['sweep', str(tmp_path / "*.cfg"), '--out', str(out)]) == EXIT_OK
    assert (out / "quick" / "quick_cycle_0p05.csv").is_file()
    assert (out / "other" / "other_cycle_0p05.csv").is_file()
    assert (out / "sweep_comparison.csv").is_file()
    script = (out / "sweep_comparison.gp").read_text(encoding="utf-8")
    assert "'other/other_cycle_0p05.csv' using 1:2" in script
    assert "'quick/quick_cycle_0p05.csv' using 1:2" in script


def test_sweep_without_matches(tmp_path):
    assert main(['sweep', str(tmp_path / "*.cfg"), '--out', str(tmp_path)]) == EXIT_CONFIG


def test_run_compares_models(study_file, tmp_path, monkeypatch):
    monkeypatch.setenv(config.THREADS_ENV_VAR, "1")
    out = tmp_path / "out"
    assert main(['run', str(study_file), '--models', 'newtonian', 'model2a', '--out', str(out)]) == EXIT_OK
    assert (out / "quick_newtonian" / "quick_newtonian_cycle_0p05.csv").is_file()
    assert (out / "quick_model2a" / "quick_model2a_cycle_0p05.csv").is_file()

    lines = (out / "quick_comparison.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("study,model,cycle,t_hat")
    assert [line.split(',')[:3] for line in lines[1:]] == [
        ["quick_newtonian", "newtonian", "0"], ["quick_newtonian", "newtonian", "0.05"],
        ["quick_model2a", "model2a", "0"], ["quick_model2a", "model2a", "0.05"],
    ]
    assert (out / "quick_comparison.gp").is_file()


def test_run_with_unknown_model(study_file, tmp_path):
    assert main(['run', str(study_file), '--models', 'model3', '--out', str(tmp_path)]) == EXIT_CONFIG
