"""
Tests for study configuration files
"""

import glob
import os

import pytest

from modules.config_loader import load_config, parse_config
from modules.constitutive import ModelKind
from modules.errors import ConfigError
from modules.forcing import BcKind, WallKind

STUDIES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'studies')

MINIMAL = """model = model1
cycles = 3.5

[nondim]
re = 10
pe = 1000
p_f = 1
p_g = 5
p_beta = 1
p_gamma = 125.28
p_a = 0
p_b = 0
"""


def test_minimal_config():
    study = parse_config(MINIMAL)
    assert study.model.kind is ModelKind.MODEL1
    assert study.cycles == (3.5,)
    assert study.nondim.re == 10.0
    assert study.params.p_gamma == 125.28
    assert study.n_nodes == 201
    assert study.bc_mode.kind is BcKind.RAMP
    assert study.wall.kind is WallKind.OSCILLATING


def test_comments_and_blank_lines():
    study = parse_config("# header comment\n\n" + MINIMAL.replace("re = 10", "re = 10  # Reynolds"))
    assert study.nondim.re == 10.0


def test_invalid_value_names_key():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("p_gamma = 125.28", "p_gamma = -1"))
    assert info.value.key == 'p_gamma'
    assert info.value.line_number == 10


def test_both_input_groups():
    text = MINIMAL + "\n[geometry]\nr_i = 1\n"
    with pytest.raises(ConfigError, match="exactly one input group"):
        parse_config(text)


def test_no_input_group():
    with pytest.raises(ConfigError, match="exactly one input group"):
        parse_config("model = model1\n")


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("p_f = 1", "p_q = 1"))
    assert info.value.line_number == 7
    assert info.value.key == 'p_q'
    assert str(info.value).startswith("line 7:")


def test_unknown_section():
    with pytest.raises(ConfigError, match=r"unknown section \[solver\]"):
        parse_config(MINIMAL + "[solver]\n")


def test_missing_equals():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "[grid]\nn_nodes 101\n")
    assert info.value.line_number == 14


def test_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate key"):
        parse_config(MINIMAL + "re = 20\n")


def test_bad_number():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("pe = 1000", "pe = lots"))
    assert info.value.key == 'pe'


def test_missing_required_key():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("pe = 1000\n", ""))
    assert info.value.key == 'pe'


def test_missing_model():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("model = model1\n", ""))


def test_unknown_model():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("model1", "model3"))
    assert info.value.key == 'kind'
    assert info.value.line_number == 1


def test_model_overrides():
    text = MINIMAL.replace("model = model1\n", "") + "[model]\nkind = model1\nn = -0.3\n"
    assert parse_config(text).model.n_const == -0.3


def test_invalid_model_override():
    text = MINIMAL.replace("model = model1\n", "") + "[model]\nkind = model1\ngamma = -1\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == 'gamma'


def test_boundary_and_integrator_sections():
    text = MINIMAL + ("\n[bc]\nmode = feedback\nc_bar = 0.2\nwall = constant\nwall_value = 2\n"
                      "\n[integrator]\nrel_tol = 1e-5\nmax_rejections = 4\n\n[grid]\nn_nodes = 51\n")
    study = parse_config(text)
    assert study.bc_mode.kind is BcKind.FEEDBACK
    assert study.bc_mode.c_bar == 0.2
    assert study.wall.kind is WallKind.CONSTANT
    assert study.wall.value == 2.0
    assert study.integrator.rel_tol == 1e-5
    assert study.integrator.max_rejections == 4
    assert study.n_nodes == 51


def test_bad_enum():
    with pytest.raises(ConfigError, match="must be one of"):
        parse_config(MINIMAL + "[bc]\nmode = sometimes\n")


def test_bad_cycles():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("cycles = 3.5", "cycles = 3.5, soon"))
    assert info.value.key == 'cycles'


def test_too_few_nodes():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "[grid]\nn_nodes = 3\n")
    assert info.value.key == 'n_nodes'


def test_geometry_group():
    text = """model = model1

[geometry]
r_i = 1.0
r_o = 1.0
omega_bar = 1.0
f_theta = 1.0
f_z = 1.0
a = 0
b = 0
rho_f = 250
mu0_bar = 1
d_c = 4e-5
"""
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == 'r_i'


def test_load_config_names_study_after_file(tmp_path):
    path = tmp_path / "quick_run.cfg"
    path.write_text(MINIMAL, encoding="utf-8")
    assert load_config(path).name == "quick_run"

    path.write_text(MINIMAL + "[output]\nname = custom\n", encoding="utf-8")
    assert load_config(path).name == "custom"


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "absent.cfg")


@pytest.mark.parametrize("path", sorted(glob.glob(os.path.join(STUDIES_DIR, '*.cfg'))),
                         ids=os.path.basename)
def test_shipped_studies_parse(path):
    study = load_config(path)
    assert study.params.p_g == pytest.approx(5.0)
    assert study.params.re == pytest.approx(10.0)


def test_duplicate_section():
    with pytest.raises(ConfigError, match=r"duplicate section \[grid\]"):
        parse_config(MINIMAL + "[grid]\nn_nodes = 51\n[grid]\n")


def test_root_cycles_with_output_section():
    study = parse_config(MINIMAL + "[output]\nname = both\n")
    assert study.cycles == (3.5,)
    assert study.name == "both"
