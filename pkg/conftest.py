"""
Shared pytest fixtures
"""

import os
import sys

import pytest

# Make the top-level config module and the modules package importable
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from modules.constitutive import ModelKind, builtin_model
from modules.grid import build_grid
from modules.residual import NondimParams


@pytest.fixture
def reference_params():
    """Reference settings with Model 1's p_gamma and no axial gradient"""
    return NondimParams(re=10.0, pe=1000.0, p_f=1.0, p_g=5.0, p_gamma=125.28, p_beta=1.0)


@pytest.fixture
def small_grid():
    return build_grid(21, 5.0)


@pytest.fixture(params=list(ModelKind), ids=lambda kind: kind.value)
def any_model(request):
    return builtin_model(request.param)
