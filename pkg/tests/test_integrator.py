"""
Tests for the TR-BDF2 integrator
"""

import math

import numpy as np
import pytest

from modules.constitutive import ModelKind, builtin_model
from modules.errors import IntegrationAborted, NewtonDivergence, ParameterError
from modules.forcing import outer_concentration_ramp
from modules.grid import build_grid
from modules.integrator import (
    A_COEFF, B_COEFF, GAMMA, IntegratorConfig, TRBDF2Integrator, integrate, step,
)
from modules.oracle import LinearODESystem, dense_propagator, diffusion_matrix
from modules.residual import NondimParams, SemiDiscreteSystem, StateVector
from modules.verification import ORDER_RANGE, temporal_errors


class FailingSystem(LinearODESystem):
    """Scalar decay whose right-hand side turns non-finite once time advances"""

    def __init__(self):
        super().__init__([[-1.0]])

    def rhs(self, u, t):
        if t > 0:
            return np.full_like(u, np.nan)
        return super().rhs(u, t)


def test_method_coefficients():
    assert GAMMA == pytest.approx(2.0 - math.sqrt(2.0))
    # BDF2 stage reproduces constants
    assert A_COEFF - B_COEFF == pytest.approx(1.0)


@pytest.mark.parametrize("field, value", [("rel_tol", 0.0), ("dt_max", -1.0), ("max_newton", 0)])
def test_config_validation(field, value):
    with pytest.raises(ParameterError):
        IntegratorConfig(**{field: value})


def test_single_step_on_scalar_decay():
    u_new, report = step(LinearODESystem([[-1.0]]), np.array([1.0]), 0.0, 0.05)
    assert report.t_reached == 0.05
    assert report.error_estimate > 0
    assert u_new[0] == pytest.approx(math.exp(-0.05), abs=5e-5)


def test_tiny_step_is_consistent():
    grid = build_grid(11, 5.0)
    system = LinearODESystem(diffusion_matrix(grid, 100.0))
    u = 0.1 + 0.2 * grid.nodes ** 2
    u_new, report = step(system, u, 0.0, 1e-8)
    assert report.error_estimate < 1.0
    np.testing.assert_allclose(u_new, u, atol=1e-8)


def test_non_positive_step():
    with pytest.raises(ParameterError):
        step(LinearODESystem([[-1.0]]), np.array([1.0]), 0.0, 0.0)


def test_temporal_order_two():
    errors = temporal_errors()
    ratios = [a / b for a, b in zip(errors, errors[1:])]
    low, high = ORDER_RANGE
    assert all(low <= r <= high for r in ratios), ratios


def test_adaptive_run_matches_propagator():
    grid = build_grid(21, 5.0)
    matrix = diffusion_matrix(grid, 100.0)
    c0 = 0.1 + 0.2 * grid.nodes ** 2
    result = integrate(LinearODESystem(matrix), c0, 2.0, [1.0, 2.0])
    for t, u in result.outputs:
        np.testing.assert_allclose(u, dense_propagator(matrix, t) @ c0, atol=1e-5)


def test_lands_exactly_on_output_times():
    grid = build_grid(11, 5.0)
    requested = [0.0, 0.3, 1.0 / 3.0, 2.0]
    result = integrate(LinearODESystem(diffusion_matrix(grid, 100.0)), np.ones(grid.n_nodes), 2.0, requested)
    assert [t for t, _ in result.outputs] == requested
    assert result.t_reached == 2.0
    assert result.stats.accepted_steps > 0


def test_zero_length_run_returns_initial_state():
    u0 = np.array([0.5])
    result = integrate(LinearODESystem([[-1.0]]), u0, 0.0, [0.0])
    assert len(result.outputs) == 1
    np.testing.assert_array_equal(result.outputs[0][1], u0)
    assert result.stats.accepted_steps == 0


def test_unsorted_output_times():
    with pytest.raises(ParameterError):
        integrate(LinearODESystem([[-1.0]]), np.array([1.0]), 1.0, [0.5, 0.2])


def test_newton_divergence_in_step():
    with pytest.raises(NewtonDivergence):
        step(FailingSystem(), np.array([1.0]), 0.0, 0.1)


def test_abort_keeps_partial_result():
    cfg = IntegratorConfig(max_rejections=3)
    with pytest.raises(IntegrationAborted) as info:
        integrate(FailingSystem(), np.array([1.0]), 1.0, [0.0, 1.0], cfg)
    assert info.value.last_good_t == 0.0
    partial = info.value.partial
    assert [t for t, _ in partial.outputs] == [0.0]
    assert partial.stats.rejected_steps == 3
    assert partial.stats.newton_failures == 3


def test_observer_sees_every_accepted_step():
    seen = []
    result = integrate(LinearODESystem([[-2.0]]), np.array([1.0]), 1.0, [1.0],
                       observer=lambda t, u: seen.append(t))
    assert len(seen) == result.stats.accepted_steps
    assert seen[-1] == 1.0
    assert all(b > a for a, b in zip(seen, seen[1:]))


def test_ramp_values_imposed_exactly(reference_params):
    grid = build_grid(21, 5.0)
    system = SemiDiscreteSystem(grid, builtin_model(ModelKind.NEWTONIAN), reference_params)
    u0 = StateVector.rest(grid.n_nodes, 0.1).to_vector()
    result = integrate(system, u0, 2.5, [1.0, 2.5])
    for t, u in result.outputs:
        c = StateVector.from_vector(u).c
        assert c[-1] == pytest.approx(outer_concentration_ramp(t), abs=1e-15)
    assert StateVector.from_vector(result.outputs[-1][1]).c[-1] == 0.3


def test_concentration_stays_within_bounds(reference_params):
    grid = build_grid(41, 5.0)
    system = SemiDiscreteSystem(grid, builtin_model(ModelKind.NEWTONIAN), reference_params)
    lows, highs = [], []

    def observe(t, u):
        c = StateVector.from_vector(u).c
        lows.append(c.min())
        highs.append(c.max())

    integrate(system, StateVector.rest(grid.n_nodes, 0.1).to_vector(), 3.0, [3.0], observer=observe)
    assert min(lows) >= 0.1 - 1e-9
    assert max(highs) <= 0.3 + 1e-9


def test_stiff_start_from_rest(reference_params):
    grid = build_grid(41, 5.0)
    params = NondimParams(**{**reference_params.as_dict(), 'p_beta': 7.1e-9})
    system = SemiDiscreteSystem(grid, builtin_model(ModelKind.MODEL2A), params)
    integrator = TRBDF2Integrator(system)
    u0 = StateVector.rest(grid.n_nodes, 0.1).to_vector()
    _, report = integrator.step(u0, 0.0, 1e-4)
    assert report.accepted
    assert report.newton_iters <= 2 * integrator.config.max_newton


def test_landing_never_exceeds_dt_max():
    cfg = IntegratorConfig(dt_init=0.1, dt_max=0.1)
    seen = [0.0]
    result = integrate(LinearODESystem([[0.0]]), np.array([1.0]), 0.105, [0.105], cfg,
                       observer=lambda t, u: seen.append(t))
    assert seen[-1] == 0.105
    assert len(seen) == 3
    assert max(b - a for a, b in zip(seen, seen[1:])) <= cfg.dt_max * (1.0 + 1e-12)
    assert result.stats.dt_max <= cfg.dt_max
