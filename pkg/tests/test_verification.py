"""
Tests for the acceptance suite
"""

from types import SimpleNamespace

import numpy as np
import pytest

import modules.grid
from modules.verification import (
    ORDER_RANGE, AcceptanceSuite, operator_residuals, refinement_gaps, run_verification, steady_error,
)


def flipped_theta_shear(grid, v):
    return np.diff(v) / grid.h + 0.5 * (v[:-1] + v[1:]) / grid.rho_half


def test_operator_residuals_are_second_order():
    coarse, fine = operator_residuals(51), operator_residuals(101)
    for name in ('couette', 'poiseuille'):
        assert ORDER_RANGE[0] <= coarse[name] / fine[name] <= ORDER_RANGE[1]


def test_operator_check_passes():
    report = run_verification(fast=True, select=['operators'])
    assert report.passed
    assert [r.key for r in report.results] == ['operators']


def test_operator_check_catches_sign_error(monkeypatch):
    monkeypatch.setattr(modules.grid, 'theta_shear', flipped_theta_shear)
    report = run_verification(fast=True, select=['operators'])
    assert not report.passed


def test_temporal_order_check():
    assert run_verification(fast=True, select=['temporal_order']).passed


def test_fast_mode_skips_large_grids():
    report = run_verification(fast=True, select=['couette', 'self_convergence'])
    assert all(r.skipped for r in report.results)
    assert report.passed


def test_progress_callback():
    seen = []
    run_verification(fast=True, select=['operators', 'temporal_order'], progress=seen.append)
    assert [r.key for r in seen] == ['operators', 'temporal_order']


def test_failing_check_is_reported(monkeypatch):
    def explode(self):
        raise RuntimeError("boom")

    monkeypatch.setattr(AcceptanceSuite, 'check_operators', explode)
    report = AcceptanceSuite(fast=True).run(select=['operators'])
    assert not report.passed
    assert "boom" in report.results[0].detail


def test_steady_couette_converges_at_second_order():
    coarse, fine = steady_error('couette', 51), steady_error('couette', 101)
    assert fine < 1e-5
    assert ORDER_RANGE[0] <= coarse / fine <= ORDER_RANGE[1]


@pytest.mark.slow
def test_fast_suite_passes():
    report = run_verification(fast=True, max_workers=1)
    failed = [f"{r.key}: {r.detail}" for r in report.results if not r.passed and not r.skipped]
    assert not failed


@pytest.mark.slow
def test_full_suite_passes():
    report = run_verification(fast=False)
    failed = [f"{r.key}: {r.detail}" for r in report.results if not r.passed and not r.skipped]
    assert not failed


def snapshot(cycle, v):
    return SimpleNamespace(cycle_count=cycle, v=np.asarray(v, dtype=float))


def test_refinement_gaps_cover_every_cycle():
    coarse = [snapshot(3.5, [0.0, 1.0, 2.0]), snapshot(12.5, [0.0, 0.5, 1.0])]
    fine = [snapshot(3.5, [0.0, 9.0, 1.0, 9.0, 2.0]), snapshot(12.5, [0.0, 9.0, 0.75, 9.0, 1.0])]
    gaps = refinement_gaps(coarse, fine)
    assert gaps == {3.5: 0.0, 12.5: 0.25}


@pytest.mark.parametrize("fine", [
    [snapshot(3.5, np.zeros(5)), snapshot(34.5, np.zeros(5))],
    [snapshot(3.5, np.zeros(4)), snapshot(12.5, np.zeros(4))],
    [snapshot(3.5, np.zeros(5))],
])
def test_refinement_gaps_reject_mismatched_runs(fine):
    coarse = [snapshot(3.5, np.zeros(3)), snapshot(12.5, np.zeros(3))]
    with pytest.raises(ValueError):
        refinement_gaps(coarse, fine)
