"""Tests for parameter optimization, sweeps and the linear fit."""

import math

import numpy as np
import pytest

from cvreceivers.lib.discrim import gaussian_limit, helstrom_bpsk
from cvreceivers.lib.errors import DomainError, InvariantError, RankError, SpecError
from cvreceivers.lib.optimize import (
    SWEEP_HEADER,
    CurvePoint,
    ErrorCurve,
    OptResult,
    beta_grid,
    fit_beta_scaling,
    linear_fit,
    optimize_beta,
    optimize_fock_chain,
    optimize_thetas,
    sweep_error_curve,
    theta_seeds,
)
from cvreceivers.lib.receivers import Family, ReceiverSpec, rotation_receiver
from cvreceivers.lib.states import RotationKind

HOMODYNE = ReceiverSpec(Family.HOMODYNE)


# Linear fit
def test_linear_fit_exact_line():
    fit = linear_fit([(x, 2 * x + 1) for x in range(10)])
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.rms_residual == pytest.approx(0.0, abs=1e-12)
    assert fit.as_dict() == {"slope": fit.slope, "intercept": fit.intercept, "rms_residual": fit.rms_residual}


@pytest.mark.parametrize("points", [[], [(1.0, 2.0)], [(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)]])
def test_linear_fit_needs_two_distinct_x(points):
    with pytest.raises(RankError):
        linear_fit(points)


def test_linear_fit_residual():
    fit = linear_fit([(0.0, 0.0), (1.0, 1.0), (2.0, 0.0), (3.0, 1.0)])
    assert fit.slope == pytest.approx(0.2)
    assert fit.rms_residual > 0.0


# Result types
def test_opt_result_bounds():
    with pytest.raises(InvariantError):
        OptResult((1.0,), 0.6, 1, True)
    assert OptResult((1.0, 2.0), 0.1, 3, True, ("a", "b")).as_dict() == {"a": 1.0, "b": 2.0}


def test_error_curve_validation():
    with pytest.raises(InvariantError):
        ErrorCurve((CurvePoint(1.0, 0.1), CurvePoint(0.5, 0.2)), HOMODYNE)
    with pytest.raises(InvariantError):
        ErrorCurve((CurvePoint(1.0, 0.7),), HOMODYNE)


def test_error_curve_rows_follow_header():
    curve = ErrorCurve([CurvePoint(0.5, 0.1, {"beta": 1.5})], rotation_receiver("coherent", 1.0, beta=1.5))
    row = curve.rows()[0]
    assert len(row) == len(SWEEP_HEADER)
    assert row[1] == "coherent_rotation"
    assert row[2] == '{"beta":1.5}'
    assert curve.column("pe") == [0.1]


# Beta optimization
def test_beta_grid():
    grid = beta_grid(1.0)
    assert grid[0] == pytest.approx(0.05)
    assert grid[-1] == pytest.approx(3.5)
    assert np.all(grid > 0.0)


def test_optimize_beta_rejects_fock_family():
    with pytest.raises(SpecError):
        optimize_beta("fock_rotation", 1.0)
    with pytest.raises(DomainError):
        optimize_beta("cat_rotation", 0.0)


@pytest.mark.parametrize("family,expected", [("coherent_rotation", 1.366), ("cat_rotation", 1.070)])
def test_optimal_beta_at_unit_energy(family, expected):
    result = optimize_beta(family, 1.0)
    assert result.param_names == ("beta",)
    assert result.best_params[0] == pytest.approx(expected, abs=0.15)
    assert result.best_pe < gaussian_limit(1.0)
    assert not result.flat


def test_optimized_coherent_rotation_is_bracketed():
    alpha = 0.5
    result = optimize_beta(RotationKind.COHERENT, alpha)
    assert helstrom_bpsk(alpha) < result.best_pe < gaussian_limit(alpha)


def test_warm_start_finds_the_same_optimum():
    cold = optimize_beta("coherent_rotation", 1.0)
    warm = optimize_beta("coherent_rotation", 1.0, start=1.3)
    assert warm.best_pe == pytest.approx(cold.best_pe, abs=1e-6)
    assert warm.n_evals < cold.n_evals


def test_optimize_beta_is_deterministic():
    assert optimize_beta("cat_rotation", 0.7) == optimize_beta("cat_rotation", 0.7)


# Angle optimization
def test_theta_seeds():
    seeds = theta_seeds(3)
    assert len(seeds) == 11
    assert seeds[0] == pytest.approx([math.pi] * 3)
    assert seeds[2] == pytest.approx([0.0] * 3)
    assert all(np.all((s >= 0) & (s < 2 * math.pi)) for s in seeds)


def test_optimize_thetas_single_projector_finds_pi():
    result = optimize_thetas((1,), 1.0, max_evals_per_start=80)
    assert result.param_names == ("theta_1",)
    assert result.best_params[0] == pytest.approx(math.pi, abs=0.1)
    assert result.best_pe <= gaussian_limit(1.0)


def test_optimize_thetas_set_size():
    with pytest.raises(DomainError):
        optimize_thetas((), 1.0)
    with pytest.raises(DomainError):
        optimize_thetas(tuple(range(9)), 1.0)


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_optimize_thetas_three_projectors_find_pi(alpha):
    result = optimize_thetas((0, 1, 2), alpha, max_evals_per_start=150)
    assert result.best_params == pytest.approx((math.pi,) * 3, abs=0.2)
    assert result.best_pe <= gaussian_limit(alpha)


@pytest.mark.slow
def test_nested_fock_sets_improve():
    results = optimize_fock_chain([(1,), (0, 1, 2)], 0.8, max_evals_per_start=150)
    assert results[1].best_pe <= results[0].best_pe
    assert results[1].best_params == pytest.approx((math.pi,) * 3, abs=0.2)


# Sweeps
def test_homodyne_sweep_matches_closed_form():
    curve = sweep_error_curve(HOMODYNE, [0.25, 1.0])
    assert curve.column("pe") == pytest.approx([0.15865525, 0.02274880], abs=1e-7)
    assert curve.column("pe_kennedy")[1] == pytest.approx(0.00915782, abs=1e-8)
    assert curve.column("flag") == ["ok", "ok"]
    assert curve.label == "homodyne"


def test_threaded_sweep_matches_sequential():
    grid = [0.1, 0.2, 0.3, 0.4]
    assert sweep_error_curve(HOMODYNE, grid, workers=3).column("pe") == sweep_error_curve(HOMODYNE, grid).column("pe")


@pytest.mark.parametrize("grid", [[], [0.0, 1.0], [1.0, 0.5], [0.5, 0.5]])
def test_sweep_grid_validation(grid):
    with pytest.raises(DomainError):
        sweep_error_curve(HOMODYNE, grid)


def test_optimize_flag_is_ignored_for_fixed_receivers():
    curve = sweep_error_curve(HOMODYNE, [1.0], optimize=True)
    assert curve.points[0].pe == pytest.approx(gaussian_limit(1.0), abs=1e-7)


def test_optimized_cat_sweep_beats_homodyne_at_low_energy():
    spec = rotation_receiver(RotationKind.CAT, 1.0, beta=1.0)
    curve = sweep_error_curve(spec, [0.2, 0.4, 0.6])
    optimized = sweep_error_curve(spec, [0.2, 0.4, 0.6], optimize=True)
    for point in optimized.points:
        assert point.pe < point.pe_gaussian
        assert point.params["rotation"] == "cat"
    assert len(curve.points) == 3


@pytest.mark.slow
def test_forward_and_backward_sweeps_agree():
    spec = rotation_receiver(RotationKind.COHERENT, 1.0, beta=1.0)
    grid = [0.5, 0.6, 0.7]
    forward = sweep_error_curve(spec, grid, optimize=True)
    backward = sweep_error_curve(spec, grid, optimize=True, backward=True)
    assert forward.column("pe") == pytest.approx(backward.column("pe"), abs=1e-6)


@pytest.mark.slow
def test_beta_scaling_fit_over_a_coarse_grid():
    curve, fit = fit_beta_scaling("coherent_rotation", [0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    assert len(curve.points) == 6
    assert fit.slope == pytest.approx(0.296, abs=0.06)
    assert fit.intercept == pytest.approx(1.07, abs=0.15)
