"""Tests for the error-probability engine and the closed-form benchmarks."""

import math
import warnings

import numpy as np
import pytest

from cvreceivers.lib import discrim
from cvreceivers.lib.discrim import (
    error_rate_tv,
    gaussian_limit,
    helstrom_bpsk,
    helstrom_pure,
    heterodyne_error,
    kennedy_error,
)
from cvreceivers.lib.errors import AccuracyWarning, DomainError
from cvreceivers.lib.receivers import Family, ReceiverSpec, build_density, heterodyne, rotation_receiver
from cvreceivers.lib.states import RotationKind


def pe(spec, alpha, **kwargs):
    return error_rate_tv(build_density(spec, alpha), **kwargs)


# Closed forms
@pytest.mark.parametrize("alpha,expected", [(0.0, 0.5), (1.0, 0.00459997), (0.5, 0.10247043)])
def test_helstrom_bpsk(alpha, expected):
    assert helstrom_bpsk(alpha) == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("alpha,expected", [(0.0, 0.5), (1.0, 0.02274880), (0.5, 0.15865525)])
def test_gaussian_limit(alpha, expected):
    assert gaussian_limit(alpha) == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("alpha,expected", [(0.0, 0.5), (1.0, 0.00915782)])
def test_kennedy_error(alpha, expected):
    assert kennedy_error(alpha) == pytest.approx(expected, abs=1e-8)


def test_heterodyne_error():
    assert heterodyne_error(0.0) == pytest.approx(0.5)
    assert heterodyne_error(1.0) == pytest.approx(0.5 * math.erfc(1.0), rel=1e-13)


@pytest.mark.parametrize("overlap,expected", [(0.0, 0.0), (1.0, 0.5)])
def test_helstrom_pure_limits(overlap, expected):
    assert helstrom_pure(overlap) == expected


def test_helstrom_pure_matches_bpsk():
    assert helstrom_pure(math.exp(-4.0)) == pytest.approx(helstrom_bpsk(1.0), rel=1e-13)
    assert helstrom_pure(math.exp(-4.0)) == pytest.approx(0.00459997, abs=1e-8)


@pytest.mark.parametrize("func", [helstrom_bpsk, gaussian_limit, kennedy_error, heterodyne_error])
def test_benchmarks_reject_negative_alpha(func):
    with pytest.raises(DomainError):
        func(-0.1)


@pytest.mark.parametrize("overlap", [-0.01, 1.5])
def test_helstrom_pure_domain(overlap):
    with pytest.raises(DomainError):
        helstrom_pure(overlap)


def test_benchmark_ordering():
    for alpha in (0.1, 0.5, 1.0, 1.5):
        assert helstrom_bpsk(alpha) <= gaussian_limit(alpha) <= heterodyne_error(alpha) <= 0.5


@pytest.mark.parametrize("func", [helstrom_bpsk, gaussian_limit, kennedy_error])
def test_benchmarks_decrease_with_energy(func):
    values = [func(a) for a in np.linspace(0.05, 3.0, 60)]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))


# Total-variation engine
@pytest.mark.parametrize("spec", [
    ReceiverSpec(Family.HOMODYNE),
    ReceiverSpec(Family.LEGENDRE),
    ReceiverSpec(Family.LAGUERRE, nu=2.0),
    heterodyne(),
])
def test_identical_densities_give_one_half(spec):
    report = pe(spec, 0.0)
    assert report.value == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0, 1.5, 1.7])
def test_homodyne_matches_closed_form(alpha):
    report = pe(ReceiverSpec(Family.HOMODYNE), alpha)
    assert report.value == pytest.approx(gaussian_limit(alpha), abs=1e-7)
    assert report.est_abs_error <= 1e-8
    assert report.n_evals > 0


def test_homodyne_difference_changes_sign_at_origin():
    report = pe(ReceiverSpec(Family.HOMODYNE), 0.7)
    assert len(report.kinks) == 1
    assert report.kinks[0] == pytest.approx(0.0, abs=1e-10)


def test_identity_rotation_is_homodyne():
    spec = rotation_receiver(RotationKind.FOCK, 1.0, thetas=(0.0, 0.0), fock_set=(0, 1))
    assert pe(spec, 1.0).value == pytest.approx(pe(ReceiverSpec(Family.HOMODYNE), 1.0).value, abs=1e-10)


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_heterodyne_matches_closed_form(alpha):
    report = pe(heterodyne(), alpha)
    assert report.value == pytest.approx(heterodyne_error(alpha), abs=1e-6)
    assert report.est_abs_error <= 1e-6


@pytest.mark.parametrize("spec", [
    ReceiverSpec(Family.LEGENDRE),
    ReceiverSpec(Family.LAGUERRE, nu=10.0),
    ReceiverSpec(Family.PACS, n_add=1),
    ReceiverSpec(Family.CPG, gamma=0.2),
    rotation_receiver(RotationKind.COHERENT, 1.0, beta=1.37),
])
def test_error_rates_respect_the_helstrom_bound(spec):
    value = pe(spec, 1.0).value
    assert helstrom_bpsk(1.0) - 1e-7 <= value <= 0.5


def test_coherent_rotation_beats_homodyne_at_unit_energy():
    spec = rotation_receiver(RotationKind.COHERENT, 1.0, beta=1.37)
    assert pe(spec, 1.0).value < gaussian_limit(1.0)


def test_missed_target_warns():
    with pytest.warns(AccuracyWarning) as record:
        report = pe(ReceiverSpec(Family.HOMODYNE), 1.0, tolerance=1e-20)
    assert report.value == pytest.approx(gaussian_limit(1.0), abs=1e-7)
    assert record[0].message.est_abs_error == report.est_abs_error


@pytest.mark.parametrize("alpha_sq", [1.3, 1.6])
def test_pacs_angular_refinement_meets_target(alpha_sq):
    with warnings.catch_warnings():
        warnings.simplefilter("error", AccuracyWarning)
        report = pe(ReceiverSpec(Family.PACS, n_add=1), math.sqrt(alpha_sq))
    assert report.est_abs_error <= 1e-6
    assert helstrom_bpsk(math.sqrt(alpha_sq)) < report.value < 0.5


@pytest.mark.parametrize("spec", [
    rotation_receiver(RotationKind.COHERENT, 1.0, beta=1.37),
    rotation_receiver(RotationKind.FOCK, 1.0, fock_set=(0, 1, 2)),
    ReceiverSpec(Family.LEGENDRE),
    ReceiverSpec(Family.LAGUERRE, nu=10.0),
    ReceiverSpec(Family.CPG, gamma=0.2),
])
def test_error_rate_is_stable_under_doubled_resolution(spec, monkeypatch):
    base = pe(spec, 1.0).value
    monkeypatch.setattr(discrim, "SCAN_SAMPLES", 2 * discrim.SCAN_SAMPLES)
    finer = pe(spec, 1.0, tolerance=0.5 * discrim.LINE_TOLERANCE).value
    assert finer == pytest.approx(base, abs=1e-8)
