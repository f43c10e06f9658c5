"""Tests for receiver descriptions and their outcome densities."""

import math

import numpy as np
import pytest
from scipy import special

from cvreceivers.lib.errors import DegenerateParameterError, DomainError, SpecError
from cvreceivers.lib.receivers import (
    Domain,
    Family,
    ReceiverSpec,
    build_density,
    cpg_density,
    heterodyne,
    normalization_check,
    partial_heterodyne_mass,
    partial_vacuum_mass,
    rotation_correction,
    rotation_receiver,
)
from cvreceivers.lib.states import RotationKind, fock_basis, fock_rotation


# Receiver descriptions
def test_family_accepts_its_string_value():
    spec = ReceiverSpec("laguerre", nu=2.0)
    assert spec.family is Family.LAGUERRE
    assert spec.label == "laguerre_nu2"
    assert spec.params() == {"nu": 2.0}


def test_unknown_family():
    with pytest.raises(SpecError):
        ReceiverSpec("photon_counting")


@pytest.mark.parametrize("kwargs", [
    {"family": Family.LAGUERRE},
    {"family": Family.HOMODYNE, "nu": 1.0},
    {"family": Family.PACS, "n_add": 1, "gamma": 0.2},
    {"family": Family.ROTATION_HOMODYNE},
])
def test_fields_must_match_family(kwargs):
    with pytest.raises(SpecError):
        ReceiverSpec(**kwargs)


@pytest.mark.parametrize("kwargs,error", [
    ({"family": Family.LAGUERRE, "nu": -1.0}, DomainError),
    ({"family": Family.LAGUERRE, "nu": -3.0}, DomainError),
    ({"family": Family.PACS, "n_add": -1}, DomainError),
    ({"family": Family.PACS, "n_add": 1.5}, DomainError),
    ({"family": Family.PACS, "n_add": True}, DomainError),
    ({"family": Family.CPG, "gamma": 0.0}, DegenerateParameterError),
    ({"family": Family.CPG, "gamma": -0.1}, DomainError),
    ({"family": Family.CPG, "gamma": math.inf}, DomainError),
])
def test_parameter_domains(kwargs, error):
    with pytest.raises(error):
        ReceiverSpec(**kwargs)


def test_degenerate_parameter_is_a_value_error():
    with pytest.raises(ValueError):
        ReceiverSpec(Family.CPG, gamma=0.0)


@pytest.mark.parametrize("spec,label", [
    (ReceiverSpec(Family.HOMODYNE), "homodyne"),
    (ReceiverSpec(Family.LEGENDRE), "legendre"),
    (ReceiverSpec(Family.PACS, n_add=0), "heterodyne"),
    (ReceiverSpec(Family.PACS, n_add=3), "pacs_n3"),
    (ReceiverSpec(Family.CPG, gamma=0.25), "cpg_gamma0.25"),
    (rotation_receiver("cat", 1.0, beta=1.1), "cat_rotation"),
])
def test_labels(spec, label):
    assert spec.label == label


def test_heterodyne_is_pacs_without_additions():
    spec = heterodyne()
    assert spec.family is Family.PACS
    assert spec.n_add == 0


def test_rotation_receiver_arguments():
    with pytest.raises(SpecError):
        rotation_receiver(RotationKind.CAT, 1.0)
    with pytest.raises(SpecError):
        rotation_receiver(RotationKind.FOCK, 1.0)
    with pytest.raises(SpecError):
        rotation_receiver(RotationKind.CUSTOM, 1.0)
    spec = rotation_receiver(RotationKind.FOCK, 1.0, thetas=(1.0, 2.0), fock_set=(0, 3))
    assert spec.params() == {"rotation": "fock", "theta": [1.0, 2.0], "fock_set": [0, 3]}


def test_coherent_rotation_is_sized_for_beta():
    spec = rotation_receiver(RotationKind.COHERENT, 0.5, beta=3.0)
    assert spec.rotation.ncut == 57


# Densities
def test_build_density_rejects_negative_or_complex_alpha():
    with pytest.raises(DomainError):
        build_density(ReceiverSpec(Family.HOMODYNE), -0.1)
    with pytest.raises(DomainError):
        build_density(ReceiverSpec(Family.HOMODYNE), 0.5 + 0.5j)


@pytest.mark.parametrize("spec,domain", [
    (ReceiverSpec(Family.HOMODYNE), Domain.LINE),
    (ReceiverSpec(Family.LEGENDRE), Domain.INTERVAL_S),
    (ReceiverSpec(Family.LAGUERRE, nu=1.0), Domain.HALFLINE_R),
    (ReceiverSpec(Family.PACS, n_add=1), Domain.PLANE_BETA),
    (ReceiverSpec(Family.CPG, gamma=0.5), Domain.LINE),
])
def test_domains(spec, domain):
    assert build_density(spec, 1.0).domain is domain


def test_homodyne_density_is_the_shifted_gaussian():
    pair = build_density(ReceiverSpec(Family.HOMODYNE), 0.8)
    x = np.linspace(-3, 3, 13)
    plus, minus = pair.eval(x)
    assert plus == pytest.approx(np.exp(-(x - 0.8 * math.sqrt(2)) ** 2) / math.sqrt(math.pi))
    assert minus == pytest.approx(plus[::-1])


@pytest.mark.parametrize("spec,alpha,tolerance", [
    (ReceiverSpec(Family.HOMODYNE), 1.0, 1e-10),
    (ReceiverSpec(Family.LEGENDRE), 1.5, 1e-6),
    (ReceiverSpec(Family.PACS, n_add=2), 1.0, 1e-6),
    (ReceiverSpec(Family.PACS, n_add=0), 0.5, 1e-6),
    (ReceiverSpec(Family.LAGUERRE, nu=10.0), 1.0, 1e-8),
    (ReceiverSpec(Family.CPG, gamma=0.1), 1.0, 1e-8),
    (ReceiverSpec(Family.CPG, gamma=1.0), 1.0, 1e-6),
    (rotation_receiver(RotationKind.FOCK, 1.0, fock_set=(0, 1, 2)), 1.0, 1e-8),
    (rotation_receiver(RotationKind.CAT, 1.0, beta=1.07), 1.0, 1e-8),
    (rotation_receiver(RotationKind.COHERENT, 1.0, beta=1.37), 1.0, 1e-8),
])
def test_densities_are_normalized(spec, alpha, tolerance):
    assert normalization_check(build_density(spec, alpha)) < tolerance


def test_rotation_density_uses_the_larger_cutoff():
    spec = ReceiverSpec(Family.ROTATION_HOMODYNE, rotation=fock_rotation((1,), ncut=10))
    assert normalization_check(build_density(spec, 2.0)) < 1e-8


def test_cpg_density_approaches_homodyne_for_small_gamma():
    center = math.sqrt(2) * 0.7
    x = np.linspace(center - 3, center + 3, 121)
    gaussian = np.exp(-(x - center) ** 2) / math.sqrt(math.pi)
    cubic = cpg_density(x, center, 1e-3)
    assert np.all(np.isfinite(cubic))
    assert np.max(np.abs(cubic - gaussian)) < 1e-3


def test_cpg_density_is_not_symmetric():
    x = np.array([-1.5, 1.5])
    values = cpg_density(x, 0.0, 0.5)
    assert abs(values[0] - values[1]) > 1e-3


# Projector boundaries and the interference term
@pytest.mark.parametrize("a,expected", [(1.0, 0.84270079), (0.5, special.erf(0.5))])
def test_partial_vacuum_mass(a, expected):
    assert partial_vacuum_mass(a) == pytest.approx(expected, abs=1e-8)


def test_partial_vacuum_mass_never_reaches_one():
    assert partial_vacuum_mass(30.0) <= 1.0
    assert partial_vacuum_mass(30.0) == pytest.approx(1.0, abs=1e-14)
    assert partial_vacuum_mass(1e-9) == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(DomainError):
        partial_vacuum_mass(0.0)


@pytest.mark.parametrize("n,radius", [(0, 1.0), (2, 2.5), (5, 0.3)])
def test_partial_heterodyne_mass(n, radius):
    expected = special.gammainc(n + 1, radius ** 2)
    assert partial_heterodyne_mass(n, radius) == pytest.approx(expected, rel=1e-12)
    assert partial_heterodyne_mass(n, radius) < 1.0


def test_partial_heterodyne_mass_domain():
    with pytest.raises(DomainError):
        partial_heterodyne_mass(1, -1.0)


@pytest.mark.parametrize("theta", [math.pi, math.pi / 2, 2.0])
def test_rotated_density_equals_homodyne_plus_interference(theta):
    alpha = 0.5
    spec = rotation_receiver(RotationKind.FOCK, alpha, thetas=(theta,), fock_set=(1,))
    x = np.linspace(-4, 4, 33)
    rotated, _ = build_density(spec, alpha).eval(x)
    homodyne = np.exp(-(x - math.sqrt(2) * alpha) ** 2) / math.sqrt(math.pi)
    correction = rotation_correction(x, alpha, fock_basis(1, spec.rotation.ncut))
    assert rotated == pytest.approx(homodyne + 2 * (1 - math.cos(theta)) * correction, abs=1e-12)


def test_rotation_correction_scalar():
    value = rotation_correction(0.3, 0.5, fock_basis(0, 32))
    assert isinstance(value, float)


def test_identity_rotation_density_is_homodyne():
    alpha = 1.2
    spec = rotation_receiver(RotationKind.FOCK, alpha, thetas=(0.0, 0.0), fock_set=(0, 3))
    x = np.linspace(-6, 6, 49)
    rotated = build_density(spec, alpha).eval(x)
    plain = build_density(ReceiverSpec(Family.HOMODYNE), alpha).eval(x)
    for got, expected in zip(rotated, plain):
        assert got == pytest.approx(expected, abs=1e-12)


# Symmetry and normalization across amplitudes
@pytest.mark.parametrize("spec", [
    ReceiverSpec(Family.HOMODYNE),
    rotation_receiver(RotationKind.FOCK, 1.7, fock_set=(1,)),
    rotation_receiver(RotationKind.FOCK, 1.7, thetas=(0.4, 2.2, 5.0), fock_set=(0, 1, 2)),
])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.7])
def test_parity_receivers_mirror_the_signals(spec, alpha):
    x = np.linspace(-6.0, 6.0, 49)
    pair = build_density(spec, alpha)
    plus, _ = pair.eval(x)
    _, minus = pair.eval(-x)
    assert np.max(np.abs(minus - plus)) < 1e-12


@pytest.mark.parametrize("beta", [0.6, 1.37])
def test_coherent_rotation_mirrors_with_negated_beta(beta):
    x = np.linspace(-6.0, 6.0, 49)
    alpha = 1.0
    plus, _ = build_density(rotation_receiver(RotationKind.COHERENT, alpha, beta=beta), alpha).eval(x)
    _, minus = build_density(rotation_receiver(RotationKind.COHERENT, alpha, beta=-beta), alpha).eval(-x)
    assert np.max(np.abs(minus - plus)) < 1e-12


EVERY_FAMILY = [
    ReceiverSpec(Family.HOMODYNE),
    heterodyne(),
    ReceiverSpec(Family.PACS, n_add=2),
    ReceiverSpec(Family.LEGENDRE),
    ReceiverSpec(Family.LAGUERRE, nu=15.0),
    ReceiverSpec(Family.CPG, gamma=0.5),
    rotation_receiver(RotationKind.FOCK, 1.7, fock_set=(0, 1, 2)),
    rotation_receiver(RotationKind.CAT, 1.7, beta=1.07),
    rotation_receiver(RotationKind.COHERENT, 1.7, beta=1.37),
]


@pytest.mark.parametrize("spec", EVERY_FAMILY, ids=lambda s: s.label)
@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 1.7])
def test_densities_are_nonnegative_and_normalized(spec, alpha):
    pair = build_density(spec, alpha)
    if pair.domain is Domain.PLANE_BETA:
        r = np.linspace(pair.lo, pair.hi, 41)
        labels = (r[:, None] * np.exp(1j * np.linspace(0.0, 2 * math.pi, 17))[None, :]).reshape(-1)
    else:
        labels = np.linspace(pair.lo, pair.hi, 801)
    for density in pair.eval(labels):
        assert np.all(density >= 0.0)
    assert normalization_check(pair) < 1e-6
