from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfmetrology.errors import BasisMismatch, ConfigInvalid, EdgeLeakage, SupportOverflow
from tfmetrology.operators import (
    Generator,
    apply_generator,
    apply_omega,
    apply_time,
    evolve_rotation,
    evolve_translation,
    expectation,
    preset,
    preset_names,
    product_moment,
    rotation_grid,
    swap,
    variance,
)
from tfmetrology.states import (
    Amplitude1D,
    CatSpec,
    FrequencyGrid,
    GaussianSpec,
    SeparablePmState,
    distance,
    gaussian_samples,
    inner_product,
    make_cat,
    make_gaussian,
    pm_to_full,
)

GRID = FrequencyGrid(512, -16, 16)


def gauss(center=0.5, sigma=1.0, grid=GRID):
    return make_gaussian(GaussianSpec(center, sigma), grid)


@pytest.fixture(scope="module")
def pair_modes():
    pair = SeparablePmState.from_parts(make_gaussian(GaussianSpec(2.0, 0.8)), make_gaussian(GaussianSpec(0.0, 1.2)))
    return pm_to_full(pair, n_points=256)


@pytest.fixture(scope="module")
def pair_pm():
    f = make_gaussian(GaussianSpec(2.0, 0.8))
    g = make_cat(CatSpec(0.0, 6.0, 0.5))
    return SeparablePmState.from_parts(f, g).jsa_pm()


@pytest.mark.parametrize("center, sigma", [(0.0, 1.0), (0.5, 0.7), (-1.0, 1.5)])
def test_gaussian_time_moments(center, sigma):
    a = gauss(center, sigma)
    assert abs(product_moment(a, 0, 1)) < 1e-12
    assert product_moment(a, 0, 2).real == pytest.approx(1 / (4 * sigma**2), rel=1e-12)
    assert product_moment(a, 1, 0).real == pytest.approx(center, rel=1e-12, abs=1e-14)


def test_canonical_commutator():
    a = gauss()
    comm = inner_product(a, apply_omega(apply_time(a))) - inner_product(a, apply_time(apply_omega(a)))
    assert comm == pytest.approx(1j, abs=1e-10)


def test_frequency_translation_is_a_phase():
    a = gauss()
    out = evolve_translation(a, preset("omega"), 0.9)
    assert np.allclose(out.values, np.exp(-0.9j * a.omega) * a.values, atol=1e-15)


def test_time_translation_shifts_spectrum_up():
    a = gauss(0.5, 1.0)
    out = evolve_translation(a, preset("t"), 0.7)
    target = gaussian_samples(a.omega, 1.2, 1.0)
    assert np.max(np.abs(out.values - target)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(k1=st.floats(-1.5, 1.5), k2=st.floats(-1.5, 1.5), a=st.floats(-1, 1), c=st.floats(-1, 1))
def test_translation_group_law(k1, k2, a, c):
    if a == 0 and c == 0:
        return
    gen = Generator("translation", alpha=a, gamma=c)
    s = gauss()
    two = evolve_translation(evolve_translation(s, gen, k1), gen, k2)
    one = evolve_translation(s, gen, k1 + k2)
    assert distance(one, two) < 1e-10
    assert one.norm_squared() == pytest.approx(1.0, abs=1e-12)


def test_translation_overflow_raises():
    with pytest.raises(SupportOverflow):
        evolve_translation(gauss(), preset("t"), 12.0)


def test_edge_leakage_detected():
    # a Gaussian cut off at 3 sigma still has weight on the boundary
    grid = FrequencyGrid(128, -3, 3)
    cut = Amplitude1D(grid, gaussian_samples(grid.points, 0.0, 1.0))
    with pytest.raises(EdgeLeakage):
        apply_time(cut)


@pytest.mark.parametrize("sigma", [0.5, 0.7071067811865476, 1.3])
def test_quarter_rotation_is_fourier_transform(sigma):
    grid = rotation_grid(512)
    a = make_gaussian(GaussianSpec(0.0, sigma), grid)
    out = evolve_rotation(a, preset("R"), np.pi / 2)
    target = make_gaussian(GaussianSpec(0.0, 1 / (2 * sigma)), grid)
    assert abs(abs(inner_product(target, out)) - 1) < 1e-10


def test_full_rotation_is_minus_identity():
    grid = rotation_grid(512)
    a = make_gaussian(GaussianSpec(1.0, 0.6), grid)
    out = evolve_rotation(a, preset("R"), 2 * np.pi)
    assert np.max(np.abs(out.values + a.values)) < 1e-10


@settings(max_examples=10, deadline=None)
@given(t1=st.floats(-2, 2), t2=st.floats(-2, 2))
def test_rotation_group_law(t1, t2):
    grid = rotation_grid(512)
    a = make_gaussian(GaussianSpec(1.0, 0.8), grid)
    R = preset("R")
    two = evolve_rotation(evolve_rotation(a, R, t1), R, t2)
    assert distance(two, evolve_rotation(a, R, t1 + t2)) < 1e-10


def test_off_origin_rotation_fixes_its_centre():
    grid = rotation_grid(512)
    a = make_gaussian(GaussianSpec(2.0, 1 / np.sqrt(2)), grid)
    out = evolve_rotation(a, preset("R"), 1.1, center=(0.0, 2.0))
    # a coherent state centred on the rotation point only picks up a phase
    assert abs(abs(inner_product(a, out)) - 1) < 1e-10


def test_basis_rules(pair_modes, pair_pm):
    with pytest.raises(BasisMismatch):
        evolve_rotation(pair_pm, preset("R1"), 0.3)
    with pytest.raises(BasisMismatch):
        evolve_rotation(pair_modes, preset("R_plus"), 0.3)


def test_swap_is_transpose_and_involution(pair_modes, pair_pm):
    assert np.array_equal(swap(pair_modes).values, pair_modes.values.T)
    assert np.array_equal(swap(swap(pair_modes)).values, pair_modes.values)
    assert np.array_equal(swap(swap(pair_pm)).values, pair_pm.values)
    # odd g: the pm state is antisymmetric under the swap
    assert np.allclose(swap(pair_pm).values, -pair_pm.values, atol=1e-12)


@pytest.mark.parametrize("name, expected", [
    ("omega1", 0.25 * 0.8**2 + 0.25 * 1.2**2),
    ("omega_plus", 0.8**2),
    ("omega_minus", 1.2**2),
    ("t_plus", 1 / (4 * 0.8**2) * 4),
    ("t_minus", 1 / (4 * 1.2**2) * 4),
])
def test_pair_variances_agree_across_bases(pair_modes, name, expected):
    pair = SeparablePmState.from_parts(make_gaussian(GaussianSpec(2.0, 0.8)), make_gaussian(GaussianSpec(0.0, 1.2)))
    assert variance(pair_modes, preset(name)) == pytest.approx(expected, rel=1e-8)
    assert variance(pair.jsa_pm(), preset(name)) == pytest.approx(expected, rel=1e-8)


def test_rotation_variance_ground_state_is_zero():
    a = make_gaussian(GaussianSpec(0.0, 1 / np.sqrt(2)), rotation_grid(512))
    assert variance(a, preset("R")) < 1e-12
    assert expectation(a, preset("R")).real == pytest.approx(0.5, abs=1e-12)


def test_generator_documents():
    for name in preset_names():
        g = preset(name)
        assert Generator.from_dict(g.to_dict()) == g
    assert preset("omega1").swapped() == preset("omega2")
    assert preset("R1").swapped() == preset("R2")
    assert preset("R_minus").swapped() == preset("R_minus")


@pytest.mark.parametrize("doc", [
    {"kind": "translation"},
    {"kind": "translation", "alpha": 1, "c1": 1},
    {"kind": "rotation", "c1": 2},
    {"kind": "rotation", "c1": 1, "c2": 1, "pm": "plus"},
    {"kind": "rotation", "c1": 1, "pm": "sideways"},
    {"kind": "boost", "alpha": 1},
    {"kind": "translation", "alpha": True},
    "not-a-preset",
])
def test_bad_generators(doc):
    with pytest.raises(ConfigInvalid):
        Generator.from_dict(doc)


def test_apply_generator_linear(pair_modes):
    gen = Generator("translation", alpha=0.5, beta=-2.0, gamma=1.0, delta=0.25)
    parts = [Generator("translation", alpha=0.5), Generator("translation", beta=-2.0),
             Generator("translation", gamma=1.0), Generator("translation", delta=0.25)]
    total = sum(apply_generator(pair_modes, p).values for p in parts)
    assert np.allclose(apply_generator(pair_modes, gen).values, total, atol=1e-12)
