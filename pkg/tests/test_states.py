from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfmetrology.errors import ConfigInvalid, GridMismatch, GridTooNarrow
from tfmetrology.states import (
    Amplitude1D,
    CatSpec,
    FrequencyGrid,
    GaussianSpec,
    SeparablePmState,
    amplitude_csv,
    cat_norm_squared,
    detect_parity,
    gaussian_samples,
    inner_product,
    make_cat,
    make_gaussian,
    pm_to_full,
    read_amplitude_csv,
    sinc_interpolate,
    state_from_dict,
)


def _moments(amp: Amplitude1D):
    p = np.abs(amp.values) ** 2 * amp.grid.spacing
    mean = np.sum(p * amp.omega)
    return np.sum(p), mean, np.sum(p * (amp.omega - mean) ** 2)


@settings(max_examples=25, deadline=None)
@given(center=st.floats(-5, 5), sigma=st.floats(0.2, 3.0))
def test_gaussian_moments(center, sigma):
    norm, mean, var = _moments(make_gaussian(GaussianSpec(center, sigma)))
    assert norm == pytest.approx(1.0, abs=1e-12)
    assert mean == pytest.approx(center, abs=1e-10)
    assert var == pytest.approx(sigma**2, rel=1e-10)


def test_gaussian_samples_are_unit_norm_before_renormalization():
    grid = FrequencyGrid(2048, -12, 12)
    raw = gaussian_samples(grid.points, 0.3, 1.1)
    assert np.sum(np.abs(raw) ** 2) * grid.spacing == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("delta, sigma", [(2.0, 1.0), (6.0, 1.0), (12.0, 0.7)])
def test_cat_norm_closed_form(delta, sigma):
    grid = FrequencyGrid(4096, -delta / 2 - 12 * sigma, delta / 2 + 12 * sigma)
    w = grid.points
    raw = (gaussian_samples(w, -delta / 2, sigma) - gaussian_samples(w, delta / 2, sigma)) / np.sqrt(2)
    assert np.sum(raw**2) * grid.spacing == pytest.approx(cat_norm_squared(delta, sigma), rel=1e-12)


def test_cat_variance_and_parity():
    amp = make_cat(CatSpec(0.0, 12.0, 1.0))
    norm, mean, var = _moments(amp)
    assert mean == pytest.approx(0.0, abs=1e-12)
    assert var == pytest.approx(36.0 + 1.0, rel=1e-7)
    assert detect_parity(amp) == "odd"
    assert detect_parity(make_gaussian(GaussianSpec(0.0, 1.0))) == "even"
    assert detect_parity(make_gaussian(GaussianSpec(0.5, 1.0), FrequencyGrid(256, -12, 12))) == "none"


def test_narrow_cat_warns():
    with pytest.warns(UserWarning):
        CatSpec(0.0, 2.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        CatSpec(0.0, 6.0, 1.0)


def test_symmetric_grid_is_exactly_symmetric():
    g = FrequencyGrid(1001, -7.3, 7.3)
    assert np.array_equal(g.points, -g.points[::-1])


def test_grid_too_narrow():
    with pytest.raises(GridTooNarrow):
        make_gaussian(GaussianSpec(9.0, 1.0), FrequencyGrid(256, -10, 10))


@pytest.mark.parametrize("doc", [
    {"n": 8, "min": 0, "max": 1},
    {"n": 64, "min": 1, "max": 1},
    {"n": 64, "min": 0},
])
def test_bad_grids(doc):
    with pytest.raises(ConfigInvalid):
        FrequencyGrid.from_dict(doc)


def test_values_must_match_grid():
    with pytest.raises(GridMismatch):
        Amplitude1D(FrequencyGrid(32, 0, 1), np.zeros(31))


def test_csv_round_trip():
    amp = make_gaussian(GaussianSpec(1.0, 0.5), FrequencyGrid(64, -4, 6))
    back = read_amplitude_csv(amplitude_csv(amp))
    assert back.grid.n_points == 64
    assert np.array_equal(back.values, amp.values)
    assert amplitude_csv(amp).splitlines()[0] == "omega,re,im"


def test_sinc_interpolation_hits_samples():
    amp = make_gaussian(GaussianSpec(0.0, 1.0), FrequencyGrid(128, -10, 10))
    assert np.allclose(sinc_interpolate(amp, amp.omega), amp.values, atol=1e-14)
    x = np.linspace(-3, 3, 17)
    assert np.allclose(sinc_interpolate(amp, x), gaussian_samples(x, 0.0, 1.0), atol=1e-10)


def test_pm_to_full_matches_direct_sampling():
    sp, sm, wp = 0.8, 1.2, 2.0
    pair = SeparablePmState.from_parts(make_gaussian(GaussianSpec(wp, sp)), make_gaussian(GaussianSpec(0.0, sm)))
    jsa = pm_to_full(pair, n_points=256)
    w1, w2 = jsa.mesh()
    direct = np.sqrt(2) * gaussian_samples(w1 + w2, wp, sp) * gaussian_samples(w1 - w2, 0.0, sm)
    assert np.max(np.abs(jsa.values - direct)) < 1e-9
    assert jsa.norm_squared() == pytest.approx(1.0, abs=1e-14)


def test_pm_to_full_rejects_small_grid():
    pair = SeparablePmState.from_parts(make_gaussian(GaussianSpec(2.0, 0.8)), make_gaussian(GaussianSpec(0.0, 1.2)))
    with pytest.raises(GridTooNarrow):
        pm_to_full(pair, FrequencyGrid(128, -1, 3))


def test_separable_state_checks_parity():
    f = make_gaussian(GaussianSpec(2.0, 0.8))
    g = make_gaussian(GaussianSpec(0.0, 1.0))
    with pytest.raises(ConfigInvalid):
        SeparablePmState(f, g, "odd")
    assert SeparablePmState.from_parts(f, g).parity == "even"


def test_inner_product_conjugate_linear():
    grid = FrequencyGrid(256, -10, 10)
    a = make_gaussian(GaussianSpec(0.0, 1.0), grid)
    b = a.with_values(1j * a.values)
    assert inner_product(a, b) == pytest.approx(1j)
    with pytest.raises(GridMismatch):
        inner_product(a, make_gaussian(GaussianSpec(0.0, 1.0), FrequencyGrid(128, -10, 10)))


def test_gaussian_overlap_closed_form():
    grid = FrequencyGrid(512, -12, 14)
    a, b = make_gaussian(GaussianSpec(0.0, 1.0), grid), make_gaussian(GaussianSpec(2.0, 1.0), grid)
    assert inner_product(a, b).real == pytest.approx(np.exp(-4.0 / 8.0), rel=1e-12)


@pytest.mark.parametrize("doc, kind", [
    ({"kind": "gaussian", "center": 1.0, "sigma": 0.5}, Amplitude1D),
    ({"kind": "cat", "center": 0.0, "sigma": 1.0, "delta": 12.0, "grid": {"n": 512, "min": -20, "max": 20}}, Amplitude1D),
])
def test_state_documents(doc, kind):
    assert isinstance(state_from_dict(doc), kind)


@pytest.mark.parametrize("doc", [
    {"kind": "gaussian", "center": 1.0, "sigma": 0.5, "colour": "red"},
    {"kind": "gaussian", "center": 1.0, "sigma": 0.5, "delta": 3.0},
    {"kind": "cat", "center": 0.0, "sigma": 1.0},
    {"kind": "squeezed", "center": 0.0, "sigma": 1.0},
    {"kind": "gaussian", "center": "zero", "sigma": 1.0},
    {"kind": "biphoton", "plus": {"kind": "gaussian", "center": 2, "sigma": 1}},
    {"kind": "biphoton", "plus": {"kind": "gaussian", "center": 2, "sigma": 1},
     "minus": {"kind": "gaussian", "center": 0, "sigma": 1}, "basis": "polar"},
    [1, 2, 3],
])
def test_bad_state_documents(doc):
    with pytest.raises(ConfigInvalid):
        state_from_dict(doc)


def test_biphoton_document_bases():
    doc = {"kind": "biphoton", "plus": {"kind": "gaussian", "center": 2.0, "sigma": 0.8},
           "minus": {"kind": "gaussian", "center": 0.0, "sigma": 1.0}}
    assert state_from_dict(doc).basis == "pm"
    full = state_from_dict({**doc, "basis": "modes", "grid": {"n": 128, "min": -9, "max": 11}})
    assert full.basis == "modes" and full.values.shape == (128, 128)
