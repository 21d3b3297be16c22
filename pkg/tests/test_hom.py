from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfmetrology.errors import ConfigInvalid
from tfmetrology.hom import (
    HomOutcome,
    coincidence,
    delay_scan,
    post_selected_probability,
    sample_events,
    scan,
)
from tfmetrology.operators import preset
from tfmetrology.states import CatSpec, GaussianSpec, SeparablePmState, make_cat, make_gaussian, pm_to_full

SP, SM, WP, DELTA = 0.8, 1.2, 2.0, 12.0


@pytest.fixture(scope="module")
def gauss_pm():
    return SeparablePmState.from_parts(make_gaussian(GaussianSpec(WP, SP)), make_gaussian(GaussianSpec(0.0, SM))).jsa_pm()


@pytest.fixture(scope="module")
def cat_pair():
    return SeparablePmState.from_parts(make_gaussian(GaussianSpec(WP, SP)), make_cat(CatSpec(0.0, DELTA, SM)))


@pytest.mark.parametrize("kappa", [0.0, 0.2, 0.5, 1.3])
def test_minus_delay_dip(gauss_pm, kappa):
    p = coincidence(gauss_pm, preset("omega_minus"), kappa).p_coincidence
    assert p == pytest.approx(0.5 * (1 - np.exp(-2 * kappa**2 * SM**2)), abs=1e-12)


@pytest.mark.parametrize("kappa", [0.0, 0.1, 0.37, 0.9])
def test_two_peak_fringes(cat_pair, kappa):
    # large-separation form: drops terms of order exp(-delta^2 / 8 sigma^2)
    expected = 0.5 * (1 + np.exp(-(kappa**2) * SM**2 / 2) * np.cos(kappa * DELTA / 2))
    tol = np.exp(-(DELTA**2) / (8 * SM**2))
    assert coincidence(cat_pair.jsa_pm(), preset("omega1"), kappa).p_coincidence == pytest.approx(expected, abs=tol)


def test_bases_agree(cat_pair):
    modes = pm_to_full(cat_pair, n_points=384)
    for kappa in (0.15, 0.6):
        a = coincidence(cat_pair.jsa_pm(), preset("omega1"), kappa).p_coincidence
        b = coincidence(modes, preset("omega1"), kappa).p_coincidence
        assert a == pytest.approx(b, abs=1e-9)


@pytest.mark.parametrize("name", ["omega1", "omega_minus", "t1", "t_minus"])
def test_post_selected_route_agrees(cat_pair, name):
    jsa = cat_pair.jsa_pm()
    for kappa in (0.05, 0.3):
        assert post_selected_probability(jsa, preset(name), kappa) == pytest.approx(
            coincidence(jsa, preset(name), kappa).p_coincidence, abs=1e-12)


def test_scan_and_csv(gauss_pm):
    result = scan(gauss_pm, preset("omega_minus"), (-1.0, 1.0), 11)
    assert np.allclose(result.p_coincidence + result.p_anticoincidence, 1.0)
    assert np.allclose(result.p_coincidence, result.p_coincidence[::-1], atol=1e-14)
    lines = result.to_csv().splitlines()
    assert lines[0] == "kappa,p_coincidence,p_anticoincidence"
    assert len(lines) == 12
    with pytest.raises(ConfigInvalid):
        scan(gauss_pm, preset("omega_minus"), (-1.0, 1.0), 2)


def test_split_and_single_arm_delays_agree(gauss_pm):
    taus = np.linspace(-1, 1, 9)
    split = delay_scan(gauss_pm, taus, split=True).p_coincidence
    # a single-arm delay of 2 tau acts on omega1 = (omega_plus + omega_minus)/2
    single = delay_scan(gauss_pm, taus, split=False).p_coincidence
    assert np.allclose(split, 0.5 * (1 - np.exp(-2 * taus**2 * SM**2)), atol=1e-12)
    assert np.allclose(single, split, atol=1e-12)


def test_sampling_is_nested_and_seeded():
    outcome = HomOutcome.from_overlap(0.3)
    n_small, _ = sample_events(outcome, 1000, 42)
    rng = np.random.Generator(np.random.PCG64(42))
    draws = rng.random(5000) < outcome.p_coincidence
    assert n_small == np.count_nonzero(draws[:1000])
    assert sample_events(outcome, 5000, 42)[0] == np.count_nonzero(draws)
    assert sample_events(outcome, 1000, 42) == sample_events(outcome, 1000, 42)
    with pytest.raises(ConfigInvalid):
        sample_events(outcome, 0, 1)


@settings(max_examples=30, deadline=None)
@given(ov=st.floats(-1, 1))
def test_outcome_probabilities(ov):
    o = HomOutcome.from_overlap(ov)
    assert 0 <= o.p_coincidence <= 1
    assert o.p_coincidence + o.p_anticoincidence == pytest.approx(1.0)


def test_sample_mean_tracks_probability():
    outcome = HomOutcome.from_overlap(-0.2)
    n_c, n_a = sample_events(outcome, 200_000, np.random.SeedSequence(5))
    se = np.sqrt(outcome.p_coincidence * outcome.p_anticoincidence / 200_000)
    assert abs(n_c / 200_000 - outcome.p_coincidence) < 5 * se
