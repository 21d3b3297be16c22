from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfmetrology.errors import ConfigInvalid, NonInvertible, SymmetryViolation
from tfmetrology.metrology import (
    MetrologyReport,
    classify,
    commutation,
    crb_demo,
    curvature_scan,
    fi_analytic,
    fi_curvature,
    local_fisher,
    qfi,
    scaling_demo,
    scaling_qfi,
    sign_pattern,
    symmetry,
)
from tfmetrology.operators import preset
from tfmetrology.reproduce import product_state_qfi
from tfmetrology.states import (
    CatSpec,
    FrequencyGrid,
    GaussianSpec,
    SeparablePmState,
    make_cat,
    make_gaussian,
)

SP, SM, WP, DELTA = 0.8, 1.2, 2.0, 12.0


@pytest.fixture(scope="module")
def gauss_pm():
    return SeparablePmState.from_parts(make_gaussian(GaussianSpec(WP, SP)), make_gaussian(GaussianSpec(0.0, SM))).jsa_pm()


@pytest.fixture(scope="module")
def cat_pm():
    return SeparablePmState.from_parts(make_gaussian(GaussianSpec(WP, SP)), make_cat(CatSpec(0.0, DELTA, SM))).jsa_pm()


@pytest.fixture(scope="module")
def lopsided_pm():
    g = make_gaussian(GaussianSpec(0.7, SM), FrequencyGrid(1024, -12, 12))
    return SeparablePmState.from_parts(make_gaussian(GaussianSpec(WP, SP)), g).jsa_pm()


@pytest.mark.parametrize("name, q, f", [
    ("omega_minus", 4 * SM**2, 4 * SM**2),
    ("omega_plus", 4 * SP**2, 0.0),
    ("omega1", SP**2 + SM**2, SM**2),
])
def test_gaussian_translation_information(gauss_pm, name, q, f):
    gen = preset(name)
    assert qfi(gauss_pm, gen) == pytest.approx(q, rel=1e-10)
    assert fi_analytic(gauss_pm, gen) == pytest.approx(f, rel=1e-10, abs=1e-12)


def test_fi_matches_curvature(cat_pm):
    for name in ("omega1", "omega_minus", "t_minus"):
        gen = preset(name)
        assert fi_curvature(curvature_scan(cat_pm, gen)) == pytest.approx(fi_analytic(cat_pm, gen), rel=1e-6)


def test_local_fisher_closed_form(gauss_pm):
    k = 0.3
    p, dp, f = local_fisher(gauss_pm, preset("omega_minus"), k)
    e = np.exp(-2 * k**2 * SM**2)
    p_exact, dp_exact = 0.5 * (1 - e), 2 * k * SM**2 * e
    assert p == pytest.approx(p_exact, abs=1e-12)
    assert dp == pytest.approx(dp_exact, rel=1e-8)
    assert f == pytest.approx(dp_exact**2 / (p_exact * (1 - p_exact)), rel=1e-7)


def test_symmetry_and_commutation(gauss_pm, cat_pm, lopsided_pm):
    assert symmetry(gauss_pm) == "symmetric"
    assert symmetry(cat_pm) == "antisymmetric"
    assert symmetry(lopsided_pm) == "none"
    assert commutation(gauss_pm, preset("omega_plus")) == "commutes"
    assert commutation(gauss_pm, preset("omega_minus")) == "anticommutes"
    assert commutation(gauss_pm, preset("omega1")) == "neither"


def test_asymmetric_state_refused(lopsided_pm):
    with pytest.raises(SymmetryViolation):
        fi_analytic(lopsided_pm, preset("omega_minus"))
    with pytest.raises(SymmetryViolation):
        fi_curvature(curvature_scan(lopsided_pm, preset("omega_minus")))


def test_classify_verdicts(cat_pm):
    assert classify(cat_pm, preset("omega_minus")).optimal == "optimal"
    assert classify(cat_pm, preset("omega_plus")).optimal == "blind"
    report = classify(cat_pm, preset("omega1"), curvature=False)
    assert report.optimal == "suboptimal" and report.fi_curvature is None
    ratio = report.fi_analytic / report.qfi
    expected = (DELTA**2 / 4 + SM**2) / (DELTA**2 / 4 + SP**2 + SM**2)
    assert ratio == pytest.approx(expected, rel=np.exp(-(DELTA**2) / (8 * SM**2)))
    assert set(report.to_dict()) >= {"qfi", "fi_analytic", "optimal", "symmetry", "commutation", "provenance"}


def test_report_refuses_fi_above_qfi():
    with pytest.raises(AssertionError):
        MetrologyReport(1.0, 2.0, None, "optimal", "symmetric", "neither")


def test_curvature_scan_needs_zero(cat_pm):
    from tfmetrology.hom import scan

    with pytest.raises(ConfigInvalid):
        fi_curvature(scan(cat_pm, preset("omega1"), [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]))


def test_crb_flat_point_is_not_invertible(gauss_pm):
    with pytest.raises(NonInvertible):
        crb_demo(gauss_pm, preset("omega_minus"), 0.0, 1000, 1, repetitions=5)


def test_crb_demo_small_run_is_reproducible():
    small = SeparablePmState.from_parts(make_gaussian(GaussianSpec(WP, SP), FrequencyGrid.centered(WP, 8.5 * SP, 128)),
                                        make_gaussian(GaussianSpec(0.0, SM), FrequencyGrid.centered(0.0, 10 * SM, 128)))
    jsa = small.jsa_pm()
    a = crb_demo(jsa, preset("omega_minus"), 0.3, 20_000, 11, repetitions=40)
    b = crb_demo(jsa, preset("omega_minus"), 0.3, 20_000, 11, repetitions=40)
    assert a == b
    assert a.mean == pytest.approx(0.3, abs=4 * a.crb)
    assert 0.6 < a.ratio < 1.4


@settings(max_examples=30, deadline=None)
@given(raw=st.lists(st.floats(0.05, 1.0), min_size=2, max_size=4),
       signs=st.lists(st.sampled_from([-1.0, 1.0]), min_size=4, max_size=4),
       n=st.integers(1, 4))
def test_scaling_qfi_matches_tensor_oracle(raw, signs, n):
    coeffs = np.array(raw) / np.linalg.norm(raw)
    alphas = signs[:n]
    assert scaling_qfi(coeffs, alphas) == pytest.approx(product_state_qfi(coeffs, alphas), rel=1e-10, abs=1e-10)


def test_scaling_exponent_and_balance():
    coeffs = [2**-0.5, 2**-0.5]
    rep = scaling_demo(coeffs, range(2, 7))
    assert rep.fitted_exponent == pytest.approx(2.0, abs=1e-10)
    assert scaling_demo(coeffs, [2, 4, 6], "alternating").qfi_values == (0.0, 0.0, 0.0)
    assert list(sign_pattern("alternating", 3)) == [1, -1, 1]
    with pytest.raises(ConfigInvalid):
        sign_pattern([1, 2], 2)
    with pytest.raises(ConfigInvalid):
        scaling_qfi([1.0, 1.0], [1.0])
