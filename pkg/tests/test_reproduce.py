from __future__ import annotations

import json

import numpy as np
import pytest

from tfmetrology.errors import ConfigInvalid
from tfmetrology.operators import preset, rotation_grid, variance
from tfmetrology.reproduce import Cell, Report, TARGETS, load_defaults, run
from tfmetrology.states import GaussianSpec, make_gaussian


@pytest.mark.parametrize("computed, expected, tol, floor, ok", [
    (1.0, 1.0, 0.0, 0.0, True),
    (1.0 + 1e-7, 1.0, 1e-6, 0.0, True),
    (1.0 + 1e-5, 1.0, 1e-6, 0.0, False),
    (3e-7, 0.0, 1e-6, 1e-6, True),
    (3e-7, 0.0, 1e-6, 0.0, False),
    (1j, 1j * (1 + 1e-8), 1e-6, 0.0, True),
])
def test_cell_pass_rule(computed, expected, tol, floor, ok):
    assert Cell("x", computed, expected, tol, floor).passed is ok


def test_report_serializes_complex_and_failures():
    rep = Report("demo", {"a": 1}, [Cell("ok", 1.0, 1.0, 1e-6), Cell("bad", 2j, 1j, 1e-6)])
    assert not rep.passed and [c.name for c in rep.failures()] == ["bad"]
    doc = json.loads(json.dumps(rep.to_dict()))
    assert doc["cells"][1]["computed"] == {"re": 0.0, "im": 2.0}
    assert doc["n_failed"] == 1 and "runtime_s" not in doc


def test_unknown_target():
    with pytest.raises(ConfigInvalid):
        run("table9")


def test_defaults_are_packaged():
    d = load_defaults()
    assert d["crb"]["seed"] == 20240521
    assert set(TARGETS) >= {"table1", "table2", "table3", "rotations-v", "scaling"}


def test_rotation_ground_state_has_no_spread():
    a = make_gaussian(GaussianSpec(0.0, 1 / np.sqrt(2)), rotation_grid(512))
    assert variance(a, preset("R")) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("target", ["table1", "table3", "scaling"])
def test_fast_targets_pass(target):
    rep = run(target)
    assert rep.passed, [c.name for c in rep.failures()]
    assert rep.runtime > 0
