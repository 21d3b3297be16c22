"""Quadrature reproduction of the reference tables and closed forms.

Each target returns a ``Report`` with one ``Cell`` per compared quantity.
Parameters come from the packaged ``defaults.json`` so a target means the
same thing everywhere.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from . import formulas
from .errors import ConfigInvalid
from .hom import scan
from .metrology import curvature_scan, fi_analytic, fi_curvature, qfi, scaling_demo
from .operators import preset, product_moment, rotation_grid, rotation_half_width, variance
from .states import (
    CatSpec,
    FrequencyGrid,
    GaussianSpec,
    SeparablePmState,
    make_cat,
    make_gaussian,
    pm_to_full,
)


def load_defaults() -> dict:
    text = resources.files("tfmetrology").joinpath("defaults.json").read_text()
    return json.loads(text)


@dataclass
class Cell:
    name: str
    computed: float | complex
    expected: float | complex
    tol: float
    abs_floor: float = 0.0
    kind: str = "reference"

    @property
    def error(self) -> float:
        return float(abs(self.computed - self.expected))

    @property
    def rel_error(self) -> float:
        ref = abs(self.expected)
        return self.error / ref if ref > 0 else self.error

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tol * abs(self.expected) + self.abs_floor)

    def to_dict(self) -> dict:
        def enc(x):
            x = complex(x)
            return x.real if x.imag == 0 else {"re": x.real, "im": x.imag}

        return {"name": self.name, "computed": enc(self.computed), "expected": enc(self.expected),
                "rel_error": self.rel_error, "tol": self.tol, "abs_floor": self.abs_floor,
                "kind": self.kind, "pass": self.passed}


@dataclass
class Report:
    target: str
    params: dict
    cells: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cells)

    def failures(self) -> list:
        return [c for c in self.cells if not c.passed]

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {"target": self.target, "params": self.params, "pass": self.passed,
               "n_cells": len(self.cells), "n_failed": len(self.failures()),
               "cells": [c.to_dict() for c in self.cells]}
        if include_runtime:
            out["runtime_s"] = self.runtime
        return out


def _pair(sp: float, sm: float, wp: float, delta: float | None = None,
          plus_grid: FrequencyGrid | None = None, minus_grid: FrequencyGrid | None = None,
          n_points: int = 1024) -> SeparablePmState:
    fspec = GaussianSpec(wp, sp)
    f = make_gaussian(fspec, plus_grid or fspec.default_grid(n_points))
    if delta is None:
        gspec = GaussianSpec(0.0, sm)
        g = make_gaussian(gspec, minus_grid or gspec.default_grid(n_points))
    else:
        gspec = CatSpec(0.0, delta, sm)
        g = make_cat(gspec, minus_grid or gspec.default_grid(n_points))
    return SeparablePmState.from_parts(f, g)


# ---------------------------------------------------------------- table 1

def table1(params: dict | None = None) -> Report:
    p = params or load_defaults()["table1"]
    sp, sm, wp, delta, n = p["sigma_plus"], p["sigma_minus"], p["omega_p"], p["delta"], p["n_points"]
    expected = formulas.translation_variances(sp, sm, delta)
    floor = formulas.separation_error(delta, sm)
    report = Report("table1", dict(p))
    for label, dlt in (("gauss", None), ("cat", delta)):
        jsa = pm_to_full(_pair(sp, sm, wp, dlt, n_points=n), n_points=n)
        for op, gen in (("w1", "omega1"), ("w+", "omega_plus"), ("w-", "omega_minus")):
            val = variance(jsa, preset(gen))
            cell_floor = floor * abs(expected[(op, label)]) if label == "cat" and op != "w+" else 0.0
            report.cells.append(Cell(f"Var({op}) {label}", val, expected[(op, label)], 1e-6, cell_floor))
    return report


# ---------------------------------------------------------------- table 3

def table3(params: dict | None = None) -> Report:
    p = params or load_defaults()["table3"]
    sp, sm, wp, delta, n = p["sigma_plus"], p["sigma_minus"], p["omega_p"], p["delta"], p["n_points"]
    pair_g = _pair(sp, sm, wp, None, n_points=n)
    pair_c = _pair(sp, sm, wp, delta, n_points=n)
    amps = {"plus": pair_g.f_plus, "minus_gauss": pair_g.g_minus, "minus_cat": pair_c.g_minus}
    expected = formulas.moment_table(sp, sm, wp, delta)
    report = Report("table3", dict(p))
    for (op, col), exp in expected.items():
        k, l = formulas.MOMENT_POWERS[op]
        amp = amps[col]
        val = product_moment(amp, k, l, scale=2.0)
        # zero cells are judged against the Cauchy-Schwarz scale of the product
        scale = np.sqrt(abs(product_moment(amp, 2 * k, 0)) * abs(product_moment(amp, 0, 2 * l, scale=2.0)))
        report.cells.append(Cell(f"<{op}> {col}", val, exp, 1e-6, 1e-6 * scale if exp == 0 else 0.0))
    return report


# ---------------------------------------------------------------- table 2

def _rotation_states(p: dict) -> dict:
    n, K = p["n_points"], p["n_modes"]
    modes_grid = rotation_grid(n, K, 1.0)
    pm_half = rotation_half_width(K, np.sqrt(2.0))
    pm_grid = FrequencyGrid(n, -pm_half, pm_half)
    out = {}
    for label in ("gauss", "cat"):
        q = p[label]
        delta = q.get("delta")
        pair = _pair(q["sigma_plus"], q["sigma_minus"], q["omega_p"], delta, pm_grid, pm_grid)
        out[label] = {
            "modes": pm_to_full(pair, modes_grid),
            "pm": pair.jsa_pm(),
        }
    return out


def _closed_qfi(row: str, q: dict) -> float | None:
    sp, sm, wp = q["sigma_plus"], q["sigma_minus"], q["omega_p"]
    delta = q.get("delta")
    if row == "R1":
        v = (formulas.gauss_pair_r1_variance(sp, sm, wp) if delta is None
             else formulas.cat_pair_r1_variance(sp, sm, wp, delta))
    elif row == "R1-R2":
        v = (formulas.gauss_pair_rdiff_variance(sp, sm, wp) if delta is None
             else formulas.cat_pair_rdiff_variance(sp, sm, wp, delta))
    else:
        return None
    return 4 * v


def table2(params: dict | None = None, rows: list | None = None) -> Report:
    p = params or load_defaults()["table2"]
    states = _rotation_states(p)
    kmax, steps, K = p["flat_kappa_max"], p["flat_steps"], p["n_modes"]
    report = Report("table2", dict(p))
    wanted = rows or ["R1", "R_plus", "R_minus", "R1+R2", "R1-R2"]
    for label, st in states.items():
        for row in wanted:
            gen = preset(row)
            jsa = st["pm"] if gen.pm else st["modes"]
            t0 = time.perf_counter()
            q = qfi(jsa, gen)
            closed = _closed_qfi(row, p[label])
            if closed is not None:
                report.cells.append(Cell(f"{row} {label} QFI closed form", q, closed, 1e-5, kind="derived"))
            f = fi_analytic(jsa, gen)
            fc = fi_curvature(curvature_scan(jsa, gen, n_modes=K))
            if row in ("R_plus", "R_minus", "R1+R2"):
                sc = scan(jsa, gen, (-kmax, kmax), steps, n_modes=K).p_coincidence
                report.cells.append(Cell(f"{row} {label} scan flatness", float(np.ptp(sc)), 0.0, 0.0, 1e-10))
                report.cells.append(Cell(f"{row} {label} FI curvature", fc, 0.0, 0.0, 1e-10))
                report.cells.append(Cell(f"{row} {label} FI analytic", f, 0.0, 0.0, 1e-10))
            elif row == "R1":
                target = variance(jsa, preset("R1-R2"))
                report.cells.append(Cell(f"{row} {label} FI = Var(R1-R2)", f, target, 1e-8))
                report.cells.append(Cell(f"{row} {label} FI curvature", fc, target, 1e-3))
            else:
                target = 4 * variance(jsa, preset("R1-R2"))
                report.cells.append(Cell(f"{row} {label} FI = 4 Var(R1-R2)", f, target, 1e-8))
                report.cells.append(Cell(f"{row} {label} FI curvature", fc, target, 1e-3))
                report.cells.append(Cell(f"{row} {label} FI = QFI", f, q, 1e-8))
            report.cells.append(Cell(f"{row} {label} runtime_s < 60", time.perf_counter() - t0, 0.0, 0.0, 60.0,
                                     kind="runtime"))
    return report


# ---------------------------------------------------------------- rotation closed forms

def rotations(params: dict | None = None) -> Report:
    p = params or load_defaults()["rotations_v"]
    n = p["n_points"]
    R = preset("R")
    report = Report("rotations-v", dict(p))
    for sigma, w0 in itertools.product(p["single_sigmas"], p["single_centers"]):
        amp = make_gaussian(GaussianSpec(w0, sigma), GaussianSpec(w0, sigma).default_grid(n))
        report.cells.append(Cell(f"gaussian sigma={sigma} w0={w0}", variance(amp, R),
                                 formulas.gaussian_rotation_variance(sigma, w0), 1e-6))
    ratio = p["cat_separation_in_sigmas"]
    for sigma in p["cat_sigmas"]:
        delta = ratio * sigma
        for w0 in [0.0, *p["cat_centers"]]:
            spec = CatSpec(w0, delta, sigma)
            amp = make_cat(spec, spec.default_grid(n))
            report.cells.append(Cell(f"cat sigma={sigma} delta={delta} w0={w0}", variance(amp, R),
                                     formulas.cat_rotation_variance(sigma, delta, w0), 1e-3))
    q = p["pair"]
    sp, sm, wp, delta = q["sigma_plus"], q["sigma_minus"], q["omega_p"], q["delta"]
    jg = _pair(sp, sm, wp, None, n_points=n).jsa_pm()
    jc = _pair(sp, sm, wp, delta, n_points=n).jsa_pm()
    r1, rd = preset("R1"), preset("R1-R2")
    vg1, vgd = variance(jg, r1), variance(jg, rd)
    vc1, vcd = variance(jc, r1), variance(jc, rd)
    report.cells += [
        Cell("pair gauss Var(R1)", vg1, formulas.gauss_pair_r1_variance(sp, sm, wp), 1e-5),
        Cell("pair gauss Var(R1-R2)", vgd, formulas.gauss_pair_rdiff_variance(sp, sm, wp), 1e-5),
        Cell("pair cat Var(R1)", vc1, formulas.cat_pair_r1_variance_reference(sp, sm, wp, delta), 1e-5),
        Cell("pair cat Var(R1-R2)", vcd, formulas.cat_pair_rdiff_variance_reference(sp, sm, wp, delta), 1e-5),
        Cell("pair Var(R1-R2) gauss = cat", vcd, vgd, 1e-6),
        Cell("pair cat Var(R1) rederived", vc1, formulas.cat_pair_r1_variance(sp, sm, wp, delta), 1e-5,
             kind="derived"),
        Cell("pair cat Var(R1-R2) rederived", vcd, formulas.cat_pair_rdiff_variance(sp, sm, wp, delta), 1e-5,
             kind="derived"),
    ]
    return report


# ---------------------------------------------------------------- scaling

def product_state_qfi(coefficients, alphas) -> float:
    """Brute-force oracle: 4 Var(sum alpha_i R_i) on the explicit tensor-product vector."""
    a = np.asarray(coefficients, dtype=complex)
    K, n = a.size, len(alphas)
    psi = np.zeros((K,) * n, dtype=complex)
    for k in range(K):
        psi[(k,) * n] = a[k]
    eig = np.zeros((K,) * n)
    for i, al in enumerate(alphas):
        shape = [1] * n
        shape[i] = K
        eig = eig + al * (np.arange(K) + 0.5).reshape(shape)
    w = np.abs(psi) ** 2
    return float(4 * (np.sum(w * eig**2) - np.sum(w * eig) ** 2))


def scaling(params: dict | None = None) -> Report:
    p = params or load_defaults()["scaling"]
    coeffs, ns = p["coefficients"], p["n_values"]
    report = Report("scaling", dict(p))
    plus = scaling_demo(coeffs, ns, "plus")
    report.cells.append(Cell("fitted exponent, all +", plus.fitted_exponent, 2.0, 0.0, 1e-10))
    for n, q in zip(plus.n_values, plus.qfi_values):
        var_k = float(np.sum(np.abs(coeffs) ** 2 * np.arange(len(coeffs)) ** 2)
                      - np.sum(np.abs(coeffs) ** 2 * np.arange(len(coeffs))) ** 2)
        report.cells.append(Cell(f"QFI n={n} all +", q, 4 * n * n * var_k, 1e-12))
        if n <= 4:
            report.cells.append(Cell(f"QFI n={n} tensor oracle", q, product_state_qfi(coeffs, [1.0] * n), 1e-12))
    alt = scaling_demo(coeffs, [n for n in ns if n % 2 == 0], "alternating")
    for n, q in zip(alt.n_values, alt.qfi_values):
        report.cells.append(Cell(f"QFI n={n} balanced signs", q, 0.0, 0.0, 1e-12))
    return report


TARGETS: dict[str, Callable[[], Report]] = {
    "table1": table1,
    "table2": table2,
    "table3": table3,
    "rotations-v": rotations,
    "scaling": scaling,
}


def run(target: str) -> Report:
    try:
        fn = TARGETS[target]
    except KeyError:
        raise ConfigInvalid(f"unknown target {target!r}; choose from {sorted(TARGETS)}") from None
    t0 = time.perf_counter()
    report = fn()
    report.runtime = time.perf_counter() - t0
    return report
