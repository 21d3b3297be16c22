"""Closed-form expectation values used as references by the reproduction suite.

Notation: a pair state f(w+) g(w-) with f Gaussian (centre wp, width sp) and
g either Gaussian (width sm, even) or the odd two-peak combination with peak
separation ``delta``. Collective operators obey [w_pm, t_pm] = 2i.
Large-separation forms drop terms of order exp(-delta^2 / (8 sm^2)).
"""

from __future__ import annotations

import numpy as np


def separation_error(delta: float, sigma: float) -> float:
    return float(np.exp(-(delta**2) / (8 * sigma**2)))


# ---------------------------------------------------------------- translations

def translation_variances(sp: float, sm: float, delta: float) -> dict:
    """Var(w1), Var(w+), Var(w-) for the Gaussian and two-peak pair states."""
    return {
        ("w1", "gauss"): 0.25 * sp**2 + 0.25 * sm**2,
        ("w1", "cat"): delta**2 / 16 + 0.25 * sp**2 + 0.25 * sm**2,
        ("w+", "gauss"): sp**2,
        ("w+", "cat"): sp**2,
        ("w-", "gauss"): sm**2,
        ("w-", "cat"): 0.25 * delta**2 + sm**2,
    }


def moment_table(sp: float, sm: float, wp: float, delta: float) -> dict:
    """<w^k t^l> on the plus axis and on the minus axis for both g.

    Keys are (operator, column) with columns "plus", "minus_gauss",
    "minus_cat"; the minus_cat column is a large-separation form.
    """
    rows = {
        "w": (wp, 0, 0),
        "w^2": (wp**2 + sp**2, sm**2, sm**2 + delta**2 / 4),
        "w^3": (3 * sp**2 * wp + wp**3, 0, 0),
        "w^4": (3 * sp**4 + 6 * sp**2 * wp**2 + wp**4, 3 * sm**4,
                3 * sm**4 + 1.5 * sm**2 * delta**2 + delta**4 / 16),
        "t": (0, 0, 0),
        "t^2": (1 / sp**2, 1 / sm**2, 1 / sm**2),
        "t^3": (0, 0, 0),
        "t^4": (3 / sp**4, 3 / sm**4, 3 / sm**4),
        "wt": (1j, 1j, 1j),
        "w^2t": (2j * wp, 0, 0),
        "wt^2": (wp / sp**2, 0, 0),
        "w^2t^2": (wp**2 / sp**2 - 1, -1, delta**2 / (4 * sm**2) - 1),
    }
    out = {}
    for op, vals in rows.items():
        for col, v in zip(("plus", "minus_gauss", "minus_cat"), vals):
            out[(op, col)] = complex(v)
    return out


MOMENT_POWERS = {
    "w": (1, 0), "w^2": (2, 0), "w^3": (3, 0), "w^4": (4, 0),
    "t": (0, 1), "t^2": (0, 2), "t^3": (0, 3), "t^4": (0, 4),
    "wt": (1, 1), "w^2t": (2, 1), "wt^2": (1, 2), "w^2t^2": (2, 2),
}


# ---------------------------------------------------------------- single-mode rotations

def _shape_term(sigma: float) -> float:
    """Rotation variance of a Gaussian centred on the rotation point."""
    return (1 / (4 * sigma**4) + 4 * sigma**4 - 2) / 8


def gaussian_rotation_variance(sigma: float, w0: float) -> float:
    return sigma**2 * w0**2 + _shape_term(sigma)


def cat_rotation_variance(sigma: float, delta: float, w0: float = 0.0) -> float:
    """Large-separation rotation variance of the two-peak state centred at w0."""
    return _shape_term(sigma) + 0.25 * delta**2 * (sigma**2 + w0**2) + sigma**2 * w0**2


# ---------------------------------------------------------------- pair rotations

def _pair_shape(sp: float, sm: float) -> float:
    return ((1 / sp**2 + 1 / sm**2) ** 2 + (sp**2 + sm**2) ** 2 - 8) / 32


def _diff_shape(sp: float, sm: float) -> float:
    return 0.25 * (1 / (sp**2 * sm**2) + sp**2 * sm**2 - 2)


def gauss_pair_r1_variance(sp: float, sm: float, wp: float) -> float:
    return _pair_shape(sp, sm) + wp**2 * (sp**2 + sm**2) / 16


def gauss_pair_rdiff_variance(sp: float, sm: float, wp: float) -> float:
    """Var(R1 - R2) for the Gaussian pair state."""
    return _diff_shape(sp, sm) + 0.25 * sm**2 * wp**2


def cat_pair_r1_variance_reference(sp: float, sm: float, wp: float, delta: float) -> float:
    """Reference large-separation expression for Var(R1), two-peak pair state.

    Carries a (delta^2/128)(1/sm^2 + sm^2) term that quadrature does not
    support; kept verbatim because it is the expression under test.
    """
    return (_pair_shape(sp, sm) + (4 * wp**2 + delta**2) * (sp**2 + sm**2) / 64
            + delta**2 * wp**2 / 64 + delta**2 / 128 * (1 / sm**2 + sm**2))


def cat_pair_rdiff_variance_reference(sp: float, sm: float, wp: float, delta: float) -> float:
    """Reference expression for Var(R1 - R2), two-peak pair state: identical to the Gaussian one."""
    return gauss_pair_rdiff_variance(sp, sm, wp)


def cat_pair_r1_variance(sp: float, sm: float, wp: float, delta: float) -> float:
    """Large-separation Var(R1) for the two-peak pair state, from the moment table.

    Uses R1 = (R+ + R- + R1 - R2)/2 with R1 - R2 = (w+ w- + t+ t-)/2 and the
    vanishing cross covariances of a parity-definite separable state.
    """
    return (_pair_shape(sp, sm) + (4 * wp**2 + delta**2) * (sp**2 + sm**2) / 64
            + delta**2 * wp**2 / 64)


def cat_pair_rdiff_variance(sp: float, sm: float, wp: float, delta: float) -> float:
    """Large-separation Var(R1 - R2) for the two-peak pair state."""
    return gauss_pair_rdiff_variance(sp, sm, wp) + delta**2 * (wp**2 + sp**2) / 16
