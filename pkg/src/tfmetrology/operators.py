"""Frequency, time, swap and rotation operators acting on sampled states.

``omega`` multiplies by the frequency coordinate, ``t = -i d/d omega`` is
applied by Fourier differentiation. On a pair state every single-mode or
collective operator is a linear form in the two grid axes:

    omega_op = a * X0 + b * X1,   t_op = c * D0 + d * D1

with ``X`` the axis coordinate and ``D = -i d/dx`` the axis derivative. The
coefficients depend on the storage basis (see ``_FORMS``). Collective
operators omega_pm = omega1 +- omega2 have [omega_pm, t_pm] = 2i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Optional

import numpy as np

from .errors import (
    BasisMismatch,
    BasisTruncation,
    ConfigInvalid,
    EdgeLeakage,
    GridMismatch,
    GridTooNarrow,
    SupportOverflow,
)
from .states import Amplitude1D, FrequencyGrid, Jsa2D, State, inner_product

Mode = Literal[1, 2, "+", "-"]

EDGE_TOL = 1e-10
SHIFT_MASS_TOL = 1e-18
DEFAULT_MODES = 128
TAIL_TOL = 1e-10
GRAM_TOL = 1e-8

# (omega form, time form) per storage basis and mode label.
_FORMS = {
    "modes": {
        1: ((1.0, 0.0), (1.0, 0.0)),
        2: ((0.0, 1.0), (0.0, 1.0)),
        "+": ((1.0, 1.0), (1.0, 1.0)),
        "-": ((1.0, -1.0), (1.0, -1.0)),
    },
    "pm": {
        1: ((0.5, 0.5), (1.0, 1.0)),
        2: ((0.5, -0.5), (1.0, -1.0)),
        "+": ((1.0, 0.0), (2.0, 0.0)),
        "-": ((0.0, 1.0), (0.0, 2.0)),
    },
}


def _mode_key(mode) -> Mode:
    key = {"1": 1, "2": 2, "plus": "+", "minus": "-"}.get(str(mode), mode)
    if key not in (1, 2, "+", "-"):
        raise ConfigInvalid(f"unknown mode {mode!r}")
    return key


# ---------------------------------------------------------------- primitives

def _wavenumbers(n: int, h: float) -> np.ndarray:
    k = 2 * np.pi * np.fft.fftfreq(n, d=h)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return k


def _d(values: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """-i d/dx along ``axis`` by Fourier differentiation."""
    k = _wavenumbers(values.shape[axis], h)
    shape = [1] * values.ndim
    shape[axis] = -1
    return np.fft.ifft(np.fft.fft(values, axis=axis) * k.reshape(shape), axis=axis)


def check_edges(values: np.ndarray, tol: float = EDGE_TOL):
    """Raise EdgeLeakage when the amplitude has not decayed at any grid edge."""
    peak = np.max(np.abs(values))
    if peak == 0:
        return
    edges = [np.abs(np.take(values, idx, axis=ax)).max()
             for ax in range(values.ndim) for idx in (0, -1)]
    worst = max(edges) / peak
    if worst > tol:
        raise EdgeLeakage(f"edge amplitude {worst:.3e} of the peak exceeds {tol:.0e}")


def _fourier_shift(values: np.ndarray, h: float, shift: float, axis: int) -> np.ndarray:
    """values(x - shift) along ``axis``, exact for band-limited periodic data."""
    if shift == 0:
        return values
    n = values.shape[axis]
    k = 2 * np.pi * np.fft.fftfreq(n, d=h)
    phase = np.exp(-1j * k * shift)
    if n % 2 == 0:
        # keep the Nyquist component real so real shifts of real data stay real
        phase[n // 2] = np.cos(k[n // 2] * shift)
    shape = [1] * values.ndim
    shape[axis] = -1
    return np.fft.ifft(np.fft.fft(values, axis=axis) * phase.reshape(shape), axis=axis)


def _check_shift(values: np.ndarray, h: float, shift: float, axis: int):
    if shift == 0:
        return
    mass = np.sum(np.abs(values) ** 2, axis=tuple(a for a in range(values.ndim) if a != axis))
    total = mass.sum()
    cells = int(np.ceil(abs(shift) / h))
    if cells >= mass.size:
        raise SupportOverflow(f"shift {shift} exceeds the grid extent")
    leaving = mass[-cells:].sum() if shift > 0 else mass[:cells].sum()
    if leaving > SHIFT_MASS_TOL * total:
        raise SupportOverflow(f"shift {shift} pushes {leaving / total:.3e} of the norm off the grid")


# ---------------------------------------------------------------- elementary images

def _axes(state: Jsa2D):
    return (state.grid1, state.grid2)


def _omega_form(state: Jsa2D, a: float, b: float) -> np.ndarray:
    x0, x1 = state.grid1.points, state.grid2.points
    return a * x0[:, None] + b * x1[None, :]


def _time_form(values: np.ndarray, state: Jsa2D, c: float, d: float) -> np.ndarray:
    out = np.zeros_like(values)
    if c:
        out = out + c * _d(values, state.grid1.spacing, 0)
    if d:
        out = out + d * _d(values, state.grid2.spacing, 1)
    return out


def apply_omega(state: State, mode: Optional[Mode] = None) -> State:
    """Frequency operator image. Not renormalized: it is an operator image."""
    if isinstance(state, Amplitude1D):
        return state.with_values(state.omega * state.values)
    (a, b), _ = _FORMS[state.basis][_mode_key(mode)]
    return state.with_values(_omega_form(state, a, b) * state.values)


def apply_time(state: State, mode: Optional[Mode] = None, scale: float = 1.0) -> State:
    """Time operator image, ``-i * scale * d/d omega`` on a single axis.

    ``scale=2`` gives the collective time operator conjugate to a plus/minus
    frequency axis sampled on its own.
    """
    check_edges(state.values)
    if isinstance(state, Amplitude1D):
        return state.with_values(scale * _d(state.values, state.grid.spacing))
    _, (c, d) = _FORMS[state.basis][_mode_key(mode)]
    return state.with_values(_time_form(state.values, state, c, d))


def swap(state: Jsa2D) -> Jsa2D:
    """Exchange the two photons."""
    if not isinstance(state, Jsa2D):
        raise GridMismatch("swap needs a pair state")
    if state.basis == "modes":
        if state.grid1 != state.grid2:
            raise GridMismatch("swap needs identical mode grids")
        return state.with_values(state.values.T)
    if not state.grid2.is_symmetric():
        raise GridMismatch("swap in the plus/minus basis needs a symmetric omega_minus grid")
    return state.with_values(state.values[:, ::-1])


# ---------------------------------------------------------------- generators

@dataclass(frozen=True)
class Generator:
    """Hamiltonian descriptor.

    translation: alpha*omega1 + beta*omega2 + gamma*t1 + delta*t2
    rotation:    c1*R1 + c2*R2 with R_i = (omega_i^2 + t_i^2)/2, or, when
                 ``pm`` is set, c1*R_pm with R_pm = (omega_pm^2 + t_pm^2)/4.

    On a single photon only alpha, gamma (translations) and c1 are used.
    """

    kind: Literal["translation", "rotation"]
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    pm: Optional[Literal["plus", "minus"]] = None
    label: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == "translation":
            coeffs = (self.alpha, self.beta, self.gamma, self.delta)
            if self.c1 or self.c2 or self.pm is not None:
                raise ConfigInvalid("translation generators take alpha..delta only")
        elif self.kind == "rotation":
            coeffs = (self.c1, self.c2)
            if self.alpha or self.beta or self.gamma or self.delta:
                raise ConfigInvalid("rotation generators take c1, c2 only")
            if any(c not in (-1, 0, 1) for c in coeffs):
                raise ConfigInvalid("rotation coefficients must be -1, 0 or +1")
            if self.pm not in (None, "plus", "minus"):
                raise ConfigInvalid(f"unknown pm flag {self.pm!r}")
            if self.pm is not None and self.c2:
                raise ConfigInvalid("plus/minus rotations use c1 only")
        else:
            raise ConfigInvalid(f"unknown generator kind {self.kind!r}")
        if not any(coeffs):
            raise ConfigInvalid("generator has no nonzero coefficient")

    @property
    def name(self) -> str:
        return self.label or _describe(self)

    def swapped(self) -> Generator:
        """S H S expressed as a generator (photon labels exchanged)."""
        if self.kind == "translation":
            return Generator("translation", self.beta, self.alpha, self.delta, self.gamma)
        if self.pm is not None:
            return self
        return Generator("rotation", c1=self.c2, c2=self.c1)

    def to_dict(self) -> dict:
        if self.kind == "translation":
            return {"kind": "translation", "alpha": self.alpha, "beta": self.beta,
                    "gamma": self.gamma, "delta": self.delta}
        return {"kind": "rotation", "c1": self.c1, "c2": self.c2, "pm": self.pm}

    @classmethod
    def from_dict(cls, doc) -> Generator:
        if isinstance(doc, str):
            return preset(doc)
        if not isinstance(doc, dict):
            raise ConfigInvalid("generator document must be an object")
        kind = doc.get("kind")
        keys = {"translation": {"kind", "alpha", "beta", "gamma", "delta"},
                "rotation": {"kind", "c1", "c2", "pm"}}.get(kind)
        if keys is None:
            raise ConfigInvalid(f"unknown generator kind {kind!r}")
        extra = set(doc) - keys
        if extra:
            raise ConfigInvalid(f"unknown generator keys {sorted(extra)}")
        args = {}
        for k in keys - {"kind", "pm"}:
            v = doc.get(k, 0.0)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigInvalid(f"{k!r} must be a number")
            args[k] = float(v)
        if kind == "rotation":
            args["pm"] = doc.get("pm")
        return cls(kind, **args)


def _describe(gen: Generator) -> str:
    if gen.kind == "translation":
        parts = zip((gen.alpha, gen.beta, gen.gamma, gen.delta), ("w1", "w2", "t1", "t2"))
    elif gen.pm is not None:
        parts = [(gen.c1, "R" + ("+" if gen.pm == "plus" else "-"))]
    else:
        parts = zip((gen.c1, gen.c2), ("R1", "R2"))
    return " ".join(f"{c:+g}*{n}" for c, n in parts if c)


_PRESETS = {
    "omega": Generator("translation", alpha=1.0, label="omega"),
    "t": Generator("translation", gamma=1.0, label="t"),
    "R": Generator("rotation", c1=1.0, label="R"),
    "omega1": Generator("translation", alpha=1.0, label="omega1"),
    "omega2": Generator("translation", beta=1.0, label="omega2"),
    "t1": Generator("translation", gamma=1.0, label="t1"),
    "t2": Generator("translation", delta=1.0, label="t2"),
    "omega_plus": Generator("translation", alpha=1.0, beta=1.0, label="omega_plus"),
    "omega_minus": Generator("translation", alpha=1.0, beta=-1.0, label="omega_minus"),
    "t_plus": Generator("translation", gamma=1.0, delta=1.0, label="t_plus"),
    "t_minus": Generator("translation", gamma=1.0, delta=-1.0, label="t_minus"),
    "R1": Generator("rotation", c1=1.0, label="R1"),
    "R2": Generator("rotation", c2=1.0, label="R2"),
    "R1+R2": Generator("rotation", c1=1.0, c2=1.0, label="R1+R2"),
    "R1-R2": Generator("rotation", c1=1.0, c2=-1.0, label="R1-R2"),
    "R_plus": Generator("rotation", c1=1.0, pm="plus", label="R_plus"),
    "R_minus": Generator("rotation", c1=1.0, pm="minus", label="R_minus"),
}


def preset(name: str) -> Generator:
    try:
        return _PRESETS[name]
    except KeyError:
        raise ConfigInvalid(f"unknown generator preset {name!r}; known: {sorted(_PRESETS)}") from None


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def _translation_forms(state: Jsa2D, gen: Generator):
    forms = _FORMS[state.basis]
    (a1, b1), (c1, d1) = forms[1]
    (a2, b2), (c2, d2) = forms[2]
    w = (gen.alpha * a1 + gen.beta * a2, gen.alpha * b1 + gen.beta * b2)
    t = (gen.gamma * c1 + gen.delta * c2, gen.gamma * d1 + gen.delta * d2)
    return w, t


def _rotation_terms(state: Jsa2D, gen: Generator):
    """(coefficient, prefactor, omega form, time form) for each R term."""
    forms = _FORMS[state.basis]
    if gen.pm is not None:
        w, t = forms["+" if gen.pm == "plus" else "-"]
        return [(gen.c1, 0.25, w, t)]
    return [(c, 0.5, *forms[m]) for c, m in ((gen.c1, 1), (gen.c2, 2)) if c]


def apply_generator(state: State, gen: Generator) -> State:
    """H|psi> (operator image, not normalized)."""
    if gen.kind == "rotation" or gen.gamma or gen.delta:
        check_edges(state.values)
    if isinstance(state, Amplitude1D):
        return state.with_values(_apply_1d(state, gen))
    psi = state.values
    if gen.kind == "translation":
        (a, b), (c, d) = _translation_forms(state, gen)
        out = _omega_form(state, a, b) * psi + _time_form(psi, state, c, d)
        return state.with_values(out)
    out = np.zeros_like(psi)
    for coef, pref, (a, b), (c, d) in _rotation_terms(state, gen):
        w = _omega_form(state, a, b)
        tpsi = _time_form(psi, state, c, d)
        out = out + coef * pref * (w * w * psi + _time_form(tpsi, state, c, d))
    return state.with_values(out)


def _apply_1d(state: Amplitude1D, gen: Generator) -> np.ndarray:
    psi, w, h = state.values, state.omega, state.grid.spacing
    if gen.kind == "translation":
        if gen.beta or gen.delta:
            raise GridMismatch("single-photon generators use alpha and gamma only")
        return gen.alpha * w * psi + gen.gamma * _d(psi, h)
    if gen.c2:
        raise GridMismatch("single-photon rotations use c1 only")
    # A pm-flagged rotation treats the axis as a collective one: t = -2i d/dw.
    s, pref = (2.0, 0.25) if gen.pm is not None else (1.0, 0.5)
    return gen.c1 * pref * (w * w * psi + s * s * _d(_d(psi, h), h))


def swap_conjugated_image(state: Jsa2D, gen: Generator) -> Jsa2D:
    """S H S |psi>."""
    return swap(apply_generator(swap(state), gen))


def expectation(state: State, gen: Generator) -> complex:
    return inner_product(state, apply_generator(state, gen)) / inner_product(state, state).real


def variance_of_image(state: State, image: State) -> float:
    """<H^2> - <H>^2 for Hermitian H, given the image H|psi>."""
    norm = inner_product(state, state).real
    mean = inner_product(state, image) / norm
    second = inner_product(image, image).real / norm
    scale = max(1.0, second)
    if abs(mean.imag) > 1e-10 * scale:
        raise GridMismatch(f"expectation has imaginary part {mean.imag:.3e}; operator image is not Hermitian on this grid")
    var = second - mean.real**2
    if var < -1e-10 * scale:
        raise GridMismatch(f"negative variance {var:.3e}")
    return max(var, 0.0)


def variance(state: State, gen: Generator) -> float:
    return variance_of_image(state, apply_generator(state, gen))


def product_moment(state: Amplitude1D, k: int, l: int, scale: float = 1.0) -> complex:
    """<psi| omega^k t^l |psi> on one axis; ``scale`` as in ``apply_time``."""
    check_edges(state.values)
    v = state.values
    for _ in range(l):
        v = scale * _d(v, state.grid.spacing)
    lhs = state.omega**k * state.values
    return complex(np.vdot(lhs, v) * state.grid.spacing)


# ---------------------------------------------------------------- translations

def evolve_translation(state: State, gen: Generator, kappa: float) -> State:
    """exp(-i kappa H) for a translation generator.

    The time part shifts frequencies (exp(-i k t) S(w) = S(w - k)); the
    frequency part is a phase. Splitting the exponential leaves the global
    phase exp(i k^2 [a c + b d] / 2) from the commutator of the two parts.
    """
    if gen.kind != "translation":
        raise ConfigInvalid("evolve_translation needs a translation generator")
    if kappa == 0:
        return state
    if isinstance(state, Amplitude1D):
        if gen.beta or gen.delta:
            raise GridMismatch("single-photon generators use alpha and gamma only")
        h = state.grid.spacing
        _check_shift(state.values, h, kappa * gen.gamma, 0)
        psi = _fourier_shift(state.values, h, kappa * gen.gamma, 0)
        psi = psi * np.exp(-1j * kappa * gen.alpha * state.omega)
        psi = psi * np.exp(0.5j * kappa**2 * gen.alpha * gen.gamma)
        return state.with_values(psi)
    (a, b), (c, d) = _translation_forms(state, gen)
    psi = state.values
    for axis, (grid, coef) in enumerate(zip(_axes(state), (c, d))):
        if coef:
            _check_shift(psi, grid.spacing, kappa * coef, axis)
            psi = _fourier_shift(psi, grid.spacing, kappa * coef, axis)
    if a or b:
        psi = psi * np.exp(-1j * kappa * _omega_form(state, a, b))
    psi = psi * np.exp(0.5j * kappa**2 * (a * c + b * d))
    return state.with_values(psi)


# ---------------------------------------------------------------- rotations

class HermiteBasis:
    """Orthonormal Hermite-Gauss functions sampled on a grid.

    phi_k(w) = s^(-1/2) h_k((w - c)/s) with the normalized Hermite functions
    h_k. For scale s the modes diagonalize ((w-c)^2/s^2 + s^2 t^2)/2 with
    eigenvalues k + 1/2, so s = 1 matches R and s = sqrt(2) matches the
    collective R_pm.
    """

    def __init__(self, grid: FrequencyGrid, n_modes: int = DEFAULT_MODES,
                 center: float = 0.0, scale: float = 1.0):
        if n_modes < 1:
            raise ConfigInvalid("need at least one Hermite mode")
        self.grid = grid
        self.n_modes = int(n_modes)
        self.center = float(center)
        self.scale = float(scale)
        y = (grid.points - center) / scale
        modes = np.empty((n_modes, y.size))
        modes[0] = np.pi**-0.25 * np.exp(-0.5 * y * y)
        if n_modes > 1:
            modes[1] = np.sqrt(2.0) * y * modes[0]
        for k in range(1, n_modes - 1):
            modes[k + 1] = np.sqrt(2.0 / (k + 1)) * y * modes[k] - np.sqrt(k / (k + 1)) * modes[k - 1]
        modes /= np.sqrt(scale)
        gram = modes @ modes.T * grid.spacing
        err = np.max(np.abs(gram - np.eye(n_modes)))
        if err > GRAM_TOL:
            raise GridTooNarrow(
                f"{n_modes} Hermite modes are not orthonormal on this grid (error {err:.2e}); "
                f"widen or refine the grid, see rotation_grid()"
            )
        self.modes = modes
        self.modes.setflags(write=False)
        self.gram_error = float(err)

    def eigenphases(self, theta: float) -> np.ndarray:
        return np.exp(-1j * theta * (np.arange(self.n_modes) + 0.5))

    def coefficients(self, values: np.ndarray, axis: int = 0) -> np.ndarray:
        v = np.moveaxis(values, axis, 0)
        return np.tensordot(self.modes, v, axes=(1, 0)) * self.grid.spacing

    def tail_fraction(self, values: np.ndarray, axis: int = 0) -> float:
        c = self.coefficients(values, axis)
        total = np.sum(np.abs(values) ** 2) * self.grid.spacing
        return float((total - np.sum(np.abs(c) ** 2)) / total)

    def rotate(self, values: np.ndarray, theta: float, axis: int = 0,
               tail_tol: float = TAIL_TOL) -> np.ndarray:
        """Multiply mode k by exp(-i theta (k + 1/2)).

        Whatever lies outside the span (below ``tail_tol`` by precondition) is
        left untouched, which keeps the map unitary to rounding.
        """
        v = np.moveaxis(values, axis, 0)
        c = np.tensordot(self.modes, v, axes=(1, 0)) * self.grid.spacing
        total = np.sum(np.abs(v) ** 2) * self.grid.spacing
        tail = (total - np.sum(np.abs(c) ** 2)) / total if total else 0.0
        if tail > tail_tol:
            raise BasisTruncation(
                f"{tail:.2e} of the norm lies beyond {self.n_modes} Hermite modes (tolerance {tail_tol:.0e})"
            )
        dc = (self.eigenphases(theta) - 1.0).reshape((-1,) + (1,) * (v.ndim - 1)) * c
        out = v + np.tensordot(self.modes.T, dc, axes=(1, 0))
        return np.moveaxis(out, 0, axis)


@lru_cache(maxsize=16)
def hermite_basis(grid: FrequencyGrid, n_modes: int = DEFAULT_MODES,
                  center: float = 0.0, scale: float = 1.0) -> HermiteBasis:
    return HermiteBasis(grid, n_modes, center, scale)


def rotation_half_width(n_modes: int = DEFAULT_MODES, scale: float = 1.0, margin: float = 8.0) -> float:
    """Half-width a grid needs so ``n_modes`` Hermite modes are resolved."""
    return scale * (np.sqrt(2 * n_modes + 1) + margin)


def rotation_grid(n_points: int = 1024, n_modes: int = DEFAULT_MODES, scale: float = 1.0,
                  margin: float = 8.0) -> FrequencyGrid:
    half = rotation_half_width(n_modes, scale, margin)
    return FrequencyGrid(int(n_points), -half, half)


def _rotate_1d(state: Amplitude1D, gen: Generator, theta: float, n_modes: int, tail_tol: float) -> Amplitude1D:
    if gen.c2:
        raise GridMismatch("single-photon rotations use c1 only")
    scale = np.sqrt(2.0) if gen.pm is not None else 1.0
    basis = hermite_basis(state.grid, n_modes, 0.0, scale)
    return state.with_values(basis.rotate(state.values, gen.c1 * theta, 0, tail_tol))


def evolve_rotation(state: State, gen: Generator, theta: float, *, n_modes: int = DEFAULT_MODES,
                    tail_tol: float = TAIL_TOL, center: Optional[tuple[float, float]] = None) -> State:
    """exp(-i theta H) for a rotation generator, via Hermite decomposition.

    Mode rotations R1, R2 need a pair state in the modes basis; R_plus and
    R_minus need the plus/minus basis. ``center=(tau0, phi0)`` rotates a
    single photon about that phase-space point instead of the origin.
    """
    if gen.kind != "rotation":
        raise ConfigInvalid("evolve_rotation needs a rotation generator")
    if center is not None:
        if not isinstance(state, Amplitude1D):
            raise ConfigInvalid("off-origin rotation is implemented for single photons")
        return _rotate_about(state, gen, theta, center, n_modes, tail_tol)
    if isinstance(state, Amplitude1D):
        return _rotate_1d(state, gen, theta, n_modes, tail_tol)
    psi = state.values
    if gen.pm is None:
        if state.basis != "modes":
            raise BasisMismatch("R1/R2 rotations need the modes basis")
        for axis, (grid, coef) in enumerate(zip(_axes(state), (gen.c1, gen.c2))):
            if coef:
                basis = hermite_basis(grid, n_modes, 0.0, 1.0)
                psi = basis.rotate(psi, coef * theta, axis, tail_tol)
        return state.with_values(psi)
    if state.basis != "pm":
        raise BasisMismatch("R_plus/R_minus rotations need the plus/minus basis")
    axis = 0 if gen.pm == "plus" else 1
    basis = hermite_basis(_axes(state)[axis], n_modes, 0.0, np.sqrt(2.0))
    return state.with_values(basis.rotate(psi, gen.c1 * theta, axis, tail_tol))


_OMEGA = Generator("translation", alpha=1.0)
_TIME = Generator("translation", gamma=1.0)


def _rotate_about(state: Amplitude1D, gen: Generator, theta: float, center, n_modes, tail_tol):
    tau0, phi0 = center
    # T = exp(-i tau0 w) exp(-i phi0 t) moves the origin to (tau0, phi0).
    moved = evolve_translation(evolve_translation(state, _OMEGA, -tau0), _TIME, -phi0)
    rotated = _rotate_1d(moved, gen, theta, n_modes, tail_tol)
    return evolve_translation(evolve_translation(rotated, _TIME, phi0), _OMEGA, tau0)
