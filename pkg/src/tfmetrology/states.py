"""Sampled one- and two-photon spectral amplitudes.

Frequencies are dimensionless. A single photon is an ``Amplitude1D`` on a
uniform ``FrequencyGrid``; a photon pair is a ``Jsa2D`` stored either in the
mode basis (omega1, omega2) or in the collective basis (omega_plus,
omega_minus) with ``omega_pm = omega1 +- omega2``. Inner products are plain
Riemann sums, which coincide with the trapezoid rule for amplitudes that vanish
at the edges.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Union

import numpy as np

from .errors import ConfigInvalid, GridMismatch, GridTooNarrow

Basis = Literal["modes", "pm"]
Parity = Literal["even", "odd", "none"]

# Half-width of the default grid, in units of the widest Gaussian.
DEFAULT_HALF_WIDTH = 10.0
DEFAULT_POINTS = 1024
# Required coverage around each Gaussian peak.
COVERAGE_SIGMAS = 8.0
PARITY_TOL = 1e-10


@dataclass(frozen=True)
class FrequencyGrid:
    n_points: int
    omega_min: float
    omega_max: float

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 16:
            raise ConfigInvalid(f"grid needs at least 16 points, got {self.n_points}")
        if not (np.isfinite(self.omega_min) and np.isfinite(self.omega_max)):
            raise ConfigInvalid("grid bounds must be finite")
        if not self.omega_max > self.omega_min:
            raise ConfigInvalid("grid needs omega_max > omega_min")

    @classmethod
    def centered(cls, center: float, half_width: float, n_points: int = DEFAULT_POINTS) -> FrequencyGrid:
        return cls(int(n_points), float(center - half_width), float(center + half_width))

    @property
    def spacing(self) -> float:
        return (self.omega_max - self.omega_min) / (self.n_points - 1)

    @property
    def center(self) -> float:
        return 0.5 * (self.omega_min + self.omega_max)

    @cached_property
    def points(self) -> np.ndarray:
        # Built around the midpoint so symmetric grids are exactly symmetric.
        k = np.arange(self.n_points) - 0.5 * (self.n_points - 1)
        pts = self.center + k * self.spacing
        pts.setflags(write=False)
        return pts

    def covers(self, lo: float, hi: float) -> bool:
        slack = 1e-12 * (self.omega_max - self.omega_min)
        return self.omega_min <= lo + slack and self.omega_max >= hi - slack

    def is_symmetric(self) -> bool:
        return abs(self.omega_min + self.omega_max) <= 1e-12 * (self.omega_max - self.omega_min)

    def to_dict(self) -> dict:
        return {"n": self.n_points, "min": self.omega_min, "max": self.omega_max}

    @classmethod
    def from_dict(cls, doc: dict) -> FrequencyGrid:
        try:
            return cls(int(doc["n"]), float(doc["min"]), float(doc["max"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad grid document {doc!r}: {exc}") from exc


def _as_complex(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.shape != shape:
        raise GridMismatch(f"values have shape {arr.shape}, grid expects {shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Amplitude1D:
    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_complex(self.values, (self.grid.n_points,)))

    @property
    def omega(self) -> np.ndarray:
        return self.grid.points

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.spacing)

    def normalize(self) -> Amplitude1D:
        return Amplitude1D(self.grid, self.values / np.sqrt(self.norm_squared()))

    def with_values(self, values) -> Amplitude1D:
        return Amplitude1D(self.grid, values)

    def to_csv(self) -> str:
        return amplitude_csv(self)


@dataclass(frozen=True, eq=False)
class Jsa2D:
    """Joint spectral amplitude sampled on a product grid.

    In the ``"pm"`` basis ``grid1`` is the omega_plus axis and ``grid2`` the
    omega_minus axis, and the norm is taken in (omega_plus, omega_minus).
    """

    grid1: FrequencyGrid
    grid2: FrequencyGrid
    values: np.ndarray
    basis: Basis = "modes"

    def __post_init__(self):
        if self.basis not in ("modes", "pm"):
            raise ConfigInvalid(f"unknown basis {self.basis!r}")
        shape = (self.grid1.n_points, self.grid2.n_points)
        object.__setattr__(self, "values", _as_complex(self.values, shape))

    @property
    def cell(self) -> float:
        return self.grid1.spacing * self.grid2.spacing

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.cell)

    def normalize(self) -> Jsa2D:
        return self.with_values(self.values / np.sqrt(self.norm_squared()))

    def with_values(self, values) -> Jsa2D:
        return Jsa2D(self.grid1, self.grid2, values, self.basis)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.grid1.points, self.grid2.points, indexing="ij")

    def to_csv(self) -> str:
        names = ("omega1", "omega2") if self.basis == "modes" else ("omega_plus", "omega_minus")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*names, "re", "im"])
        a, b = self.mesh()
        for x, y, v in zip(a.ravel(), b.ravel(), self.values.ravel()):
            w.writerow([_fmt(x), _fmt(y), _fmt(v.real), _fmt(v.imag)])
        return buf.getvalue()


State = Union[Amplitude1D, Jsa2D]


@dataclass(frozen=True, eq=False)
class SeparablePmState:
    """Pair state f(omega_plus) * g(omega_minus); parity is the symmetry of g."""

    f_plus: Amplitude1D
    g_minus: Amplitude1D
    parity: Parity = "none"

    def __post_init__(self):
        if self.parity not in ("even", "odd", "none"):
            raise ConfigInvalid(f"unknown parity {self.parity!r}")
        for name, amp in (("f_plus", self.f_plus), ("g_minus", self.g_minus)):
            if abs(amp.norm_squared() - 1.0) > 1e-10:
                raise ConfigInvalid(f"{name} is not normalized")
        if self.parity != "none":
            if not self.g_minus.grid.is_symmetric():
                raise GridMismatch("parity needs an omega_minus grid symmetric about 0")
            g = self.g_minus.values
            sign = 1.0 if self.parity == "even" else -1.0
            if np.max(np.abs(g[::-1] - sign * g)) > PARITY_TOL:
                raise ConfigInvalid(f"g_minus is not {self.parity}")

    @classmethod
    def from_parts(cls, f_plus: Amplitude1D, g_minus: Amplitude1D) -> SeparablePmState:
        return cls(f_plus, g_minus, detect_parity(g_minus))

    def jsa_pm(self) -> Jsa2D:
        values = np.outer(self.f_plus.values, self.g_minus.values)
        return Jsa2D(self.f_plus.grid, self.g_minus.grid, values, "pm")


def detect_parity(g: Amplitude1D, tol: float = PARITY_TOL) -> Parity:
    if not g.grid.is_symmetric():
        return "none"
    v = g.values
    if np.max(np.abs(v[::-1] - v)) <= tol:
        return "even"
    if np.max(np.abs(v[::-1] + v)) <= tol:
        return "odd"
    return "none"


@dataclass(frozen=True)
class GaussianSpec:
    center: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigInvalid("sigma must be positive")

    def support(self, n_sigma: float = COVERAGE_SIGMAS) -> tuple[float, float]:
        return self.center - n_sigma * self.sigma, self.center + n_sigma * self.sigma

    def default_grid(self, n_points: int = DEFAULT_POINTS, half_width: float = DEFAULT_HALF_WIDTH) -> FrequencyGrid:
        lo, hi = self.support(half_width)
        return FrequencyGrid(n_points, lo, hi)


@dataclass(frozen=True)
class CatSpec:
    """Two Gaussians at center -+ delta/2 combined with a relative minus sign."""

    center: float
    delta: float
    sigma: float
    sign: int = field(default=-1)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigInvalid("sigma must be positive")
        if not self.delta > 0:
            raise ConfigInvalid("delta must be positive")
        if self.sign != -1:
            raise ConfigInvalid("only the odd (minus) combination is supported")
        if self.delta < 6 * self.sigma:
            warnings.warn(
                f"cat separation {self.delta} < 6 sigma; large-separation closed forms will be off",
                stacklevel=3,
            )

    @property
    def well_separated(self) -> bool:
        return self.delta >= 6 * self.sigma

    def support(self, n_sigma: float = COVERAGE_SIGMAS) -> tuple[float, float]:
        half = 0.5 * self.delta + n_sigma * self.sigma
        return self.center - half, self.center + half

    def default_grid(self, n_points: int = DEFAULT_POINTS, half_width: float = DEFAULT_HALF_WIDTH) -> FrequencyGrid:
        lo, hi = self.support(half_width)
        return FrequencyGrid(n_points, lo, hi)


Spec = Union[GaussianSpec, CatSpec]


def gaussian_samples(omega, center: float, sigma: float) -> np.ndarray:
    return (2 * np.pi * sigma**2) ** -0.25 * np.exp(-((omega - center) ** 2) / (4 * sigma**2))


def _require_cover(grid: FrequencyGrid, lo: float, hi: float):
    if not grid.covers(lo, hi):
        raise GridTooNarrow(
            f"grid [{grid.omega_min}, {grid.omega_max}] does not cover [{lo}, {hi}]"
        )


def make_gaussian(spec: GaussianSpec, grid: FrequencyGrid | None = None) -> Amplitude1D:
    grid = grid or spec.default_grid()
    _require_cover(grid, *spec.support())
    raw = gaussian_samples(grid.points, spec.center, spec.sigma)
    return Amplitude1D(grid, raw).normalize()


def cat_norm_squared(delta: float, sigma: float) -> float:
    """Norm of (G(-delta/2) - G(+delta/2))/sqrt(2) for unit Gaussians G."""
    return 1.0 - np.exp(-(delta**2) / (8 * sigma**2))


def make_cat(spec: CatSpec, grid: FrequencyGrid | None = None) -> Amplitude1D:
    grid = grid or spec.default_grid()
    _require_cover(grid, *spec.support())
    w, half = grid.points, 0.5 * spec.delta
    raw = gaussian_samples(w, spec.center - half, spec.sigma) - gaussian_samples(w, spec.center + half, spec.sigma)
    # exact continuum normalization first, then the grid renormalization is a tiny correction
    raw = raw / np.sqrt(2 * cat_norm_squared(spec.delta, spec.sigma))
    return Amplitude1D(grid, raw).normalize()


def make_amplitude(spec: Spec, grid: FrequencyGrid | None = None) -> Amplitude1D:
    if isinstance(spec, CatSpec):
        return make_cat(spec, grid)
    return make_gaussian(spec, grid)


def sinc_interpolate(amp: Amplitude1D, x) -> np.ndarray:
    """Band-limited reconstruction of ``amp`` at points ``x``; zero off-grid."""
    x = np.asarray(x, dtype=float)
    g = amp.grid
    u = (x[:, None] - g.points[None, :]) / g.spacing
    out = np.sinc(u) @ amp.values
    half = 0.5 * g.spacing
    outside = (x < g.omega_min - half) | (x > g.omega_max + half)
    out[outside] = 0.0
    return out


def full_grid_for(state: SeparablePmState, n_points: int = DEFAULT_POINTS) -> FrequencyGrid:
    """Square mode grid holding the image of the plus/minus support."""
    f, g = state.f_plus.grid, state.g_minus.grid
    lo = min(f.omega_min + g.omega_min, f.omega_min - g.omega_max) / 2
    hi = max(f.omega_max + g.omega_max, f.omega_max - g.omega_min) / 2
    return FrequencyGrid(n_points, lo, hi)


def pm_to_full(state: SeparablePmState, grid: FrequencyGrid | None = None,
               n_points: int = DEFAULT_POINTS) -> Jsa2D:
    """Resample f(omega1+omega2) g(omega1-omega2) on a square mode grid.

    Sums and differences of two grid points take 2N-1 distinct values each, so
    f and g are interpolated once on those and the 2-D array is assembled by
    indexing.
    """
    grid = grid or full_grid_for(state, n_points)
    n, h = grid.n_points, grid.spacing
    k = np.arange(2 * n - 1)
    sums = 2 * grid.omega_min + k * h
    diffs = (k - (n - 1)) * h
    fv = sinc_interpolate(state.f_plus, sums)
    gv = sinc_interpolate(state.g_minus, diffs)
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    values = fv[i + j] * gv[i - j + n - 1]
    jsa = Jsa2D(grid, grid, values, "modes")
    # With unit-norm f, g the unnormalized mass is 1/2 (Jacobian of the change of variables).
    captured = 2.0 * jsa.norm_squared()
    if captured < 1.0 - 1e-9:
        raise GridTooNarrow(f"mode grid captures only {captured:.12f} of the pair state")
    return jsa.normalize()


def inner_product(a: State, b: State) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if type(a) is not type(b):
        raise GridMismatch("inner product between different state types")
    if isinstance(a, Amplitude1D):
        if a.grid != b.grid:
            raise GridMismatch("states live on different grids")
        return complex(np.vdot(a.values, b.values) * a.grid.spacing)
    if (a.grid1, a.grid2, a.basis) != (b.grid1, b.grid2, b.basis):
        raise GridMismatch("pair states live on different grids or bases")
    return complex(np.vdot(a.values, b.values) * a.cell)


def distance(a: State, b: State) -> float:
    """L2 norm of a - b, computed on the difference to avoid cancellation."""
    inner_product(a, b)  # grid and type checks
    weight = a.grid.spacing if isinstance(a, Amplitude1D) else a.cell
    return float(np.sqrt(np.sum(np.abs(a.values - b.values) ** 2) * weight))


# ---------------------------------------------------------------- documents

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def amplitude_csv(amp: Amplitude1D) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega", "re", "im"])
    for x, v in zip(amp.omega, amp.values):
        w.writerow([_fmt(x), _fmt(v.real), _fmt(v.imag)])
    return buf.getvalue()


def read_amplitude_csv(text: str) -> Amplitude1D:
    rows = list(csv.DictReader(io.StringIO(text)))
    omega = np.array([float(r["omega"]) for r in rows])
    values = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    grid = FrequencyGrid(len(omega), float(omega[0]), float(omega[-1]))
    return Amplitude1D(grid, values)


def _num(doc: dict, key: str, required: bool = True):
    if key not in doc:
        if required:
            raise ConfigInvalid(f"missing key {key!r}")
        return None
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigInvalid(f"{key!r} must be a number")
    return float(val)


def spec_from_dict(doc: dict) -> tuple[Spec, FrequencyGrid | None]:
    if not isinstance(doc, dict):
        raise ConfigInvalid("state document must be an object")
    kind = doc.get("kind")
    allowed = {"kind", "center", "sigma", "delta", "grid"}
    extra = set(doc) - allowed
    if extra:
        raise ConfigInvalid(f"unknown keys {sorted(extra)}")
    grid = FrequencyGrid.from_dict(doc["grid"]) if "grid" in doc else None
    if kind == "gaussian":
        if "delta" in doc:
            raise ConfigInvalid("gaussian takes no delta")
        return GaussianSpec(_num(doc, "center"), _num(doc, "sigma")), grid
    if kind == "cat":
        return CatSpec(_num(doc, "center"), _num(doc, "delta"), _num(doc, "sigma")), grid
    raise ConfigInvalid(f"unknown state kind {kind!r}")


def spec_to_dict(spec: Spec, grid: FrequencyGrid | None = None) -> dict:
    if isinstance(spec, CatSpec):
        doc = {"kind": "cat", "center": spec.center, "sigma": spec.sigma, "delta": spec.delta}
    else:
        doc = {"kind": "gaussian", "center": spec.center, "sigma": spec.sigma}
    if grid is not None:
        doc["grid"] = grid.to_dict()
    return doc


def amplitude_from_dict(doc: dict) -> Amplitude1D:
    spec, grid = spec_from_dict(doc)
    return make_amplitude(spec, grid)


def pair_from_dict(doc: dict) -> SeparablePmState:
    extra = set(doc) - {"kind", "plus", "minus", "basis", "grid"}
    if extra:
        raise ConfigInvalid(f"unknown keys {sorted(extra)}")
    try:
        f = amplitude_from_dict(doc["plus"])
        g = amplitude_from_dict(doc["minus"])
    except KeyError as exc:
        raise ConfigInvalid(f"biphoton document needs {exc}") from exc
    return SeparablePmState.from_parts(f, g)


def state_from_dict(doc: dict) -> State:
    """Build a state from a JSON document.

    Single-photon documents give an ``Amplitude1D``. Documents with
    ``"kind": "biphoton"`` give a ``Jsa2D`` in the requested basis
    (``"pm"`` by default, ``"modes"`` resamples onto a square grid).
    """
    if not isinstance(doc, dict):
        raise ConfigInvalid("state document must be an object")
    if doc.get("kind") != "biphoton":
        return amplitude_from_dict(doc)
    pair = pair_from_dict(doc)
    basis = doc.get("basis", "pm")
    if basis == "pm":
        if "grid" in doc:
            raise ConfigInvalid("grid applies to the modes basis only")
        return pair.jsa_pm()
    if basis == "modes":
        grid = FrequencyGrid.from_dict(doc["grid"]) if "grid" in doc else None
        return pm_to_full(pair, grid)
    raise ConfigInvalid(f"unknown basis {basis!r}")
