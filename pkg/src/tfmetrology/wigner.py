"""Chronocyclic Wigner functions.

Single photon:  W(tau, phi) = int d w  exp(2 i w tau) S(phi + w) S*(phi - w)

With this normalization a Gaussian peaks at 1 and for pure states
(2/pi) * int int W_a W_b = |<a|b>|^2. On a grid with spacing h the integrand
pairs samples a and b with a + b = s, so phi must lie on the half lattice
omega_min + s*h/2 and the sum over w runs in steps of h.

Pair states are never materialized in four dimensions. A separable state
factorizes into one-photon maps of f and g; arbitrary pair states are
evaluated on two-dimensional slices.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .errors import BasisMismatch, GridMismatch, PreconditionError
from .operators import Generator, apply_omega, apply_time, check_edges, evolve_translation
from .states import Amplitude1D, Jsa2D, SeparablePmState, State, inner_product

OVERLAP_CONSTANT = 2 / np.pi
IMAG_TOL = 1e-10
MAGIC = b"TFWM"
FORMAT_VERSION = 1


def _uniform(axis: np.ndarray, name: str) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size < 1:
        raise GridMismatch(f"{name} axis needs at least one point")
    d = np.diff(axis)
    if d.size and (np.any(d <= 0) or np.max(np.abs(d - d.mean())) > 1e-9 * abs(d.mean())):
        raise GridMismatch(f"{name} axis must be uniform and increasing")
    if not np.all(np.isfinite(axis)):
        raise GridMismatch(f"{name} axis must be finite")
    axis = axis.copy()
    axis.setflags(write=False)
    return axis


@dataclass(frozen=True, eq=False)
class PhaseSpaceGrid:
    tau: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tau", _uniform(self.tau, "tau"))
        object.__setattr__(self, "phi", _uniform(self.phi, "phi"))

    @property
    def dtau(self) -> float:
        return float(self.tau[1] - self.tau[0]) if self.tau.size > 1 else 0.0

    @property
    def dphi(self) -> float:
        return float(self.phi[1] - self.phi[0]) if self.phi.size > 1 else 0.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.tau.size, self.phi.size

    @classmethod
    def for_amplitude(cls, amp: Amplitude1D, tau_max: float, n_tau: int = 201,
                      phi_range: tuple[float, float] | None = None, phi_stride: int = 1) -> PhaseSpaceGrid:
        """Half-lattice phi points of ``amp``'s grid, every ``phi_stride``-th one."""
        lat = half_lattice(amp)
        if phi_range is not None:
            lo, hi = phi_range
            lat = lat[(lat >= lo - 1e-12) & (lat <= hi + 1e-12)]
        return cls(np.linspace(-tau_max, tau_max, n_tau), lat[::phi_stride])

    @classmethod
    def full_period(cls, amp: Amplitude1D, n_tau: int | None = None) -> PhaseSpaceGrid:
        """Every half-lattice phi and one full tau period pi/h.

        On this grid the discrete overlap and marginal identities are exact.
        """
        h = amp.grid.spacing
        n = n_tau or 2 * amp.grid.n_points
        period = np.pi / h
        tau = -period / 2 + period * np.arange(n) / n
        return cls(tau, half_lattice(amp))


def half_lattice(amp: Amplitude1D) -> np.ndarray:
    g = amp.grid
    return g.points[0] + 0.5 * g.spacing * np.arange(2 * g.n_points - 1)


def _lattice_index(grid, phi: np.ndarray) -> np.ndarray:
    s = (2 * (np.asarray(phi) - grid.points[0])) / grid.spacing
    si = np.rint(s).astype(int)
    if np.any(np.abs(s - si) > 1e-6) or np.any(si < 0) or np.any(si > 2 * grid.n_points - 2):
        raise GridMismatch("phi values must lie on the half lattice of the state grid (see half_lattice)")
    return si


@dataclass(frozen=True, eq=False)
class WignerMap:
    """Real map with ``values[i, j]`` at (tau[i], phi[j])."""

    grid: PhaseSpaceGrid
    values: np.ndarray
    labels: tuple[str, str] = ("tau", "phi")

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            raise GridMismatch(f"map shape {v.shape} does not match grid {self.grid.shape}")
        if np.iscomplexobj(v):
            resid = np.max(np.abs(v.imag)) if v.size else 0.0
            if resid > IMAG_TOL:
                raise PreconditionError(f"Wigner map has imaginary residue {resid:.2e}")
            v = v.real
        v = np.array(v, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.dtau * self.grid.dphi)

    def tau_marginal(self) -> np.ndarray:
        """int W d tau as a function of phi."""
        return self.values.sum(axis=0) * self.grid.dtau

    def phi_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.grid.dphi

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"{self.labels[0]},{self.labels[1]},value\n")
        for i, t in enumerate(self.grid.tau):
            for j, p in enumerate(self.grid.phi):
                buf.write(f"{t:.17g},{p:.17g},{self.values[i, j]:.17g}\n")
        return buf.getvalue()

    def to_bytes(self) -> bytes:
        """Header: 4-byte magic, uint32 version, uint32 n_tau, uint32 n_phi;
        then tau, phi and the row-major values as little-endian float64."""
        n_tau, n_phi = self.grid.shape
        head = MAGIC + struct.pack("<III", FORMAT_VERSION, n_tau, n_phi)
        body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes()
                        for a in (self.grid.tau, self.grid.phi, self.values))
        return head + body

    @classmethod
    def from_bytes(cls, data: bytes) -> WignerMap:
        if data[:4] != MAGIC:
            raise ValueError("not a Wigner map file")
        version, n_tau, n_phi = struct.unpack("<III", data[4:16])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported format version {version}")
        arr = np.frombuffer(data, dtype="<f8", offset=16)
        tau, phi = arr[:n_tau], arr[n_tau:n_tau + n_phi]
        values = arr[n_tau + n_phi:].reshape(n_tau, n_phi)
        return cls(PhaseSpaceGrid(tau, phi), values)


# ---------------------------------------------------------------- one photon

def _pair_products(values: np.ndarray, s_idx: np.ndarray) -> np.ndarray:
    """P[j, a] = S[a] S*[s_j - a] (zero when s_j - a is off the grid)."""
    n = values.size
    a = np.arange(n)[None, :]
    b = s_idx[:, None] - a
    valid = (b >= 0) & (b < n)
    return np.where(valid, values[None, :] * np.conj(values[np.clip(b, 0, n - 1)]), 0.0)


def wigner1d(state: Amplitude1D, grid: PhaseSpaceGrid) -> WignerMap:
    check_edges(state.values)
    h = state.grid.spacing
    s_idx = _lattice_index(state.grid, grid.phi)
    prods = _pair_products(state.values, s_idx)
    tau = grid.tau[:, None]
    a = np.arange(state.grid.n_points)[None, :]
    # omega = (2a - s) h / 2 for the sample pair (a, s - a)
    kernel = np.exp(2j * h * tau * a)
    w = h * (kernel @ prods.T) * np.exp(-1j * h * tau * s_idx[None, :])
    return WignerMap(grid, w)


def gaussian_wigner(tau, phi, center: float, sigma: float) -> np.ndarray:
    """Closed form for a Gaussian amplitude of width sigma."""
    return np.exp(-2 * sigma**2 * tau**2 - (phi - center) ** 2 / (2 * sigma**2))


# ---------------------------------------------------------------- pair states

def wigner_pm(state: SeparablePmState, plus_grid: PhaseSpaceGrid, minus_grid: PhaseSpaceGrid,
              coords: Literal["canonical", "pm"] = "canonical") -> tuple[WignerMap, WignerMap]:
    """Factor maps W_plus (from f) and W_minus (from g).

    The full pair map is W_plus(tau_+, phi_+) * W_minus(tau_-, phi_-) with
    tau_pm = tau1 +- tau2 and phi_pm = (phi1 +- phi2)/2. ``"canonical"``
    returns each factor as a one-photon map over (tau', omega_pm), with
    tau' = tau_pm / 2 conjugate to omega_pm; ``"pm"`` relabels the same
    values onto (tau_pm, phi_pm). Grids are given in canonical coordinates.
    """
    wp = wigner1d(state.f_plus, plus_grid)
    wm = wigner1d(state.g_minus, minus_grid)
    if coords == "canonical":
        return (WignerMap(wp.grid, wp.values, ("tau_plus_half", "omega_plus")),
                WignerMap(wm.grid, wm.values, ("tau_minus_half", "omega_minus")))
    if coords != "pm":
        raise ValueError(f"unknown coordinates {coords!r}")

    def relabel(m: WignerMap, tag: str) -> WignerMap:
        g = PhaseSpaceGrid(2 * m.grid.tau, m.grid.phi / 2)
        return WignerMap(g, m.values, (f"tau_{tag}", f"phi_{tag}"))

    return relabel(wp, "plus"), relabel(wm, "minus")


def _require_modes(state: Jsa2D):
    if state.basis != "modes":
        raise BasisMismatch("pair-state Wigner slices need the modes basis")
    check_edges(state.values)


def pair_wigner_tau_block(state: Jsa2D, phi1: float, phi2: float,
                          tau1: Sequence[float], tau2: Sequence[float]) -> np.ndarray:
    """W(tau1, tau2, phi1, phi2) on a (tau1 x tau2) block at fixed frequencies."""
    _require_modes(state)
    g1, g2 = state.grid1, state.grid2
    s1 = int(_lattice_index(g1, [phi1])[0])
    s2 = int(_lattice_index(g2, [phi2])[0])
    F = state.values
    n1, n2 = F.shape
    a = np.arange(n1)
    b = np.arange(n2)
    va = (s1 - a >= 0) & (s1 - a < n1)
    vb = (s2 - b >= 0) & (s2 - b < n2)
    M = np.zeros_like(F)
    ia, ib = a[va], b[vb]
    M[np.ix_(ia, ib)] = F[np.ix_(ia, ib)] * np.conj(F[np.ix_(s1 - ia, s2 - ib)])
    t1 = np.asarray(tau1, dtype=float)[:, None]
    t2 = np.asarray(tau2, dtype=float)[:, None]
    e1 = np.exp(1j * g1.spacing * t1 * (2 * a[None, :] - s1))
    e2 = np.exp(1j * g2.spacing * t2 * (2 * b[None, :] - s2))
    w = g1.spacing * g2.spacing * (e1 @ M @ e2.T)
    resid = np.max(np.abs(w.imag))
    if resid > IMAG_TOL:
        raise PreconditionError(f"pair Wigner slice has imaginary residue {resid:.2e}")
    return w.real


def mode_plane(state: Jsa2D, mode: int, grid: PhaseSpaceGrid, other: tuple[float, float]) -> WignerMap:
    """Slice of the pair map on (tau_mode, phi_mode) through ``other`` = (tau, phi) of the other photon."""
    tau_o, phi_o = other
    values = np.empty(grid.shape)
    for j, p in enumerate(grid.phi):
        if mode == 1:
            values[:, j] = pair_wigner_tau_block(state, p, phi_o, grid.tau, [tau_o])[:, 0]
        elif mode == 2:
            values[:, j] = pair_wigner_tau_block(state, phi_o, p, [tau_o], grid.tau)[0, :]
        else:
            raise ValueError("mode must be 1 or 2")
    return WignerMap(grid, values, (f"tau{mode}", f"phi{mode}"))


def pair_lattice(state: Jsa2D, mode: int) -> np.ndarray:
    g = state.grid1 if mode == 1 else state.grid2
    return g.points[0] + 0.5 * g.spacing * np.arange(2 * g.n_points - 1)


def snap_to_lattice(lattice: np.ndarray, x: float) -> float:
    return float(lattice[np.argmin(np.abs(lattice - x))])


# ---------------------------------------------------------------- geometry helpers

def zero_crossings(x: np.ndarray, y: np.ndarray, rel_floor: float = 1e-6) -> np.ndarray:
    """Linearly interpolated sign changes of y, ignoring the numerically flat tails."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    floor = rel_floor * np.max(np.abs(y))
    out = []
    for i in range(len(y) - 1):
        y0, y1 = y[i], y[i + 1]
        if max(abs(y0), abs(y1)) < floor:
            continue
        if y0 == 0:
            out.append(x[i])
        elif y0 * y1 < 0:
            out.append(x[i] - y0 * (x[i + 1] - x[i]) / (y1 - y0))
    return np.unique(np.array(out))


def fringe_spacing(x: np.ndarray, y: np.ndarray, n_central: int = 6) -> float:
    """Median distance between the ``n_central`` zeros nearest the profile's peak magnitude."""
    zeros = zero_crossings(x, y)
    if zeros.size < 2:
        raise PreconditionError("profile has fewer than two zero crossings")
    centre = x[np.argmax(np.abs(y))]
    near = np.sort(zeros[np.argsort(np.abs(zeros - centre))[:n_central]])
    return float(np.median(np.diff(near)))


def _best_shift(ref: np.ndarray, moved: np.ndarray) -> tuple[float, float]:
    """Sub-cell (rows, cols) displacement maximizing the cross-correlation."""
    n0, n1 = ref.shape
    size = (2 * n0, 2 * n1)
    corr = np.fft.ifft2(np.fft.fft2(moved, size) * np.conj(np.fft.fft2(ref, size))).real
    i, j = np.unravel_index(np.argmax(corr), corr.shape)

    def refine(c_m, c_0, c_p):
        den = c_m - 2 * c_0 + c_p
        return 0.5 * (c_m - c_p) / den if den != 0 else 0.0

    di = refine(corr[(i - 1) % size[0], j], corr[i, j], corr[(i + 1) % size[0], j])
    dj = refine(corr[i, (j - 1) % size[1]], corr[i, j], corr[i, (j + 1) % size[1]])
    si = i if i < n0 else i - size[0]
    sj = j if j < n1 else j - size[1]
    return si + di, sj + dj


def map_displacement(before: WignerMap, after: WignerMap) -> tuple[float, float]:
    """(d tau, d phi) such that after(tau, phi) ~ before(tau - d tau, phi - d phi)."""
    if before.grid.shape != after.grid.shape:
        raise GridMismatch("maps must share a grid")
    di, dj = _best_shift(before.values, after.values)
    return di * before.grid.dtau, dj * before.grid.dphi


def _centre(amp_like: State, mode: int | None = None) -> tuple[float, float]:
    """(tau, phi) centre of a photon: tau = -<t>, phi = <omega>."""
    norm = inner_product(amp_like, amp_like).real
    phi = inner_product(amp_like, apply_omega(amp_like, mode)).real / norm
    tau = -inner_product(amp_like, apply_time(amp_like, mode)).real / norm
    return tau, phi


def translate_check(state: State, gen: Generator, kappa: float, tau_max: float = 4.0,
                    n_tau: int = 161, phi_stride: int = 1, phi_half_width: float | None = None) -> np.ndarray:
    """Measured phase-space displacement caused by exp(-i kappa H).

    Single photon: returns (d tau, d phi). Pair state in the modes basis:
    returns (d tau1, d tau2, d phi1, d phi2), each mode read off the slice
    through the other photon's centre.
    """
    moved = evolve_translation(state, gen, kappa)
    if isinstance(state, Amplitude1D):
        tau0, phi0 = _centre(state)
        half = phi_half_width or 4 * np.sqrt(max(_phi_var(state), 1e-12)) + abs(kappa * gen.gamma)
        grid = PhaseSpaceGrid.for_amplitude(state, tau_max, n_tau, (phi0 - half, phi0 + half), phi_stride)
        grid = PhaseSpaceGrid(grid.tau + tau0, grid.phi)
        return np.array(map_displacement(wigner1d(state, grid), wigner1d(moved, grid)))
    _require_modes(state)
    out = np.zeros(4)
    for mode, other in ((1, 2), (2, 1)):
        lat = pair_lattice(state, mode)
        tau0, phi0 = _centre(state, mode)
        half = phi_half_width or 4.0 + abs(kappa) * max(abs(gen.gamma), abs(gen.delta))
        sel = lat[(lat >= phi0 - half) & (lat <= phi0 + half)][::phi_stride]
        grid = PhaseSpaceGrid(np.linspace(-tau_max, tau_max, n_tau) + tau0, sel)
        maps = []
        for st in (state, moved):
            t_o, p_o = _centre(st, other)
            maps.append(mode_plane(st, mode, grid, (t_o, snap_to_lattice(pair_lattice(st, other), p_o))))
        d_tau, d_phi = map_displacement(*maps)
        out[mode - 1], out[mode + 1] = d_tau, d_phi
    return out


def _phi_var(amp: Amplitude1D) -> float:
    p = np.abs(amp.values) ** 2
    p = p / p.sum()
    m = np.sum(p * amp.omega)
    return float(np.sum(p * (amp.omega - m) ** 2))


def overlap_via_wigner(a: Amplitude1D, b: Amplitude1D, grid: PhaseSpaceGrid | None = None) -> float:
    """(2/pi) int int W_a W_b, equal to |<a|b>|^2 for pure states."""
    if a.grid != b.grid:
        raise GridMismatch("overlap needs both states on one grid")
    grid = grid or PhaseSpaceGrid.full_period(a)
    wa, wb = wigner1d(a, grid), wigner1d(b, grid)
    return float(OVERLAP_CONSTANT * np.sum(wa.values * wb.values) * grid.dtau * grid.dphi)


def rotate_map(wmap: WignerMap, theta: float, grid: PhaseSpaceGrid | None = None) -> WignerMap:
    """Rigidly rotated map: the image of exp(-i theta R) in phase space.

    A point (tau, phi) moves to (tau cos + phi sin, phi cos - tau sin); values
    are resampled with an interpolating bicubic spline, zero outside the
    source grid.
    """
    grid = grid or wmap.grid
    src = wmap.grid
    spline = RectBivariateSpline(src.tau, src.phi, wmap.values, kx=3, ky=3, s=0)
    T, P = np.meshgrid(grid.tau, grid.phi, indexing="ij")
    c, s = np.cos(theta), np.sin(theta)
    st, sp = T * c - P * s, P * c + T * s
    inside = (st >= src.tau[0]) & (st <= src.tau[-1]) & (sp >= src.phi[0]) & (sp <= src.phi[-1])
    values = np.where(inside, spline.ev(st, sp), 0.0)
    return WignerMap(grid, values, wmap.labels)
