"""Quantum and classical Fisher information for the HOM measurement.

For a pure state the quantum Fisher information of U = exp(-i kappa H) is
4 Var(H). For a state with S|psi> = +-|psi> the HOM measurement has Fisher
information Var(G) at kappa = 0 with G = H - S H S. Near kappa = 0,

    P_c(kappa) = P_c(0) -+ kappa^2 Var(G) / 4 + O(kappa^4),

so the curvature-based estimate is 4|c| with c the fitted kappa^2 coefficient.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import bisect

from .errors import ConfigInvalid, NonInvertible, PoorFit, SymmetryViolation
from .hom import HomOutcome, HomScan, coincidence, sample_events, scan, swap_overlap
from .operators import Generator, apply_generator, swap, swap_conjugated_image, variance, variance_of_image
from .states import Jsa2D

Symmetry = Literal["symmetric", "antisymmetric", "none"]
Commutation = Literal["commutes", "anticommutes", "neither"]
Verdict = Literal["optimal", "suboptimal", "blind"]

SYMMETRY_TOL = 1e-8
COMMUTATION_TOL = 1e-9
OPTIMAL_TOL = 1e-6
BLIND_TOL = 1e-10
FIT_RESIDUAL_TOL = 1e-6
# Curvature below this is treated as a flat scan (no fit-quality requirement).
FLAT_CURVATURE = 1e-9
CURVATURE_STEP = 0.02


def qfi(state, gen: Generator) -> float:
    return 4.0 * variance(state, gen)


def symmetry(state: Jsa2D, tol: float = SYMMETRY_TOL) -> Symmetry:
    ov = swap_overlap(state)
    if ov >= 1 - tol:
        return "symmetric"
    if ov <= -1 + tol:
        return "antisymmetric"
    return "none"


def fi_analytic(state: Jsa2D, gen: Generator) -> float:
    """Var(H - S H S) on a symmetric or antisymmetric state."""
    sym = symmetry(state)
    if sym == "none":
        raise SymmetryViolation(
            f"<psi|S|psi> = {swap_overlap(state):.10f}; the kappa = 0 Fisher formula needs S|psi> = +-|psi>"
        )
    image = apply_generator(state, gen)
    conj = swap_conjugated_image(state, gen)
    return variance_of_image(state, image.with_values(image.values - conj.values))


def commutation(state: Jsa2D, gen: Generator, tol: float = COMMUTATION_TOL) -> Commutation:
    """Test [H, S] and {H, S} on the state itself."""
    hs = apply_generator(swap(state), gen).values
    sh = swap(apply_generator(state, gen)).values
    scale = np.linalg.norm(sh)
    if scale == 0:
        return "commutes"
    if np.linalg.norm(hs - sh) <= tol * scale:
        return "commutes"
    if np.linalg.norm(hs + sh) <= tol * scale:
        return "anticommutes"
    return "neither"


# ---------------------------------------------------------------- curvature

def curvature_step(state: Jsa2D, gen: Generator) -> float:
    """Scan step keeping kappa^2 Q small enough for a quartic fit to be exact to ~1e-8."""
    q = qfi(state, gen)
    return CURVATURE_STEP / np.sqrt(q) if q > 0 else CURVATURE_STEP


def curvature_scan(state: Jsa2D, gen: Generator, step: float | None = None, half_points: int = 6, **kw) -> HomScan:
    """Uniform scan of 2*half_points+1 kappas centred on 0."""
    step = step or curvature_step(state, gen)
    kappas = step * np.arange(-half_points, half_points + 1)
    return scan(state, gen, kappas, **kw)


def _even_fit(k: np.ndarray, p: np.ndarray) -> tuple[float, float]:
    """Least-squares p = a + c k^2 + d k^4; returns (c, relative residual)."""
    A = np.stack([np.ones_like(k), k**2, k**4], axis=1)
    coef, *_ = np.linalg.lstsq(A, p, rcond=None)
    resid = p - A @ coef
    c = coef[1]
    spread = abs(c) * np.max(k**2)
    rel = float(np.sqrt(np.mean(resid**2)) / spread) if spread > 0 else 0.0
    return float(c), rel


def fi_curvature(result: HomScan) -> float:
    """Fisher information from the curvature of P_c at kappa = 0.

    Needs a uniform scan symmetric about 0 with at least 7 points. With 13 or
    more points the kappa^2 coefficient from steps h and 2h is combined by
    Richardson extrapolation, c = (16 c_h - c_2h) / 15.
    """
    k, p = result.kappas, result.p_coincidence
    zero = np.flatnonzero(np.isclose(k, 0.0, atol=1e-14 * np.max(np.abs(k))))
    if zero.size != 1:
        raise ConfigInvalid("curvature fit needs a scan containing kappa = 0")
    i0 = int(zero[0])
    m = min(i0, len(k) - 1 - i0)
    if m < 3:
        raise ConfigInvalid("curvature fit needs at least 3 points on each side of 0")
    h = k[i0 + 1] - k[i0]
    local = k[i0 - m:i0 + m + 1]
    if not np.allclose(local, h * np.arange(-m, m + 1), rtol=0, atol=1e-9 * h):
        raise ConfigInvalid("curvature fit needs a uniform scan symmetric about 0")
    if min(abs(p[i0]), abs(1 - p[i0])) > 1e-6:
        raise SymmetryViolation(f"P_c(0) = {p[i0]:.8f}; expected 0 or 1 for a (anti)symmetric state")
    sel_h = slice(i0 - 3, i0 + 4)
    c_h, rel = _even_fit(k[sel_h], p[sel_h])
    c = c_h
    if m >= 6:
        sel_2h = slice(i0 - 6, i0 + 7, 2)
        c_2h, _ = _even_fit(k[sel_2h], p[sel_2h])
        c = (16 * c_h - c_2h) / 15
    f = 4.0 * abs(c)
    if f > FLAT_CURVATURE and rel > FIT_RESIDUAL_TOL:
        raise PoorFit(f"curvature fit residual {rel:.2e} exceeds {FIT_RESIDUAL_TOL:.0e}")
    return f


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class MetrologyReport:
    qfi: float
    fi_analytic: float
    fi_curvature: float | None
    optimal: Verdict
    symmetry: Symmetry
    commutation: Commutation
    generator: str = ""
    provenance: dict = field(default_factory=lambda: {
        "qfi": "quadrature", "fi_analytic": "quadrature", "fi_curvature": "curvature-fit"})

    def __post_init__(self):
        if self.fi_analytic > self.qfi + 1e-8 * max(1.0, self.qfi):
            raise AssertionError(f"FI {self.fi_analytic} exceeds QFI {self.qfi}")

    def to_dict(self) -> dict:
        return asdict(self)


def verdict(fi: float, q: float) -> Verdict:
    if fi <= BLIND_TOL:
        return "blind"
    if abs(fi - q) <= OPTIMAL_TOL * q:
        return "optimal"
    return "suboptimal"


def classify(state: Jsa2D, gen: Generator, curvature: bool = True) -> MetrologyReport:
    q = qfi(state, gen)
    f = fi_analytic(state, gen)
    fc = fi_curvature(curvature_scan(state, gen)) if curvature else None
    return MetrologyReport(
        qfi=q,
        fi_analytic=f,
        fi_curvature=fc,
        optimal=verdict(f, q),
        symmetry=symmetry(state),
        commutation=commutation(state, gen),
        generator=gen.name,
    )


# ---------------------------------------------------------------- Cramer-Rao demo

@dataclass(frozen=True)
class EstimatorReport:
    kappa_true: float
    n_samples: int
    repetitions: int
    seed: int
    p_coincidence: float
    fisher: float
    crb: float
    mean: float
    std: float
    ratio: float
    clipped: int

    def to_dict(self) -> dict:
        return asdict(self)


def local_fisher(state: Jsa2D, gen: Generator, kappa: float, step: float | None = None) -> tuple[float, float, float]:
    """(P_c, dP_c/dkappa, Fisher information of the two-outcome measurement)."""
    step = step or 1e-3 * curvature_step(state, gen) / CURVATURE_STEP

    def p(k):
        return coincidence(state, gen, k).p_coincidence

    p0 = p(kappa)
    d1 = (p(kappa + step) - p(kappa - step)) / (2 * step)
    d2 = (p(kappa + 2 * step) - p(kappa - 2 * step)) / (4 * step)
    dp = (4 * d1 - d2) / 3
    denom = p0 * (1 - p0)
    fisher = dp * dp / denom if denom > 0 else np.inf
    return p0, dp, fisher


def _monotone_branch(kappas: np.ndarray, probs: np.ndarray, i0: int) -> slice:
    sign = np.sign(probs[i0 + 1] - probs[i0 - 1])
    lo = i0
    while lo > 0 and np.sign(probs[lo] - probs[lo - 1]) == sign:
        lo -= 1
    hi = i0
    while hi < len(kappas) - 1 and np.sign(probs[hi + 1] - probs[hi]) == sign:
        hi += 1
    return slice(lo, hi + 1)


def crb_demo(state: Jsa2D, gen: Generator, kappa_true: float, n_samples: int, seed: int,
             repetitions: int = 200, table_points: int = 241, span_crb: float = 12.0) -> EstimatorReport:
    """Monte-Carlo maximum-likelihood estimation of kappa from coincidence counts.

    P_c is tabulated on a window around kappa_true, restricted to its monotone
    branch and fitted with a monotone cubic; each repetition inverts the
    observed coincidence fraction on that curve by bisection. Repetition r
    draws from PCG64(SeedSequence([seed, r])).
    """
    if repetitions < 2:
        raise ConfigInvalid("need at least two repetitions")
    p_true, dp, fisher = local_fisher(state, gen, kappa_true)
    scale = max(1.0, np.sqrt(qfi(state, gen)))
    if not np.isfinite(fisher) or abs(dp) < 1e-8 * scale or fisher < 1e-10:
        raise NonInvertible(f"P_c is flat at kappa = {kappa_true} (slope {dp:.2e})")
    crb = 1.0 / np.sqrt(n_samples * fisher)
    half = span_crb * crb
    kappas = np.linspace(kappa_true - half, kappa_true + half, table_points)
    probs = np.array([coincidence(state, gen, k).p_coincidence for k in kappas])
    branch = _monotone_branch(kappas, probs, table_points // 2)
    kb, pb = kappas[branch], probs[branch]
    curve = PchipInterpolator(kb, pb)
    rising = pb[-1] > pb[0]
    p_lo, p_hi = (pb[0], pb[-1]) if rising else (pb[-1], pb[0])
    outcome = HomOutcome.from_overlap(1 - 2 * p_true)
    estimates = np.empty(repetitions)
    clipped = 0
    for r in range(repetitions):
        n_c, _ = sample_events(outcome, n_samples, np.random.SeedSequence([seed, r]))
        phat = n_c / n_samples
        if phat <= p_lo or phat >= p_hi:
            # outside the tabulated branch: report the nearest end
            clipped += 1
            estimates[r] = kb[0] if (phat <= p_lo) == rising else kb[-1]
            continue
        estimates[r] = bisect(lambda k: float(curve(k)) - phat, kb[0], kb[-1],
                              xtol=1e-14 * scale, maxiter=200)
    std = float(np.std(estimates, ddof=1))
    return EstimatorReport(
        kappa_true=float(kappa_true), n_samples=int(n_samples), repetitions=int(repetitions), seed=int(seed),
        p_coincidence=float(p_true), fisher=float(fisher), crb=float(crb),
        mean=float(np.mean(estimates)), std=std, ratio=std / crb, clipped=clipped,
    )


# ---------------------------------------------------------------- scaling demo

@dataclass(frozen=True)
class ScalingReport:
    n_values: tuple
    qfi_values: tuple
    fitted_exponent: float
    signs: str = "plus"

    def to_dict(self) -> dict:
        return asdict(self)


def sign_pattern(signs, n: int) -> np.ndarray:
    if isinstance(signs, str):
        if signs == "plus":
            return np.ones(n)
        if signs == "alternating":
            return np.array([(-1.0) ** i for i in range(n)])
        raise ConfigInvalid(f"unknown sign pattern {signs!r}")
    arr = np.asarray(signs, dtype=float)
    if arr.size < n or np.any(np.abs(arr[:n]) != 1):
        raise ConfigInvalid("explicit signs must be +-1 and cover every n")
    return arr[:n]


def scaling_qfi(coefficients: Sequence[complex], alphas: Sequence[float]) -> float:
    """QFI of sum_i alpha_i R_i on sum_k A_k |phi_k>^(x n).

    Branch k is an eigenvector with eigenvalue (sum alpha)(k + 1/2).
    """
    a = np.asarray(coefficients, dtype=complex)
    w = np.abs(a) ** 2
    if abs(w.sum() - 1) > 1e-12:
        raise ConfigInvalid(f"coefficients are not normalized (sum |A|^2 = {w.sum()})")
    k = np.arange(a.size)
    var_k = float(np.sum(w * k**2) - np.sum(w * k) ** 2)
    return 4.0 * float(np.sum(alphas)) ** 2 * var_k


def scaling_demo(coefficients: Sequence[complex], n_values: Sequence[int], signs="plus") -> ScalingReport:
    ns = tuple(int(n) for n in n_values)
    qs = tuple(scaling_qfi(coefficients, sign_pattern(signs, n)) for n in ns)
    if len(ns) >= 2 and all(q > 0 for q in qs):
        slope = float(np.polyfit(np.log(ns), np.log(qs), 1)[0])
    else:
        slope = float("nan")
    return ScalingReport(ns, qs, slope, signs if isinstance(signs, str) else "explicit")
