"""Hong-Ou-Mandel interferometer with a generalized evolution in front.

The pair state is evolved by U(kappa) = exp(-i kappa H), sent through a
balanced beam splitter and post-selected. With S the photon swap,

    P_coincidence = (1 - <U psi| S U psi>) / 2.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigInvalid, NonHermitianOverlap
from .operators import Generator, evolve_rotation, evolve_translation, preset, swap
from .states import Jsa2D, inner_product

IMAG_DISCARD = 1e-10
IMAG_RAISE = 1e-8


@dataclass(frozen=True)
class HomOutcome:
    p_coincidence: float
    p_anticoincidence: float
    overlap: float

    @classmethod
    def from_overlap(cls, overlap: float) -> HomOutcome:
        p_c = 0.5 * (1.0 - overlap)
        return cls(p_c, 1.0 - p_c, overlap)


@dataclass(frozen=True, eq=False)
class HomScan:
    kappas: np.ndarray
    outcomes: tuple
    generator: Generator

    def __post_init__(self):
        k = np.asarray(self.kappas, dtype=float)
        if k.ndim != 1 or len(k) != len(self.outcomes):
            raise ConfigInvalid("kappas and outcomes must have equal length")
        if np.any(np.diff(k) <= 0):
            raise ConfigInvalid("kappas must be strictly increasing")
        k.setflags(write=False)
        object.__setattr__(self, "kappas", k)
        object.__setattr__(self, "outcomes", tuple(self.outcomes))

    @property
    def p_coincidence(self) -> np.ndarray:
        return np.array([o.p_coincidence for o in self.outcomes])

    @property
    def p_anticoincidence(self) -> np.ndarray:
        return np.array([o.p_anticoincidence for o in self.outcomes])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kappa", "p_coincidence", "p_anticoincidence"])
        for k, o in zip(self.kappas, self.outcomes):
            w.writerow([format(k, ".17g"), format(o.p_coincidence, ".17g"),
                        format(o.p_anticoincidence, ".17g")])
        return buf.getvalue()


def evolve(state: Jsa2D, gen: Generator, kappa: float, **kw) -> Jsa2D:
    if gen.kind == "translation":
        return evolve_translation(state, gen, kappa)
    return evolve_rotation(state, gen, kappa, **kw)


def swap_overlap(state: Jsa2D) -> float:
    """Real part of <psi|S|psi> after the imaginary-residue check."""
    ov = inner_product(state, swap(state)) / state.norm_squared()
    if abs(ov.imag) > IMAG_RAISE:
        raise NonHermitianOverlap(f"<psi|S psi> has imaginary part {ov.imag:.3e}")
    return float(ov.real)


def coincidence(state: Jsa2D, gen: Generator, kappa: float, **kw) -> HomOutcome:
    return HomOutcome.from_overlap(swap_overlap(evolve(state, gen, kappa, **kw)))


def post_selected_probability(state: Jsa2D, gen: Generator, kappa: float, **kw) -> float:
    """Coincidence probability as the norm of (S U - U)|psi>/2.

    Independent route through the post-selected output state; agrees with
    ``coincidence`` when the state is normalized.
    """
    u = evolve(state, gen, kappa, **kw)
    fin = (swap(u).values - u.values) / 2
    return float(np.sum(np.abs(fin) ** 2) * u.cell)


def scan(state: Jsa2D, gen: Generator, kappa_range: tuple[float, float] | Sequence[float],
         n_steps: int | None = None, **kw) -> HomScan:
    """Coincidence probabilities over ``n_steps`` uniform kappas, or over explicit values."""
    if n_steps is None:
        kappas = np.asarray(kappa_range, dtype=float)
    else:
        if n_steps < 3:
            raise ConfigInvalid("a scan needs at least 3 steps")
        lo, hi = kappa_range
        kappas = np.linspace(lo, hi, int(n_steps))
    return HomScan(kappas, [coincidence(state, gen, k, **kw) for k in kappas], gen)


def sample_events(outcome: HomOutcome, n: int, seed) -> tuple[int, int]:
    """Draw ``n`` detection events with a PCG64 stream seeded by ``seed``.

    Each event compares one uniform double against p_coincidence, so the
    first m events of a run with n > m are the events of the run with m.
    """
    if n < 1:
        raise ConfigInvalid("need at least one event")
    rng = np.random.Generator(np.random.PCG64(seed))
    n_c = int(np.count_nonzero(rng.random(int(n)) < outcome.p_coincidence))
    return n_c, int(n) - n_c


def delay_generator(split: bool = True) -> tuple[Generator, float]:
    """Generator and kappa-per-unit-delay for a time delay tau.

    ``split=True`` delays arm 1 by tau and arm 2 by -tau (omega_minus at kappa = tau);
    ``split=False`` delays arm 1 alone by 2 tau (omega1 at kappa = 2 tau).
    """
    if split:
        return preset("omega_minus"), 1.0
    return preset("omega1"), 2.0


def delay_scan(state: Jsa2D, taus: Sequence[float], split: bool = True) -> HomScan:
    gen, factor = delay_generator(split)
    taus = np.asarray(taus, dtype=float)
    outcomes = [coincidence(state, gen, factor * t) for t in taus]
    return HomScan(taus, outcomes, gen)
