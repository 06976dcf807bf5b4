"""Lifted flows on the universal cover, displacement witnesses and the
deck-transformation dichotomy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacity import capacity_floor
from .dynamics import LatticeElement, flow_sum_arrays
from .geometry import COVER, ChartError, CotangentPoint, DeckTransformation, norm_sq
from .shells import (
    RegionSpec,
    SignPattern,
    build_profile,
    lambda_region,
    lifted_shell,
    pattern_index,
    sample_region_arrays,
)

CASE_SHELL = "A"   # |v| < l/2: the lifted shell is displaced
CASE_LAMBDA = "B"  # |v| >= l/2: the low-momentum region is displaced

LAMBDA_MOMENTUM = 1.0 / math.sqrt(2.0)
DEFAULT_BATCH = 20_000


class WitnessFailure(RuntimeError):
    """A sampled point was not displaced; ``point`` holds the counterexample."""

    def __init__(self, message, point=None, witness=None):
        super().__init__(message)
        self.point = point
        self.witness = witness


@dataclass(frozen=True)
class DisplacementWitness:
    region: RegionSpec
    lattice_element: LatticeElement
    deck: DeckTransformation
    samples_checked: int
    min_base_displacement: float
    disjoint: bool
    case: str = CASE_SHELL
    analytic_floor: float = 0.0

    def to_dict(self) -> dict:
        r = self.region
        region = {"kind": r.kind, "q0": [float(x) for x in r.q0]}
        if r.kind == "lambda":
            region.update(nu=r.nu, C=r.C)
        else:
            region.update(N=r.N, i=r.i, R=r.R)
        return {
            "case": self.case,
            "region": region,
            "lattice_element": list(self.lattice_element.a),
            "deck": [int(x) for x in self.deck.v],
            "samples_checked": self.samples_checked,
            "min_base_displacement": self.min_base_displacement,
            "analytic_floor": self.analytic_floor,
            "disjoint": self.disjoint,
        }


def select_pattern(a: LatticeElement) -> SignPattern:
    """I_k = sign(a_k), with +1 for a_k = 0."""
    if a.is_zero:
        raise ValueError("the zero element has no displacing pattern")
    return SignPattern(tuple(1 if ak >= 0 else -1 for ak in a.a))


def lifted_flow_arrays(a: LatticeElement, t, q, p, profiles=None):
    return flow_sum_arrays(a, t, q, p, COVER, profiles)


def lifted_flow(a: LatticeElement, t: float, pt: CotangentPoint) -> CotangentPoint:
    if pt.chart != COVER:
        raise ChartError("the lifted flow acts on the cover chart")
    q, p = lifted_flow_arrays(a, t, pt.q, pt.p)
    return CotangentPoint(q, p, COVER)


def displacement_setup(a: LatticeElement, q0):
    """Radius R = l/4 and the lifted shell of the pattern selected by ``a``."""
    I = select_pattern(a)
    R = a.l1 / 4.0
    return I, R, lifted_shell(a.N, pattern_index(I), R, q0)


def _batches(count, seed, batch):
    """Fixed-size batches with per-batch seeds, so results do not depend on
    how batches are scheduled."""
    seeds = np.random.SeedSequence(seed).spawn(math.ceil(count / batch))
    for b, ss in enumerate(seeds):
        size = min(batch, count - b * batch)
        yield size, int(ss.generate_state(1)[0])


def _check_map(region, image_fn, count, seed, batch, n):
    """Apply ``image_fn`` to samples of ``region``; return (min displacement, hits)."""
    min_disp = math.inf
    for size, bseed in _batches(count, seed, batch):
        q, p = sample_region_arrays(region, size, bseed, n)
        q2, p2 = image_fn(q, p)
        disp = np.sqrt(norm_sq(q2 - q))
        min_disp = min(min_disp, float(disp.min()))
        stayed = region.contains_arrays(q2, p2)
        if np.any(stayed):
            j = int(np.argmax(stayed))
            return min_disp, CotangentPoint(q[j], p[j], COVER)
    return min_disp, None


def verify_displacement(a: LatticeElement, q0, samples: int = 100_000, seed: int = 0,
                        batch: int = DEFAULT_BATCH) -> DisplacementWitness:
    """Sample the lifted shell, push it by the lifted flow and check that every
    point leaves the region and moves at least l along the base."""
    q0 = np.asarray(q0, dtype=float)
    _, _, region = displacement_setup(a, q0)
    l = a.l1
    profiles = [build_profile(k, a.N) for k in range(1, a.N + 1)]
    min_disp, bad = _check_map(
        region, lambda q, p: lifted_flow_arrays(a, 1.0, q, p, profiles),
        samples, seed, batch, q0.shape[0])
    floor = l * math.sqrt(region.shell.s_lo)
    witness = DisplacementWitness(region, a, DeckTransformation(np.zeros_like(q0, dtype=int)),
                                  samples, min_disp, bad is None, CASE_SHELL, floor)
    if bad is not None:
        raise WitnessFailure("lifted flow failed to displace a shell sample", bad, witness)
    if min_disp < l:
        raise WitnessFailure(f"base displacement {min_disp} below l = {l}", None, witness)
    return witness


def dichotomy_case(a: LatticeElement, v) -> str:
    return CASE_SHELL if np.linalg.norm(v) < a.l1 / 2.0 else CASE_LAMBDA


def analytic_case_check(a: LatticeElement, v, shell_s_lo: float) -> bool:
    """Inequality chain certifying the case of deck vector ``v``.

    Case A: base displacement >= l sqrt(s_lo) - |v| > l/2 = 2R, so the image
    of B(q0, R) misses B(q0, R).  Case B: the flow fixes |p|^2 < 1/2, and
    |v| >= l/2 > 2 (R/2) separates the translated ball of radius R/2.
    """
    l = a.l1
    R = l / 4.0
    vlen = float(np.linalg.norm(v))
    if vlen < l / 2.0:
        return l * math.sqrt(shell_s_lo) - vlen > 2.0 * R
    return vlen >= l / 2.0 > 2.0 * (R / 2.0)


def deck_dichotomy(a: LatticeElement, T: DeckTransformation, q0, samples: int = 2_000,
                   seed: int = 0, batch: int = DEFAULT_BATCH) -> DisplacementWitness:
    q0 = np.asarray(q0, dtype=float)
    _, R, shell_region = displacement_setup(a, q0)
    v = T.v.astype(float)
    case = dichotomy_case(a, v)
    profiles = [build_profile(k, a.N) for k in range(1, a.N + 1)]

    def image(q, p):
        q2, p2 = lifted_flow_arrays(a, 1.0, q, p, profiles)
        return q2 + v, p2

    if case == CASE_SHELL:
        region = shell_region
        floor = a.l1 * math.sqrt(shell_region.shell.s_lo) - float(np.linalg.norm(v))
    else:
        region = lambda_region(LAMBDA_MOMENTUM, R / 2.0, q0)
        floor = float(np.linalg.norm(v))
    ok = analytic_case_check(a, v, shell_region.shell.s_lo)
    min_disp, bad = _check_map(region, image, samples, seed, batch, q0.shape[0])
    witness = DisplacementWitness(region, a, T, samples, min_disp, ok and bad is None,
                                  case, floor)
    if not ok:
        raise WitnessFailure(f"analytic inequality fails for deck {list(T.v)}", None, witness)
    if bad is not None:
        raise WitnessFailure(f"deck {list(T.v)} failed to displace a sample", bad, witness)
    if case == CASE_LAMBDA:
        # the flow must act as the identity on the low-momentum region
        q, p = sample_region_arrays(region, min(samples, 1000), seed, q0.shape[0])
        q2, _ = lifted_flow_arrays(a, 1.0, q, p, profiles)
        if not np.array_equal(q, q2):
            raise WitnessFailure("flow moved a point with |p|^2 < 1/2", None, witness)
    return witness


def deck_vectors(n: int, radius: float) -> list[np.ndarray]:
    """All integer vectors with Euclidean norm <= radius, in lexicographic order."""
    r = int(math.floor(radius))
    grids = np.meshgrid(*([np.arange(-r, r + 1)] * n), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    pts = pts[np.sum(pts * pts, axis=1) <= radius * radius + 1e-9]
    return [v for v in pts]


def default_deck_radius(a: LatticeElement) -> int:
    return math.ceil(2 * a.l1)


@dataclass(frozen=True)
class DichotomySweep:
    witnesses: tuple
    deck_radius: float
    tail_certified: bool

    @property
    def counts(self) -> dict:
        out = {CASE_SHELL: 0, CASE_LAMBDA: 0}
        for w in self.witnesses:
            out[w.case] += 1
        return out

    def to_dict(self) -> dict:
        c = self.counts
        shell_min = min((w.min_base_displacement for w in self.witnesses
                         if w.case == CASE_SHELL), default=None)
        return {
            "deck_radius": self.deck_radius,
            "decks_checked": len(self.witnesses),
            "case_A": c[CASE_SHELL],
            "case_B": c[CASE_LAMBDA],
            "case_A_min_base_displacement": shell_min,
            "samples_per_deck": self.witnesses[0].samples_checked if self.witnesses else 0,
            "all_disjoint": all(w.disjoint for w in self.witnesses),
            "analytic_tail": self.tail_certified,
        }


def dichotomy_sweep(a: LatticeElement, q0, deck_radius: float | None = None,
                    samples: int = 2_000, seed: int = 0) -> DichotomySweep:
    """Run the dichotomy for every deck vector with |v| <= deck_radius; vectors
    beyond the radius are covered by the case-B inequality, which needs
    deck_radius >= l/2."""
    if a.is_zero:
        raise ValueError("the zero element has no displacing pattern")
    q0 = np.asarray(q0, dtype=float)
    radius = default_deck_radius(a) if deck_radius is None else deck_radius
    if radius < a.l1 / 2.0:
        raise ValueError(f"deck radius {radius} below l/2 = {a.l1 / 2}: tail not covered")
    witnesses = []
    for j, v in enumerate(deck_vectors(q0.shape[0], radius)):
        vseed = int(np.random.SeedSequence([seed, j]).generate_state(1)[0])
        witnesses.append(deck_dichotomy(a, DeckTransformation(v), q0, samples, vseed))
    # every |v| > radius >= l/2 falls in case B, whose inequality is independent of v
    tail = a.l1 / 2.0 > 2.0 * (a.l1 / 8.0)
    return DichotomySweep(tuple(witnesses), radius, tail)


def displaced_capacity_floor(a: LatticeElement, q0, deck_radius: float | None = None,
                             samples: int = 2_000, seed: int = 0) -> float:
    """min(c_lb(lifted shell), c_lb(low-momentum region)) after the full
    dichotomy sweep succeeds."""
    sweep = dichotomy_sweep(a, q0, deck_radius, samples, seed)
    if not sweep.tail_certified:
        raise WitnessFailure("analytic tail argument failed")
    _, R, shell_region = displacement_setup(a, np.asarray(q0, dtype=float))
    return min(capacity_floor(shell_region),
               capacity_floor(lambda_region(LAMBDA_MOMENTUM, R / 2.0, shell_region.q0)))
