"""Radial Hamiltonians H(q, p) = 1/2 phi(|p|^2) on the flat torus and its cover.

With a flat base the equations of motion are

    qdot = phi'(|p|^2) p,    pdot = 0,

so every flow is affine in time and is evaluated in closed form.  The
Stormer-Verlet integrator below is kept only as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import COVER, TORUS, CotangentPoint, norm_sq, reduce_mod_lattice
from .shells import BumpProfile, build_profile, combine_profiles


@dataclass(frozen=True, eq=False)
class RadialHamiltonian:
    """H = 1/2 phi(|p|^2); ``profile=None`` is the kinetic energy E (phi(s) = s)."""

    profile: BumpProfile | None = None
    label: str = "E"

    @property
    def is_kinetic(self) -> bool:
        return self.profile is None

    def phi(self, s):
        return s if self.profile is None else self.profile.value(s)

    def dphi(self, s):
        return np.ones_like(np.asarray(s, dtype=float)) if self.profile is None \
            else self.profile.derivative(s)

    def d2phi(self, s):
        return np.zeros_like(np.asarray(s, dtype=float)) if self.profile is None \
            else self.profile.second_derivative(s)

    def energy(self, q, p):
        return 0.5 * self.phi(norm_sq(p))

    def grad_q(self, q, p):
        return np.zeros_like(np.asarray(q, dtype=float))

    def grad_p(self, q, p):
        p = np.asarray(p, dtype=float)
        return np.asarray(self.dphi(norm_sq(p)))[..., None] * p


KINETIC = RadialHamiltonian()


def generator(k: int, N: int) -> RadialHamiltonian:
    return RadialHamiltonian(build_profile(k, N), label=f"H_{k}")


def generators(N: int) -> list[RadialHamiltonian]:
    return [generator(k, N) for k in range(1, N + 1)]


@dataclass(frozen=True)
class LatticeElement:
    a: tuple = field(default_factory=tuple)

    def __post_init__(self):
        vals = []
        for x in self.a:
            if int(x) != x:
                raise ValueError(f"lattice coordinates must be integers, got {self.a}")
            vals.append(int(x))
        if not vals:
            raise ValueError("lattice element needs at least one coordinate")
        object.__setattr__(self, "a", tuple(vals))

    @property
    def N(self) -> int:
        return len(self.a)

    @property
    def l1(self) -> int:
        return sum(abs(x) for x in self.a)

    @property
    def is_zero(self) -> bool:
        return not any(self.a)

    def __sub__(self, other: "LatticeElement") -> "LatticeElement":
        return LatticeElement(tuple(x - y for x, y in zip(self.a, other.a, strict=True)))

    def __rmul__(self, m: int) -> "LatticeElement":
        return LatticeElement(tuple(m * x for x in self.a))


def weighted_hamiltonian(a: LatticeElement) -> RadialHamiltonian:
    """The single radial Hamiltonian sum_k a_k H_k."""
    profiles = [build_profile(k, a.N) for k in range(1, a.N + 1)]
    return RadialHamiltonian(combine_profiles(profiles, a.a), label=f"a={list(a.a)}")


def eval_H(h: RadialHamiltonian, pt: CotangentPoint) -> float:
    return float(h.energy(pt.q, pt.p))


def flow_arrays(h: RadialHamiltonian, t: float, q, p, chart: str = COVER):
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    q_new = q + t * np.asarray(h.dphi(norm_sq(p)))[..., None] * p
    if chart == TORUS:
        q_new = reduce_mod_lattice(q_new)
    return q_new, p.copy()


def flow_sum_arrays(a: LatticeElement, t: float, q, p, chart: str = COVER,
                    profiles=None):
    """Time-t flow of sum_k a_k H_k, with the speed sum_k a_k phi_k'(|p|^2)."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if profiles is None:
        profiles = [build_profile(k, a.N) for k in range(1, a.N + 1)]
    s = norm_sq(p)
    speed = np.zeros_like(s)
    for ak, prof in zip(a.a, profiles):
        if ak:
            speed = speed + ak * np.asarray(prof.derivative(s))
    q_new = q + t * speed[..., None] * p
    if chart == TORUS:
        q_new = reduce_mod_lattice(q_new)
    return q_new, p.copy()


def exact_flow(h: RadialHamiltonian, t: float, pt: CotangentPoint) -> CotangentPoint:
    q, p = flow_arrays(h, t, pt.q, pt.p, pt.chart)
    return CotangentPoint(q, p, pt.chart)


def exact_flow_sum(a: LatticeElement, t: float, pt: CotangentPoint) -> CotangentPoint:
    q, p = flow_sum_arrays(a, t, pt.q, pt.p, pt.chart)
    return CotangentPoint(q, p, pt.chart)


def leapfrog(grad_q, grad_p, t: float, q, p, dt: float):
    """Kick-drift-kick Stormer-Verlet for a separable H = K(p) + V(q).

    ``grad_q`` is dV/dq and ``grad_p`` is dK/dp.  Takes ceil(t/dt) equal
    steps covering exactly [0, t].
    """
    if dt <= 0:
        raise ValueError("time step must be positive")
    steps = max(1, math.ceil(abs(t) / dt - 1e-9))
    h = t / steps
    q = np.array(q, dtype=float)
    p = np.array(p, dtype=float)
    for _ in range(steps):
        p = p - 0.5 * h * grad_q(q)
        q = q + h * grad_p(p)
        p = p - 0.5 * h * grad_q(q)
    return q, p


def integrator_flow(h: RadialHamiltonian, t: float, pt: CotangentPoint, dt: float) -> CotangentPoint:
    q, p = leapfrog(lambda q: h.grad_q(q, None),
                    lambda p: h.grad_p(None, p), t, pt.q, pt.p, dt)
    if pt.chart == TORUS:
        q = reduce_mod_lattice(q)
    return CotangentPoint(q, p, pt.chart)


def poisson_bracket(hj: RadialHamiltonian, hk: RadialHamiltonian, q, p):
    """{H_j, H_k} = <dq H_j, dp H_k> - <dp H_j, dq H_k> from analytic gradients."""
    return (np.sum(hj.grad_q(q, p) * hk.grad_p(q, p), axis=-1)
            - np.sum(hj.grad_p(q, p) * hk.grad_q(q, p), axis=-1))


def poisson_bracket_fd(hj: RadialHamiltonian, hk: RadialHamiltonian, q, p, h: float = 1e-5):
    """Poisson bracket with every partial derivative taken by central differences."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)

    def partials(H, which):
        base = q if which == "q" else p
        out = np.empty_like(base)
        for m in range(base.shape[-1]):
            e = np.zeros(base.shape[-1])
            e[m] = h
            if which == "q":
                plus, minus = H.energy(q + e, p), H.energy(q - e, p)
            else:
                plus, minus = H.energy(q, p + e), H.energy(q, p - e)
            out[..., m] = (plus - minus) / (2 * h)
        return out

    return (np.sum(partials(hj, "q") * partials(hk, "p"), axis=-1)
            - np.sum(partials(hj, "p") * partials(hk, "q"), axis=-1))


def poisson_bracket_residual(j: int, k: int, pt: CotangentPoint, N: int) -> float:
    return float(poisson_bracket(generator(j, N), generator(k, N), pt.q, pt.p))


def profile_extrema(profile: BumpProfile) -> tuple[float, float]:
    """Exact (max, min) of a piecewise polynomial over [0, 3].

    Candidates are segment endpoints and the real roots of each segment's
    derivative inside the segment.
    """
    hi, lo = -math.inf, math.inf
    for j, (kind, x0, x1, c) in enumerate(profile.segments):
        u_end = (x1 - profile.offsets[j]) / profile.scales[j]
        u_start = (x0 - profile.offsets[j]) / profile.scales[j]
        poly = np.polynomial.Polynomial(c)
        cands = [u_start, u_end]
        d = poly.deriv()
        if np.any(d.coef != 0):
            for r in d.roots():
                if abs(r.imag) < 1e-12 and u_start <= r.real <= u_end:
                    cands.append(r.real)
        vals = poly(np.array(cands))
        hi = max(hi, float(vals.max()))
        lo = min(lo, float(vals.min()))
    return hi, lo


def oscillation_of_profile(profile: BumpProfile) -> float:
    """osc of 1/2 phi over phase space (phi's range over [0, 3])."""
    hi, lo = profile_extrema(profile)
    return 0.5 * (hi - lo)


def oscillation(weights, N: int | None = None) -> float:
    """osc(sum_k a_k H_k) for a LatticeElement, or osc(H_k) for an int k (needs N)."""
    if isinstance(weights, LatticeElement):
        if weights.is_zero:
            return 0.0
        return oscillation_of_profile(weighted_hamiltonian(weights).profile)
    if N is None:
        raise ValueError("a single generator index needs the rank N")
    return oscillation_of_profile(build_profile(int(weights), N))


def generator_oscillations(N: int) -> list[float]:
    return [oscillation(k, N) for k in range(1, N + 1)]


def hofer_upper_bound(a: LatticeElement) -> float:
    """min(osc(sum a_k H_k), sum |a_k| osc(H_k)); both bound the Hofer norm of phi(a)."""
    if a.is_zero:
        return 0.0
    direct = oscillation(a)
    stepwise = sum(abs(ak) * osc for ak, osc in zip(a.a, generator_oscillations(a.N)))
    return min(direct, stepwise)
