"""Explicit symplectic maps and certified lower bounds for Gromov capacity.

A ball of radius sqrt(R alpha) is carried into the lifted shell by

    linear rescale  ->  exponential-map lift  ->  inverse fiberwise translation,

where the translation is by the differential of V(q) = c |q - q_inf|, with c^2
the midpoint of the shell's |p|^2 interval.  Capacities are never computed;
only the embedded ball's pi r^2 is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .geometry import COVER, CotangentPoint, norm_sq, symplectic_form_residual
from .shells import LAMBDA, LIFTED_SHELL, RegionSpec, ShellSpec, lifted_shell

FAR_POINT_FACTOR = 1e7


def shell_alpha(N: int) -> Fraction:
    """Fiber radius (10 * 2^(N+2))^-1 of the low-momentum box used for shells."""
    return Fraction(1, 10 * 2 ** (N + 2))


def fd_jacobian(f: Callable, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of f: R^m -> R^m at a single point."""
    x = np.asarray(x, dtype=float)
    cols = []
    for m in range(x.shape[0]):
        e = np.zeros_like(x)
        e[m] = h
        cols.append((f(x + e) - f(x - e)) / (2.0 * h))
    return np.stack(cols, axis=1)


@dataclass(frozen=True, eq=False)
class SymplecticMapDescriptor:
    """A phase-space map on stacked vectors x = (q, p) of length 2n.

    ``forward`` accepts arrays of shape (..., 2n).  ``jacobian`` is the
    analytic Jacobian when known; otherwise finite differences are used.
    """

    kind: str
    n: int
    forward: Callable
    params: dict = field(default_factory=dict)
    jacobian: Callable | None = None
    components: tuple = ()

    def __call__(self, x):
        return self.forward(np.asarray(x, dtype=float))

    def apply(self, pt: CotangentPoint) -> CotangentPoint:
        y = self(pt.as_vector())
        return CotangentPoint(y[: self.n], y[self.n:], COVER)

    def jacobian_at(self, x, h: float = 1e-5, analytic: bool = True) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if analytic and self.jacobian is not None:
            return self.jacobian(x)
        return fd_jacobian(self.forward, x, h)

    def then(self, other: "SymplecticMapDescriptor") -> "SymplecticMapDescriptor":
        """``other`` applied after ``self``."""
        return compose(self, other)

    def symplectic_residuals(self, points, h: float = 1e-5, analytic: bool = False) -> np.ndarray:
        return np.array([symplectic_form_residual(self.jacobian_at(x, h, analytic))
                         for x in np.atleast_2d(points)])


def compose(*maps: SymplecticMapDescriptor) -> SymplecticMapDescriptor:
    """Composition applying ``maps`` left to right."""
    n = maps[0].n
    if any(m.n != n for m in maps):
        raise ValueError("cannot compose maps of different dimension")

    def forward(x):
        for m in maps:
            x = m.forward(x)
        return x

    jac = None
    if all(m.jacobian is not None for m in maps):
        def jac(x):
            J = np.eye(2 * n)
            for m in maps:
                J = m.jacobian(x) @ J
                x = m.forward(x)
            return J

    return SymplecticMapDescriptor("composition", n, forward, {}, jac, tuple(maps))


@dataclass(frozen=True)
class PotentialV:
    """V(q) = c |q - q_inf| with |dV| = c everywhere near q0."""

    c: float
    c_squared: Fraction
    q_inf: np.ndarray
    q0: np.ndarray
    R: float

    @property
    def valid_radius(self) -> float:
        return 2.0 * self.R

    def dV(self, q) -> np.ndarray:
        d = np.asarray(q, dtype=float) - self.q_inf
        return self.c * d / np.sqrt(norm_sq(d))[..., None]

    def hessian(self, q) -> np.ndarray:
        d = np.asarray(q, dtype=float) - self.q_inf
        r = math.sqrt(float(d @ d))
        u = d / r
        return self.c * (np.eye(d.shape[0]) - np.outer(u, u)) / r

    def in_valid_ball(self, q) -> np.ndarray:
        return norm_sq(np.asarray(q) - self.q0) < self.valid_radius**2


def build_potential(i: int, N: int, R: float, q0) -> PotentialV:
    shell = ShellSpec(i, N)
    if not 1 <= i <= 2**N:
        raise ValueError(f"shell index out of range: {i}")
    lo, _ = shell.exact_bounds()
    c_sq = lo + Fraction(1, 2 ** (N + 2))
    q0 = np.asarray(q0, dtype=float)
    q_inf = q0.copy()
    q_inf[0] += FAR_POINT_FACTOR * R + 1.0
    return PotentialV(math.sqrt(c_sq), c_sq, q_inf, q0, R)


def fiberwise_translation(V: PotentialV, inverse: bool = False) -> SymplecticMapDescriptor:
    """(q, p) -> (q, p - dV(q)), or (q, p + dV(q)) for the inverse."""
    n = V.q0.shape[0]
    sign = 1.0 if inverse else -1.0

    def forward(x):
        q, p = x[..., :n], x[..., n:]
        if not np.all(V.in_valid_ball(q)):
            raise ValueError("fiberwise translation evaluated outside B(q0, 2R)")
        return np.concatenate([q, p + sign * V.dV(q)], axis=-1)

    def jac(x):
        J = np.eye(2 * n)
        J[n:, :n] = sign * V.hessian(x[:n])
        return J

    return SymplecticMapDescriptor("fiberwise_translation", n, forward,
                                   {"c": V.c, "inverse": inverse}, jac)


def fiberwise_translate(V: PotentialV, pt: CotangentPoint, inverse: bool = False) -> CotangentPoint:
    return fiberwise_translation(V, inverse).apply(pt)


def exp_induced(q0) -> SymplecticMapDescriptor:
    """Cotangent lift of v -> exp_{q0}(v) = q0 + v; momenta are unchanged."""
    q0 = np.asarray(q0, dtype=float)
    n = q0.shape[0]

    def forward(x):
        return np.concatenate([x[..., :n] + q0, x[..., n:]], axis=-1)

    return SymplecticMapDescriptor("exp_induced", n, forward, {"q0": q0.tolist()},
                                   lambda x: np.eye(2 * n))


def exp_induced_map(pt: CotangentPoint, q0) -> CotangentPoint:
    return exp_induced(q0).apply(pt)


def exp_inverse_differential_norm(v) -> float:
    """Operator norm of (D exp_{q0}(v))^{-1}; the identity in the flat model."""
    return float(np.linalg.norm(np.eye(np.asarray(v).shape[0]), 2))


def rescaling(R: float, alpha: float, n: int) -> SymplecticMapDescriptor:
    """(q, p) -> (sqrt(R/alpha) q, sqrt(alpha/R) p)."""
    if R <= 0 or alpha <= 0:
        raise ValueError("rescale parameters must be positive")
    a, b = math.sqrt(R / alpha), math.sqrt(alpha / R)
    D = np.diag([a] * n + [b] * n)

    def forward(x):
        return np.concatenate([a * x[..., :n], b * x[..., n:]], axis=-1)

    return SymplecticMapDescriptor("linear_rescale", n, forward,
                                   {"R": R, "alpha": alpha}, lambda x: D)


def linear_rescale(R: float, alpha: float, pt: CotangentPoint) -> CotangentPoint:
    return rescaling(R, alpha, pt.n).apply(pt)


def ball_embedding(N: int, i: int, R: float, q0, alpha: float | None = None):
    """The composed map from the ball of radius sqrt(R alpha) into the lifted shell."""
    q0 = np.asarray(q0, dtype=float)
    a = float(shell_alpha(N)) if alpha is None else alpha
    V = build_potential(i, N, R, q0)
    return compose(rescaling(R, a, q0.shape[0]), exp_induced(q0),
                   fiberwise_translation(V, inverse=True)), V


def shell_containment_exact(N: int, i: int, alpha: Fraction | None = None) -> bool:
    """(c - alpha)^2 >= s_lo and (c + alpha)^2 <= s_hi in exact arithmetic.

    With c^2 rational and c irrational in general, the two inequalities are
    rearranged so that only c^2 and the sign of rational expressions appear:
    (c +- alpha)^2 = c^2 + alpha^2 +- 2 alpha c, and 2 alpha c <= X iff
    X >= 0 and 4 alpha^2 c^2 <= X^2.
    """
    alpha = shell_alpha(N) if alpha is None else Fraction(alpha)
    lo, hi = ShellSpec(i, N).exact_bounds()
    c_sq = lo + Fraction(1, 2 ** (N + 2))
    base = c_sq + alpha * alpha
    # upper: base + 2 alpha c <= hi
    x_up = hi - base
    upper = x_up >= 0 and 4 * alpha * alpha * c_sq <= x_up * x_up
    # lower: base - 2 alpha c >= lo, i.e. 2 alpha c <= base - lo
    x_lo = base - lo
    lower = x_lo >= 0 and 4 * alpha * alpha * c_sq <= x_lo * x_lo
    return upper and lower


def optimal_alpha(N: int, i: int) -> float:
    """Largest alpha with (c +- alpha)^2 inside the shell: min(sqrt(s_hi) - c, c - sqrt(s_lo))."""
    sh = ShellSpec(i, N)
    c = math.sqrt(sh.s_lo + 1.0 / 2 ** (N + 2))
    return min(math.sqrt(sh.s_hi) - c, c - math.sqrt(sh.s_lo))


class EmbeddingFailure(RuntimeError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class EmbeddingCertificate:
    ball_radius: float
    capacity: float
    target: RegionSpec
    samples: int
    containment_violations: int
    max_symplectic_residual: float
    exact_interval_check: bool
    min_pair_separation: float
    alpha: float
    optimal_alpha: float | None = None

    def to_dict(self) -> dict:
        t = self.target
        target = {"kind": t.kind, "q0": [float(x) for x in t.q0]}
        if t.kind == LAMBDA:
            target.update(nu=t.nu, C=t.C)
        else:
            target.update(N=t.N, i=t.i, R=t.R)
        return {
            "ball_radius": self.ball_radius,
            "capacity": self.capacity,
            "alpha": self.alpha,
            "optimal_alpha": self.optimal_alpha,
            "target": target,
            "samples": self.samples,
            "containment_violations": self.containment_violations,
            "max_symplectic_residual": self.max_symplectic_residual,
            "exact_interval_check": self.exact_interval_check,
            "min_pair_separation": self.min_pair_separation,
        }


def sample_open_ball(rng, dim: int, radius: float, count: int) -> np.ndarray:
    """Uniform points of the open Euclidean ball in R^dim."""
    d = rng.standard_normal(size=(count, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, size=count) ** (1.0 / dim)
    return d * r[:, None]


def _fd_residuals(emb, rng, radius, dim, count, h):
    pts = sample_open_ball(rng, dim, radius, count)
    return emb.symplectic_residuals(pts, h=h, analytic=False)


def _pair_separation(ball_pts, images) -> float:
    half = ball_pts.shape[0] // 2
    if half == 0:
        return math.inf
    dx = np.sqrt(norm_sq(images[:half] - images[half:2 * half]))
    return float(dx.min())


def certify_ball_embedding(N: int, i: int, R: float, q0, samples: int = 100_000,
                           seed: int = 0, symplectic_points: int = 100,
                           fd_step: float = 1e-5, tol: float = 1e-6) -> EmbeddingCertificate:
    """Embed B(0, sqrt(R alpha)) in the lifted shell and check it on samples."""
    q0 = np.asarray(q0, dtype=float)
    n = q0.shape[0]
    alpha = shell_alpha(N)
    a = float(alpha)
    exact_ok = shell_containment_exact(N, i, alpha)
    if not exact_ok:
        raise EmbeddingFailure(f"exact interval check failed for N={N}, i={i}")
    emb, _ = ball_embedding(N, i, R, q0, a)
    target = lifted_shell(N, i, R, q0)
    r = math.sqrt(R * a)
    rng = np.random.default_rng(seed)
    ball = sample_open_ball(rng, 2 * n, r * (1.0 - 1e-9), samples)
    images = emb(ball)
    inside = target.contains_arrays(images[:, :n], images[:, n:])
    violations = int(np.count_nonzero(~inside))
    if violations:
        j = int(np.argmin(inside))
        raise EmbeddingFailure(f"{violations} ball samples left the target", ball[j])
    res = _fd_residuals(emb, rng, r * (1.0 - 1e-9), 2 * n, symplectic_points, fd_step)
    worst = float(res.max()) if res.size else 0.0
    if worst >= tol:
        raise EmbeddingFailure(f"symplectic residual {worst} above {tol}")
    sep = _pair_separation(ball, images)
    return EmbeddingCertificate(r, math.pi * R * a, target, samples, violations, worst,
                                exact_ok, sep, a, optimal_alpha(N, i))


def certify_lambda_embedding(nu: float, C: float, q0, samples: int = 10_000, seed: int = 0,
                             symplectic_points: int = 100, fd_step: float = 1e-5,
                             tol: float = 1e-6) -> EmbeddingCertificate:
    """Ball of radius sqrt(C nu) into the low-momentum region via rescale + exp lift."""
    q0 = np.asarray(q0, dtype=float)
    n = q0.shape[0]
    emb = compose(rescaling(C, nu, n), exp_induced(q0))
    target = RegionSpec(LAMBDA, nu=nu, C=C, q0=q0)
    r = math.sqrt(C * nu)
    rng = np.random.default_rng(seed)
    ball = sample_open_ball(rng, 2 * n, r * (1.0 - 1e-9), samples)
    images = emb(ball)
    inside = target.contains_arrays(images[:, :n], images[:, n:])
    violations = int(np.count_nonzero(~inside))
    if violations:
        raise EmbeddingFailure(f"{violations} ball samples left the target",
                               ball[int(np.argmin(inside))])
    res = _fd_residuals(emb, rng, r, 2 * n, symplectic_points, fd_step)
    worst = float(res.max()) if res.size else 0.0
    if worst >= tol:
        raise EmbeddingFailure(f"symplectic residual {worst} above {tol}")
    return EmbeddingCertificate(r, math.pi * C * nu, target, samples, 0, worst, True,
                                _pair_separation(ball, images), nu)


def capacity_floor(region: RegionSpec) -> float:
    """Certified lower bound for the Gromov capacity of a lifted shell
    (pi R / (10 2^(N+2))) or a low-momentum region (pi C nu)."""
    if region.kind == LIFTED_SHELL:
        if not shell_containment_exact(region.N, region.i):
            raise EmbeddingFailure("exact interval check failed")
        return math.pi * region.R * float(shell_alpha(region.N))
    if region.kind == LAMBDA:
        return math.pi * region.C * region.nu
    raise ValueError(f"no capacity floor for region kind {region.kind!r}")


def flow_map(h, t: float, n: int) -> SymplecticMapDescriptor:
    """Time-t flow of a radial Hamiltonian on the cover as a map descriptor."""
    from .dynamics import flow_arrays

    def forward(x):
        q, p = flow_arrays(h, t, x[..., :n], x[..., n:])
        return np.concatenate([q, p], axis=-1)

    def jac(x):
        p = x[n:]
        s = float(p @ p)
        J = np.eye(2 * n)
        J[:n, n:] = t * (float(h.dphi(s)) * np.eye(n) + 2.0 * float(h.d2phi(s)) * np.outer(p, p))
        return J

    return SymplecticMapDescriptor("flow", n, forward, {"t": t, "H": h.label}, jac)
