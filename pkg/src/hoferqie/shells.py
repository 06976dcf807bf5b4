"""Momentum shells, the sign-pattern bijection, bump profiles and regions.

For a rank ``N`` the shells are the 2^N closed intervals of |p|^2

    [1 + (i-1)/2^N,  1 + (i-1)/2^N + 1/2^(N+1)],   i = 1..2^N,

separated by gaps of the same width.  Profile ``k`` is linear with slope
+-1 on every shell (sign = k-th entry of the pattern of that shell) and is
glued to zero on [0, 1/2] and [5/2, 3] by C^2 quintic Hermite pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import COVER, ChartError, CotangentPoint, norm_sq

MAX_RANK = 16
SUPPORT_LO = 0.5
SUPPORT_HI = 2.5
DOMAIN_HI = 3.0

SHELL_A = "shell_A"
LIFTED_SHELL = "lifted_shell"
LAMBDA = "lambda"
REGION_KINDS = (SHELL_A, LIFTED_SHELL, LAMBDA)

# segment kinds
ZERO, RAMP, SHELL, GAP = "zero", "ramp", "shell", "gap"


def _check_rank(N: int) -> int:
    if int(N) != N or not 1 <= N <= MAX_RANK:
        raise ValueError(f"rank N must be an integer in [1, {MAX_RANK}], got {N}")
    return int(N)


@dataclass(frozen=True)
class SignPattern:
    I: tuple

    def __post_init__(self):
        I = tuple(int(x) for x in self.I)
        if not I or any(x not in (1, -1) for x in I):
            raise ValueError(f"sign pattern entries must be +1 or -1, got {self.I}")
        _check_rank(len(I))
        object.__setattr__(self, "I", I)

    @property
    def N(self) -> int:
        return len(self.I)

    def __getitem__(self, k):
        return self.I[k]


def pattern_index(I: SignPattern) -> int:
    """Shell index i(I) = 1 + sum_k ((I_k + 1)/2) 2^(k-1)."""
    return 1 + sum(1 << k for k, s in enumerate(I.I) if s == 1)


def index_pattern(i: int, N: int) -> SignPattern:
    N = _check_rank(N)
    if int(i) != i or not 1 <= i <= 2**N:
        raise ValueError(f"shell index must lie in [1, {2**N}], got {i}")
    bits = int(i) - 1
    return SignPattern(tuple(1 if (bits >> k) & 1 else -1 for k in range(N)))


@dataclass(frozen=True)
class ShellSpec:
    i: int
    N: int

    @property
    def s_lo(self) -> float:
        return 1.0 + (self.i - 1) / 2**self.N

    @property
    def s_hi(self) -> float:
        return self.s_lo + 1.0 / 2 ** (self.N + 1)

    def exact_bounds(self) -> tuple[Fraction, Fraction]:
        lo = 1 + Fraction(self.i - 1, 2**self.N)
        return lo, lo + Fraction(1, 2 ** (self.N + 1))

    @property
    def radii(self) -> tuple[float, float]:
        """Boundary radii |p| of the shell, for drawing."""
        return math.sqrt(self.s_lo), math.sqrt(self.s_hi)

    def contains(self, s):
        return (s >= self.s_lo) & (s <= self.s_hi)


def build_shells(N: int) -> list[ShellSpec]:
    N = _check_rank(N)
    return [ShellSpec(i, N) for i in range(1, 2**N + 1)]


def shell_of(s: float, N: int) -> ShellSpec | None:
    """The shell containing the value |p|^2 = s, or None inside a gap."""
    for shell in build_shells(N):
        if shell.s_lo <= s <= shell.s_hi:
            return shell
    return None


def quintic_hermite(x0, x1, left, right) -> np.ndarray:
    """Coefficients (ascending, in u = (s - x0)/(x1 - x0)) of the quintic
    matching value, slope and curvature ``left`` at x0 and ``right`` at x1."""
    w = x1 - x0
    y0, d0, dd0 = left
    y1, d1, dd1 = right
    a0, a1, a2 = y0, w * d0, 0.5 * w * w * dd0
    A = y1 - a0 - a1 - a2
    B = w * d1 - a1 - 2.0 * a2
    C = w * w * dd1 - 2.0 * a2
    a3 = 10.0 * A - 4.0 * B + 0.5 * C
    a4 = -15.0 * A + 7.0 * B - C
    a5 = 6.0 * A - 3.0 * B + 0.5 * C
    return np.array([a0, a1, a2, a3, a4, a5])


@dataclass(frozen=True, eq=False)
class BumpProfile:
    """Piecewise polynomial profile on [0, 3].

    Segment ``j`` covers ``[knots[j], knots[j+1]]`` and is the polynomial
    ``sum_m coeffs[j, m] * u**m`` with ``u = (s - offsets[j]) / scales[j]``.
    Shell segments use ``offset = 0, scale = 1`` and coefficients
    ``(0, sign, 0, ...)`` so that the on-shell value is bit-exactly
    ``sign * s``.
    """

    knots: np.ndarray
    coeffs: np.ndarray
    offsets: np.ndarray
    scales: np.ndarray
    kinds: tuple
    signs: tuple
    N: int
    k: int | None = None

    @property
    def segments(self):
        for j, kind in enumerate(self.kinds):
            yield kind, self.knots[j], self.knots[j + 1], self.coeffs[j]

    def _locate(self, s: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.knots, s, side="right") - 1
        idx = np.clip(idx, 0, len(self.kinds) - 1)
        # a knot shared with the upper end of a shell belongs to the shell
        shell_seg = np.array([kd == SHELL for kd in self.kinds])
        prev = np.clip(idx - 1, 0, None)
        at_shell_end = (idx > 0) & shell_seg[prev] & (s == self.knots[idx])
        return np.where(at_shell_end, prev, idx)

    def _eval(self, s, order: int):
        s_arr = np.asarray(s, dtype=float)
        flat = s_arr.reshape(-1)
        if not np.all(flat >= 0.0):
            raise ValueError("profile argument must be a nonnegative |p|^2")
        # beyond DOMAIN_HI the last (zero) segment applies
        idx = self._locate(flat)
        c = self.coeffs[idx]
        scale = self.scales[idx]
        u = (flat - self.offsets[idx]) / scale
        for _ in range(order):
            m = np.arange(1, c.shape[1])
            c = c[:, 1:] * m
        out = c[:, -1].copy()
        for col in range(c.shape[1] - 2, -1, -1):
            out = out * u + c[:, col]
        if order:
            out = out / scale**order
        out = out.reshape(s_arr.shape)
        return float(out) if out.ndim == 0 else out

    def value(self, s):
        return self._eval(s, 0)

    def derivative(self, s):
        return self._eval(s, 1)

    def second_derivative(self, s):
        return self._eval(s, 2)

    __call__ = value

    def scaled(self, factor: float) -> "BumpProfile":
        return BumpProfile(self.knots, self.coeffs * factor, self.offsets, self.scales,
                           self.kinds, tuple(factor * e for e in self.signs), self.N, None)

    def segment_eval(self, j: int, x: float, order: int = 0) -> float:
        """Evaluate the polynomial of segment ``j`` at ``x`` (also outside it)."""
        poly = np.polynomial.Polynomial(self.coeffs[j]).deriv(order)
        return float(poly((x - self.offsets[j]) / self.scales[j]) / self.scales[j] ** order)

    def continuity_residuals(self) -> np.ndarray:
        """Jumps of value, slope and curvature at every interior knot, shape (m, 3)."""
        return np.array([[abs(self.segment_eval(j - 1, self.knots[j], o)
                              - self.segment_eval(j, self.knots[j], o)) for o in range(3)]
                         for j in range(1, len(self.kinds))])


def profile_layout(N: int):
    """Common knots and segment kinds shared by every profile of rank N."""
    shells = build_shells(N)
    knots = [0.0, SUPPORT_LO, 1.0]
    kinds = [ZERO, RAMP]
    for j, sh in enumerate(shells):
        if j:
            kinds.append(GAP)
            knots.append(sh.s_lo)
        kinds.append(SHELL)
        knots.append(sh.s_hi)
    kinds += [RAMP, ZERO]
    knots += [SUPPORT_HI, DOMAIN_HI]
    return shells, np.array(knots), tuple(kinds)


def build_profile_from_signs(signs, N: int, k: int | None = None) -> BumpProfile:
    shells, knots, kinds = profile_layout(N)
    signs = tuple(float(e) for e in signs)
    if len(signs) != len(shells):
        raise ValueError(f"need {len(shells)} shell signs, got {len(signs)}")
    coeffs = np.zeros((len(kinds), 6))
    offsets = np.zeros(len(kinds))
    scales = np.ones(len(kinds))
    done = 0  # shells already laid down
    for j, kind in enumerate(kinds):
        lo, hi = knots[j], knots[j + 1]
        if kind == ZERO:
            continue
        if kind == SHELL:
            coeffs[j, 1] = signs[done]
            done += 1
            continue
        offsets[j], scales[j] = lo, hi - lo
        left = (0.0, 0.0, 0.0) if done == 0 else (signs[done - 1] * lo, signs[done - 1], 0.0)
        right = (0.0, 0.0, 0.0) if done == len(shells) else (signs[done] * hi, signs[done], 0.0)
        coeffs[j] = quintic_hermite(lo, hi, left, right)
    return BumpProfile(knots, coeffs, offsets, scales, kinds, signs, N, k)


def build_profile(k: int, N: int) -> BumpProfile:
    N = _check_rank(N)
    if int(k) != k or not 1 <= k <= N:
        raise ValueError(f"profile index must lie in [1, {N}], got {k}")
    signs = [index_pattern(i, N)[k - 1] for i in range(1, 2**N + 1)]
    return build_profile_from_signs(signs, N, k)


def combine_profiles(profiles, weights) -> BumpProfile:
    """The profile sum_k w_k phi_k; all profiles must share the same rank."""
    profiles = list(profiles)
    weights = [float(w) for w in weights]
    if len(profiles) != len(weights) or not profiles:
        raise ValueError("need one weight per profile")
    base = profiles[0]
    if any(pr.N != base.N for pr in profiles):
        raise ValueError("profiles of different rank cannot be combined")
    coeffs = sum(w * pr.coeffs for w, pr in zip(weights, profiles))
    signs = tuple(sum(w * pr.signs[i] for w, pr in zip(weights, profiles))
                  for i in range(len(base.signs)))
    return BumpProfile(base.knots, coeffs, base.offsets, base.scales, base.kinds,
                       signs, base.N, None)


@dataclass(frozen=True)
class RegionSpec:
    """Phase-space region.

    ``shell_A``: all (q, p) with |p|^2 in shell ``i`` (any chart).
    ``lifted_shell``: q in the open ball B(q0, R) of the cover, |p|^2 in shell ``i``.
    ``lambda``: q in B(q0, C), |p| < nu.
    """

    kind: str
    N: int | None = None
    i: int | None = None
    R: float | None = None
    nu: float | None = None
    C: float | None = None
    q0: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind in (SHELL_A, LIFTED_SHELL):
            _check_rank(self.N)
            if self.i is None or not 1 <= self.i <= 2**self.N:
                raise ValueError(f"shell index out of range: {self.i}")
        if self.kind == LIFTED_SHELL and not (self.R is not None and self.R > 0):
            raise ValueError("lifted shell needs a positive radius R")
        if self.kind == LAMBDA and not (self.nu and self.nu > 0 and self.C and self.C > 0):
            raise ValueError("lambda region needs positive nu and C")
        if self.kind != SHELL_A:
            if self.q0 is None:
                raise ValueError("cover regions need a centre q0")
            q0 = np.array(self.q0, dtype=float).reshape(-1)
            q0.setflags(write=False)
            object.__setattr__(self, "q0", q0)

    @property
    def shell(self) -> ShellSpec:
        return ShellSpec(self.i, self.N)

    @property
    def base_radius(self) -> float:
        return self.R if self.kind == LIFTED_SHELL else self.C

    def contains_arrays(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        s = norm_sq(p)
        if self.kind == SHELL_A:
            return self.shell.contains(s)
        inside = norm_sq(np.asarray(q) - self.q0) < self.base_radius**2
        if self.kind == LIFTED_SHELL:
            return inside & self.shell.contains(s)
        return inside & (s < self.nu**2)


def lifted_shell(N: int, i: int, R: float, q0) -> RegionSpec:
    return RegionSpec(LIFTED_SHELL, N=N, i=i, R=R, q0=q0)


def lambda_region(nu: float, C: float, q0) -> RegionSpec:
    return RegionSpec(LAMBDA, nu=nu, C=C, q0=q0)


def region_contains(r: RegionSpec, pt: CotangentPoint) -> bool:
    if r.kind != SHELL_A and pt.chart != COVER:
        raise ChartError(f"{r.kind} regions live on the cover chart")
    if r.kind != SHELL_A and r.q0.shape != pt.q.shape:
        raise ValueError("region centre and point differ in dimension")
    return bool(r.contains_arrays(pt.q, pt.p))


def _sample_ball(rng, n, radius, count, center, strict=True):
    """Rejection sampling of ``count`` points of the open ball from its box."""
    out = np.empty((0, n))
    while out.shape[0] < count:
        need = count - out.shape[0]
        batch = max(64, int(need * 1.3 * 2**n))
        x = rng.uniform(-radius, radius, size=(batch, n))
        r2 = norm_sq(x)
        keep = r2 < radius**2 if strict else r2 <= radius**2
        out = np.vstack([out, x[keep][:need]])
    return out + center


def _sample_annulus(rng, n, s_lo, s_hi, count):
    """Uniform samples of {s_lo <= |p|^2 <= s_hi}: Gaussian direction and a
    radius drawn through the inverse CDF of r^n, filtered to stay inside."""
    out = np.empty((0, n))
    while out.shape[0] < count:
        need = count - out.shape[0]
        batch = need + 16
        d = rng.standard_normal(size=(batch, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        w = rng.uniform(s_lo ** (n / 2), s_hi ** (n / 2), size=batch)
        x = d * (w ** (1.0 / n))[:, None]
        s = norm_sq(x)
        out = np.vstack([out, x[(s >= s_lo) & (s <= s_hi)][:need]])
    return out


def sample_region_arrays(r: RegionSpec, count: int, seed: int, n: int | None = None):
    """Deterministic samples of a region as arrays ``(q, p)`` of shape (count, n).

    The q and p blocks are sampled independently (every region is a product
    of a base set and a fiber set), each by rejection from its bounding box.
    """
    if count < 1:
        raise ValueError("sample count must be positive")
    if n is None:
        if r.q0 is None:
            raise ValueError("dimension n required for shell_A sampling")
        n = r.q0.shape[0]
    rng = np.random.default_rng(seed)
    if r.kind == SHELL_A:
        q = rng.uniform(0.0, 1.0, size=(count, n))
    else:
        q = _sample_ball(rng, n, r.base_radius, count, r.q0)
    if r.kind == LAMBDA:
        p = _sample_ball(rng, n, r.nu, count, np.zeros(n))
    else:
        p = _sample_annulus(rng, n, r.shell.s_lo, r.shell.s_hi, count)
    return q, p


def sample_region(r: RegionSpec, count: int, seed: int, n: int | None = None):
    q, p = sample_region_arrays(r, count, seed, n)
    chart = COVER if r.kind != SHELL_A else "torus"
    return [CotangentPoint(qi, pi, chart) for qi, pi in zip(q, p)]
