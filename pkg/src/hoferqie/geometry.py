"""Model spaces: the flat torus R^n/Z^n, its universal cover, and their
cotangent bundles with the canonical symplectic form.

Points are stored in canonical coordinates ``(q, p)``.  Batch routines take
arrays of shape ``(..., n)`` for ``q`` and ``p``; the :class:`CotangentPoint`
wrapper is the single-point API.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COVER = "cover"
TORUS = "torus"
CHARTS = (COVER, TORUS)


class ChartError(ValueError):
    """Raised when an operation receives a point in the wrong chart."""


def _frozen(x, dtype=float) -> np.ndarray:
    arr = np.array(x, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelConfig:
    """Base dimension and marked point q0 (cover coordinates)."""

    n: int = 2
    base_point_q0: np.ndarray = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"base dimension must be a positive integer, got {self.n}")
        q0 = np.zeros(self.n) if self.base_point_q0 is None else self.base_point_q0
        q0 = _frozen(q0)
        if q0.shape != (self.n,):
            raise ValueError(f"q0 must have length {self.n}, got {q0.shape[0]}")
        if not np.all(np.isfinite(q0)):
            raise ValueError("q0 must be finite")
        object.__setattr__(self, "base_point_q0", q0)


@dataclass(frozen=True, eq=False)
class CotangentPoint:
    q: np.ndarray
    p: np.ndarray
    chart: str = COVER

    def __eq__(self, other):
        if not isinstance(other, CotangentPoint):
            return NotImplemented
        return (self.chart == other.chart and np.array_equal(self.q, other.q)
                and np.array_equal(self.p, other.p))

    def __hash__(self):
        return hash((self.chart, self.q.tobytes(), self.p.tobytes()))

    def __post_init__(self):
        q, p = _frozen(self.q), _frozen(self.p)
        if q.shape != p.shape:
            raise ValueError(f"q and p differ in dimension: {q.shape} vs {p.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("point coordinates must be finite")
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")
        if self.chart == TORUS and not np.all((q >= 0.0) & (q < 1.0)):
            raise ValueError("torus-chart coordinates must lie in [0, 1)")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])


@dataclass(frozen=True)
class DeckTransformation:
    """Translation of the cover by an integer vector: (q, p) -> (q + v, p)."""

    v: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.int64))

    def __post_init__(self):
        v = np.asarray(self.v)
        if v.dtype.kind == "f":
            if not np.all(v == np.round(v)):
                raise ValueError(f"deck vector must be integral, got {v}")
        object.__setattr__(self, "v", _frozen(v, dtype=np.int64))

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.v))


def norm_sq(p: np.ndarray) -> np.ndarray:
    """Flat metric |p|^2 along the last axis."""
    p = np.asarray(p, dtype=float)
    return np.sum(p * p, axis=-1)


def metric_norm_sq(pt: CotangentPoint) -> float:
    return float(norm_sq(pt.p))


def cover_distance(q1, q2) -> float:
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q1.shape != q2.shape:
        raise ValueError(f"dimension mismatch: {q1.shape} vs {q2.shape}")
    return float(np.linalg.norm(q1 - q2))


def reduce_mod_lattice(q: np.ndarray) -> np.ndarray:
    r = np.mod(q, 1.0)
    # np.mod can round tiny negatives up to exactly 1.0
    return np.where(r >= 1.0, 0.0, r)


def project_to_torus(pt: CotangentPoint) -> CotangentPoint:
    if pt.chart != COVER:
        raise ChartError("project_to_torus expects a cover-chart point")
    return CotangentPoint(reduce_mod_lattice(pt.q), pt.p, TORUS)


def lift_to_cover(pt: CotangentPoint, sheet=None) -> CotangentPoint:
    if pt.chart != TORUS:
        raise ChartError("lift_to_cover expects a torus-chart point")
    sheet = np.zeros(pt.n, dtype=np.int64) if sheet is None else np.asarray(sheet)
    if sheet.shape != (pt.n,):
        raise ValueError("sheet must have one integer per base coordinate")
    return CotangentPoint(pt.q + sheet, pt.p, COVER)


def apply_deck(T: DeckTransformation, pt: CotangentPoint) -> CotangentPoint:
    if pt.chart != COVER:
        raise ChartError("deck transformations act on the cover chart only")
    if T.v.shape != pt.q.shape:
        raise ValueError("deck vector and point differ in dimension")
    return CotangentPoint(pt.q + T.v, pt.p, COVER)


def canonical_form(n: int) -> np.ndarray:
    """Block matrix of dp ^ dq in coordinates (q, p): [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_form_residual(J) -> float:
    """Max-entry norm of J^T Omega J - Omega."""
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {J.shape}")
    if J.shape[0] % 2:
        raise ValueError("symplectic residual needs an even-sized matrix")
    omega = canonical_form(J.shape[0] // 2)
    return float(np.max(np.abs(J.T @ omega @ J - omega)))
