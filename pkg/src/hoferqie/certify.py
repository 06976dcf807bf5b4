"""Two-sided bounds on the Hofer norm of lattice elements.

    eps_N * |a|_1  <=  ||phi(a)||  <=  C * |a|_1,   C_N = max(1/eps_N, C)

The lower side comes from the displacement witnesses and the capacity
floors; the upper side from oscillations of the generating Hamiltonians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .capacity import (
    EmbeddingCertificate,
    capacity_floor,
    certify_ball_embedding,
    certify_lambda_embedding,
)
from .dynamics import (
    LatticeElement,
    generator_oscillations,
    hofer_upper_bound,
    oscillation,
)
from .lifts import (
    LAMBDA_MOMENTUM,
    DichotomySweep,
    DisplacementWitness,
    dichotomy_sweep,
    displacement_setup,
    verify_displacement,
)
from .shells import lambda_region

SCAN_GROWTH_FLOOR = 1.9


class GrowthCheckError(RuntimeError):
    """C_N grew by less than the expected factor between consecutive ranks."""


def epsilon(N: int) -> float:
    """eps_N = pi / (80 * 2^(N+2))."""
    return math.pi / (80 * 2 ** (N + 2))


def oscillation_constant(N: int) -> float:
    """C = max_k osc(H_k), an upper bound for max_k ||phi_{H_k}^1||."""
    return max(generator_oscillations(N))


def qi_constant(N: int, C: float | None = None) -> float:
    C = oscillation_constant(N) if C is None else C
    return max(1.0 / epsilon(N), C)


@dataclass(frozen=True)
class CertifyOptions:
    q0: tuple | None = None
    displacement_samples: int = 100_000
    deck_samples: int = 2_000
    embedding_samples: int = 100_000
    symplectic_points: int = 100
    fd_step: float = 1e-5
    symplectic_tol: float = 1e-6
    deck_radius: float | None = None
    seed: int = 0

    def base_point(self, n: int) -> np.ndarray:
        return np.zeros(n) if self.q0 is None else np.asarray(self.q0, dtype=float)


@dataclass(frozen=True)
class BoundCertificate:
    N: int
    a: LatticeElement
    l: int
    lower: float
    upper: float
    epsilon_N: float
    C: float
    C_N: float
    upper_direct: float = 0.0
    upper_stepwise: float = 0.0
    displacement: DisplacementWitness | None = None
    dichotomy: DichotomySweep | None = None
    shell_embedding: EmbeddingCertificate | None = None
    lambda_embedding: EmbeddingCertificate | None = None
    generator_oscillations: tuple = field(default_factory=tuple)

    @property
    def consistent(self) -> bool:
        return 0.0 <= self.lower <= self.upper


def lower_bound(a: LatticeElement, n: int = 2, opts: CertifyOptions | None = None,
                run_witnesses: bool = True) -> float:
    """Half the smaller capacity floor, pi l / (80 2^(N+2)); 0 for a = 0.

    With ``run_witnesses`` the displacement and dichotomy witnesses are run
    first and any failure propagates.
    """
    if a.is_zero:
        return 0.0
    opts = opts or CertifyOptions()
    q0 = opts.base_point(n)
    if run_witnesses:
        verify_displacement(a, q0, opts.displacement_samples, opts.seed)
        dichotomy_sweep(a, q0, opts.deck_radius, opts.deck_samples, opts.seed)
    _, R, shell = displacement_setup(a, q0)
    lam = lambda_region(LAMBDA_MOMENTUM, R / 2.0, q0)
    return 0.5 * min(capacity_floor(shell), capacity_floor(lam))


def upper_bound(a: LatticeElement) -> tuple[float, float]:
    """(Hofer upper bound for phi(a), C = max_k osc(H_k))."""
    return hofer_upper_bound(a), oscillation_constant(a.N)


def certify(a: LatticeElement, n: int = 2, opts: CertifyOptions | None = None) -> BoundCertificate:
    opts = opts or CertifyOptions()
    N = a.N
    eps = epsilon(N)
    oscs = tuple(generator_oscillations(N))
    C = max(oscs)
    C_N = max(1.0 / eps, C)
    if a.is_zero:
        return BoundCertificate(N, a, 0, 0.0, 0.0, eps, C, C_N,
                                generator_oscillations=oscs)
    q0 = opts.base_point(n)
    disp = verify_displacement(a, q0, opts.displacement_samples, opts.seed)
    sweep = dichotomy_sweep(a, q0, opts.deck_radius, opts.deck_samples, opts.seed + 1)
    _, R, shell = displacement_setup(a, q0)
    shell_emb = certify_ball_embedding(N, shell.i, R, q0, opts.embedding_samples,
                                       opts.seed + 2, opts.symplectic_points,
                                       opts.fd_step, opts.symplectic_tol)
    lam_emb = certify_lambda_embedding(LAMBDA_MOMENTUM, R / 2.0, q0,
                                       min(opts.embedding_samples, 10_000), opts.seed + 3,
                                       opts.symplectic_points, opts.fd_step,
                                       opts.symplectic_tol)
    lower = 0.5 * min(shell_emb.capacity, lam_emb.capacity)
    direct = oscillation(a)
    stepwise = sum(abs(ak) * o for ak, o in zip(a.a, oscs))
    upper = min(direct, stepwise)
    return BoundCertificate(N, a, a.l1, lower, upper, eps, C, C_N, direct, stepwise,
                            disp, sweep, shell_emb, lam_emb, oscs)


def certify_pair(a: LatticeElement, b: LatticeElement, n: int = 2,
                 opts: CertifyOptions | None = None) -> BoundCertificate:
    """Bounds on rho(phi(a), phi(b)) = ||phi(a - b)|| (bi-invariance)."""
    return certify(a - b, n, opts)


@dataclass(frozen=True)
class ScanRow:
    N: int
    epsilon_N: float
    C: float
    C_N: float


def growth_scan(N_values) -> list[ScanRow]:
    """Per-N constants; raises if C_N fails to grow by the expected factor."""
    N_values = list(N_values)
    if not N_values:
        raise ValueError("growth scan needs at least one rank")
    rows = []
    for N in N_values:
        C = oscillation_constant(N)
        rows.append(ScanRow(N, epsilon(N), C, max(1.0 / epsilon(N), C)))
    for prev, row in zip(rows, rows[1:]):
        if row.N == prev.N + 1 and row.C_N / prev.C_N < SCAN_GROWTH_FLOOR:
            raise GrowthCheckError(f"C_N grew by only {row.C_N / prev.C_N} from N={prev.N}")
    return rows
