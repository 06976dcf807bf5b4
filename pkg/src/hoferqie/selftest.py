"""Reduced-size invariant checks run by ``hoferqie selftest``.

Each check returns ``(passed, detail)``.  The ``inject`` hooks corrupt one
ingredient so that the corresponding check can be seen to fail.
"""

from __future__ import annotations

import math

import numpy as np

from .capacity import (
    SymplecticMapDescriptor,
    build_potential,
    certify_ball_embedding,
    compose,
    exp_induced,
    fiberwise_translation,
    flow_map,
    rescaling,
    shell_alpha,
    shell_containment_exact,
)
from .dynamics import (
    KINETIC,
    LatticeElement,
    flow_arrays,
    generators,
    poisson_bracket_fd,
)
from .lifts import verify_displacement
from .shells import build_profile, build_profile_from_signs, build_shells, index_pattern

INJECTIONS = ("sign-flip", "non-symplectic")


def _profiles(N, inject=None):
    profs = [build_profile(k, N) for k in range(1, N + 1)]
    if inject == "sign-flip":
        signs = list(profs[0].signs)
        signs[0] = -signs[0]
        profs[0] = build_profile_from_signs(signs, N, 1)
    return profs


def check_shell_exactness(profiles, N, samples=1000, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k, prof in enumerate(profiles, 1):
        for sh in build_shells(N):
            e = index_pattern(sh.i, N)[k - 1]
            s = rng.uniform(sh.s_lo, sh.s_hi, samples)
            worst = max(worst, float(np.max(np.abs(prof.value(s) - e * s))),
                        float(np.max(np.abs(prof.derivative(s) - e))))
    return worst < 1e-14, f"max on-shell deviation {worst:.3g}"


def check_support(profiles):
    s = np.concatenate([np.linspace(0.0, 0.5, 101), np.linspace(2.5, 3.0, 101)])
    worst = max(float(np.max(np.abs(p.value(s)) + np.abs(p.derivative(s)))) for p in profiles)
    return worst == 0.0, f"max |phi| + |phi'| off support {worst:.3g}"


def check_c2(profiles):
    worst = max(float(p.continuity_residuals().max()) for p in profiles)
    return worst < 1e-12, f"max knot jump (value, slope, curvature) {worst:.3g}"


def symplectic_maps(N=2, i=2, R=2.0, n=2, inject=None) -> dict:
    q0 = np.zeros(n)
    alpha = float(shell_alpha(N))
    V = build_potential(i, N, R, q0)
    scale = rescaling(R, alpha, n)
    if inject == "non-symplectic":
        a = math.sqrt(R / alpha)
        scale = SymplecticMapDescriptor(
            "linear_rescale", n, lambda x: np.concatenate([a * x[..., :n], a * x[..., n:]], axis=-1))
    return {
        "flow_E": flow_map(KINETIC, 1.0, n),
        "T_V": fiberwise_translation(V),
        "G": exp_induced(q0),
        "rescale": scale,
        "embedding": compose(scale, exp_induced(q0), fiberwise_translation(V, inverse=True)),
    }


def check_symplectic(maps: dict, points=20, h=1e-5, tol=1e-6, seed=0):
    rng = np.random.default_rng(seed)
    worst = {}
    for name, m in maps.items():
        n = m.n
        if name in ("T_V",):
            q = rng.uniform(-1.0, 1.0, (points, n))
        else:
            q = rng.uniform(-0.05, 0.05, (points, n))
        p = rng.uniform(-0.05, 0.05, (points, n))
        worst[name] = float(m.symplectic_residuals(np.hstack([q, p]), h=h).max())
    ok = all(v < tol for v in worst.values())
    return ok, ", ".join(f"{k}={v:.2g}" for k, v in worst.items())


def check_commutation(N=2, points=200, seed=0):
    rng = np.random.default_rng(seed)
    q = rng.uniform(-1, 1, (points, 2))
    p = rng.uniform(-1.2, 1.2, (points, 2))
    gens = generators(N)
    worst = 0.0
    for j, hj in enumerate(gens):
        for hk in gens[j + 1:]:
            tj, tk = rng.uniform(-3, 3, 2)
            a = flow_arrays(hk, tk, *flow_arrays(hj, tj, q, p))
            b = flow_arrays(hj, tj, *flow_arrays(hk, tk, q, p))
            worst = max(worst, float(np.max(np.abs(a[0] - b[0]))))
    return worst < 1e-12, f"max order gap {worst:.3g}"


def check_poisson(N=2, points=200, seed=0):
    rng = np.random.default_rng(seed)
    q = rng.uniform(-1, 1, (points, 2))
    p = rng.uniform(-1.2, 1.2, (points, 2))
    gens = generators(N) + [KINETIC]
    worst = max(float(np.max(np.abs(poisson_bracket_fd(a, b, q, p))))
                for a in gens for b in gens)
    return worst < 1e-6, f"max |{{H_j, H_k}}| by finite differences {worst:.3g}"


def check_displacement(samples=5000, seed=0):
    w = verify_displacement(LatticeElement((3, -5)), np.zeros(2), samples, seed)
    return w.disjoint and w.min_base_displacement > 8.9, \
        f"min base displacement {w.min_base_displacement:.6f} over {samples} samples"


def check_containment(samples=5000, seed=0):
    exact = shell_containment_exact(2, 2)
    cert = certify_ball_embedding(2, 2, 2.0, np.zeros(2), samples, seed, symplectic_points=10)
    return exact and cert.containment_violations == 0, \
        f"exact interval check {exact}, violations {cert.containment_violations}/{samples}"


def run_selftest(inject: str | None = None, out=print) -> bool:
    if inject is not None and inject not in INJECTIONS:
        raise ValueError(f"unknown injection {inject!r}")
    N = 2
    profiles = _profiles(N, inject)
    checks = [
        ("shell exactness", lambda: check_shell_exactness(profiles, N)),
        ("support", lambda: check_support(profiles)),
        ("C2 continuity", lambda: check_c2(profiles)),
        ("symplecticity", lambda: check_symplectic(symplectic_maps(inject=inject))),
        ("commutation", check_commutation),
        ("poisson brackets", check_poisson),
        ("displacement", check_displacement),
        ("containment", check_containment),
    ]
    all_ok = True
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed property
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        out(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
