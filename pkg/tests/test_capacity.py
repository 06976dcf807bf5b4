import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hoferqie.capacity import (
    EmbeddingFailure,
    SymplecticMapDescriptor,
    ball_embedding,
    build_potential,
    capacity_floor,
    certify_ball_embedding,
    certify_lambda_embedding,
    compose,
    exp_induced,
    exp_induced_map,
    exp_inverse_differential_norm,
    fd_jacobian,
    fiberwise_translate,
    fiberwise_translation,
    linear_rescale,
    optimal_alpha,
    rescaling,
    shell_alpha,
    shell_containment_exact,
)
from hoferqie.geometry import CotangentPoint
from hoferqie.shells import lambda_region, lifted_shell


def test_potential_examples():
    V = build_potential(1, 2, 2.0, np.zeros(2))
    assert V.c == pytest.approx(math.sqrt(17) / 4, abs=1e-15)
    assert V.c == pytest.approx(1.030776, abs=1e-6)
    assert V.c_squared == Fraction(17, 16)
    np.testing.assert_allclose(V.dV(np.zeros(2)), [-V.c, 0.0], atol=1e-15)
    rng = np.random.default_rng(0)
    q = rng.uniform(-2.8, 2.8, (1000, 2))
    q = q[np.linalg.norm(q, axis=1) < 4.0]
    assert np.max(np.abs(np.linalg.norm(V.dV(q), axis=1) - V.c)) < 1e-12


def test_potential_hessian_matches_fd():
    V = build_potential(2, 2, 2.0, (0.3, -0.1))
    x = np.array([0.5, 0.7])
    fd = fd_jacobian(V.dV, x, 1e-3)
    np.testing.assert_allclose(V.hessian(x), fd, atol=1e-12)


def test_fiberwise_translation_examples():
    V = build_potential(2, 2, 2.0, np.zeros(2))
    q = np.array([0.4, -0.3])
    out = fiberwise_translate(V, CotangentPoint(q, V.dV(q)))
    np.testing.assert_allclose(out.p, 0.0, atol=1e-15)
    np.testing.assert_array_equal(out.q, q)
    back = fiberwise_translate(V, out, inverse=True)
    np.testing.assert_allclose(back.p, V.dV(q), atol=1e-15)
    with pytest.raises(ValueError):
        fiberwise_translate(V, CotangentPoint((4.5, 0.0), (0.0, 0.0)))


def test_inverse_translation_lands_in_first_shell_interval_oracle():
    # interval arithmetic with sympy: (c -+ 1/160)^2 lies in [1, 1.125] for N=2, i=1
    c = sympy.sqrt(sympy.Rational(17, 16))
    a = sympy.Rational(1, 160)
    lo = sympy.Interval(sympy.Rational(1), sympy.Rational(9, 8))
    assert lo.contains(sympy.nsimplify((c - a) ** 2).evalf(50))
    assert lo.contains(sympy.nsimplify((c + a) ** 2).evalf(50))
    # sampled: q in B(q0, R), |p| < 1/160
    V = build_potential(1, 2, 2.0, np.zeros(2))
    rng = np.random.default_rng(1)
    q = rng.uniform(-2, 2, (20000, 2))
    q = q[np.linalg.norm(q, axis=1) < 2]
    p = rng.uniform(-1, 1, q.shape)
    p *= (rng.uniform(0, 1, len(p)) / 160 / np.linalg.norm(p, axis=1))[:, None]
    s = np.sum((V.dV(q) + p) ** 2, axis=1)
    assert s.min() >= 1.0 and s.max() <= 1.125


def test_exp_induced_examples():
    out = exp_induced_map(CotangentPoint((1, 0), (0, 1)), (0.5, 2.0))
    np.testing.assert_array_equal(out.q, [1.5, 2.0])
    np.testing.assert_array_equal(out.p, [0.0, 1.0])
    assert exp_inverse_differential_norm((0.3, 0.4)) == 1.0


def test_linear_rescale_example():
    out = linear_rescale(2.0, 1 / 160, CotangentPoint((0.1, 0), (0, 0)))
    assert out.q[0] == pytest.approx(0.1 * math.sqrt(320), abs=1e-14)
    assert out.q[0] == pytest.approx(1.78885, abs=1e-5)
    with pytest.raises(ValueError):
        rescaling(0.0, 1.0, 2)


@settings(max_examples=200)
@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_rescale_maps_ball_into_box(x):
    x = np.array(x)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        return
    R, alpha = 2.0, 1 / 160
    x = x / nrm * math.sqrt(R * alpha) * 0.999
    y = rescaling(R, alpha, 2)(x)
    assert np.linalg.norm(y[:2]) < R and np.linalg.norm(y[2:]) < alpha


def _points(rng, count, q_scale=1.0, p_scale=0.05):
    return np.hstack([rng.uniform(-q_scale, q_scale, (count, 2)),
                      rng.uniform(-p_scale, p_scale, (count, 2))])


@pytest.mark.parametrize("name", ["T_V", "T_V_inv", "G", "rescale", "embedding"])
def test_maps_pass_fd_symplectic_test(name):
    V = build_potential(2, 2, 2.0, np.zeros(2))
    emb, _ = ball_embedding(2, 2, 2.0, np.zeros(2))
    maps = {
        "T_V": fiberwise_translation(V),
        "T_V_inv": fiberwise_translation(V, inverse=True),
        "G": exp_induced(np.zeros(2)),
        "rescale": rescaling(2.0, 1 / 160, 2),
        "embedding": emb,
    }
    rng = np.random.default_rng(3)
    scale = 0.05 if name in ("rescale", "embedding") else 1.5
    pts = _points(rng, 100, scale, 0.05)
    assert maps[name].symplectic_residuals(pts, h=1e-5).max() < 1e-6
    assert maps[name].symplectic_residuals(pts, analytic=True).max() < 1e-12


def test_non_symplectic_map_fails_residual_test():
    bad = SymplecticMapDescriptor("stretch", 2, lambda x: 2.0 * x)
    pts = _points(np.random.default_rng(0), 10)
    assert bad.symplectic_residuals(pts).min() > 1.0


def test_compose_order_and_jacobian():
    a, b = rescaling(2.0, 0.5, 2), exp_induced((1.0, 0.0))
    ab = compose(a, b)
    x = np.array([0.2, 0.1, 0.3, 0.4])
    np.testing.assert_allclose(ab(x), b(a(x)))
    np.testing.assert_allclose(ab.jacobian_at(x), fd_jacobian(ab.forward, x), atol=1e-9)
    assert a.then(b)(x).tolist() == ab(x).tolist()


def test_exact_containment_examples():
    assert shell_containment_exact(2, 2, Fraction(1, 160))
    # oracle by hand for N=2, i=2: c^2 = 21/16, need (c - a)^2 >= 5/4 and (c + a)^2 <= 11/8
    c = sympy.sqrt(sympy.Rational(21, 16))
    a = sympy.Rational(1, 160)
    assert sympy.simplify((c - a) ** 2 - sympy.Rational(5, 4)) > 0
    assert sympy.simplify(sympy.Rational(11, 8) - (c + a) ** 2) > 0
    assert not shell_containment_exact(2, 2, Fraction(1, 10))


@pytest.mark.parametrize("N", range(1, 9))
def test_exact_containment_all_shells(N):
    for i in range(1, 2**N + 1):
        assert shell_containment_exact(N, i)
        assert optimal_alpha(N, i) > float(shell_alpha(N))


def test_certify_ball_embedding_example():
    cert = certify_ball_embedding(2, 2, 2.0, np.zeros(2), samples=20000, seed=0)
    assert cert.ball_radius == pytest.approx(math.sqrt(1 / 80), abs=1e-15)
    assert abs(cert.capacity - math.pi / 80) < 1e-15
    assert cert.containment_violations == 0
    assert cert.max_symplectic_residual < 1e-6
    assert cert.min_pair_separation > 0
    assert cert.to_dict()["target"]["i"] == 2


def test_certify_ball_embedding_small_R():
    cert = certify_ball_embedding(2, 3, 1e-6, np.zeros(2), samples=2000, seed=0)
    assert 0 < cert.capacity < 1e-7


def test_certify_lambda_embedding():
    cert = certify_lambda_embedding(1 / math.sqrt(2), 1.0, np.zeros(2), samples=5000)
    assert cert.capacity == pytest.approx(math.pi / math.sqrt(2), abs=1e-15)
    assert cert.capacity == pytest.approx(2.22144, abs=1e-5)


def test_capacity_floor():
    assert capacity_floor(lifted_shell(2, 2, 2.0, (0, 0))) == pytest.approx(math.pi / 80, abs=1e-17)
    assert capacity_floor(lambda_region(1 / math.sqrt(2), 1.0, (0, 0))) == \
        pytest.approx(math.pi / math.sqrt(2))
    pair = min(capacity_floor(lifted_shell(2, 2, 2.0, (0, 0))),
               capacity_floor(lambda_region(1 / math.sqrt(2), 1.0, (0, 0))))
    assert pair == capacity_floor(lifted_shell(2, 2, 2.0, (0, 0)))


def test_embedding_failure_carries_point():
    exc = EmbeddingFailure("x", np.zeros(4))
    assert exc.point.shape == (4,)
