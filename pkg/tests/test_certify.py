import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hoferqie.certify import (
    SCAN_GROWTH_FLOOR,
    CertifyOptions,
    GrowthCheckError,
    certify,
    certify_pair,
    epsilon,
    growth_scan,
    lower_bound,
    oscillation_constant,
    qi_constant,
    upper_bound,
)
from hoferqie.dynamics import LatticeElement

FAST = CertifyOptions(displacement_samples=2000, deck_samples=100, embedding_samples=2000,
                      symplectic_points=20, deck_radius=6)


def test_epsilon_exact():
    assert epsilon(2) == math.pi / 1280
    for N in range(1, 12):
        # oracle: the rational factor in exact arithmetic
        assert Fraction(epsilon(N + 1) / epsilon(N)) == Fraction(1, 2)


@pytest.mark.parametrize("a, expected", [((3, -5), math.pi / 160), ((1,), math.pi / 640),
                                         ((1, 1), math.pi / 640)])
def test_lower_bound_examples(a, expected):
    a = LatticeElement(a)
    # oracle: eps_N * l with eps_N = pi / (80 2^(N+2))
    assert lower_bound(a, run_witnesses=False) == pytest.approx(expected, rel=1e-15)
    assert lower_bound(a, run_witnesses=False) == pytest.approx(epsilon(a.N) * a.l1, rel=1e-15)


def test_lower_bound_zero():
    assert lower_bound(LatticeElement((0, 0))) == 0.0


def test_lower_bound_runs_witnesses():
    assert lower_bound(LatticeElement((3, -5)), opts=FAST) == pytest.approx(math.pi / 160)


def test_upper_bound_example():
    ub, C = upper_bound(LatticeElement((3, -5)))
    assert 1.5 <= C <= 3
    assert ub <= 8 * C


def test_qi_constant():
    assert qi_constant(2) == 1 / epsilon(2)
    assert qi_constant(2, C=1e9) == 1e9


def test_certify_default_example():
    cert = certify(LatticeElement((3, -5)), 2, FAST)
    assert cert.lower == pytest.approx(math.pi / 160, rel=1e-15)
    assert cert.lower == pytest.approx(0.0196350, abs=1e-7)
    assert cert.upper <= 8 * cert.C
    assert cert.consistent
    assert cert.epsilon_N == math.pi / 1280
    assert cert.C_N == 1 / cert.epsilon_N
    assert cert.upper == min(cert.upper_direct, cert.upper_stepwise)
    assert cert.displacement.min_base_displacement > 8.9


def test_certify_zero_element():
    cert = certify(LatticeElement((0, 0)))
    assert cert.lower == cert.upper == 0.0 and cert.consistent


def test_certify_pair_uses_difference():
    cert = certify_pair(LatticeElement((4, -2)), LatticeElement((1, 3)), 2, FAST)
    assert cert.a.a == (3, -5)


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(-9, 9), st.integers(-9, 9)))
def test_sandwich_without_witnesses(a):
    a = LatticeElement(a)
    lo = lower_bound(a, run_witnesses=False)
    ub, C = upper_bound(a)
    assert lo <= ub + 1e-15
    assert lo == pytest.approx(epsilon(2) * a.l1, rel=1e-14, abs=0)
    assert ub <= C * a.l1 + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), st.integers(1, 4))
def test_lower_bound_homogeneous(a, m):
    a = LatticeElement(a)
    assert lower_bound(m * a, run_witnesses=False) == pytest.approx(
        m * lower_bound(a, run_witnesses=False), rel=1e-14)


def test_growth_scan():
    rows = growth_scan(range(1, 7))
    for prev, row in zip(rows, rows[1:]):
        assert row.epsilon_N / prev.epsilon_N == 0.5
        assert row.C_N / prev.C_N >= SCAN_GROWTH_FLOOR
        assert row.C_N == 1 / row.epsilon_N
    Cs = [r.C for r in rows]
    assert all(1.5 <= c <= 3 for c in Cs)
    assert oscillation_constant(3) == Cs[2]
    with pytest.raises(ValueError):
        growth_scan([])


def test_growth_scan_error_type():
    assert issubclass(GrowthCheckError, RuntimeError)
