import math

import numpy as np
import pytest

from hoferqie.dynamics import LatticeElement, flow_sum_arrays
from hoferqie.geometry import (
    ChartError,
    CotangentPoint,
    DeckTransformation,
    apply_deck,
    project_to_torus,
)
from hoferqie.lifts import (
    CASE_LAMBDA,
    CASE_SHELL,
    WitnessFailure,
    analytic_case_check,
    deck_dichotomy,
    deck_vectors,
    default_deck_radius,
    dichotomy_case,
    dichotomy_sweep,
    displaced_capacity_floor,
    lifted_flow,
    select_pattern,
    verify_displacement,
)
from hoferqie.shells import pattern_index


@pytest.mark.parametrize("a, I, i", [
    ((3, -5), (1, -1), 2),
    ((-1, -1), (-1, -1), 1),
    ((2, 0), (1, 1), 4),
])
def test_select_pattern(a, I, i):
    pat = select_pattern(LatticeElement(a))
    assert pat.I == I
    assert pattern_index(pat) == i


def test_select_pattern_zero():
    with pytest.raises(ValueError):
        select_pattern(LatticeElement((0, 0)))


def test_lifted_flow_examples():
    a = LatticeElement((3, -5))
    low = CotangentPoint((0.3, 0.4), (0.2, 0.5))
    assert lifted_flow(a, 1.0, low) == low
    p = np.array([math.sqrt(1.3) * 0.6, math.sqrt(1.3) * 0.8])
    out = lifted_flow(a, 1.0, CotangentPoint((0.3, 0.4), p))
    np.testing.assert_allclose(out.q, np.array([0.3, 0.4]) + 8 * p, atol=1e-14)
    with pytest.raises(ChartError):
        lifted_flow(a, 1.0, project_to_torus(low))


def test_lifted_flow_projects_to_torus_flow():
    a = LatticeElement((3, -5))
    rng = np.random.default_rng(0)
    q = rng.uniform(-3, 3, (1000, 2))
    p = rng.uniform(-1.3, 1.3, (1000, 2))
    up, _ = flow_sum_arrays(a, 1.0, q, p)
    down, _ = flow_sum_arrays(a, 1.0, np.mod(q, 1.0), p, chart="torus")
    d = np.abs(np.mod(up, 1.0) - down)
    assert np.max(np.minimum(d, 1 - d)) < 1e-12


def test_lifted_flow_commutes_with_deck():
    a = LatticeElement((2, 7))
    rng = np.random.default_rng(1)
    for _ in range(100):
        pt = CotangentPoint(rng.uniform(-2, 2, 2), rng.uniform(-1.3, 1.3, 2))
        T = DeckTransformation(rng.integers(-5, 6, 2))
        lhs = lifted_flow(a, 1.0, apply_deck(T, pt))
        rhs = apply_deck(T, lifted_flow(a, 1.0, pt))
        np.testing.assert_allclose(lhs.q, rhs.q, atol=1e-12)


def test_verify_displacement_example():
    w = verify_displacement(LatticeElement((3, -5)), np.zeros(2), samples=20000, seed=0)
    assert w.disjoint
    assert w.min_base_displacement > 8.9
    assert w.min_base_displacement >= w.analytic_floor - 1e-12
    assert w.analytic_floor == pytest.approx(8 * math.sqrt(1.25))
    assert w.to_dict()["region"]["i"] == 2


def test_verify_displacement_rank_one():
    w = verify_displacement(LatticeElement((1,)), np.zeros(2), samples=5000, seed=1)
    assert w.disjoint and w.min_base_displacement >= 1 > 2 * 0.25


def test_verify_displacement_zero():
    with pytest.raises(ValueError):
        verify_displacement(LatticeElement((0, 0)), np.zeros(2))


def test_verify_displacement_is_seeded():
    a = LatticeElement((3, -5))
    w1 = verify_displacement(a, np.zeros(2), samples=3000, seed=7, batch=1000)
    w2 = verify_displacement(a, np.zeros(2), samples=3000, seed=7, batch=1000)
    assert w1.min_base_displacement == w2.min_base_displacement


@pytest.mark.parametrize("v, case", [((0, 0), CASE_SHELL), ((5, 0), CASE_LAMBDA), ((1, 0), CASE_SHELL),
                                     ((0, -4), CASE_LAMBDA), ((3, 2), CASE_SHELL)])
def test_deck_dichotomy_examples(v, case):
    a = LatticeElement((3, -5))
    w = deck_dichotomy(a, DeckTransformation(v), np.zeros(2), samples=1000, seed=0)
    assert w.case == case == dichotomy_case(a, v)
    assert w.disjoint


def test_case_B_inequalities_hold_beyond_half_length():
    a = LatticeElement((3, -5))
    for v in deck_vectors(2, 40):
        if np.linalg.norm(v) >= 4:
            assert dichotomy_case(a, v) == CASE_LAMBDA
            assert analytic_case_check(a, v, 1.25)


def test_deck_vectors():
    vs = deck_vectors(2, 1.5)
    assert len(vs) == 9
    assert len(deck_vectors(2, 16)) == 797
    assert default_deck_radius(LatticeElement((3, -5))) == 16


def test_dichotomy_sweep_small_radius():
    a = LatticeElement((3, -5))
    sweep = dichotomy_sweep(a, np.zeros(2), deck_radius=5, samples=200, seed=0)
    assert sweep.tail_certified
    assert sweep.counts[CASE_SHELL] + sweep.counts[CASE_LAMBDA] == len(deck_vectors(2, 5))
    assert sweep.to_dict()["all_disjoint"]
    with pytest.raises(ValueError):
        dichotomy_sweep(a, np.zeros(2), deck_radius=3)


def test_displaced_capacity_floor_examples():
    floor = displaced_capacity_floor(LatticeElement((3, -5)), np.zeros(2), deck_radius=6, samples=200)
    assert floor == pytest.approx(math.pi / 80, abs=1e-16)
    floor1 = displaced_capacity_floor(LatticeElement((1,)), np.zeros(2), samples=200)
    assert floor1 == pytest.approx(math.pi / 320, abs=1e-16)
    # oracle: min(pi R alpha, pi (R/2) / sqrt 2) with R = 1/4, alpha = 1/80
    assert floor1 == min(math.pi * 0.25 / 80, math.pi * 0.125 / math.sqrt(2))


def test_witness_failure_payload():
    exc = WitnessFailure("boom", CotangentPoint((0, 0), (1, 0)))
    assert exc.point.n == 2
