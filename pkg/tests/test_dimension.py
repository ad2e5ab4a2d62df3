import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from workbench import automaton as core
from workbench.dimension import (
    AVOIDS, DEFINES_ALL, avoids_compact_verdict, box_dimension, count_matrix, has_interior,
    interior_witness, is_dimension_zero, is_nowhere_dense, measure, spectral_radius,
    strongly_connected_components, totally_disconnected_probe,
)
from workbench.errors import VerdictRefused
from workbench.structure import (
    AffineSpec, affine_image, box, cantor, carpet, interval, make_digit_set, menger, singleton,
)
from workbench.testing import random_automaton

seeds = st.integers(min_value=0, max_value=10**9)


def rand(seed, arity=None):
    r = random.Random(seed)
    return random_automaton(r, r.choice([2, 3]), arity or r.choice([1, 2]))


@pytest.mark.parametrize("make,rho", [(cantor, 2), (carpet, 8), (menger, 20)])
def test_preset_dimensions(make, rho):
    d = box_dimension(make())
    assert d.rho == rho
    assert abs(d.value - math.log(rho) / math.log(3)) < 1e-12
    assert "log(" in str(d)


def test_empty_and_point_dimension():
    d = box_dimension(core.empty(2, 1))
    assert d.empty and d.value == 0.0
    assert box_dimension(singleton(3, Fraction(1, 4))).value == 0.0


def test_spectral_radius_bounds():
    m = np.array([[1.0, 1.0], [1.0, 0.0]])
    rho, lo, hi = spectral_radius(m)
    assert lo <= rho <= hi
    assert rho == pytest.approx((1 + 5 ** 0.5) / 2, abs=1e-12)
    # periodic matrix: power iteration on M alone would oscillate
    rho, _, _ = spectral_radius(np.array([[0.0, 2.0], [2.0, 0.0]]))
    assert rho == pytest.approx(2.0, abs=1e-12)


def test_scc_ignores_acyclic_states():
    a = core.SafetyAutomaton(2, 1, 0, ({(0,): 1, (1,): 1}, {(0,): 1}))
    assert strongly_connected_components(a) == [(1,)]
    assert count_matrix(a).tolist() == [[0, 2], [0, 1]]
    assert box_dimension(a).value == 0.0


def test_golden_mean_shift():
    # no two consecutive 1s
    a = core.SafetyAutomaton(2, 1, 0, ({(0,): 0, (1,): 1}, {(0,): 0}))
    assert box_dimension(a).value == pytest.approx(math.log2((1 + 5 ** 0.5) / 2), abs=1e-12)
    assert not is_dimension_zero(a)


def test_dimension_zero_exact():
    one_digit = make_digit_set(3, 1, [(0,), (2,)])
    assert not is_dimension_zero(one_digit)
    at_most_one_1 = core.SafetyAutomaton(3, 1, 0, (
        {(0,): 0, (2,): 0, (1,): 1}, {(0,): 1, (2,): 1}))
    assert not is_dimension_zero(at_most_one_1)
    at_most_one_1_binary_tail = core.SafetyAutomaton(2, 1, 0, ({(0,): 0, (1,): 1}, {(0,): 1}))
    assert is_dimension_zero(at_most_one_1_binary_tail)


def test_measure_examples():
    assert measure(cantor()) < 1e-9
    assert measure(core.full(3, 2)) == 1.0
    assert measure(box(3, [(0, Fraction(2, 3))])) == pytest.approx(2 / 3, abs=1e-9)
    assert measure(core.empty(2, 1)) == 0.0
    assert measure(box(2, [(0, Fraction(1, 2)), (Fraction(1, 4), 1)])) == pytest.approx(3 / 8, abs=1e-9)


def test_interior_examples():
    assert not has_interior(cantor())
    assert is_nowhere_dense(carpet())
    word, depth = interior_witness(interval(3, Fraction(1, 5), Fraction(1, 2)))
    assert depth == len(word)
    # the witness cell must sit inside [1/5, 1/2]
    corner = oracles.word_to_cell(word, 3, 1)[0]
    assert Fraction(1, 5) <= Fraction(corner, 3 ** depth)
    assert Fraction(corner + 1, 3 ** depth) <= Fraction(1, 2)
    c = cantor()
    assert has_interior(affine_image(core.product(c, c), AffineSpec((1, -1), 1, 1)))


def test_halves_meeting_at_a_dyadic_point_cover_the_line():
    # the halves share only the point 1/2, which has two expansions
    left = interval(2, 0, Fraction(1, 2))
    right = interval(2, Fraction(1, 2), 1)
    assert core.canonical_equal(core.union(left, right), core.full(2, 1))


def test_probe_cantor_and_carpet():
    p = totally_disconnected_probe(cantor(), 3)
    assert p.disconnected and p.components == 8
    assert not totally_disconnected_probe(carpet(), 3).disconnected
    with pytest.raises(ValueError):
        totally_disconnected_probe(cantor(), 0)


def test_verdicts():
    assert avoids_compact_verdict(cantor()).tag == DEFINES_ALL
    assert avoids_compact_verdict(singleton(3, Fraction(1, 4))).tag == AVOIDS
    one_1 = core.SafetyAutomaton(3, 1, 0, ({(0,): 0, (1,): 1}, {(0,): 1}))
    v = avoids_compact_verdict(one_1)
    assert v.tag == AVOIDS
    assert "rational-linear structure" in str(v)
    with pytest.raises(VerdictRefused):
        avoids_compact_verdict(carpet())


# ------------------------------------------------------------ property tests

@given(seeds)
def test_rho_matches_eigenvalues(seed):
    a = rand(seed)
    assert box_dimension(a).rho == pytest.approx(oracles.spectral_radius_eig(a), abs=1e-9)


@given(seeds)
def test_rho_bounds_bracket(seed):
    d = box_dimension(rand(seed))
    lo, hi = d.rho_bounds
    assert lo - 1e-12 <= d.rho <= hi + 1e-12


@given(seeds)
def test_dimension_zero_matches_spectrum(seed):
    a = rand(seed)
    assert is_dimension_zero(a) == (oracles.spectral_radius_eig(a) < 1 + 1e-9)


@given(seeds)
def test_count_growth_bounded_by_rho(seed):
    a = rand(seed)
    d = box_dimension(a)
    # counts grow like rho^k up to polynomial factors
    c10 = core.count_prefixes(a, 10)
    assert c10 <= a.num_states * 11 ** a.num_states * d.rho ** 10 + 1e-6
    assert c10 >= d.rho ** 10 / (a.num_states * 11 ** a.num_states) - 1e-6


@given(seeds)
def test_product_multiplies_rho(seed):
    r = random.Random(seed)
    base = r.choice([2, 3])
    a, b = random_automaton(r, base, 1), random_automaton(r, base, r.choice([1, 2]))
    assert box_dimension(core.product(a, b)).rho == pytest.approx(
        box_dimension(a).rho * box_dimension(b).rho, abs=1e-9)


@given(seeds)
def test_projection_does_not_raise_dimension(seed):
    a = rand(seed, arity=2)
    assert box_dimension(core.project(a, [1 + seed % 2])).rho <= box_dimension(a).rho + 1e-10


@given(seeds)
def test_measure_matches_linear_solve(seed):
    a = rand(seed)
    assert measure(a) == pytest.approx(oracles.measure_linear_solve(a), abs=1e-9)


@settings(max_examples=30)
@given(seeds)
def test_measure_positive_iff_not_null_and_interior_implies_measure(seed):
    a = core.saturate(rand(seed))
    mu = measure(a)
    if has_interior(a):
        assert mu > 0
    if mu < 1e-12:
        assert is_nowhere_dense(a)


@given(seeds)
def test_measure_invariant_under_saturation(seed):
    a = rand(seed, arity=1)
    assert measure(core.saturate(a)) == pytest.approx(measure(a), abs=2e-9)


@given(seeds)
def test_full_dimension_iff_interior(seed):
    a = core.saturate(rand(seed))
    d = box_dimension(a)
    assert -1e-12 <= d.value <= a.arity + 1e-12
    full_dim = abs(d.value - a.arity) < 1e-9
    assert full_dim == has_interior(a)
    mu = measure(a)
    if mu > 1e-6:
        assert full_dim
    w = interior_witness(a)
    if w is not None:
        assert mu >= a.base ** (-a.arity * w[1]) - 1e-9
