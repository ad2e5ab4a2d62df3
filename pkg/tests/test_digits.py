from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from workbench import automaton as core
from workbench.digits import (
    ESDimensions, EventuallyPeriodic, Explicit, Tower, density_bounds, es_dimensions,
    es_truncate, tower_checkpoints, tower_sequence,
)
from workbench.dimension import box_dimension


def brute_count(s, m):
    return sum(1 for i in range(1, m + 1) if i in s)


def test_tower_sequence():
    assert tower_sequence(4) == [2, 4, 16, 65536]
    assert tower_sequence(5)[-1] == 2 ** 65536
    for bad in (0, 6):
        with pytest.raises(ValueError):
            tower_sequence(bad)


def test_tower_intervals_merge_overlap():
    assert Tower(4).intervals() == [(2, 8), (16, 32), (65536, 131072)]
    assert 8 in Tower(4) and 9 not in Tower(4) and 1 not in Tower(4)


def test_tower_count_matches_membership():
    t = Tower(3)
    for m in (1, 2, 3, 8, 15, 16, 20, 32, 40):
        assert t.count(m) == brute_count(t, m)


def test_tower_checkpoint_ratios_exact():
    low, high = tower_checkpoints(Tower(4))
    assert [r for _, r in low] == [Fraction(2, 3), Fraction(7, 15), Fraction(24, 65535)]
    assert [r for _, r in high] == [Fraction(3, 4), Fraction(7, 8), Fraction(3, 4),
                                    Fraction(65561, 131072)]
    assert all(x > y for x, y in zip([r for _, r in low], [r for _, r in low][1:]))
    assert low[-1][1] < Fraction(1, 1000)
    assert all(r >= Fraction(1, 2) for _, r in high)


def test_tower_five_levels_are_exact_big_integers():
    low, high = tower_checkpoints(Tower(5))
    m, r = low[-1]
    assert m == 2 ** 65536 - 1
    assert r < Fraction(1, 10 ** 19000)
    assert high[-1][1] > Fraction(1, 2)


def test_density_bounds_tower_and_periodic():
    b = density_bounds(Tower(4))
    assert b.lower == Fraction(24, 65535)
    assert b.upper == Fraction(65561, 131072)
    assert b.limits == (0, Fraction(1, 2))
    assert "lower estimate" in b.table()
    p = density_bounds(EventuallyPeriodic((1, 1, 1), (1, 0, 0)))
    assert p.lower == p.upper == Fraction(1, 3)


def test_explicit_descriptor(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("# evens\nbound 10\n2 4 6, 8\n10\n")
    s = Explicit.from_file(path)
    assert s.count(10) == 5 and 3 not in s
    b = density_bounds(s)
    assert b.lower == 0 and b.upper == Fraction(1, 2)
    assert es_dimensions(s) == ESDimensions(Fraction(0), Fraction(1, 2), False)
    with pytest.raises(ValueError):
        s.count(11)
    with pytest.raises(ValueError):
        Explicit({0, 3}, 5)


def test_es_dimensions():
    assert es_dimensions(Tower(4)) == ESDimensions(Fraction(0), Fraction(1, 2), True)
    d = es_dimensions(EventuallyPeriodic((), (1, 0)))
    assert (d.hausdorff, d.packing) == (Fraction(1, 2), Fraction(1, 2))
    assert d.for_power(3) == (Fraction(3, 2), Fraction(3, 2))


def test_es_truncate_boxes():
    a = es_truncate(Tower(4), 16)
    # free positions 2..8 and 16
    assert core.count_prefixes(a, 16) == 2 ** 8
    assert core.count_prefixes(a, 40) == 2 ** 8
    assert box_dimension(a).value == 0.0
    with pytest.raises(ValueError):
        es_truncate(Tower(2), 0)


def test_periodic_es_set_dimension():
    # digits free at odd positions: dimension 1/2
    s = EventuallyPeriodic((), (1, 0))
    a = es_truncate(s, 20)
    assert core.count_prefixes(a, 20) == 2 ** 10
    with pytest.raises(ValueError):
        EventuallyPeriodic((), ())


@given(st.lists(st.integers(0, 1), max_size=5), st.lists(st.integers(0, 1), min_size=1, max_size=5),
       st.integers(0, 60))
def test_periodic_count_matches_membership(pre, period, m):
    s = EventuallyPeriodic(tuple(pre), tuple(period))
    assert s.count(m) == brute_count(s, m)


@given(st.lists(st.integers(0, 1), max_size=4), st.lists(st.integers(0, 1), min_size=1, max_size=4),
       st.integers(1, 12))
def test_es_truncate_counts_free_positions(pre, period, depth):
    s = EventuallyPeriodic(tuple(pre), tuple(period))
    a = es_truncate(s, depth)
    for k in range(depth + 1):
        assert core.count_prefixes(a, k) == 2 ** brute_count(s, k)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=12), st.data())
def test_monotone_in_the_digit_set(period, data):
    bigger = tuple(max(b, data.draw(st.integers(0, 1))) for b in period)
    s, t = EventuallyPeriodic((), tuple(period)), EventuallyPeriodic((), bigger)
    assert density_bounds(s).upper <= density_bounds(t).upper
    depth = 12
    a, b = es_truncate(s, depth), es_truncate(t, depth)
    for k in range(depth + 1):
        assert core.count_prefixes(a, k) <= core.count_prefixes(b, k)
