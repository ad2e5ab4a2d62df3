"""Generators and closure maps: digit sets, singletons, order relations, boxes
and affine images with integer coefficients and b-power denominators."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

from .automaton import (
    NondetAutomaton, SafetyAutomaton, _EQ, _explore_nfa, alphabet, determinize,
    empty, full, intersect, product, project, saturate, trim, value_equal_moves,
)


def make_digit_set(base: int, arity: int, allowed: Iterable) -> SafetyAutomaton:
    """One-state automaton looping on the allowed digit tuples."""
    letters = set()
    for item in allowed:
        letter = (item,) if isinstance(item, int) else tuple(item)
        if len(letter) != arity:
            raise ValueError(f"digit tuple {letter} does not have arity {arity}")
        if any(not 0 <= d < base for d in letter):
            raise ValueError(f"digit tuple {letter} out of range for base {base}")
        letters.add(letter)
    if not letters:
        raise ValueError("allowed digit set is empty")
    return SafetyAutomaton(base, arity, 0, ({a: 0 for a in sorted(letters)},))


def cantor() -> SafetyAutomaton:
    return make_digit_set(3, 1, [0, 2])


def carpet() -> SafetyAutomaton:
    return make_digit_set(3, 2, [a for a in alphabet(3, 2) if a != (1, 1)])


def menger() -> SafetyAutomaton:
    return make_digit_set(3, 3, [a for a in alphabet(3, 3) if a.count(1) <= 1])


def _as_fraction(q) -> Fraction:
    if isinstance(q, float):
        raise TypeError("floating-point coordinates are not exact; pass a Fraction or int")
    return Fraction(q)


def expansions(base: int, r: Fraction):
    """Digit expansions of ``r`` in [0,1] as (preperiod, period) digit tuples.

    Returns one expansion, or two for b-adic rationals strictly inside (0,1).
    """
    r = _as_fraction(r)
    if not 0 <= r <= 1:
        raise ValueError(f"{r} is outside [0,1]")
    if r == 1:
        return [((), (base - 1,))]
    digits = []
    seen = {}
    num, den = r.numerator, r.denominator
    while num not in seen:
        seen[num] = len(digits)
        num *= base
        digits.append(num // den)
        num %= den
    start = seen[num]
    pre, period = tuple(digits[:start]), tuple(digits[start:])
    out = [(pre, period)]
    if period == (0,) and r != 0:
        # b-adic: the last nonzero digit also has a (d-1)(b-1)(b-1)... form
        last = max(i for i, d in enumerate(pre) if d)
        out.append((pre[:last] + (pre[last] - 1,), (base - 1,)))
    return out


def _lasso_nfa(base: int, lassos) -> NondetAutomaton:
    rows = []
    initials = []
    for pre, period in lassos:
        offset = len(rows)
        initials.append(offset)
        word = pre + period
        for i, d in enumerate(word):
            nxt = offset + i + 1 if i + 1 < len(word) else offset + len(pre)
            rows.append({(d,): frozenset([nxt])})
    return NondetAutomaton(base, 1, frozenset(initials), tuple(rows))


def singleton(base: int, q) -> SafetyAutomaton:
    """The point ``q`` (a rational or a sequence of rationals in [0,1])."""
    coords = [q] if not isinstance(q, (list, tuple)) else list(q)
    if not coords:
        raise ValueError("singleton needs at least one coordinate")
    result = None
    for r in coords:
        one = determinize(_lasso_nfa(base, expansions(base, _as_fraction(r))))
        result = one if result is None else product(result, one)
    return result


def _relation(base, n, i, j, transitions):
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"indices {i}, {j} must lie in 1..{n}")
    if i == j:
        raise ValueError("relation needs two distinct coordinates")
    states = sorted({s for s, _, _, _ in transitions})
    rows = [dict() for _ in states]
    for letter in alphabet(base, n):
        for s, di, dj, t in transitions:
            if letter[i - 1] == di and letter[j - 1] == dj:
                rows[s][letter] = t
    return trim(SafetyAutomaton(base, n, 0, tuple(rows)))


def relation_eq(base: int, n: int, i: int, j: int) -> SafetyAutomaton:
    """``{x in [0,1]^n : x_i = x_j}`` by value, not by digit string."""
    trans = []
    for d in range(base):
        for dj, s in value_equal_moves(base, _EQ, d):
            trans.append((_EQ, d, dj, s))
    for s in (1, 2):
        for d in range(base):
            for dj, s2 in value_equal_moves(base, s, d):
                trans.append((s, d, dj, s2))
    return _relation(base, n, i, j, trans)


def relation_le(base: int, n: int, i: int, j: int) -> SafetyAutomaton:
    """``{x : x_i <= x_j}``.

    Lexicographic order of expansions is monotone in value, so some pair of
    expansions is lexicographically ordered exactly when the values are.
    """
    trans = []
    for di in range(base):
        for dj in range(base):
            if di == dj:
                trans.append((0, di, dj, 0))
            elif di < dj:
                trans.append((0, di, dj, 1))
            trans.append((1, di, dj, 1))
    return saturate(_relation(base, n, i, j, trans))


def interval(base: int, lo, hi) -> SafetyAutomaton:
    """``[lo, hi]`` built from order relations against the endpoint singletons."""
    lo, hi = _as_fraction(lo), _as_fraction(hi)
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if lo == hi:
        return singleton(base, lo)
    frame = product(product(singleton(base, lo), full(base, 1)), singleton(base, hi))
    frame = intersect(frame, relation_le(base, 3, 1, 2))
    frame = intersect(frame, relation_le(base, 3, 2, 3))
    return saturate(project(frame, [2]))


def box(base: int, pairs: Sequence[Tuple]) -> SafetyAutomaton:
    """Product of closed intervals ``[l_i, u_i]``."""
    if not pairs:
        raise ValueError("box needs at least one interval")
    result = None
    for lo, hi in pairs:
        one = interval(base, lo, hi)
        result = one if result is None else product(result, one)
    return result


@dataclass(frozen=True)
class AffineSpec:
    """The map ``x -> (sum(c_i x_i) + offset) / b**scale_exp``."""
    coeffs: Tuple[int, ...]
    offset: int = 0
    scale_exp: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if self.scale_exp < 0:
            raise ValueError("scale_exp must be non-negative")

    def apply(self, base: int, x: Sequence) -> Fraction:
        s = sum(Fraction(c) * Fraction(v) for c, v in zip(self.coeffs, x))
        return (s + self.offset) / Fraction(base) ** self.scale_exp


def affine_image(a: SafetyAutomaton, spec: AffineSpec) -> SafetyAutomaton:
    """``{(c.x + p) / b^e : x in A} ∩ [0,1]`` as a saturated automaton.

    Reads input digits and one output digit ``y_m`` per step, tracking the
    integer residual ``R_m = b R_{m-1} + c.x_m - b^e y_m`` with ``R_0 = p``.
    The equation holds for the full streams exactly when every residual stays
    within ``[-sum(c>0), b^e - sum(c<0)]``, so out-of-range residuals are dead.
    """
    if len(spec.coeffs) != a.arity:
        raise ValueError(f"{len(spec.coeffs)} coefficients for arity {a.arity}")
    base = a.base
    if a.is_empty:
        return empty(base, 1)
    scale = base ** spec.scale_exp
    lo = -sum(c for c in spec.coeffs if c > 0)
    hi = scale - sum(c for c in spec.coeffs if c < 0)
    if not lo <= spec.offset <= hi:
        return empty(base, 1)
    weights = {}
    for row in a.delta:
        for letter in row:
            if letter not in weights:
                weights[letter] = sum(c * d for c, d in zip(spec.coeffs, letter))

    def step(key):
        q, r = key
        for letter, q2 in a.delta[q].items():
            partial = base * r + weights[letter]
            # smallest output digit keeping the residual below ``hi``
            y0 = max(0, -((hi - partial) // scale))
            for y in range(y0, base):
                r2 = partial - scale * y
                if r2 < lo:
                    break
                yield (y,), (q2, r2)

    nfa = _explore_nfa(base, 1, [(a.initial, spec.offset)], step)
    return saturate(determinize(nfa))
