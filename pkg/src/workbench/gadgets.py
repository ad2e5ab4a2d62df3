"""Order-type-omega enumerations and the interval-selection gadgets built on them.

The right endpoints ``E`` of the complementary intervals of the Cantor set are
ordered by decreasing gap length, then by position.  Finite powers and images
inherit omega-orders; the differences ``E - E`` form a dense set in [-1, 1]
whose enumeration drives the functions :func:`h1`, :func:`h2` and :func:`g`.
All values are exact: rationals for ``D`` and ``p + q*sqrt(2)`` for ``λD``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence, Tuple

from .errors import InsufficientPrefix
from .quadratic import SQRT2, ExactQuadratic, rational_between


@dataclass(frozen=True)
class OrderedEnumeration:
    """The first ``len(elements)`` elements of an omega-order, in order."""
    elements: Tuple
    order_name: str
    keys: Tuple = ()
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for i, x in enumerate(self.elements):
            index.setdefault(x, i)
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def __contains__(self, x):
        return x in self._index

    def index(self, x) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise IndexError(f"{x} is not in the enumerated prefix") from None

    def precedes(self, x, y) -> bool:
        return self.index(x) < self.index(y)

    def upto(self, d) -> Tuple:
        """``D_{⪯d}``: every element not after ``d``."""
        return self.elements[: self.index(d) + 1]


def iter_cantor_endpoints() -> Iterator[Tuple[Fraction, object]]:
    """Yield ``(endpoint, gap length)`` in the gap-then-position order."""
    yield Fraction(0), math.inf
    for g in itertools.count(1):
        gap = Fraction(1, 3 ** g)
        for word in itertools.product((0, 2), repeat=g - 1):
            left = sum(Fraction(d, 3 ** (i + 1)) for i, d in enumerate(word))
            yield left + 2 * gap, gap


def cantor_endpoints(n: int) -> OrderedEnumeration:
    if n < 1:
        raise ValueError("need at least one element")
    items = list(itertools.islice(iter_cantor_endpoints(), n))
    return OrderedEnumeration(tuple(e for e, _ in items), "cantor-endpoint",
                              tuple(d for _, d in items))


class _Lazy:
    """Random access into a lazily consumed iterator."""

    def __init__(self, it):
        self._it = iter(it)
        self._seen = []

    def __getitem__(self, i):
        while len(self._seen) <= i:
            self._seen.append(next(self._it))
        return self._seen[i]


def product_key(index_tuple: Sequence[int]):
    """Sort key of the product order on index tuples: max first, then lex."""
    return (max(index_tuple), tuple(index_tuple))


def order_product(base: OrderedEnumeration, n: int) -> Callable:
    """Strict comparison on ``D^n``: compare ``≺``-maxima, then lexicographically."""

    def less(x, y):
        kx = product_key([base.index(v) for v in x])
        ky = product_key([base.index(v) for v in y])
        if len(x) != n or len(y) != n:
            raise ValueError(f"tuples must have length {n}")
        return kx < ky

    return less


def iter_product(source, n: int) -> Iterator[Tuple]:
    """Tuples of ``D^n`` in the product order; ``source`` yields ``D`` in order."""
    lazy = _Lazy(source)
    for m in itertools.count():
        for idx in itertools.product(range(m + 1), repeat=n):
            if max(idx) == m:
                yield tuple(lazy[i] for i in idx)


def order_image(base: OrderedEnumeration, f: Callable) -> Callable:
    """Comparison on ``f(D)`` by index of the first preimage."""
    first = {}
    for d in base.elements:
        first.setdefault(f(d), len(first))

    def less(x, y):
        if x not in first or y not in first:
            raise IndexError("value outside the enumerated image")
        return first[x] < first[y]

    return less


def iter_image(source, f: Callable) -> Iterator:
    seen = set()
    for d in source:
        y = f(d)
        if y not in seen:
            seen.add(y)
            yield y


def image_enumeration(source, f: Callable, n: int, name="image-f") -> OrderedEnumeration:
    return OrderedEnumeration(tuple(itertools.islice(iter_image(source, f), n)), name)


def dense_difference_set(n: int) -> OrderedEnumeration:
    """First ``n`` elements of ``E - E`` in the image-of-product order."""
    if n < 1:
        raise ValueError("need at least one element")
    pairs = iter_product((e for e, _ in iter_cantor_endpoints()), 2)
    return image_enumeration(pairs, lambda p: p[0] - p[1], n)


# Gadgets over a dense omega-ordered D ⊆ Q and its scaled copy λD.

def _as_exact(x) -> ExactQuadratic:
    if isinstance(x, float):
        raise TypeError("gadget inputs must be exact")
    return ExactQuadratic.coerce(x)


def h1(u, d, e, prefix: OrderedEnumeration, lam: ExactQuadratic = SQRT2) -> ExactQuadratic:
    """First ``λy`` (in the transported order) inside ``(e, e+u)`` with no
    element of ``D_{⪯d}`` in ``(e, λy]``."""
    u = _as_exact(u)
    if u.sign() <= 0:
        raise ValueError("u must be positive")
    if d not in prefix:
        raise InsufficientPrefix(f"{d} is not in the enumerated prefix")
    e = _as_exact(e)
    above = [x for x in prefix.upto(d) if _as_exact(x) > e]
    ceiling = _as_exact(min(above)) if above else None
    top = e + u
    for y in prefix.elements:
        x = lam * y
        if e < x < top and (ceiling is None or x < ceiling):
            return x
    raise InsufficientPrefix(
        f"no element of the scaled prefix (length {len(prefix)}) lies in the window")


def h2(u, d, e, prefix: OrderedEnumeration, lam: ExactQuadratic = SQRT2) -> ExactQuadratic:
    return h1(u, d, e, prefix, lam) - e


def g(c, a, b, d, prefix: OrderedEnumeration, lam: ExactQuadratic = SQRT2):
    """Element of ``D_{⪯d}`` whose ``h2`` value is nearest to ``c - a``.

    Ties go to the earliest element in the order; ``b <= a`` returns the
    first enumerated element.
    """
    a, b, c = _as_exact(a), _as_exact(b), _as_exact(c)
    if b <= a:
        return prefix.elements[0]
    u = b - a
    target = c - a
    best, best_dist = None, None
    for f in prefix.upto(d):
        dist = abs(target - h2(u, d, f, prefix, lam))
        if best_dist is None or dist < best_dist:
            best, best_dist = f, dist
    return best


@dataclass(frozen=True)
class ConditionReport:
    ok: bool
    interval: Optional[Tuple[Fraction, Fraction]] = None
    reason: str = ""

    def __str__(self):
        if self.ok:
            lo, hi = self.interval
            return f"interval ({lo}, {hi}) length {hi - lo}"
        return f"failure: {self.reason}"


def condition_ii_probe(a, b, d, e, prefix: OrderedEnumeration,
                       lam: ExactQuadratic = SQRT2) -> ConditionReport:
    """A rational subinterval of ``(a, b)`` on which ``g(., a, b, d) == e``.

    The level set is the cell of ``a + h2(b-a, d, e)`` in the nearest-point
    partition of the line by the finitely many ``a + h2`` values.
    """
    if not prefix.precedes(e, d) and e != d:
        raise ValueError(f"precondition violated: {e} is not ⪯ {d}")
    a, b = Fraction(a), Fraction(b)
    if not a < b:
        return ConditionReport(False, reason="empty window: a >= b")
    u = b - a
    try:
        values = {f: h2(u, d, f, prefix, lam) for f in prefix.upto(d)}
    except InsufficientPrefix as exc:
        return ConditionReport(False, reason=str(exc))
    if len(set(values.values())) != len(values):
        return ConditionReport(False, reason="h2 not injective on the window")
    mine = values[e]
    others = [v for f, v in values.items() if f != e]
    below = [v for v in others if v < mine]
    above = [v for v in others if v > mine]
    left = a + (max(below) + mine) / 2 if below else ExactQuadratic(a)
    right = a + (min(above) + mine) / 2 if above else ExactQuadratic(b)
    left = max(left, ExactQuadratic(a))
    right = min(right, ExactQuadratic(b))
    centre = a + mine
    lo = rational_between(left, centre)
    hi = rational_between(centre, right)
    for c in (lo, hi, (lo + hi) / 2):
        if g(c, a, b, d, prefix, lam) != e:
            return ConditionReport(False, reason=f"g({c}) differs from e")
    return ConditionReport(True, (lo, hi))
