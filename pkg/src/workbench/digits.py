"""Digit-restriction sets ``E_S``: reals whose base-b digits vanish off ``S``.

Densities are computed with exact rationals.  The tower set (intervals
``[a_n, 2 a_n]`` with ``a_0 = 2``, ``a_{n+1} = 2**a_n``) has lower density 0
and upper density 1/2; its checkpoints involve integers far beyond machine
words, which Python handles natively.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import FrozenSet, List, Tuple

from .automaton import SafetyAutomaton, alphabet

MAX_TOWER_LEVELS = 5


def tower_sequence(levels: int) -> List[int]:
    """``[a_0, ..., a_{levels-1}]``; ``a_5`` would need ``2**65536`` bits."""
    if not 1 <= levels <= MAX_TOWER_LEVELS:
        raise ValueError(f"levels must be in 1..{MAX_TOWER_LEVELS}")
    seq = [2]
    while len(seq) < levels:
        seq.append(1 << seq[-1])
    return seq


@dataclass(frozen=True)
class EventuallyPeriodic:
    preperiod: Tuple[int, ...]
    period: Tuple[int, ...]
    base: int = 2

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")
        if any(b not in (0, 1) for b in self.preperiod + self.period):
            raise ValueError("membership bits must be 0 or 1")

    def __contains__(self, m: int) -> bool:
        if m < 1:
            return False
        if m <= len(self.preperiod):
            return bool(self.preperiod[m - 1])
        return bool(self.period[(m - len(self.preperiod) - 1) % len(self.period)])

    def count(self, m: int) -> int:
        """``|S ∩ [1, m]|``."""
        pre = len(self.preperiod)
        if m <= pre:
            return sum(self.preperiod[:max(m, 0)])
        full, rest = divmod(m - pre, len(self.period))
        return sum(self.preperiod) + full * sum(self.period) + sum(self.period[:rest])


@dataclass(frozen=True)
class Tower:
    levels: int
    base: int = 2

    def __post_init__(self):
        tower_sequence(self.levels)

    def intervals(self):
        """Disjoint maximal runs of ``S`` as ``(lo, hi)`` pairs, ascending."""
        runs = []
        for a in tower_sequence(self.levels):
            lo, hi = a, 2 * a
            if runs and lo <= runs[-1][1] + 1:
                runs[-1] = (runs[-1][0], max(hi, runs[-1][1]))
            else:
                runs.append((lo, hi))
        return runs

    def __contains__(self, m: int) -> bool:
        return any(lo <= m <= hi for lo, hi in self.intervals())

    def count(self, m: int) -> int:
        return sum(max(0, min(hi, m) - lo + 1) for lo, hi in self.intervals())


@dataclass(frozen=True)
class Explicit:
    members: FrozenSet[int]
    bound: int
    base: int = 2

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if any(not 1 <= m <= self.bound for m in self.members):
            raise ValueError(f"members must lie in 1..{self.bound}")

    @classmethod
    def from_file(cls, path, base: int = 2) -> "Explicit":
        """Whitespace-separated positive integers; an optional ``bound M`` line."""
        members, bound = set(), None
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("bound"):
                bound = int(line.split()[1])
                continue
            members.update(int(tok) for tok in line.replace(",", " ").split())
        if bound is None:
            bound = max(members, default=1)
        return cls(frozenset(members), bound, base)

    def _check(self, m):
        if m > self.bound:
            raise ValueError(f"position {m} beyond explicit bound {self.bound}")

    def __contains__(self, m: int) -> bool:
        self._check(m)
        return m in self.members

    def count(self, m: int) -> int:
        self._check(m)
        return sum(1 for x in self.members if x <= m)


DensityDescriptor = EventuallyPeriodic | Tower | Explicit


@dataclass(frozen=True)
class DensityBounds:
    lower: Fraction
    upper: Fraction
    checkpoints: Tuple[Tuple[int, Fraction], ...]
    limits: Tuple[Fraction, Fraction] | None = None

    def table(self) -> str:
        lines = [f"{'m':>24}  {'ratio':>14}  exact"]
        for m, r in self.checkpoints:
            ms = str(m) if m.bit_length() < 64 else f"~2^{m.bit_length() - 1}"
            rs = str(r) if len(str(r)) < 40 else f"<{r.numerator}/{r.denominator.bit_length()}-bit>"
            lines.append(f"{ms:>24}  {float(r):>14.6g}  {rs}")
        lines.append(f"lower estimate {self.lower}  upper estimate {self.upper}")
        if self.limits:
            lines.append(f"limits: lower density {self.limits[0]}, upper density {self.limits[1]}")
        return "\n".join(lines)


def tower_checkpoints(s: Tower):
    """Exact ratios at ``m = a_n - 1`` (n >= 1) and ``m = 2 a_n``."""
    low, high = [], []
    for n, a in enumerate(tower_sequence(s.levels)):
        if n >= 1:
            low.append((a - 1, Fraction(s.count(a - 1), a - 1)))
        high.append((2 * a, Fraction(s.count(2 * a), 2 * a)))
    return low, high


def density_bounds(s) -> DensityBounds:
    if isinstance(s, EventuallyPeriodic):
        d = Fraction(sum(s.period), len(s.period))
        m = len(s.preperiod) + len(s.period)
        return DensityBounds(d, d, ((m, Fraction(s.count(m), m)),), (d, d))
    if isinstance(s, Tower):
        low, high = tower_checkpoints(s)
        points = tuple(sorted(low + high))
        lower = min(r for _, r in low) if low else min(r for _, r in high)
        upper = high[-1][1]
        return DensityBounds(lower, upper, points, (Fraction(0), Fraction(1, 2)))
    if isinstance(s, Explicit):
        ratios, c = [], 0
        for m in range(1, s.bound + 1):
            c += m in s.members
            ratios.append((m, Fraction(c, m)))
        values = [r for _, r in ratios]
        return DensityBounds(min(values), max(values), tuple(ratios))
    raise TypeError(f"unknown descriptor {s!r}")


@dataclass(frozen=True)
class ESDimensions:
    """Lower and upper density; multiply by ``k`` for ``E_S^k``."""
    hausdorff: Fraction
    packing: Fraction
    exact: bool

    def for_power(self, k: int):
        return self.hausdorff * k, self.packing * k


def es_dimensions(s) -> ESDimensions:
    if isinstance(s, EventuallyPeriodic):
        d = Fraction(sum(s.period), len(s.period))
        return ESDimensions(d, d, True)
    if isinstance(s, Tower):
        return ESDimensions(Fraction(0), Fraction(1, 2), True)
    b = density_bounds(s)
    return ESDimensions(b.lower, b.upper, False)


def es_truncate(s, depth: int) -> SafetyAutomaton:
    """Positions ``1..depth`` follow ``S``; every later digit is 0.

    The result is a subset of ``E_S`` with the same depth-``depth`` boxes.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if isinstance(s, Explicit) and depth > s.bound:
        raise ValueError(f"depth {depth} exceeds explicit bound {s.bound}")
    b = s.base
    zero = (0,)
    every = {a: None for a in alphabet(b, 1)}
    rows = []
    for m in range(1, depth + 1):
        letters = every if m in s else {zero: None}
        rows.append({a: m for a in letters})
    rows.append({zero: depth})
    return SafetyAutomaton(b, 1, 0, tuple(rows))
