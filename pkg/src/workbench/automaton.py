"""Deterministic safety automata over tuple-digit alphabets.

A :class:`SafetyAutomaton` with base ``b`` and arity ``n`` reads one digit per
coordinate per step.  A point ``x`` of ``[0,1]^n`` belongs to the denoted set
when some synchronous base-``b`` expansion of ``x`` labels an infinite run from
the initial state.  Every state of a trim automaton has a continuation, so the
denoted set is the intersection of the closed depth-``k`` boxes of its prefixes
and is therefore compact.

Because b-adic rationals have two expansions, two automata may denote the same
set with different languages.  :func:`saturate` closes a language under value
equality, and :func:`canonical_equal` compares minimal saturated forms.
"""
from __future__ import annotations

import itertools
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Sequence, Tuple

from .errors import FormatError, MismatchError, ResourceLimitError

Letter = Tuple[int, ...]

DEFAULT_STATE_CAP = 10**6
_state_cap = DEFAULT_STATE_CAP


def get_state_cap() -> int:
    return _state_cap


def set_state_cap(cap: int) -> None:
    global _state_cap
    if cap < 1:
        raise ValueError("state cap must be positive")
    _state_cap = cap


@contextmanager
def state_cap(cap: int):
    """Temporarily change the subset-construction state cap."""
    old = get_state_cap()
    set_state_cap(cap)
    try:
        yield
    finally:
        set_state_cap(old)


@lru_cache(maxsize=None)
def alphabet(base: int, arity: int) -> Tuple[Letter, ...]:
    """All digit tuples in lexicographic order."""
    return tuple(itertools.product(range(base), repeat=arity))


@dataclass(frozen=True)
class SafetyAutomaton:
    base: int
    arity: int
    initial: int
    delta: Tuple[Dict[Letter, int], ...]

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be at least 2")
        if self.arity < 1:
            raise ValueError("arity must be at least 1")
        n = len(self.delta)
        if n and not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        for q, row in enumerate(self.delta):
            for letter, target in row.items():
                if len(letter) != self.arity or any(not 0 <= d < self.base for d in letter):
                    raise ValueError(f"bad letter {letter} at state {q}")
                if not 0 <= target < n:
                    raise ValueError(f"bad target {target} at state {q}")

    @property
    def num_states(self) -> int:
        return len(self.delta)

    @property
    def is_empty(self) -> bool:
        return not self.delta

    def transitions(self):
        """Yield ``(state, letter, target)`` sorted by state then letter."""
        for q, row in enumerate(self.delta):
            for letter in sorted(row):
                yield q, letter, row[letter]

    def run(self, word: Iterable[Letter]):
        """State reached after reading ``word``, or None if the run dies."""
        if self.is_empty:
            return None
        q = self.initial
        for letter in word:
            q = self.delta[q].get(tuple(letter))
            if q is None:
                return None
        return q

    def __repr__(self):
        return (f"SafetyAutomaton(base={self.base}, arity={self.arity}, "
                f"states={self.num_states})")


@dataclass(frozen=True)
class NondetAutomaton:
    base: int
    arity: int
    initials: FrozenSet[int]
    delta: Tuple[Dict[Letter, FrozenSet[int]], ...] = field(repr=False)

    @property
    def num_states(self) -> int:
        return len(self.delta)


def empty(base: int, arity: int) -> SafetyAutomaton:
    return SafetyAutomaton(base, arity, 0, ())


def full(base: int, arity: int) -> SafetyAutomaton:
    """The whole cube ``[0,1]^arity``."""
    return SafetyAutomaton(base, arity, 0, ({a: 0 for a in alphabet(base, arity)},))


def _check_same(a: SafetyAutomaton, b: SafetyAutomaton, arity=True):
    if a.base != b.base:
        raise MismatchError(f"base mismatch: {a.base} vs {b.base}")
    if arity and a.arity != b.arity:
        raise MismatchError(f"arity mismatch: {a.arity} vs {b.arity}")


def _greatest_live(succ: Sequence[Iterable[int]]) -> list:
    """Greatest set of nodes each having a successor inside the set."""
    n = len(succ)
    preds = [[] for _ in range(n)]
    outdeg = [0] * n
    for q, targets in enumerate(succ):
        for t in targets:
            preds[t].append(q)
            outdeg[q] += 1
    live = [True] * n
    stack = [q for q in range(n) if outdeg[q] == 0]
    for q in stack:
        live[q] = False
    while stack:
        t = stack.pop()
        for q in preds[t]:
            if live[q]:
                outdeg[q] -= 1
                if outdeg[q] == 0:
                    live[q] = False
                    stack.append(q)
    return live


def _bfs_relabel(base, arity, initial, delta_of, keep) -> SafetyAutomaton:
    """Renumber states reachable from ``initial`` through ``keep`` in BFS order.

    ``delta_of(q)`` returns a letter->target dict; targets failing ``keep`` are
    dropped.  BFS with sorted letters makes the numbering canonical.
    """
    if not keep(initial):
        return empty(base, arity)
    index = {initial: 0}
    order = [initial]
    rows = []
    i = 0
    while i < len(order):
        q = order[i]
        i += 1
        row = {}
        src = delta_of(q)
        for letter in sorted(src):
            t = src[letter]
            if not keep(t):
                continue
            if t not in index:
                index[t] = len(order)
                order.append(t)
            row[letter] = index[t]
        rows.append(row)
    return SafetyAutomaton(base, arity, 0, tuple(rows))


def trim(a: SafetyAutomaton) -> SafetyAutomaton:
    """Drop states without an infinite continuation, then unreachable ones."""
    if a.is_empty:
        return a
    live = _greatest_live([row.values() for row in a.delta])
    return _bfs_relabel(a.base, a.arity, a.initial, lambda q: a.delta[q], lambda q: live[q])


def determinize(nfa: NondetAutomaton, cap: int | None = None) -> SafetyAutomaton:
    """Subset construction restricted to states with an infinite run.

    After pruning, every nonempty subset has a successor, so a word is read to
    infinity by the subset automaton exactly when the nondeterministic one has
    an infinite run on it (finitely branching run tree).
    """
    cap = get_state_cap() if cap is None else cap
    live = _greatest_live([
        [t for ts in row.values() for t in ts] for row in nfa.delta
    ])
    start = frozenset(q for q in nfa.initials if live[q])
    if not start:
        return empty(nfa.base, nfa.arity)
    index = {start: 0}
    order = [start]
    rows = []
    i = 0
    while i < len(order):
        subset = order[i]
        i += 1
        moves: Dict[Letter, set] = {}
        for q in subset:
            for letter, targets in nfa.delta[q].items():
                bucket = moves.get(letter)
                if bucket is None:
                    bucket = moves[letter] = set()
                bucket.update(t for t in targets if live[t])
        row = {}
        for letter in sorted(moves):
            targets = moves[letter]
            if not targets:
                continue
            key = frozenset(targets)
            j = index.get(key)
            if j is None:
                if len(order) >= cap:
                    raise ResourceLimitError(
                        f"subset construction exceeded {cap} states")
                j = index[key] = len(order)
                order.append(key)
            row[letter] = j
        rows.append(row)
    return trim(SafetyAutomaton(nfa.base, nfa.arity, 0, tuple(rows)))


def _explore_nfa(base, arity, initials, step, cap=None) -> NondetAutomaton:
    """Build the reachable part of an NFA whose states are hashable keys.

    ``step(key)`` yields ``(letter, key')`` pairs.
    """
    cap = get_state_cap() if cap is None else cap
    index = {}
    order = []
    for key in initials:
        if key not in index:
            index[key] = len(order)
            order.append(key)
    init = frozenset(index[k] for k in initials)
    rows = []
    i = 0
    while i < len(order):
        key = order[i]
        i += 1
        row: Dict[Letter, set] = {}
        for letter, nxt in step(key):
            j = index.get(nxt)
            if j is None:
                if len(order) >= cap:
                    raise ResourceLimitError(f"construction exceeded {cap} states")
                j = index[nxt] = len(order)
                order.append(nxt)
            row.setdefault(letter, set()).add(j)
        rows.append({a: frozenset(ts) for a, ts in row.items()})
    return NondetAutomaton(base, arity, init, tuple(rows))


def _pair_automaton(a, b, arity, initial, step) -> SafetyAutomaton:
    """Deterministic exploration of product-like states, then trim."""
    cap = get_state_cap()
    index = {initial: 0}
    order = [initial]
    rows = []
    i = 0
    while i < len(order):
        key = order[i]
        i += 1
        row = {}
        for letter, nxt in step(key):
            j = index.get(nxt)
            if j is None:
                if len(order) >= cap:
                    raise ResourceLimitError(f"product exceeded {cap} states")
                j = index[nxt] = len(order)
                order.append(nxt)
            row[letter] = j
        rows.append(row)
    return trim(SafetyAutomaton(a.base, arity, 0, tuple(rows)))


def union(a: SafetyAutomaton, b: SafetyAutomaton) -> SafetyAutomaton:
    _check_same(a, b)
    if a.is_empty:
        return trim(b)
    if b.is_empty:
        return trim(a)

    def step(key):
        p, q = key
        rp = a.delta[p] if p is not None else {}
        rq = b.delta[q] if q is not None else {}
        for letter in rp.keys() | rq.keys():
            yield letter, (rp.get(letter), rq.get(letter))

    return _pair_automaton(a, b, a.arity, (a.initial, b.initial), step)


def intersect(a: SafetyAutomaton, b: SafetyAutomaton) -> SafetyAutomaton:
    """Set intersection, keeping the expansions stored by ``a``.

    ``b`` is saturated first: two sets can share a point while storing
    different expansions of it.
    """
    _check_same(a, b)
    if a.is_empty or b.is_empty:
        return empty(a.base, a.arity)
    return _language_intersect(trim(a), saturate(b))


def _language_intersect(a, b):
    if a.is_empty or b.is_empty:
        return empty(a.base, a.arity)

    def step(key):
        p, q = key
        rp, rq = a.delta[p], b.delta[q]
        small, other = (rp, rq) if len(rp) <= len(rq) else (rq, rp)
        for letter in small:
            if letter in other:
                yield letter, (rp[letter], rq[letter])

    return _pair_automaton(a, b, a.arity, (a.initial, b.initial), step)


def product(a: SafetyAutomaton, b: SafetyAutomaton) -> SafetyAutomaton:
    """Cartesian product; the result has arity ``a.arity + b.arity``."""
    _check_same(a, b, arity=False)
    arity = a.arity + b.arity
    if a.is_empty or b.is_empty:
        return empty(a.base, arity)

    def step(key):
        p, q = key
        for u, p2 in a.delta[p].items():
            for v, q2 in b.delta[q].items():
                yield u + v, (p2, q2)

    return _pair_automaton(a, b, arity, (a.initial, b.initial), step)


def project(a: SafetyAutomaton, coords: Sequence[int]) -> SafetyAutomaton:
    """Image under the coordinate map ``x -> (x[c1], x[c2], ...)`` (1-based)."""
    coords = tuple(coords)
    if not coords:
        raise ValueError("projection needs at least one coordinate")
    if len(set(coords)) != len(coords):
        raise ValueError(f"repeated coordinate in {coords}")
    for c in coords:
        if not 1 <= c <= a.arity:
            raise ValueError(f"coordinate {c} outside 1..{a.arity}")
    if a.is_empty:
        return empty(a.base, len(coords))
    idx = [c - 1 for c in coords]
    rows = []
    for row in a.delta:
        new: Dict[Letter, set] = {}
        for letter, t in row.items():
            new.setdefault(tuple(letter[i] for i in idx), set()).add(t)
        rows.append({k: frozenset(v) for k, v in new.items()})
    nfa = NondetAutomaton(a.base, len(coords), frozenset([a.initial]), tuple(rows))
    return determinize(nfa)


# Per-track states of the value-equality relation between a source stream and
# an output stream: identical so far, source smaller (source continues with
# b-1 forever, output with 0), source larger (the reverse).
_EQ, _SRC_LOW, _SRC_HIGH = 0, 1, 2


def value_equal_moves(base: int, track_state: int, digit: int):
    """Output digits and next track states allowed after a source ``digit``."""
    top = base - 1
    if track_state == _EQ:
        yield digit, _EQ
        if digit + 1 <= top:
            yield digit + 1, _SRC_LOW
        if digit >= 1:
            yield digit - 1, _SRC_HIGH
    elif track_state == _SRC_LOW:
        if digit == top:
            yield 0, _SRC_LOW
    elif digit == 0:
        yield top, _SRC_HIGH


def saturate(a: SafetyAutomaton) -> SafetyAutomaton:
    """Close the language under value equality of digit streams."""
    a = minimize(a)
    if a.is_empty:
        return a
    base, n = a.base, a.arity
    move_cache = {}

    def moves(track_state, digit):
        key = (track_state, digit)
        got = move_cache.get(key)
        if got is None:
            got = move_cache[key] = tuple(value_equal_moves(base, track_state, digit))
        return got

    def step(key):
        q, tracks = key
        for letter, q2 in a.delta[q].items():
            options = [moves(t, d) for t, d in zip(tracks, letter)]
            for combo in itertools.product(*options):
                yield (tuple(o for o, _ in combo), (q2, tuple(s for _, s in combo)))

    nfa = _explore_nfa(base, n, [(a.initial, (_EQ,) * n)], step)
    return minimize(determinize(nfa))


def minimize(a: SafetyAutomaton) -> SafetyAutomaton:
    """Moore partition refinement; initial blocks split by defined letters."""
    a = trim(a)
    if a.is_empty:
        return a
    n = a.num_states
    letters = [tuple(sorted(row)) for row in a.delta]
    ids: Dict[tuple, int] = {}
    block = [ids.setdefault(letters[q], len(ids)) for q in range(n)]
    count = len(ids)
    while True:
        ids = {}
        new = [
            ids.setdefault((block[q],) + tuple(block[a.delta[q][x]] for x in letters[q]), len(ids))
            for q in range(n)
        ]
        if len(ids) == count:
            break
        block, count = new, len(ids)
    rep = {}
    for q in range(n):
        rep.setdefault(block[q], q)
    quotient = {b: {x: block[t] for x, t in a.delta[q].items()} for b, q in rep.items()}
    return _bfs_relabel(a.base, a.arity, block[a.initial], quotient.__getitem__, lambda b: True)


def canonical(a: SafetyAutomaton) -> SafetyAutomaton:
    """Minimal saturated automaton with canonical state numbering."""
    return minimize(saturate(a))


def canonical_equal(a: SafetyAutomaton, b: SafetyAutomaton) -> bool:
    """Whether ``a`` and ``b`` denote the same point set."""
    _check_same(a, b)
    return canonical(a) == canonical(b)


def is_empty(a: SafetyAutomaton) -> bool:
    return trim(a).is_empty


def count_prefixes(a: SafetyAutomaton, k: int) -> int:
    """Number of length-``k`` letter strings labelling runs of the trim automaton."""
    a = trim(a)
    if a.is_empty:
        return 0
    counts = [0] * a.num_states
    counts[a.initial] = 1
    for _ in range(k):
        nxt = [0] * a.num_states
        for q, c in enumerate(counts):
            if c:
                for t in a.delta[q].values():
                    nxt[t] += c
        counts = nxt
    return sum(counts)


def prefixes(a: SafetyAutomaton, k: int) -> set:
    """All length-``k`` prefixes as tuples of letters (exponential; small k only)."""
    a = trim(a)
    if a.is_empty:
        return set()
    frontier = {((), a.initial)}
    for _ in range(k):
        frontier = {(w + (x,), t) for w, q in frontier for x, t in a.delta[q].items()}
    return {w for w, _ in frontier}


def boxes(a: SafetyAutomaton, k: int) -> set:
    """Integer corner coordinates of the depth-``k`` boxes of the prefixes."""
    out = set()
    for w in prefixes(a, k):
        corner = [0] * a.arity
        for letter in w:
            corner = [c * a.base + d for c, d in zip(corner, letter)]
        out.add(tuple(corner))
    return out


def dumps(a: SafetyAutomaton) -> str:
    """Line-oriented text form with sorted transitions."""
    lines = [f"sda {a.base} {a.arity} {a.num_states} {a.initial}"]
    for q, letter, t in a.transitions():
        lines.append("t " + " ".join(str(v) for v in (q, *letter, t)))
    return "\n".join(lines) + "\n"


def loads(text: str) -> SafetyAutomaton:
    header = None
    rows = None
    base = arity = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            nums = [int(p) for p in parts[1:]]
        except ValueError:
            raise FormatError(f"non-integer field in {raw!r}", lineno) from None
        if parts[0] == "sda":
            if header is not None:
                raise FormatError("duplicate header", lineno)
            if len(nums) != 4:
                raise FormatError("header needs base arity num_states initial", lineno)
            base, arity, n, initial = nums
            if base < 2 or arity < 1 or n < 0:
                raise FormatError("invalid header values", lineno)
            if n and not 0 <= initial < n:
                raise FormatError(f"initial state {initial} out of range", lineno)
            header = (base, arity, n, initial)
            rows = [dict() for _ in range(n)]
        elif parts[0] == "t":
            if header is None:
                raise FormatError("transition before header", lineno)
            if len(nums) != arity + 2:
                raise FormatError(f"transition needs {arity + 2} fields", lineno)
            q, *digits, t = nums
            n = header[2]
            if not 0 <= q < n or not 0 <= t < n:
                raise FormatError("state index out of range", lineno)
            if any(not 0 <= d < base for d in digits):
                raise FormatError(f"digit out of range for base {base}", lineno)
            letter = tuple(digits)
            if rows[q].get(letter, t) != t:
                raise FormatError("nondeterministic transition", lineno)
            rows[q][letter] = t
        else:
            raise FormatError(f"unknown record {parts[0]!r}", lineno)
    if header is None:
        raise FormatError("missing header")
    return SafetyAutomaton(base, arity, header[3], tuple(rows))


def save(a: SafetyAutomaton, path) -> None:
    Path(path).write_text(dumps(a), encoding="utf-8")


def load(path) -> SafetyAutomaton:
    return loads(Path(path).read_text(encoding="utf-8"))
