"""Metric and topological queries on automatic compact sets.

Box dimension is ``log(rho) / log(b)`` where ``rho`` is the largest spectral
radius of the letter-count matrices of the strongly connected components.  For
the graph-directed sets built here the b-adic cells are disjoint, and box and
Hausdorff dimension agree; the module treats them as the same number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .automaton import SafetyAutomaton, boxes, count_prefixes, saturate, trim
from .errors import VerdictRefused

RHO_TOL = 1e-13


@dataclass(frozen=True)
class DimensionResult:
    value: float
    rho: float
    base: int
    witness: Tuple[int, ...] = ()
    empty: bool = False
    rho_bounds: Tuple[float, float] = (0.0, 0.0)

    def __str__(self):
        if self.empty:
            return "dim 0 (empty set) witness []"
        rho = int(self.rho) if float(self.rho).is_integer() else self.rho
        return (f"dim {self.value:.12g} = log({rho})/log({self.base}) "
                f"witness {list(self.witness)}")


def count_matrix(a: SafetyAutomaton) -> np.ndarray:
    """``M[p, q]`` = number of letters leading from ``p`` to ``q``."""
    m = np.zeros((a.num_states, a.num_states), dtype=np.int64)
    for q, row in enumerate(a.delta):
        for t in row.values():
            m[q, t] += 1
    return m


def strongly_connected_components(a: SafetyAutomaton):
    """Components that carry at least one cycle, as sorted state tuples."""
    if a.is_empty:
        return []
    m = count_matrix(a)
    _, labels = connected_components(csr_matrix(m), directed=True, connection="strong")
    comps = {}
    for q, lab in enumerate(labels):
        comps.setdefault(lab, []).append(q)
    out = []
    for states in comps.values():
        if len(states) > 1 or m[states[0], states[0]] > 0:
            out.append(tuple(states))
    return sorted(out)


def spectral_radius(m: np.ndarray, tol: float = RHO_TOL, max_iter: int = 200000):
    """Perron root of a nonnegative irreducible matrix with a certified bracket.

    Returns ``(rho, lower, upper)``.  Equal row sums give the exact answer.
    Otherwise power iteration runs on ``M + I`` (primitive, so it converges
    even for periodic ``M``) and stops when the Collatz-Wielandt bounds
    ``min (Mv)_i / v_i <= rho <= max (Mv)_i / v_i`` agree to ``tol``.
    """
    rows = m.sum(axis=1)
    if rows.min() == rows.max():
        r = float(rows[0])
        return r, r, r
    lo, hi = float(rows.min()), float(rows.max())
    a = m.astype(float)
    shifted = a + np.eye(len(a))
    v = np.ones(len(a))
    for _ in range(max_iter):
        w = shifted @ v
        ratios = (a @ w) / w
        lo, hi = max(lo, ratios.min()), min(hi, ratios.max())
        v = w / w.max()
        if hi - lo <= tol * max(hi, 1.0):
            return 0.5 * (lo + hi), lo, hi
    ev = float(np.max(np.abs(np.linalg.eigvals(a))))
    return ev, lo, hi


def box_dimension(a: SafetyAutomaton) -> DimensionResult:
    a = trim(a)
    if a.is_empty:
        return DimensionResult(0.0, 0.0, a.base, (), True)
    m = count_matrix(a)
    best = None
    for comp in strongly_connected_components(a):
        sub = m[np.ix_(comp, comp)]
        rho, lo, hi = spectral_radius(sub)
        if best is None or rho > best[0] + 1e-12:
            best = (rho, lo, hi, comp)
    rho, lo, hi, comp = best
    value = 0.0 if rho == 1.0 else math.log(rho) / math.log(a.base)
    return DimensionResult(value, rho, a.base, comp, False, (lo, hi))


def is_dimension_zero(a: SafetyAutomaton) -> bool:
    """Exact test for ``rho == 1``: every cyclic component is a simple cycle."""
    a = trim(a)
    if a.is_empty:
        return True
    m = count_matrix(a)
    for comp in strongly_connected_components(a):
        if m[np.ix_(comp, comp)].sum(axis=1).max() > 1:
            return False
    return True


def measure(a: SafetyAutomaton, tol: float = 1e-9, max_iter: int = 10**7) -> float:
    """Lebesgue measure by value iteration, returned as an upper bound within ``tol``.

    The upper iterates start from the all-ones vector and follow
    ``mu(q) <- b^-n * sum over letters of mu(delta(q, a))``, decreasing to the
    measure.  The same map applied to the indicator of the universal states
    increases to it from below; iteration stops once the two brackets at the
    initial state are closer than ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = trim(a)
    if a.is_empty:
        return 0.0
    p = count_matrix(a) / float(a.base ** a.arity)
    upper = np.ones(a.num_states)
    lower = np.array(_full_states(a), dtype=float)
    q0 = a.initial
    for _ in range(max_iter):
        if upper[q0] - lower[q0] < tol:
            break
        upper = p @ upper
        lower = p @ lower
    return float(upper[q0])


def _full_states(a: SafetyAutomaton):
    """Greatest set of states where every letter is defined and stays inside."""
    nletters = a.base ** a.arity
    inside = [len(row) == nletters for row in a.delta]
    changed = True
    while changed:
        changed = False
        for q, row in enumerate(a.delta):
            if inside[q] and not all(inside[t] for t in row.values()):
                inside[q] = False
                changed = True
    return inside


def interior_witness(a: SafetyAutomaton) -> Optional[Tuple[tuple, int]]:
    """Shortest word reaching a universal state of the saturated automaton.

    The returned word names a closed b-adic cell contained in the set; its
    length is the witness depth.  None when the set has empty interior.
    """
    s = saturate(a)
    if s.is_empty:
        return None
    inside = _full_states(s)
    seen = {s.initial: ()}
    queue = [s.initial]
    for q in queue:
        if inside[q]:
            return seen[q], len(seen[q])
        for letter in sorted(s.delta[q]):
            t = s.delta[q][letter]
            if t not in seen:
                seen[t] = seen[q] + (letter,)
                queue.append(t)
    return None


def has_interior(a: SafetyAutomaton) -> bool:
    return interior_witness(a) is not None


def is_nowhere_dense(a: SafetyAutomaton) -> bool:
    # a closed set is nowhere dense exactly when it has empty interior
    return not has_interior(a)


@dataclass(frozen=True)
class ProbeResult:
    disconnected: bool
    depth: int
    components: int
    max_diameter: float

    def __str__(self):
        tag = f"Disconnected({self.depth})" if self.disconnected else "Unknown"
        return f"{tag} components={self.components} max_diameter={self.max_diameter:.6g}"


def totally_disconnected_probe(a: SafetyAutomaton, k: int) -> ProbeResult:
    """Connected components of the depth-``k`` box cover.

    Boxes are adjacent when their closures meet.  Reports disconnected when
    every component has sup-norm diameter at most ``2 b^(1-k)``.
    """
    if k < 1:
        raise ValueError("depth must be at least 1")
    s = trim(a)
    cells = boxes(s, k)
    if not cells:
        return ProbeResult(True, k, 0, 0.0)
    cells = sorted(cells)
    index = {c: i for i, c in enumerate(cells)}
    parent = list(range(len(cells)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    offsets = [o for o in np.ndindex(*(3,) * s.arity)]
    for i, c in enumerate(cells):
        for off in offsets:
            nb = tuple(x + d - 1 for x, d in zip(c, off))
            j = index.get(nb)
            if j is not None and j > i:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    lo, hi = {}, {}
    for i, c in enumerate(cells):
        r = find(i)
        if r in lo:
            lo[r] = tuple(map(min, lo[r], c))
            hi[r] = tuple(map(max, hi[r], c))
        else:
            lo[r] = hi[r] = c
    cell = float(s.base) ** -k
    diam = max(max(h - l + 1 for h, l in zip(hi[r], lo[r])) for r in lo) * cell
    bound = 2.0 * float(s.base) ** (1 - k)
    return ProbeResult(diam <= bound + 1e-15, k, len(lo), diam)


AVOIDS = "AvoidsCompactSet"
DEFINES_ALL = "DefinesAllCompactSets"


@dataclass(frozen=True)
class Verdict:
    tag: str
    dimension: DimensionResult
    probe: ProbeResult
    rational_structure: str = field(default="avoids (automatic)")

    def __str__(self):
        return (f"{self.tag}\n  real-linear structure: {self.tag}\n"
                f"  rational-linear structure: {self.rational_structure}\n"
                f"  {self.dimension}\n  probe: {self.probe}")


def avoids_compact_verdict(a: SafetyAutomaton, max_depth: int = 8,
                           box_limit: int = 200_000) -> Verdict:
    """Whether adding the set to the real-linear structure still avoids a compact set.

    Requires a total-disconnectedness certificate from the probe at some depth
    up to ``max_depth``; then the answer is "avoids" exactly when the dimension
    is zero, which for automatic sets is the exact test ``rho == 1``.
    """
    probe = None
    # below this depth the diameter bound exceeds the unit cube
    first = 1
    while 2 * a.base ** (1 - first) >= 1:
        first += 1
    for k in range(first, max(first, max_depth) + 1):
        if count_prefixes(a, k) > box_limit:
            break
        probe = totally_disconnected_probe(a, k)
        if probe.disconnected:
            break
    if probe is None or not probe.disconnected:
        raise VerdictRefused(
            "total disconnectedness not certified"
            + (f" (last probe: {probe})" if probe else ""))
    dim = box_dimension(a)
    tag = AVOIDS if is_dimension_zero(a) else DEFINES_ALL
    return Verdict(tag, dim, probe)
