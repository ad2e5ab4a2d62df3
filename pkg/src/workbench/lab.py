"""Sampling experiments: box counting, projected coverage and the Steinhaus check.

This is the only module that uses floating-point coordinates.  Samples keep
the exact integer cell index of every point alongside its float value so box
counts never suffer from rounding.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .automaton import SafetyAutomaton, alphabet, product, trim
from .digits import Explicit, EventuallyPeriodic, Tower, es_truncate
from .dimension import has_interior, measure
from .structure import AffineSpec, affine_image

DEFAULT_SEED = 0


@dataclass(frozen=True)
class PointSample:
    points: np.ndarray
    cells: np.ndarray
    depth: int
    seed: int
    source: str
    base: int

    @property
    def arity(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)


def sample_points(a, count: int, depth: int, seed: int = DEFAULT_SEED,
                  source: Optional[str] = None) -> PointSample:
    """Uniform random walks of length ``depth`` through live transitions.

    ``a`` is an automaton or a ``(descriptor, depth)`` pair for an ``E_S``
    truncation.  Points are the left corners of the reached boxes.
    """
    if isinstance(a, tuple):
        desc, es_depth = a
        source = source or f"es({desc}, {es_depth})"
        a = es_truncate(desc, es_depth)
    if count < 1:
        raise ValueError("count must be at least 1")
    a = trim(a)
    if a.is_empty:
        raise ValueError("cannot sample the empty set")
    b, n = a.base, a.arity
    if b ** depth >= 2 ** 63:
        raise ValueError("depth too large for 64-bit cell indices")
    letters = {l: i for i, l in enumerate(alphabet(b, n))}
    nstates = a.num_states
    width = max(len(row) for row in a.delta)
    # padded tables: per state, the defined letters and their targets
    out_letters = np.zeros((nstates, width), dtype=np.int64)
    out_targets = np.zeros((nstates, width), dtype=np.int64)
    degree = np.zeros(nstates, dtype=np.int64)
    for q, row in enumerate(a.delta):
        for j, letter in enumerate(sorted(row)):
            out_letters[q, j] = letters[letter]
            out_targets[q, j] = row[letter]
        degree[q] = len(row)
    digit_table = np.array(alphabet(b, n), dtype=np.int64)
    rng = np.random.default_rng(seed)
    state = np.full(count, a.initial, dtype=np.int64)
    cells = np.zeros((count, n), dtype=np.int64)
    for _ in range(depth):
        choice = np.floor(rng.random(count) * degree[state]).astype(np.int64)
        letter = out_letters[state, choice]
        state = out_targets[state, choice]
        cells = cells * b + digit_table[letter]
    points = cells / float(b) ** depth
    return PointSample(points, cells, depth, seed, source or repr(a), b)


@dataclass(frozen=True)
class BoxCountResult:
    slope: float
    intercept: float
    residual: float
    depths: Tuple[int, ...]
    counts: Tuple[int, ...]

    def __str__(self):
        rows = "\n".join(f"  k={k:<3d} boxes={c}" for k, c in zip(self.depths, self.counts))
        return f"slope {self.slope:.6f} (residual {self.residual:.3g})\n{rows}"


def box_count_estimate(sample: PointSample, k1: int, k2: int) -> BoxCountResult:
    """Least-squares slope of ``log N_k`` against ``k log b`` for ``k1 <= k <= k2``."""
    if k2 - k1 < 1:
        raise ValueError("need at least two depths")
    if k1 < 0 or k2 > sample.depth:
        raise ValueError(f"depths must lie in 0..{sample.depth}")
    depths = tuple(range(k1, k2 + 1))
    counts = []
    for k in depths:
        coarse = sample.cells // sample.base ** (sample.depth - k)
        counts.append(len(np.unique(coarse, axis=0)))
    x = np.array(depths) * math.log(sample.base)
    y = np.log(np.array(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return BoxCountResult(float(slope), float(intercept), resid, depths, tuple(counts))


@dataclass(frozen=True)
class ProjectionReport:
    direction: Tuple[float, ...]
    angle: Optional[float]
    resolution: float
    covered_fraction: float
    occupied: int
    range_length: float

    def row(self):
        ang = "" if self.angle is None else f"{self.angle:.6f}"
        return [ang, " ".join(f"{v:.6f}" for v in self.direction), f"{self.resolution:.6g}",
                str(self.occupied), f"{self.range_length:.6f}", f"{self.covered_fraction:.6f}"]


REPORT_HEADERS = ["angle", "direction", "delta", "occupied", "range", "covered"]


def _direction(direction, arity):
    if np.isscalar(direction):
        if arity != 2:
            raise ValueError("an angle needs a two-dimensional sample")
        return float(direction), np.array([math.cos(direction), math.sin(direction)])
    v = np.asarray(direction, dtype=float)
    if v.shape != (arity,):
        raise ValueError(f"direction must have {arity} components")
    return None, v


def project_measure_estimate(sample: PointSample, direction, resolution: float) -> ProjectionReport:
    """Fraction of left-closed ``resolution``-cells of the projected range hit by the sample."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    angle, v = _direction(direction, sample.arity)
    values = sample.points @ v
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo
    if span == 0:
        return ProjectionReport(tuple(v), angle, resolution, 0.0, 1, 0.0)
    ncells = max(1, math.ceil(span / resolution))
    idx = np.minimum(((values - lo) / resolution).astype(np.int64), ncells - 1)
    occupied = len(np.unique(idx))
    frac = min(1.0, occupied * resolution / span)
    return ProjectionReport(tuple(v), angle, resolution, frac, occupied, span)


def marstrand_scan(sample: PointSample, num_angles: int, resolution: float,
                   seed: int = DEFAULT_SEED) -> List[ProjectionReport]:
    """Coverage along random directions (angles in ``[0, π)`` for planar samples)."""
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(num_angles):
        if sample.arity == 2:
            direction = float(rng.uniform(0.0, math.pi))
        else:
            v = rng.standard_normal(sample.arity)
            direction = v / np.linalg.norm(v)
        reports.append(project_measure_estimate(sample, direction, resolution))
    return reports


def format_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def write_csv(path, headers, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        writer.writerows(rows)


@dataclass(frozen=True)
class SteinhausResult:
    holds: bool
    vacuous: bool
    measure: float

    def __bool__(self):
        return self.holds

    def __str__(self):
        if self.vacuous:
            return f"vacuous (measure {self.measure:.3g} within tolerance of 0)"
        return f"{'interior' if self.holds else 'NO interior'} (measure {self.measure:.6g})"


def difference_set(a: SafetyAutomaton) -> SafetyAutomaton:
    """``(A - A + 1) / b``, the difference set rescaled into [0, 1]."""
    return affine_image(product(a, a), AffineSpec((1, -1), 1, 1))


def steinhaus_check(a: SafetyAutomaton, tol: float = 1e-9) -> SteinhausResult:
    """Positive measure forces the difference set to have interior; check it exactly."""
    if a.arity != 1:
        raise ValueError("steinhaus check needs a subset of the line")
    mu = measure(a, tol)
    if mu <= tol:
        return SteinhausResult(True, True, mu)
    return SteinhausResult(has_interior(difference_set(a)), False, mu)
