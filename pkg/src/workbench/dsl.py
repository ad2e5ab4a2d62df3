"""Set-expression and query language.

Grammar (LL(1), whitespace-insensitive, ``#`` starts a comment)::

    term   := IDENT [ "(" [ term ("," term)* ] ")" ]
            | NUMBER | STRING | "[" [ term ("," term)* ] "]"
    NUMBER := ["-"] INT [ "/" INT ]  |  ["-"] FLOAT

A program is a single term.  Calls whose name is a query (``dim``,
``verdict``, ...) are queries; every other call is a set expression.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import __version__
from . import automaton as core
from . import digits, dimension, gadgets, lab, structure
from .errors import WorkbenchError

# ---------------------------------------------------------------- syntax


@dataclass(frozen=True)
class Node:
    pos: Tuple[int, int] = field(default=(0, 0), compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: Tuple[Node, ...] = ()


@dataclass(frozen=True)
class Num(Node):
    value: object  # Fraction or float


@dataclass(frozen=True)
class Str(Node):
    value: str


@dataclass(frozen=True)
class List(Node):
    items: Tuple[Node, ...] = ()


class DslError(WorkbenchError):
    """Syntax or type error, with the location of the offending text."""

    def __init__(self, message, pos=None, expected=None):
        self.pos = pos
        self.expected = tuple(sorted(expected)) if expected else ()
        where = f"{pos[0]}:{pos[1]}: " if pos else ""
        extra = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}{message}{extra}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<float>\d+\.\d*(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<punct>[()\[\],/\-])
""", re.VERBOSE)


def tokenize(text: str):
    tokens = []
    i, line, col = 0, 1, 1
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise DslError(f"unexpected character {text[i]!r}", (line, col))
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            tokens.append((kind if kind != "punct" else value, value, (line, col)))
        for ch in value:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        i = m.end()
    tokens.append(("eof", "", (line, col)))
    return tokens


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, *kinds):
        tok = self.peek()
        if tok[0] not in kinds:
            got = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise DslError(f"unexpected {got}", tok[2], kinds)
        self.i += 1
        return tok

    def program(self) -> Node:
        node = self.term()
        self.take("eof")
        return node

    def _sequence(self, close):
        items = []
        if self.peek()[0] != close:
            items.append(self.term())
            while self.peek()[0] == ",":
                self.take(",")
                items.append(self.term())
        self.take(close, ",")
        return tuple(items)

    def term(self) -> Node:
        kind, value, pos = self.peek()
        if kind == "ident":
            self.take("ident")
            args = ()
            if self.peek()[0] == "(":
                self.take("(")
                args = self._sequence(")")
            return Call(value, args, pos=pos)
        if kind == "[":
            self.take("[")
            return List(self._sequence("]"), pos=pos)
        if kind == "string":
            self.take("string")
            return Str(value[1:-1], pos=pos)
        if kind in ("int", "float", "-"):
            return self.number()
        self.take("ident", "[", "string", "int", "float", "-")

    def number(self) -> Num:
        pos = self.peek()[2]
        sign = 1
        if self.peek()[0] == "-":
            self.take("-")
            sign = -1
        kind, value, _ = self.take("int", "float")
        if kind == "float":
            return Num(sign * float(value), pos=pos)
        num = Fraction(int(value))
        if self.peek()[0] == "/":
            self.take("/")
            _, den, dpos = self.take("int")
            if int(den) == 0:
                raise DslError("zero denominator", dpos)
            num /= int(den)
        return Num(sign * num, pos=pos)


def parse(text: str) -> Node:
    """Parse and type-check ``text``; returns the syntax tree."""
    node = Parser(text).program()
    check(node)
    return node


def to_text(node: Node) -> str:
    """Canonical text; ``parse(to_text(t)) == t``."""
    if isinstance(node, Call):
        if not node.args:
            return node.name
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, List):
        return "[" + ", ".join(to_text(a) for a in node.items) + "]"
    if isinstance(node, Str):
        return f'"{node.value}"'
    if isinstance(node, Num):
        v = node.value
        return repr(v) if isinstance(v, float) else str(v)
    raise TypeError(node)


# ---------------------------------------------------------------- typing

SET_CONSTRUCTORS = {
    "cantor", "carpet", "menger", "full", "digits", "singleton", "box", "es",
    "union", "inter", "product", "proj", "affine", "saturate", "load",
}
QUERIES = {
    "empty", "equal", "subset", "interior", "nowhere_dense", "dim", "measure",
    "boxes", "verdict", "densities", "es_dims", "steinhaus", "endpoints",
    "probe_ii", "marstrand", "boxcount",
}
DESCRIPTORS = {"tower", "periodic", "explicit"}


@dataclass(frozen=True)
class Shape:
    base: int
    arity: int


def _err(node, msg):
    return DslError(msg, node.pos)


def _int(node, what="integer") -> int:
    if not isinstance(node, Num) or isinstance(node.value, float) or node.value.denominator != 1:
        raise _err(node, f"expected {what}")
    return int(node.value)


def _rational(node) -> Fraction:
    if not isinstance(node, Num) or isinstance(node.value, float):
        raise _err(node, "expected an exact rational p/q")
    return node.value


def _real(node) -> float:
    if not isinstance(node, Num):
        raise _err(node, "expected a number")
    return float(node.value)


def _list(node) -> Tuple[Node, ...]:
    if not isinstance(node, List):
        raise _err(node, "expected a list [...]")
    return node.items


def _arity(node, lo, hi=None):
    hi = lo if hi is None else hi
    n = len(node.args)
    if not lo <= n <= hi:
        want = str(lo) if lo == hi else f"{lo}..{hi}"
        raise _err(node, f"{node.name} takes {want} argument(s), got {n}")


def _descriptor(node) -> object:
    if not isinstance(node, Call) or node.name not in DESCRIPTORS:
        raise _err(node, "expected tower(n), periodic([...]) or explicit(\"file\")")
    if node.name == "tower":
        _arity(node, 1)
        try:
            return digits.Tower(_int(node.args[0]))
        except ValueError as exc:
            raise _err(node, str(exc)) from None
    if node.name == "periodic":
        _arity(node, 1, 2)
        bits = [tuple(_int(x, "bit") for x in _list(a)) for a in node.args]
        pre, period = ((), bits[0]) if len(bits) == 1 else bits
        try:
            return digits.EventuallyPeriodic(pre, period)
        except ValueError as exc:
            raise _err(node, str(exc)) from None
    _arity(node, 1)
    if not isinstance(node.args[0], Str):
        raise _err(node.args[0], "expected a file name string")
    return node.args[0].value


def _describe(node, shape):
    return f"{to_text(node)} (base {shape.base}, arity {shape.arity})"


def shape_of(node) -> Shape:
    """Base and arity of a set expression; raises on ill-typed terms."""
    if not isinstance(node, Call) or node.name not in SET_CONSTRUCTORS:
        what = to_text(node) if isinstance(node, Node) else repr(node)
        raise _err(node, f"{what} is not a set expression")
    name, args = node.name, node.args
    if name in ("cantor", "carpet", "menger"):
        _arity(node, 0)
        return Shape(3, {"cantor": 1, "carpet": 2, "menger": 3}[name])
    if name == "full":
        _arity(node, 1, 2)
        base = _int(args[1]) if len(args) == 2 else 3
        return Shape(base, _int(args[0]))
    if name == "digits":
        _arity(node, 3)
        base, n = _int(args[0]), _int(args[1])
        for item in _list(args[2]):
            letter = (_int(item),) if isinstance(item, Num) else tuple(_int(x) for x in _list(item))
            if len(letter) != n or any(not 0 <= d < base for d in letter):
                raise _err(item, f"digit tuple {letter} invalid for base {base}, arity {n}")
        return Shape(base, n)
    if name == "singleton":
        if len(args) < 2:
            raise _err(node, "singleton takes a base and at least one coordinate")
        for a in args[1:]:
            if not 0 <= _rational(a) <= 1:
                raise _err(a, "coordinate outside [0,1]")
        return Shape(_int(args[0]), len(args) - 1)
    if name == "box":
        if len(args) < 2:
            raise _err(node, "box takes a base and at least one [lo, hi] pair")
        for a in args[1:]:
            pair = _list(a)
            if len(pair) != 2:
                raise _err(a, "expected [lo, hi]")
            lo, hi = _rational(pair[0]), _rational(pair[1])
            if lo > hi:
                raise _err(a, "interval with lo > hi")
            if not (0 <= lo and hi <= 1):
                raise _err(a, "interval must lie in [0,1]")
        return Shape(_int(args[0]), len(args) - 1)
    if name == "es":
        _arity(node, 2)
        desc = _descriptor(args[0])
        base = desc.base if not isinstance(desc, str) else 2
        if _int(args[1]) < 1:
            raise _err(args[1], "depth must be positive")
        return Shape(base, 1)
    if name in ("union", "inter"):
        _arity(node, 2)
        a, b = shape_of(args[0]), shape_of(args[1])
        if a != b:
            raise _err(node, f"{name}: mismatch between {_describe(args[0], a)} "
                             f"and {_describe(args[1], b)}")
        return a
    if name == "product":
        _arity(node, 2)
        a, b = shape_of(args[0]), shape_of(args[1])
        if a.base != b.base:
            raise _err(node, f"product: base mismatch between {_describe(args[0], a)} "
                             f"and {_describe(args[1], b)}")
        return Shape(a.base, a.arity + b.arity)
    if name == "proj":
        if len(args) < 2:
            raise _err(node, "proj takes a set and coordinates")
        a = shape_of(args[0])
        coords = _coords(args[1:])
        if len(set(coords)) != len(coords) or any(not 1 <= c <= a.arity for c in coords):
            raise _err(node, f"invalid coordinates {coords} for arity {a.arity}")
        return Shape(a.base, len(coords))
    if name == "affine":
        _arity(node, 4)
        a = shape_of(args[0])
        coeffs = [_int(c) for c in _list(args[1])]
        if len(coeffs) != a.arity:
            raise _err(args[1], f"{len(coeffs)} coefficients for arity {a.arity}")
        _int(args[2])
        if _int(args[3]) < 0:
            raise _err(args[3], "scale exponent must be non-negative")
        return Shape(a.base, 1)
    if name == "saturate":
        _arity(node, 1)
        return shape_of(args[0])
    if name == "load":
        _arity(node, 1)
        if not isinstance(args[0], Str):
            raise _err(args[0], "expected a file name string")
        try:
            a = core.load(args[0].value)
        except (OSError, WorkbenchError) as exc:
            raise _err(args[0], f"cannot load {args[0].value}: {exc}") from None
        return Shape(a.base, a.arity)
    raise AssertionError(name)


def _coords(args) -> List[int]:
    if len(args) == 1 and isinstance(args[0], List):
        args = args[0].items
    return [_int(c) for c in args]


_QUERY_ARGS = {
    "empty": (1, 1), "interior": (1, 1), "nowhere_dense": (1, 1), "dim": (1, 1),
    "verdict": (1, 1), "equal": (2, 2), "subset": (2, 2), "measure": (1, 2),
    "steinhaus": (1, 2), "boxes": (2, 2), "densities": (1, 1), "es_dims": (1, 1),
    "endpoints": (1, 1), "probe_ii": (4, 4), "marstrand": (3, 4), "boxcount": (2, 2),
}


def check(node):
    """Type-check a whole program."""
    if not isinstance(node, Call):
        raise _err(node, "expected a set expression or a query")
    if node.name not in QUERIES:
        if node.name not in SET_CONSTRUCTORS:
            raise DslError(f"unknown name {node.name!r}", node.pos,
                           sorted(QUERIES | SET_CONSTRUCTORS))
        return shape_of(node)
    _arity(node, *_QUERY_ARGS[node.name])
    name, args = node.name, node.args
    if name in ("densities", "es_dims"):
        es = args[0]
        if not (isinstance(es, Call) and es.name == "es" and len(es.args) == 1):
            raise _err(es, "expected es(descriptor)")
        _descriptor(es.args[0])
        return None
    if name == "endpoints":
        if _int(args[0]) < 1:
            raise _err(args[0], "N must be positive")
        return None
    if name == "probe_ii":
        _rational(args[0]), _rational(args[1])
        _int(args[2]), _int(args[3])
        return None
    shapes = [shape_of(args[0])]
    if name in ("equal", "subset"):
        shapes.append(shape_of(args[1]))
        if shapes[0] != shapes[1]:
            raise _err(node, f"{name}: mismatch between {_describe(args[0], shapes[0])} "
                             f"and {_describe(args[1], shapes[1])}")
    elif name in ("measure", "steinhaus") and len(args) == 2:
        if _real(args[1]) <= 0:
            raise _err(args[1], "tolerance must be positive")
    elif name == "boxes":
        _int(args[1])
    elif name == "marstrand":
        _int(args[1])
        if _real(args[2]) <= 0:
            raise _err(args[2], "resolution must be positive")
        if len(args) == 4:
            _int(args[3])
    elif name == "boxcount":
        ks = [_int(k) for k in _list(args[1])]
        if len(ks) != 2 or ks[1] - ks[0] < 1:
            raise _err(args[1], "expected [k1, k2] with k1 < k2")
    if name == "steinhaus" and shapes[0].arity != 1:
        raise _err(args[0], "steinhaus needs a subset of the line")
    return None


# ---------------------------------------------------------------- evaluation


def _load_descriptor(node):
    desc = _descriptor(node)
    if isinstance(desc, str):
        return digits.Explicit.from_file(desc)
    return desc


class Evaluator:
    """Evaluates set expressions with a per-instance memo keyed by canonical text."""

    def __init__(self):
        self.memo: Dict[str, core.SafetyAutomaton] = {}

    def __call__(self, node) -> core.SafetyAutomaton:
        key = to_text(node)
        got = self.memo.get(key)
        if got is None:
            try:
                got = self._eval(node)
            except DslError:
                raise
            except WorkbenchError as exc:
                raise type(exc)(f"in {key}: {exc}") from exc
            except ValueError as exc:
                raise DslError(f"in {key}: {exc}", node.pos) from exc
            self.memo[key] = got
        return got

    def _eval(self, node):
        name, args = node.name, node.args
        if name == "cantor":
            return structure.cantor()
        if name == "carpet":
            return structure.carpet()
        if name == "menger":
            return structure.menger()
        if name == "full":
            base = _int(args[1]) if len(args) == 2 else 3
            return core.full(base, _int(args[0]))
        if name == "digits":
            allowed = [(_int(i),) if isinstance(i, Num) else tuple(_int(x) for x in _list(i))
                       for i in _list(args[2])]
            return structure.make_digit_set(_int(args[0]), _int(args[1]), allowed)
        if name == "singleton":
            return structure.singleton(_int(args[0]), [_rational(a) for a in args[1:]])
        if name == "box":
            pairs = [tuple(_rational(x) for x in _list(a)) for a in args[1:]]
            return structure.box(_int(args[0]), pairs)
        if name == "es":
            return digits.es_truncate(_load_descriptor(args[0]), _int(args[1]))
        if name == "union":
            return core.union(self(args[0]), self(args[1]))
        if name == "inter":
            return core.intersect(self(args[0]), self(args[1]))
        if name == "product":
            return core.product(self(args[0]), self(args[1]))
        if name == "proj":
            return core.project(self(args[0]), _coords(args[1:]))
        if name == "affine":
            spec = structure.AffineSpec(tuple(_int(c) for c in _list(args[1])),
                                        _int(args[2]), _int(args[3]))
            return structure.affine_image(self(args[0]), spec)
        if name == "saturate":
            return core.saturate(self(args[0]))
        if name == "load":
            return core.load(args[0].value)
        raise AssertionError(name)


def evaluate(node) -> core.SafetyAutomaton:
    if isinstance(node, str):
        node = parse(node)
    shape_of(node)
    return Evaluator()(node)


@dataclass
class Options:
    tol: float = 1e-9
    seed: int = lab.DEFAULT_SEED
    depth: Optional[int] = None
    samples: int = 100_000
    prefix: int = 2000


@dataclass
class Report:
    query: str
    lines: List[str]
    options: Options
    result: object = None
    csv_headers: Optional[List[str]] = None
    csv_rows: Optional[List[List[str]]] = None

    @property
    def text(self) -> str:
        head = [
            f"query: {self.query}",
            f"workbench {__version__}  seed={self.options.seed}  tol={self.options.tol:g}"
            + (f"  depth={self.options.depth}" if self.options.depth is not None else ""),
        ]
        return "\n".join(head + self.lines) + "\n"


def run(text_or_node, options: Optional[Options] = None) -> Report:
    """Evaluate a query and build its report."""
    opts = options or Options()
    node = parse(text_or_node) if isinstance(text_or_node, str) else text_or_node
    check(node)
    ev = Evaluator()
    name, args = node.name, node.args
    query = to_text(node)
    if name not in QUERIES:
        a = ev(node)
        return Report(query, [core.dumps(a).rstrip("\n")], opts, a)

    def rep(lines, result, **kw):
        lines = [lines] if isinstance(lines, str) else list(lines)
        return Report(query, lines, opts, result, **kw)

    if name == "empty":
        r = core.is_empty(ev(args[0]))
        return rep(f"empty: {str(r).lower()}", r)
    if name == "equal":
        r = core.canonical_equal(ev(args[0]), ev(args[1]))
        return rep(f"equal: {str(r).lower()}", r)
    if name == "subset":
        a, b = ev(args[0]), ev(args[1])
        r = core.canonical_equal(core.intersect(a, b), a)
        return rep(f"subset: {str(r).lower()}", r)
    if name == "interior":
        w = dimension.interior_witness(ev(args[0]))
        line = f"interior: {str(w is not None).lower()}"
        if w is not None:
            line += f" (witness depth {w[1]})"
        return rep(line, w is not None)
    if name == "nowhere_dense":
        r = dimension.is_nowhere_dense(ev(args[0]))
        return rep(f"nowhere_dense: {str(r).lower()}", r)
    if name == "dim":
        r = dimension.box_dimension(ev(args[0]))
        return rep(str(r), r)
    if name == "measure":
        tol = _real(args[1]) if len(args) == 2 else opts.tol
        opts.tol = tol
        r = dimension.measure(ev(args[0]), tol)
        return rep(f"measure: {r:.12g} (upper bound, within {tol:g})", r)
    if name == "boxes":
        r = core.count_prefixes(ev(args[0]), _int(args[1]))
        return rep(str(r), r)
    if name == "verdict":
        r = dimension.avoids_compact_verdict(ev(args[0]))
        return rep(str(r).splitlines(), r)
    if name in ("densities", "es_dims"):
        desc = _load_descriptor(args[0].args[0])
        if name == "densities":
            r = digits.density_bounds(desc)
            return rep(r.table().splitlines(), r)
        r = digits.es_dimensions(desc)
        tag = "exact" if r.exact else "estimate"
        return rep([f"lower density (Hausdorff per power): {r.hausdorff}",
                    f"upper density (packing per power): {r.packing}", f"({tag})"], r)
    if name == "steinhaus":
        tol = _real(args[1]) if len(args) == 2 else opts.tol
        opts.tol = tol
        r = lab.steinhaus_check(ev(args[0]), tol)
        return rep(f"steinhaus: {r}", r)
    if name == "endpoints":
        r = gadgets.cantor_endpoints(_int(args[0]))
        rows = [[str(i), str(e), "inf" if d == math.inf else str(d)]
                for i, (e, d) in enumerate(zip(r.elements, r.keys))]
        return rep(lab.format_table(["index", "endpoint", "gap"], rows).splitlines(), r,
                   csv_headers=["index", "endpoint", "gap"], csv_rows=rows)
    if name == "probe_ii":
        a, b = _rational(args[0]), _rational(args[1])
        di, ei = _int(args[2]), _int(args[3])
        d_set = gadgets.dense_difference_set(opts.prefix)
        if not 0 <= ei <= di < len(d_set):
            raise DslError("need 0 <= e_idx <= d_idx < prefix length", node.pos)
        r = gadgets.condition_ii_probe(a, b, d_set[di], d_set[ei], d_set)
        return rep([f"d = {d_set[di]}  e = {d_set[ei]}  prefix = {opts.prefix}",
                    f"probe: {r}"], r)
    if name == "marstrand":
        seed = _int(args[3]) if len(args) == 4 else opts.seed
        opts.seed = seed
        depth = opts.depth or 12
        opts.depth = depth
        sample = lab.sample_points(ev(args[0]), opts.samples, depth, seed, to_text(args[0]))
        reports = lab.marstrand_scan(sample, _int(args[1]), _real(args[2]), seed)
        rows = [r.row() for r in reports]
        best = max(r.covered_fraction for r in reports)
        lines = [f"samples={opts.samples} sample_depth={depth} delta={_real(args[2]):g}"]
        lines += lab.format_table(lab.REPORT_HEADERS, rows).splitlines()
        lines.append(f"max covered fraction: {best:.6f}")
        return rep(lines, reports, csv_headers=lab.REPORT_HEADERS, csv_rows=rows)
    if name == "boxcount":
        k1, k2 = (_int(k) for k in _list(args[1]))
        depth = opts.depth or k2
        opts.depth = depth
        sample = lab.sample_points(ev(args[0]), opts.samples, depth, opts.seed, to_text(args[0]))
        r = lab.box_count_estimate(sample, k1, k2)
        rows = [[str(k), str(c)] for k, c in zip(r.depths, r.counts)]
        return rep([f"samples={opts.samples} sample_depth={depth}"] + str(r).splitlines(), r,
                   csv_headers=["depth", "boxes"], csv_rows=rows)
    raise AssertionError(name)
