"""Dichotomy classifier: pair labels, the edge-labeled graph, uniform ops.

For each 2-element subset {a, b} of a language's universe we search for a
conservative polymorphism whose restriction to {a, b} is semilattice,
majority, or affine (in that precedence order).  A language with every pair
labeled is tractable; a single unlabeled pair makes it NP-complete.  For
tractable languages we synthesize one quadruple of operation tables
(f, p, g, h) behaving uniformly on all pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, SynthesisFailureError
from .indicator import search_operation, table_from_assignment
from .model import Algebra, Relation

SEMILATTICE = "semilattice"
MAJORITY = "majority"
AFFINE = "affine"
NONE = "none"


@dataclass(frozen=True)
class PairLabel:
    kind: str
    # achievable semilattice orientations, as (source, sink) arcs
    directions: tuple[tuple[int, int], ...] = ()
    # the orientation the synthesized f realizes (semilattice only)
    orientation: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.kind not in (SEMILATTICE, MAJORITY, AFFINE, NONE):
            raise InvalidArgumentError(f"unknown label kind {self.kind!r}")
        if self.kind == SEMILATTICE and not self.directions:
            raise InvalidArgumentError("semilattice label needs a direction")


def semilattice_label(directions: Sequence[tuple[int, int]],
                      orientation: Optional[tuple[int, int]] = None) -> PairLabel:
    dirs = tuple(dict.fromkeys(tuple(d) for d in directions))
    if orientation is None:
        orientation = min(dirs)  # deterministic: smaller source wins
    return PairLabel(SEMILATTICE, dirs, tuple(orientation))


class EdgeLabeledGraph:
    """Complete pair labeling of a universe; semilattice pairs are oriented."""

    def __init__(self, size: int, labels: dict[tuple[int, int], PairLabel]):
        self.size = size
        self.labels = {}
        for (a, b), lab in labels.items():
            if a == b or not (0 <= a < size and 0 <= b < size):
                raise InvalidArgumentError(f"bad pair ({a},{b})")
            self.labels[(min(a, b), max(a, b))] = lab

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self.labels)

    def label(self, a: int, b: int) -> PairLabel:
        if a == b:
            raise InvalidArgumentError("label of a loop requested")
        return self.labels[(min(a, b), max(a, b))]

    def kind(self, a: int, b: int) -> str:
        return self.label(a, b).kind

    def semilattice_arc(self, a: int, b: int) -> bool:
        """True if a -> b is the operative semilattice orientation."""
        lab = self.label(a, b)
        return lab.kind == SEMILATTICE and lab.orientation == (a, b)

    def with_orientations_from(self, f) -> "EdgeLabeledGraph":
        """Re-orient semilattice pairs to match a concrete f table."""
        new = {}
        for (a, b), lab in self.labels.items():
            if lab.kind == SEMILATTICE:
                ori = (a, b) if f[a][b] == b and f[b][a] == b else (b, a)
                dirs = lab.directions if ori in lab.directions \
                    else lab.directions + (ori,)
                new[(a, b)] = PairLabel(SEMILATTICE, dirs, ori)
            else:
                new[(a, b)] = lab
        return EdgeLabeledGraph(self.size, new)

    def __eq__(self, other):
        return (isinstance(other, EdgeLabeledGraph)
                and self.size == other.size and self.labels == other.labels)


@dataclass(frozen=True)
class ConstraintLanguage:
    size: int
    relations: tuple[Relation, ...]

    def __post_init__(self):
        for rel in self.relations:
            for dom in rel.signature:
                if any(v not in range(self.size) for v in dom):
                    raise InvalidArgumentError("relation leaves the universe")


@dataclass(frozen=True)
class ClassifierVerdict:
    kind: str  # "tractable" | "np-complete"
    graph: Optional[EdgeLabeledGraph] = None
    algebra: Optional[Algebra] = None
    witness_pair: Optional[tuple[int, int]] = None

    @property
    def tractable(self) -> bool:
        return self.kind == "tractable"


def _majority_value(x: int, y: int, z: int) -> int:
    if x == y or x == z:
        return x
    return y  # y == z in the two-distinct-values case


def _minority_value(x: int, y: int, z: int) -> int:
    if x == y:
        return z
    if y == z:
        return x
    return y  # x == z


def _pair_cells(a: int, b: int, arity: int):
    for cell in itertools.product((a, b), repeat=arity):
        if len(set(cell)) == 2:
            yield cell


def classify_pair(lang: ConstraintLanguage, a: int, b: int) -> PairLabel:
    """Label one pair by searching for conservative polymorphisms.

    Precedence: semilattice (either orientation) beats majority beats
    affine; `none` means no tractable restriction exists.
    """
    if a == b or a not in range(lang.size) or b not in range(lang.size):
        raise InvalidArgumentError(f"bad pair ({a}, {b})")
    rels = lang.relations
    dirs = []
    for (src, snk) in ((min(a, b), max(a, b)), (max(a, b), min(a, b))):
        found = search_operation(
            lang.size, 2, rels, pinned={(src, snk): snk, (snk, src): snk})
        if found is not None:
            dirs.append((src, snk))
    if dirs:
        return semilattice_label(dirs)

    pinned_maj = {c: _majority_value(*c) for c in _pair_cells(a, b, 3)}
    if search_operation(lang.size, 3, rels, pinned=pinned_maj) is not None:
        return PairLabel(MAJORITY)

    pinned_aff = {c: _minority_value(*c) for c in _pair_cells(a, b, 3)}
    if search_operation(lang.size, 3, rels, pinned=pinned_aff) is not None:
        return PairLabel(AFFINE)

    return PairLabel(NONE)


def _np_rows(rel: Relation) -> np.ndarray:
    return np.asarray(rel.sorted_tuples(), dtype=np.int64)


def _codes(rows: np.ndarray, size: int) -> np.ndarray:
    return rows @ (size ** np.arange(rows.shape[1], dtype=np.int64))


def binary_preserves(table, relations: Sequence[Relation], size: int) -> bool:
    tab = np.asarray(table, dtype=np.int64)
    for rel in relations:
        if not rel.tuples:
            continue
        rows = _np_rows(rel)
        ok = set(_codes(rows, size).tolist())
        img = tab[rows[:, None, :], rows[None, :, :]].reshape(-1, rel.arity)
        if not np.isin(_codes(img, size), list(ok)).all():
            return False
    return True


def ternary_preserves(table, relations: Sequence[Relation], size: int) -> bool:
    tab = np.asarray(table, dtype=np.int64)
    for rel in relations:
        if not rel.tuples:
            continue
        rows = _np_rows(rel)
        ok = set(_codes(rows, size).tolist())
        n = len(rows)
        for i in range(n):
            img = tab[rows[i, None, None, :], rows[:, None, :],
                      rows[None, :, :]].reshape(-1, rel.arity)
            if not np.isin(_codes(img, size), list(ok)).all():
                return False
    return True


def _build_f(size: int, graph: EdgeLabeledGraph,
             orientation: dict[tuple[int, int], tuple[int, int]]):
    f = [[x for _ in range(size)] for x in range(size)]
    for (a, b), (src, snk) in orientation.items():
        f[src][snk] = snk
        f[snk][src] = snk
    for (a, b) in graph.pairs():
        if graph.kind(a, b) != SEMILATTICE and (a, b) not in orientation:
            f[a][b] = a
            f[b][a] = b
    return tuple(tuple(row) for row in f)


def _build_p(size: int, graph: EdgeLabeledGraph, f):
    p = [[x for _ in range(size)] for x in range(size)]
    for (a, b) in graph.pairs():
        kind = graph.kind(a, b)
        if kind == SEMILATTICE:
            p[a][b] = f[a][b]
            p[b][a] = f[b][a]
        elif kind == MAJORITY:
            p[a][b] = b
            p[b][a] = a
        elif kind == AFFINE:
            p[a][b] = a
            p[b][a] = b
        else:
            raise InvalidArgumentError("cannot build p over an unlabeled pair")
    return tuple(tuple(row) for row in p)


def _ternary_pins(graph: EdgeLabeledGraph, f, role: str) -> dict:
    """Pinned pair-subset cells for g (role='g') or h (role='h')."""
    pins = {}
    for (a, b) in graph.pairs():
        kind = graph.kind(a, b)
        for cell in _pair_cells(a, b, 3):
            x, y, z = cell
            if kind == SEMILATTICE:
                pins[cell] = f[f[x][y]][z]
            elif kind == MAJORITY:
                pins[cell] = _majority_value(x, y, z) if role == "g" else x
            elif kind == AFFINE:
                pins[cell] = x if role == "g" else _minority_value(x, y, z)
            else:
                raise InvalidArgumentError("unlabeled pair in synthesis")
    return pins


def synthesize_uniform_ops(lang: ConstraintLanguage,
                           graph: EdgeLabeledGraph) -> Algebra:
    """Search operation tables realizing the uniform pair behavior.

    Deterministic: semilattice orientations are tried smaller-source-first,
    free ternary cells prefer their first argument.
    """
    size = lang.size
    rels = [r for r in lang.relations if r.tuples]
    sl_pairs = [(a, b) for (a, b) in graph.pairs()
                if graph.kind(a, b) == SEMILATTICE]
    for (a, b) in graph.pairs():
        if graph.kind(a, b) == NONE:
            raise InvalidArgumentError("synthesis requires a fully labeled graph")

    choice_lists = []
    for (a, b) in sl_pairs:
        dirs = sorted(graph.label(a, b).directions)  # smaller source first
        choice_lists.append(dirs)

    for combo in itertools.product(*choice_lists):
        orientation = dict(zip(sl_pairs, combo))
        f = _build_f(size, graph, orientation)
        if not binary_preserves(f, rels, size):
            continue
        p = _build_p(size, graph, f)
        if not binary_preserves(p, rels, size):
            continue
        g_cells = search_operation(size, 3, rels,
                                   pinned=_ternary_pins(graph, f, "g"))
        if g_cells is None:
            continue
        h_cells = search_operation(size, 3, rels,
                                   pinned=_ternary_pins(graph, f, "h"))
        if h_cells is None:
            continue
        g = table_from_assignment(size, 3, g_cells)
        h = table_from_assignment(size, 3, h_cells)
        return Algebra(size, f, p, g, h)
    raise SynthesisFailureError(
        "no conservative tables realize the uniform pair behavior; "
        "the labeling is wrong or the language violates the classifier's hypotheses")


def classify_language(lang: ConstraintLanguage) -> ClassifierVerdict:
    """Full dichotomy verdict; deterministic given the language."""
    if lang.size == 1:
        graph = EdgeLabeledGraph(1, {})
        alg = synthesize_uniform_ops(lang, graph)
        return ClassifierVerdict("tractable", graph, alg)
    labels = {}
    for a, b in itertools.combinations(range(lang.size), 2):
        lab = classify_pair(lang, a, b)
        if lab.kind == NONE:
            return ClassifierVerdict("np-complete", witness_pair=(a, b))
        labels[(a, b)] = lab
    graph = EdgeLabeledGraph(lang.size, labels)
    alg = synthesize_uniform_ops(lang, graph)
    graph = graph.with_orientations_from(alg.f)
    return ClassifierVerdict("tractable", graph, alg)


def check_uniformity_laws(alg: Algebra, graph: EdgeLabeledGraph,
                          relations: Sequence[Relation] = ()) -> list[str]:
    """Exhaustively verify the uniform pair behavior of f, p, g, h.

    Optionally also checks that every table preserves the given relations.
    Returns violation records with witnesses; empty means all laws hold.
    """
    from .model import algebra_violations

    out = list(algebra_violations(alg))
    f, p, g, h = alg.f, alg.p, alg.g, alg.h
    for (a, b) in graph.pairs():
        kind = graph.kind(a, b)
        if kind == NONE:
            out.append(f"pair ({a},{b}) is unlabeled")
            continue
        if kind == SEMILATTICE:
            src, snk = graph.label(a, b).orientation
            if not (f[src][snk] == snk and f[snk][src] == snk):
                out.append(f"f must join toward {snk} on semilattice pair ({a},{b})")
        else:
            if f[a][b] != a or f[b][a] != b:
                out.append(f"f must be first projection on {kind} pair ({a},{b})")
        if kind == SEMILATTICE:
            if p[a][b] != f[a][b] or p[b][a] != f[b][a]:
                out.append(f"p must equal f on semilattice pair ({a},{b})")
        elif kind == MAJORITY:
            if p[a][b] != b or p[b][a] != a:
                out.append(f"p must be second projection on majority pair ({a},{b})")
        else:
            if p[a][b] != a or p[b][a] != b:
                out.append(f"p must be first projection on affine pair ({a},{b})")
        for cell in _pair_cells(a, b, 3):
            x, y, z = cell
            if kind == SEMILATTICE:
                want_g = want_h = f[f[x][y]][z]
            elif kind == MAJORITY:
                want_g, want_h = _majority_value(x, y, z), x
            else:
                want_g, want_h = x, _minority_value(x, y, z)
            if g[x][y][z] != want_g:
                out.append(f"g({x},{y},{z})={g[x][y][z]} should be {want_g} "
                           f"on {kind} pair ({a},{b})")
            if h[x][y][z] != want_h:
                out.append(f"h({x},{y},{z})={h[x][y][z]} should be {want_h} "
                           f"on {kind} pair ({a},{b})")
    rels = [r for r in relations if r.tuples]
    if rels:
        size = alg.size
        for name, tab in alg.binary_ops().items():
            if not binary_preserves(tab, rels, size):
                out.append(f"{name} is not a polymorphism of the language")
        for name, tab in alg.ternary_ops().items():
            if not ternary_preserves(tab, rels, size):
                out.append(f"{name} is not a polymorphism of the language")
    return out


def derive_m(alg: Algebra):
    """Compose m(x,y,z) = h(g(x,y,z), g(y,z,x), g(z,x,y)) as a table."""
    n = alg.size
    return tuple(
        tuple(
            tuple(alg.h[alg.g[x][y][z]][alg.g[y][z][x]][alg.g[z][x][y]]
                  for z in range(n))
            for y in range(n))
        for x in range(n))


def gmm_violations(m, domain: Iterable[int], graph: EdgeLabeledGraph) -> list[str]:
    """Check m is majority on majority pairs and Maltsev on affine pairs."""
    out = []
    dom = sorted(domain)
    for a, b in itertools.combinations(dom, 2):
        kind = graph.kind(a, b)
        if kind == MAJORITY:
            for cell in _pair_cells(a, b, 3):
                x, y, z = cell
                if m[x][y][z] != _majority_value(x, y, z):
                    out.append(f"m not majority at ({x},{y},{z})")
        elif kind == AFFINE:
            for x, y in ((a, b), (b, a)):
                if m[x][y][y] != x or m[y][y][x] != x:
                    out.append(f"m not Maltsev on affine pair ({a},{b})")
    return out
