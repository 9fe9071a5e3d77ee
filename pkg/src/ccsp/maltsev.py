"""Compact-representation solver for instances with a Maltsev polymorphism.

Used by the semilattice-free base solver on domains whose pairs are all
affine: there the derived ternary operation m satisfies m(x,y,y) = x and
m(y,y,x) = x on every domain, and every constraint relation is closed under
componentwise m.

A relation R over coordinates 0..n-1 is handled through a *representation*:
a small subset of R that, for every position q and pair of values (a, b),
contains a witness pair of tuples agreeing strictly before q and taking
values a and b at q whenever R does.  Such a subset generates R under m,
and R is empty iff the subset is.  Constraints are folded in one at a time:
`restrict` rebuilds a representation of the restricted relation by
transporting witness pairs with m and repairing off-constraint results by
catalog-guided walks.  The rule set is exercised against brute-force
closures in the test suite.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

Row = tuple[int, ...]


def m_apply(m: Sequence, x: Row, y: Row, z: Row) -> Row:
    return tuple(m[a][b][c] for a, b, c in zip(x, y, z))


def m_closure(seed: Iterable[Row], m: Sequence) -> frozenset[Row]:
    """Brute-force closure of a tuple set under componentwise m (test oracle)."""
    done = set(tuple(t) for t in seed)
    frontier = list(done)
    while frontier:
        fresh = []
        all_rows = list(done)
        for t in frontier:
            for u in all_rows:
                for v in all_rows:
                    for cand in (m_apply(m, t, u, v), m_apply(m, u, t, v),
                                 m_apply(m, u, v, t)):
                        if cand not in done:
                            done.add(cand)
                            fresh.append(cand)
        frontier = fresh
    return frozenset(done)


def signature_of(rows: Iterable[Row]) -> set[tuple[int, int, int]]:
    """All (q, a, b) with two tuples agreeing before q and valued a, b at q."""
    rows = list(rows)
    sig: set[tuple[int, int, int]] = set()
    for i, t in enumerate(rows):
        for u in rows[i:]:
            n = len(t)
            for q in range(n):
                sig.add((q, t[q], u[q]))
                sig.add((q, u[q], t[q]))
                if t[q] != u[q]:
                    break
    return sig


class Representation:
    """Rows plus a witness catalog keyed by (position, value-at, value-to).

    `generation` counts catalog/coverage growth so callers can cheaply tell
    whether retrying a previously failed walk could now succeed.
    """

    def __init__(self, n: int):
        self.n = n
        self.rows: list[Row] = []
        self.catalog: dict[tuple[int, int, int], tuple[int, int]] = {}
        self.coverage: dict[tuple[int, int], int] = {}
        self.generation = 0
        self._index: set[Row] = set()
        self._mat = np.empty((0, n), dtype=np.int16)

    def __len__(self):
        return len(self.rows)

    @property
    def empty(self) -> bool:
        return not self.rows

    def __contains__(self, row: Row) -> bool:
        return row in self._index

    def _grow_mat(self, row: Row):
        arr = np.asarray(row, dtype=np.int16)[None, :]
        self._mat = np.concatenate([self._mat, arr])

    def would_be_novel(self, row: Row) -> bool:
        """True if inserting the row adds coverage or a new catalog entry."""
        if row in self._index:
            return False
        if any((q, a) not in self.coverage for q, a in enumerate(row)):
            return True
        k = len(self.rows)
        if k == 0:
            return True
        diffs = self._mat[:k] != np.asarray(row, dtype=np.int16)
        qs = diffs.argmax(axis=1)
        hit = diffs[np.arange(k), qs]
        for j in np.nonzero(hit)[0].tolist():
            q = int(qs[j])
            other = self.rows[j]
            if (q, other[q], row[q]) not in self.catalog:
                return True
            if (q, row[q], other[q]) not in self.catalog:
                return True
        return False

    def add(self, row: Row) -> bool:
        """Insert a row, harvesting catalog and coverage entries."""
        if row in self._index:
            return False
        idx = len(self.rows)
        if idx:
            diffs = self._mat != np.asarray(row, dtype=np.int16)
            qs = diffs.argmax(axis=1)
            hit = diffs[np.arange(idx), qs]
            for j in np.nonzero(hit)[0].tolist():
                q = int(qs[j])
                other = self.rows[j]
                if (q, other[q], row[q]) not in self.catalog:
                    self.catalog[(q, other[q], row[q])] = (j, idx)
                    self.generation += 1
                if (q, row[q], other[q]) not in self.catalog:
                    self.catalog[(q, row[q], other[q])] = (idx, j)
                    self.generation += 1
        for q, a in enumerate(row):
            if (q, a) not in self.coverage:
                self.coverage[(q, a)] = idx
                self.generation += 1
        self.rows.append(row)
        self._index.add(row)
        self._grow_mat(row)
        return True

    def witness(self, q: int, a: int, b: int) -> Optional[tuple[Row, Row]]:
        hit = self.catalog.get((q, a, b))
        if hit is None:
            return None
        i, j = hit
        return self.rows[i], self.rows[j]

    def row_with_value(self, q: int, a: int) -> Optional[Row]:
        idx = self.coverage.get((q, a))
        return None if idx is None else self.rows[idx]


def initial_representation(domains: Sequence[Sequence[int]]) -> Representation:
    """Representation of the full product of the given domains."""
    base = tuple(min(d) for d in domains)
    rep = Representation(n=len(domains))
    rep.add(base)
    for q, dom in enumerate(domains):
        for a in sorted(dom):
            if a != base[q]:
                rep.add(base[:q] + (a,) + base[q + 1:])
    return rep


def member(rep: Representation, target: Row, m: Sequence) -> bool:
    """Decide membership of a tuple in the relation a representation generates."""
    if rep.empty:
        return False
    g = rep.rows[0]
    for q in range(rep.n):
        if g[q] == target[q]:
            continue
        wit = rep.witness(q, g[q], target[q])
        if wit is None:
            return False
        g = m_apply(m, g, wit[0], wit[1])
    return g == target


class _Sweep:
    """Builds a representation of R ∩ C from a representation of R."""

    def __init__(self, parent: Representation, scope: Sequence[int],
                 allowed: frozenset[Row], m: Sequence):
        self.parent = parent
        self.scope = tuple(scope)
        self.scope_sorted = sorted(set(scope))
        self.allowed = allowed
        self.m = m
        self.n = parent.n
        self.out = Representation(n=parent.n)
        # walk cache: (start, image_idx, floor) -> generation when last tried
        self._walked: dict[tuple[Row, int, int], int] = {}

    def satisfies(self, row: Row) -> bool:
        return tuple(row[s] for s in self.scope) in self.allowed

    def _witness(self, q: int, a: int, b: int) -> Optional[tuple[Row, Row]]:
        wit = self.out.witness(q, a, b)
        if wit is None:
            wit = self.parent.witness(q, a, b)
        return wit

    def _walk(self, start: Row, floor: int, image_at: dict[int, int]) -> Optional[Row]:
        """Align scope positions >= floor to target values, ascending.

        Each alignment preserves everything before its position, so earlier
        alignments and the prefix below `floor` survive.
        """
        g = start
        for pos in self.scope_sorted:
            if pos < floor:
                continue
            val = image_at[pos]
            if g[pos] == val:
                continue
            wit = self._witness(pos, g[pos], val)
            if wit is None:
                return None
            g = m_apply(self.m, g, wit[0], wit[1])
        return g

    def _image_map(self, image: Row) -> Optional[dict[int, int]]:
        out: dict[int, int] = {}
        for pos, val in zip(self.scope, image):
            if out.setdefault(pos, val) != val:
                return None
        return out

    def _try_walk(self, start: Row, floor: int, img_idx: int) -> bool:
        key = (start, img_idx, floor)
        gen = self.out.generation
        if self._walked.get(key) == gen:
            return False
        self._walked[key] = gen
        g = self._walk(start, floor, self.image_maps[img_idx])
        if g is not None and self.satisfies(g):
            if g not in self.out and self.out.would_be_novel(g):
                return self.out.add(g)
        return False

    def run(self) -> Representation:
        self.image_maps = []
        for image in sorted(self.allowed):
            im = self._image_map(image)
            if im is not None:
                self.image_maps.append(im)

        for row in self.parent.rows:
            if self.satisfies(row) and self.out.would_be_novel(row):
                self.out.add(row)

        while True:
            grew = False
            if self._walk_pass():
                grew = True
            if self._cover_pass():
                grew = True
            if not grew:
                break
        return self.out

    def _walk_pass(self) -> bool:
        grew = False
        n_img = len(self.image_maps)
        for start in list(self.parent.rows) + list(self.out.rows):
            for i in range(n_img):
                if self._try_walk(start, 0, i):
                    grew = True
        return grew

    def _cover_pass(self) -> bool:
        """Demand-driven: target each parent fork key missing from `out`."""
        grew = False
        for (q, a, b), (pi, pj) in list(self.parent.catalog.items()):
            if a == b or (q, a, b) in self.out.catalog:
                continue
            if (q, a) not in self.out.coverage:
                continue
            x = self.out.rows[self.out.coverage[(q, a)]]
            pairs = [(self.parent.rows[pi], self.parent.rows[pj])]
            own = self.out.witness(q, a, b)
            if own is not None:
                pairs.append(own)
            for w, w2 in pairs:
                cand = m_apply(self.m, x, w, w2)
                # cand agrees with x before q and has b at q
                if self.satisfies(cand):
                    if self.out.would_be_novel(cand) and self.out.add(cand):
                        grew = True
                    continue
                if self._repair(cand, q):
                    grew = True
        return grew

    def _repair(self, cand: Row, q: int) -> bool:
        """Walk cand back into the constraint without disturbing [0..q]."""
        grew = False
        for i, im in enumerate(self.image_maps):
            if any(pos <= q and cand[pos] != val for pos, val in im.items()):
                continue
            if self._try_walk(cand, q + 1, i):
                grew = True
        return grew


def restrict(rep: Representation, scope: Sequence[int],
             allowed: Iterable[Row], m: Sequence) -> Representation:
    """Representation of {t in R : t[scope] in allowed} from one of R."""
    return _Sweep(rep, scope, frozenset(tuple(t) for t in allowed), m).run()


def solve_with_maltsev(domains: Sequence[Sequence[int]],
                       constraints: Sequence[tuple[Sequence[int], Iterable[Row]]],
                       m: Sequence) -> Optional[Row]:
    """Solve a positional CSP whose relations are all closed under m.

    `constraints` pair coordinate lists with allowed-tuple sets.  Returns a
    solution tuple or None.
    """
    if any(len(d) == 0 for d in domains):
        return None
    rep = initial_representation(domains)
    for scope, allowed in constraints:
        rep = restrict(rep, scope, allowed, m)
        if rep.empty:
            return None
    return min(rep.rows)
