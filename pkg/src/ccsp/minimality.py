"""Establish and test 3-minimality: the partial-solution tables.

The tables keep, for every variable set W with |W| <= 3, the candidate
partial assignments on W surviving mutual filtering against all constraints
and against each other on overlaps.  Tables whose value equals the obvious
join of smaller tables are never materialized: a pair table defaults to the
product of the two domains, a triple table to the pairwise join.  A triple
whose three pair tables include at most one non-default pair cannot tighten
anything once pairs project onto domains, so propagation only visits
materialized triples and triples with at least two non-default pairs.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Optional, Sequence

from .model import Constraint, Instance, relation

VarSet = tuple


class MinimalityTables:
    """Partial-solution tables over all variable sets of size <= 3."""

    def __init__(self, variables: Sequence, domains: dict,
                 pairs: dict, triples: dict):
        self.variables = tuple(variables)
        self.domains = {v: frozenset(domains[v]) for v in self.variables}
        self.pairs = {k: frozenset(v) for k, v in pairs.items()}
        self.triples = {k: frozenset(v) for k, v in triples.items()}
        self._order = {v: i for i, v in enumerate(self.variables)}

    def sort_vars(self, ws: Iterable) -> VarSet:
        return tuple(sorted(set(ws), key=self._order.__getitem__))

    def pair(self, u, v) -> frozenset:
        key = self.sort_vars((u, v))
        if key in self.pairs:
            return self.pairs[key]
        a, b = key
        return frozenset(itertools.product(sorted(self.domains[a]),
                                           sorted(self.domains[b])))

    def triple(self, u, v, w) -> frozenset:
        key = self.sort_vars((u, v, w))
        if key in self.triples:
            return self.triples[key]
        a, b, c = key
        ab, ac, bc = self.pair(a, b), self.pair(a, c), self.pair(b, c)
        return frozenset((x, y, z)
                         for (x, y) in ab
                         for z in sorted(self.domains[c])
                         if (x, z) in ac and (y, z) in bc)

    def table(self, ws: Iterable) -> frozenset:
        key = self.sort_vars(ws)
        if len(key) == 1:
            return frozenset((a,) for a in self.domains[key[0]])
        if len(key) == 2:
            return self.pair(*key)
        if len(key) == 3:
            return self.triple(*key)
        raise ValueError("tables exist only for 1..3 variables")

    def nontrivial_items(self):
        """Materialized (variable-set, tuple-set) pairs, pairs then triples."""
        for key in sorted(self.pairs, key=lambda k: tuple(self._order[v] for v in k)):
            yield key, self.pairs[key]
        for key in sorted(self.triples, key=lambda k: tuple(self._order[v] for v in k)):
            yield key, self.triples[key]


class Propagator:
    """Mutable fixpoint engine behind establish_3_minimality."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.variables = inst.variables
        self._order = {v: i for i, v in enumerate(self.variables)}
        self.doms: dict = {v: set(inst.domains[v]) for v in self.variables}
        self.pairs: dict[VarSet, set] = {}
        self.triples: dict[VarSet, set] = {}
        self.cons: list[tuple[tuple, list, set]] = []
        for scope, rel in inst.constraints:
            svars = self.sort_vars(scope)
            keep = set()
            for t in rel.tuples:
                asg = {}
                ok = True
                for var, val in zip(scope, t):
                    if asg.setdefault(var, val) != val:
                        ok = False
                        break
                if ok:
                    keep.add(t)
            self.cons.append((tuple(scope), list(svars), keep))
        self.failed = False

    def sort_vars(self, ws: Iterable) -> VarSet:
        return tuple(sorted(set(ws), key=self._order.__getitem__))

    # -- table access -------------------------------------------------
    def pair_value(self, key: VarSet) -> set:
        if key in self.pairs:
            return self.pairs[key]
        a, b = key
        return {(x, y) for x in self.doms[a] for y in self.doms[b]}

    def _join(self, key: VarSet) -> set:
        a, b, c = key
        ab = self.pair_value((a, b))
        ac = self.pair_value((a, c))
        bc = self.pair_value((b, c))
        return {(x, y, z) for (x, y) in ab for z in self.doms[c]
                if (x, z) in ac and (y, z) in bc}

    def triple_value(self, key: VarSet) -> set:
        return self.triples[key] if key in self.triples else self._join(key)

    # -- shrink helpers ------------------------------------------------
    def _set_pair(self, key: VarSet, value: set) -> bool:
        old = self.pair_value(key)
        if value >= old:
            return False
        self.pairs[key] = value
        if not value:
            self.failed = True
        return True

    def _set_triple(self, key: VarSet, value: set) -> bool:
        old = self.triple_value(key)
        if value >= old:
            self.triples.setdefault(key, value)
            return False
        self.triples[key] = value
        if not value:
            self.failed = True
        return True

    def _set_dom(self, v, value: set) -> bool:
        if value >= self.doms[v]:
            return False
        self.doms[v] = value
        if not value:
            self.failed = True
        return True

    # -- passes ---------------------------------------------------------
    def _constraint_pass(self) -> bool:
        changed = False
        for scope, svars, tuples in self.cons:
            if self.failed:
                return changed
            subsets = []
            for size in (1, 2, 3):
                subsets.extend(itertools.combinations(svars, size))
            keep = set()
            for t in tuples:
                asg = dict(zip(scope, t))
                ok = all(asg[v] in self.doms[v] for v in svars)
                if ok:
                    for key in subsets:
                        if len(key) == 2 and key in self.pairs:
                            if tuple(asg[v] for v in key) not in self.pairs[key]:
                                ok = False
                                break
                        elif len(key) == 3 and key in self.triples:
                            if tuple(asg[v] for v in key) not in self.triples[key]:
                                ok = False
                                break
                if ok:
                    keep.add(t)
            if len(keep) < len(tuples):
                tuples.intersection_update(keep)
                changed = True
            if not tuples:
                self.failed = True
                return True
            for key in subsets:
                supports = {tuple(dict(zip(scope, t))[v] for v in key)
                            for t in tuples}
                if len(key) == 1:
                    if self._set_dom(key[0], {s[0] for s in supports}
                                     & self.doms[key[0]]):
                        changed = True
                elif len(key) == 2:
                    if self._set_pair(key, self.pair_value(key) & supports):
                        changed = True
                else:
                    if self._set_triple(key, self.triple_value(key) & supports):
                        changed = True
        return changed

    def _pair_pass(self) -> bool:
        changed = False
        for key in list(self.pairs):
            a, b = key
            val = {t for t in self.pairs[key]
                   if t[0] in self.doms[a] and t[1] in self.doms[b]}
            if self._set_pair(key, val):
                changed = True
            if self._set_dom(a, {t[0] for t in val}):
                changed = True
            if self._set_dom(b, {t[1] for t in val}):
                changed = True
            if self.failed:
                return True
        return changed

    def _candidate_triples(self) -> set[VarSet]:
        cands = set(self.triples)
        partners: dict = {}
        for (a, b) in self.pairs:
            partners.setdefault(a, set()).add(b)
            partners.setdefault(b, set()).add(a)
        for (a, b) in self.pairs:
            for w in partners.get(a, ()) | partners.get(b, ()):
                if w not in (a, b):
                    cands.add(self.sort_vars((a, b, w)))
        return cands

    def _triple_pass(self) -> bool:
        changed = False
        for key in sorted(self._candidate_triples(),
                          key=lambda k: tuple(self._order[v] for v in k)):
            a, b, c = key
            stored = self.triples.get(key)
            join = self._join(key)
            val = join if stored is None else (stored & join)
            if stored is None or val < stored:
                self.triples[key] = val
                if stored is not None and val < stored:
                    changed = True
            if not val:
                self.failed = True
                return True
            for (i, j, pkey) in (((0, 1), None, (a, b)), ((0, 2), None, (a, c)),
                                 ((1, 2), None, (b, c))):
                proj = {(t[i[0]], t[i[1]]) for t in val}
                if self._set_pair(pkey, self.pair_value(pkey) & proj):
                    changed = True
            if self.failed:
                return True
        return changed

    def run(self) -> bool:
        """Propagate to the global fixpoint; False means inconsistent."""
        while not self.failed:
            changed = self._constraint_pass()
            if self._pair_pass():
                changed = True
            if self._triple_pass():
                changed = True
            if not changed:
                break
        return not self.failed

    def one_round_stable(self) -> bool:
        changed = self._constraint_pass()
        changed = self._pair_pass() or changed
        changed = self._triple_pass() or changed
        return not changed and not self.failed

    def assign(self, v, a) -> bool:
        """Restrict a variable to one value and re-propagate."""
        if a not in self.doms[v]:
            return False
        self.doms[v] = {a}
        return self.run()

    def snapshot(self) -> tuple[MinimalityTables, Instance]:
        tables = MinimalityTables(self.variables, self.doms, self.pairs,
                                  self.triples)
        cons = []
        for scope, _svars, tuples in self.cons:
            sig = [self.inst.domains[v] & frozenset(self.doms[v]) for v in scope]
            cons.append(Constraint(scope, relation(tuples, signature=sig)))
        pruned = Instance(self.variables,
                          {v: frozenset(self.doms[v]) for v in self.variables},
                          cons, self.inst.algebra)
        return tables, pruned


def establish_3_minimality(inst: Instance
                           ) -> Optional[tuple[Instance, MinimalityTables]]:
    """Mutually filter tables, constraints and domains to a fixpoint.

    Returns the pruned, solution-equivalent instance together with its
    tables, or None when some table empties (the instance is unsatisfiable).
    """
    engine = Propagator(inst)
    if not engine.run():
        return None
    tables, pruned = engine.snapshot()
    return pruned, tables


def is_3_minimal(inst: Instance, tables: MinimalityTables) -> bool:
    """True iff one more filtering round changes nothing.

    The instance and the tables are taken as one combined state: the
    instance must carry domains matching the tables, and its constraints
    must already be pruned against them.
    """
    for v in inst.variables:
        if inst.domains[v] != tables.domains[v]:
            return False
    engine = Propagator(inst)
    for key, val in tables.pairs.items():
        engine.pairs[key] = set(val)
    for key, val in tables.triples.items():
        engine.triples[key] = set(val)
    return engine.one_round_stable()
