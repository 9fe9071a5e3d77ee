"""The two problem reductions used by the solver.

1. Component exclusion: choose one as-component per variable meeting every
   constraint (a consistent collection), split the instance along strands,
   and either combine the strand solutions or exclude a failed strand's
   components from the domains.

2. Retraction via the multiplied instance: build an instance over variables
   (v, b) whose solutions induce consistent self-maps of the domains;
   iterate a non-permutational family to idempotency and retract the
   instance onto the images, strictly shrinking it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .classify import EdgeLabeledGraph
from .errors import InternalInvariantError, InvalidArgumentError
from .minimality import MinimalityTables
from .model import (Algebra, Constraint, Instance, Relation, SolveResult,
                    close_under_ops, project, relation, summ,
                    verify_assignment)
from .structure import as_components, strands_of_instance

ConsistentCollection = dict  # variable -> frozenset (an as-component)


def _constraint_ok(scope: tuple, rel: Relation, chosen: dict) -> bool:
    positions = [i for i, v in enumerate(scope) if v in chosen]
    if not positions:
        return True
    for t in rel.tuples:
        if all(t[i] in chosen[scope[i]] for i in positions):
            return True
    return False


def _table_ok(key: tuple, tuples, chosen: dict) -> bool:
    positions = [i for i, v in enumerate(key) if v in chosen]
    if not positions:
        return True
    for t in tuples:
        if all(t[i] in chosen[key[i]] for i in positions):
            return True
    return False


def find_consistent_collection(inst: Instance, graph: EdgeLabeledGraph,
                               tables: Optional[MinimalityTables] = None
                               ) -> ConsistentCollection:
    """Extend a collection variable by variable, never backtracking.

    On a 3-minimal instance some extension always exists; failure to extend
    therefore signals an upstream bug and raises loudly.
    """
    by_var_cons: dict = {v: [] for v in inst.variables}
    for scope, rel in inst.constraints:
        for v in set(scope):
            by_var_cons[v].append((scope, rel))
    by_var_tabs: dict = {v: [] for v in inst.variables}
    if tables is not None:
        for key, tups in tables.nontrivial_items():
            for v in key:
                by_var_tabs[v].append((key, tups))

    coll: ConsistentCollection = {}
    for v in inst.variables:
        found = None
        for comp in as_components(inst.domains[v], graph):
            coll[v] = comp
            if all(_constraint_ok(s, r, coll) for s, r in by_var_cons[v]) and \
               all(_table_ok(k, t, coll) for k, t in by_var_tabs[v]):
                found = comp
                break
            del coll[v]
        if found is None:
            raise InternalInvariantError(
                f"no as-component of {v!r} extends the partial collection; "
                "the instance is not 3-minimal or tables are stale")
    return coll


def split_by_strands(inst: Instance, coll: ConsistentCollection) -> list[Instance]:
    """One sub-instance per strand, domains narrowed to the chosen components."""
    out = []
    for strand in strands_of_instance(inst, coll):
        svars = [v for v in inst.variables if v in strand]
        doms = {v: coll[v] for v in svars}
        cons = []
        seen = set()
        for scope, rel in inst.constraints:
            positions = [i for i, v in enumerate(scope) if v in strand]
            if not positions:
                continue
            sub_scope = tuple(scope[i] for i in positions)
            proj = project(rel, positions)
            keep = frozenset(t for t in proj.tuples
                             if all(t[k] in coll[sub_scope[k]]
                                    for k in range(len(t))))
            key = (sub_scope, keep)
            if key in seen:
                continue
            seen.add(key)
            cons.append(Constraint(sub_scope, relation(
                keep, signature=[coll[v] for v in sub_scope])))
        out.append(Instance(svars, doms, cons, inst.algebra))
    return out


def combine_solutions(inst: Instance, coll: ConsistentCollection,
                      solutions: Sequence[dict]) -> dict:
    """Concatenate per-strand solutions; the result must satisfy everything."""
    merged: dict = {}
    for sol in solutions:
        merged.update(sol)
    missing = [v for v in inst.variables if v not in merged]
    if missing:
        raise InternalInvariantError(f"combined solution misses {missing}")
    bad = verify_assignment(inst, merged)
    if bad:
        raise InternalInvariantError(
            "strand combination violates a constraint; rectangularity failed: "
            f"{bad[0].scope}")
    return merged


def exclude_components(inst: Instance, coll: ConsistentCollection,
                       strand) -> Optional[Instance]:
    """Drop the chosen components on a failed strand; None if a domain dies."""
    new_doms = {}
    for v in inst.variables:
        dom = inst.domains[v] - coll[v] if v in strand else inst.domains[v]
        if not dom:
            return None
        new_doms[v] = dom
    cons = []
    for scope, rel in inst.constraints:
        keep = frozenset(t for t in rel.tuples
                         if all(t[i] in new_doms[scope[i]]
                                for i in range(len(t))))
        cons.append(Constraint(scope, relation(
            keep, signature=[new_doms[v] for v in scope])))
    smaller = Instance(inst.variables, new_doms, cons, inst.algebra)
    if summ(smaller) >= summ(inst):
        raise InternalInvariantError("component exclusion did not shrink summ")
    return smaller


def arc_free_elements(domain, graph: EdgeLabeledGraph) -> frozenset:
    """Elements of the domain receiving no semilattice arc from inside it."""
    dom = sorted(domain)
    out = set(dom)
    for a, b in itertools.permutations(dom, 2):
        if graph.semilattice_arc(a, b):
            out.discard(b)
    return frozenset(out)


def arc_free_restriction(inst: Instance,
                         graph: EdgeLabeledGraph) -> Optional[Instance]:
    """Restrict every domain to its arc-free elements; None if one empties."""
    new_doms = {}
    for v in inst.variables:
        b = arc_free_elements(inst.domains[v], graph)
        if not b:
            return None
        new_doms[v] = b
    cons = []
    for scope, rel in inst.constraints:
        keep = frozenset(t for t in rel.tuples
                         if all(t[i] in new_doms[scope[i]]
                                for i in range(len(t))))
        cons.append(Constraint(scope, relation(
            keep, signature=[new_doms[v] for v in scope])))
    return Instance(inst.variables, new_doms, cons, inst.algebra)


def multiplied_instance(inst: Instance, alg: Algebra,
                        forced: Optional[tuple] = None) -> Instance:
    """The instance over variables (v, b) with left-multiplied domains.

    Per original variable v there is one aligning constraint tying all its
    copies to a common multiplier; per original constraint and tuple there
    is one image constraint.  `forced=(w, d)` adds unary constraints pinning
    every copy of w to its product with d, making every induced map
    collapse toward d.  Aligning relations are closed under the algebra's
    operations so the result stays inside the solvable class.
    """
    f = alg.f
    variables = []
    doms = {}
    for v in inst.variables:
        for b in sorted(inst.domains[v]):
            var = (v, b)
            variables.append(var)
            doms[var] = frozenset(f[b][x] for x in inst.domains[v])
    cons: list[Constraint] = []
    for v in inst.variables:
        enum = sorted(inst.domains[v])
        scope = tuple((v, b) for b in enum)
        seed = {tuple(f[b][c] for b in enum) for c in enum}
        closed = close_under_ops(seed, alg)
        cons.append(Constraint(scope, relation(
            closed.tuples, signature=[doms[s] for s in scope])))
    for scope, rel in inst.constraints:
        for a in rel.sorted_tuples():
            sub_scope = tuple((scope[i], a[i]) for i in range(len(scope)))
            tuples = {tuple(f[a[i]][x[i]] for i in range(len(a)))
                      for x in rel.tuples}
            cons.append(Constraint(sub_scope, relation(
                tuples, signature=[doms[s] for s in sub_scope])))
    if forced is not None:
        w, d = forced
        if w not in inst.domains or d not in inst.domains[w]:
            raise InvalidArgumentError(f"forced pair {forced!r} is not valid")
        for b in sorted(inst.domains[w]):
            val = f[b][d]
            cons.append(Constraint(((w, b),),
                                   relation([(val,)], signature=[doms[(w, b)]])))
    return Instance(variables, doms, cons, alg)


def maps_from_solution(inst: Instance, solution: dict) -> dict:
    """Extract the per-variable self-maps a multiplied-instance solution induces."""
    maps = {}
    for v in inst.variables:
        maps[v] = {b: solution[(v, b)] for b in sorted(inst.domains[v])}
    bad = maps_consistency_witness(inst, maps)
    if bad is not None:
        raise InternalInvariantError(
            f"induced maps are not consistent: image of {bad} leaves its relation")
    return maps


def maps_consistency_witness(inst: Instance, maps: dict) -> Optional[tuple]:
    for scope, rel in inst.constraints:
        for a in rel.tuples:
            image = tuple(maps[scope[i]][a[i]] for i in range(len(a)))
            if image not in rel:
                return a
    return None


def is_permutational(maps: dict) -> bool:
    return all(len(set(p.values())) == len(p) for p in maps.values())


def idempotent_power(maps: dict) -> dict:
    """Iterate the family to a common idempotent power.

    A single squaring pass cannot reach idempotency for maps with cycles of
    odd length, so powers are walked one composition at a time until every
    map is idempotent; the exponent is shared across variables, preserving
    consistency.
    """
    def idempotent(p):
        return all(p[p[b]] == p[b] for b in p)

    cur = {v: dict(p) for v, p in maps.items()}
    for _ in range(1000):
        if all(idempotent(p) for p in cur.values()):
            return cur
        cur = {v: {b: maps[v][cur[v][b]] for b in cur[v]} for v in cur}
    raise InternalInvariantError("no idempotent power within bound")


def retract_instance(inst: Instance, maps: dict) -> Instance:
    """Restrict the instance to the images of idempotent consistent maps."""
    for v, p in maps.items():
        for b in p:
            if p[p[b]] != p[b]:
                raise InvalidArgumentError("maps must be idempotent")
    if is_permutational(maps):
        raise InvalidArgumentError("retraction needs a non-permutational family")
    new_doms = {v: frozenset(maps[v][b] for b in maps[v])
                for v in inst.variables}
    cons = []
    for scope, rel in inst.constraints:
        tuples = {tuple(maps[scope[i]][t[i]] for i in range(len(t)))
                  for t in rel.tuples}
        cons.append(Constraint(scope, relation(
            tuples, signature=[new_doms[v] for v in scope])))
    smaller = Instance(inst.variables, new_doms, cons, inst.algebra)
    if summ(smaller) >= summ(inst):
        raise InternalInvariantError("retraction did not shrink summ")
    return smaller


@dataclass(frozen=True)
class RetractionOutcome:
    kind: str  # "solved" | "retract" | "no-solution"
    assignment: Optional[dict] = None
    maps: Optional[dict] = None


def retraction_step(inst: Instance, graph: EdgeLabeledGraph, alg: Algebra,
                    solve_fn: Callable[[Instance, str], SolveResult],
                    fast_probe: bool = False) -> RetractionOutcome:
    """One round of the multiplied-instance reduction.

    First solve the arc-free restriction; its solutions solve the instance
    directly.  Otherwise look for consistent non-permutational maps through
    forced multiplied instances (optionally probing the plain one first)
    and return the retraction material, or conclude unsatisfiability.
    """
    restricted = arc_free_restriction(inst, graph)
    if restricted is not None:
        res = solve_fn(restricted, "restriction-solve")
        if res.is_sat:
            if verify_assignment(inst, res.assignment):
                raise InternalInvariantError(
                    "arc-free solution fails the original instance")
            return RetractionOutcome("solved", assignment=res.assignment)

    if fast_probe:
        probe = solve_fn(multiplied_instance(inst, alg), "multiplied-probe")
        if probe.is_sat:
            maps = maps_from_solution(inst, probe.assignment)
            if not is_permutational(maps):
                return RetractionOutcome("retract", maps=idempotent_power(maps))

    for w in inst.variables:
        b_free = arc_free_elements(inst.domains[w], graph)
        for d in sorted(inst.domains[w] - b_free):
            forced = multiplied_instance(inst, alg, forced=(w, d))
            res = solve_fn(forced, "forced-multiplied")
            if not res.is_sat:
                continue
            maps = maps_from_solution(inst, res.assignment)
            if is_permutational(maps):
                raise InternalInvariantError(
                    "forced maps came out permutational")
            return RetractionOutcome("retract", maps=idempotent_power(maps))
    return RetractionOutcome("no-solution")
