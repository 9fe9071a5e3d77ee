"""The recursive driver and the semilattice-free base solver.

Driver loop: establish 3-minimality; a semilattice-free instance goes to
the base solver; an instance with a proper as-component goes through the
component-exclusion reduction (recursing on strands); otherwise all domains
are as-components with a semilattice edge somewhere and the retraction
reduction applies.  Every recursive call and every loop iteration strictly
decreases the pair (lev, summ) lexicographically, where lev is the maximal
size of a domain containing a semilattice edge; this is asserted at run
time and surfaced as an internal error if violated.

Base solver dispatch: all-majority domains extend greedily under
re-propagation (bounded strict width); all-affine domains go to the
compact-representation solver driven by the derived Maltsev operation;
mixed domains fall back to complete backtracking search pruned by
3-minimality (the generalized majority-minority interface admits this
fallback at desk scale).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .classify import (AFFINE, MAJORITY, ClassifierVerdict,
                       ConstraintLanguage, EdgeLabeledGraph, classify_language,
                       derive_m, gmm_violations)
from .errors import InternalInvariantError, InvalidArgumentError
from .maltsev import solve_with_maltsev
from .minimality import Propagator, establish_3_minimality
from .model import (UNSAT, Algebra, Instance, Relation, SolveResult, sat,
                    summ, verify_assignment)
from .reductions import (combine_solutions, exclude_components,
                         find_consistent_collection, retract_instance,
                         retraction_step, split_by_strands)
from .structure import as_components, is_semilattice_free, strands_of_instance


@dataclass
class SolveConfig:
    fast_probe: bool = False          # probe the plain multiplied instance
    mixed_strategy: str = "backtracking"  # base solver for mixed sl-free domains
    verify: bool = True


@dataclass
class SolveTrace:
    nodes: int = 0
    depth: int = 0
    branch_counts: dict = field(default_factory=dict)
    lev_checks: int = 0
    lev_violations: int = 0
    shrink_checks: int = 0
    shrink_violations: int = 0

    def bump(self, kind: str):
        self.branch_counts[kind] = self.branch_counts.get(kind, 0) + 1

    def as_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "depth": self.depth,
            "branches": dict(sorted(self.branch_counts.items())),
            "lev_checks": self.lev_checks,
            "lev_violations": self.lev_violations,
            "shrink_checks": self.shrink_checks,
            "shrink_violations": self.shrink_violations,
        }


def lev(inst: Instance, graph: EdgeLabeledGraph) -> int:
    """Maximal size of a domain containing a semilattice edge; 0 if none."""
    worst = 0
    for v in inst.variables:
        dom = inst.domains[v]
        if not is_semilattice_free(dom, graph):
            worst = max(worst, len(dom))
    return worst


def _domain_pair_kinds(inst: Instance, graph: EdgeLabeledGraph) -> set[str]:
    kinds = set()
    for v in inst.variables:
        dom = sorted(inst.domains[v])
        for a, b in itertools.combinations(dom, 2):
            kinds.add(graph.kind(a, b))
    return kinds


def _assignment_from_domains(engine: Propagator) -> dict:
    return {v: min(engine.doms[v]) for v in engine.variables}


def _solve_majority(inst: Instance) -> SolveResult:
    """Greedy extension with re-propagation; never dead-ends under a
    majority polymorphism once the instance is 3-minimal and nonempty."""
    engine = Propagator(inst)
    if not engine.run():
        return UNSAT
    for v in engine.variables:
        if len(engine.doms[v]) == 1:
            continue
        value = min(engine.doms[v])
        if not engine.assign(v, value):
            raise InternalInvariantError(
                f"majority-domain greedy extension dead-ended at {v!r}; "
                "bounded strict width violated")
    return sat(_assignment_from_domains(engine))


def _solve_affine(inst: Instance, graph: EdgeLabeledGraph,
                  alg: Algebra) -> SolveResult:
    m = derive_m(alg)
    for v in inst.variables:
        bad = gmm_violations(m, inst.domains[v], graph)
        if bad:
            raise InternalInvariantError(
                f"derived operation is not Maltsev on domain of {v!r}: {bad[0]}")
    order = {v: i for i, v in enumerate(inst.variables)}
    domains = [sorted(inst.domains[v]) for v in inst.variables]
    constraints = []
    for scope, rel in inst.constraints:
        if not rel.tuples:
            return UNSAT
        constraints.append(([order[v] for v in scope], rel.tuples))
    row = solve_with_maltsev(domains, constraints, m)
    if row is None:
        return UNSAT
    return sat({v: row[order[v]] for v in inst.variables})


def _solve_mixed_backtracking(inst: Instance) -> SolveResult:
    """Complete search with 3-minimality pruning at every assignment."""
    est = establish_3_minimality(inst)
    if est is None:
        return UNSAT
    pruned, _tables = est
    open_vars = [v for v in pruned.variables if len(pruned.domains[v]) > 1]
    if not open_vars:
        assignment = {v: min(pruned.domains[v]) for v in pruned.variables}
        if verify_assignment(pruned, assignment):
            return UNSAT
        return sat(assignment)
    v = min(open_vars, key=lambda u: (len(pruned.domains[u]),
                                      pruned.variables.index(u)))
    for a in sorted(pruned.domains[v]):
        doms = dict(pruned.domains)
        doms[v] = frozenset({a})
        res = _solve_mixed_backtracking(pruned.with_domains(doms))
        if res.is_sat:
            return res
    return UNSAT


def solve_semilattice_free(inst: Instance, graph: EdgeLabeledGraph,
                           alg: Algebra,
                           config: Optional[SolveConfig] = None) -> SolveResult:
    """Base solver: majority, affine, or mixed majority/affine domains."""
    config = config or SolveConfig()
    if not is_semilattice_free(inst, graph):
        raise InvalidArgumentError("instance is not semilattice-free")
    m = derive_m(alg)
    for v in inst.variables:
        bad = gmm_violations(m, inst.domains[v], graph)
        if bad:
            raise InternalInvariantError(
                f"derived operation misbehaves on domain of {v!r}: {bad[0]}")
    est = establish_3_minimality(inst)
    if est is None:
        return UNSAT
    pruned, _tables = est
    kinds = _domain_pair_kinds(pruned, graph)
    if kinds <= {MAJORITY}:
        res = _solve_majority(pruned)
    elif kinds <= {AFFINE}:
        res = _solve_affine(pruned, graph, alg)
    else:
        if config.mixed_strategy != "backtracking":
            raise InvalidArgumentError(
                f"unknown mixed-domain strategy {config.mixed_strategy!r}")
        res = _solve_mixed_backtracking(pruned)
    if res.is_sat and config.verify:
        bad = verify_assignment(inst, res.assignment)
        if bad:
            raise InternalInvariantError(
                "base solver produced a non-solution")
    return res


def solve(inst: Instance, alg: Algebra, graph: EdgeLabeledGraph,
          config: Optional[SolveConfig] = None
          ) -> tuple[SolveResult, SolveTrace]:
    """Full recursive solver; returns the verdict and a recursion trace."""
    config = config or SolveConfig()
    trace = SolveTrace()

    def measure(i: Instance) -> tuple[int, int]:
        return (lev(i, graph), summ(i))

    def check_less(child: Instance, parent_measure: tuple[int, int], what: str):
        trace.shrink_checks += 1
        if not measure(child) < parent_measure:
            trace.shrink_violations += 1
            raise InternalInvariantError(
                f"termination measure did not decrease into {what}: "
                f"{measure(child)} !< {parent_measure}")

    def check_lev(child: Instance, parent_lev: int, what: str):
        trace.lev_checks += 1
        if not lev(child, graph) < parent_lev:
            trace.lev_violations += 1
            raise InternalInvariantError(
                f"lev did not decrease into {what}: "
                f"{lev(child, graph)} !< {parent_lev}")

    def inner(cur: Instance, depth: int) -> SolveResult:
        trace.nodes += 1
        trace.depth = max(trace.depth, depth)
        while True:
            est = establish_3_minimality(cur)
            if est is None:
                return UNSAT
            pruned, tables = est

            if is_semilattice_free(pruned, graph):
                trace.bump("sfree")
                return solve_semilattice_free(pruned, graph, alg, config)

            here = measure(pruned)
            has_proper = any(
                as_components(pruned.domains[v], graph) !=
                [frozenset(pruned.domains[v])]
                for v in pruned.variables)

            if has_proper:
                trace.bump("exclusion")
                coll = find_consistent_collection(pruned, graph, tables)
                strands = strands_of_instance(pruned, coll)
                subs = split_by_strands(pruned, coll)
                solutions = []
                failed_strand = None
                for strand, sub in zip(strands, subs):
                    check_less(sub, here, "a strand sub-instance")
                    res = inner(sub, depth + 1)
                    if not res.is_sat:
                        failed_strand = strand
                        break
                    solutions.append(res.assignment)
                if failed_strand is None:
                    return sat(combine_solutions(pruned, coll, solutions))
                trace.bump("exclusion-restart")
                nxt = exclude_components(pruned, coll, failed_strand)
                if nxt is None:
                    return UNSAT
                check_less(nxt, here, "the exclusion restart")
                cur = nxt
                continue

            trace.bump("retraction")
            parent_lev = lev(pruned, graph)

            def sub_solve(sub: Instance, kind: str) -> SolveResult:
                trace.bump(kind)
                check_lev(sub, parent_lev, kind)
                return inner(sub, depth + 1)

            outcome = retraction_step(pruned, graph, alg, sub_solve,
                                      fast_probe=config.fast_probe)
            if outcome.kind == "solved":
                return sat(outcome.assignment)
            if outcome.kind == "no-solution":
                return UNSAT
            trace.bump("retract-loop")
            nxt = retract_instance(pruned, outcome.maps)
            check_less(nxt, here, "the retraction loop")
            cur = nxt

    result = inner(inst, 0)
    if result.is_sat and config.verify:
        bad = verify_assignment(inst, result.assignment)
        if bad:
            raise InternalInvariantError("solver returned a non-solution")
    return result, trace


@dataclass(frozen=True)
class PipelineResult:
    status: str  # "sat" | "unsat" | "np-complete"
    assignment: Optional[dict] = None
    witness_pair: Optional[tuple[int, int]] = None
    trace: Optional[dict] = None
    oracle_used: bool = False


def _relation_drawn_from(rel: Relation, lang: ConstraintLanguage,
                         doms: list) -> bool:
    if rel.arity == 1:
        return True
    for cand in lang.relations:
        if cand.arity != rel.arity:
            continue
        restricted = {t for t in cand.tuples
                      if all(t[i] in doms[i] for i in range(rel.arity))}
        if restricted == set(rel.tuples):
            return True
    return False


def classify_and_solve(lang: ConstraintLanguage, inst: Instance,
                       force_oracle: bool = False,
                       config: Optional[SolveConfig] = None) -> PipelineResult:
    """Classify the language, then either refuse (NP-complete) or solve.

    With `force_oracle`, an NP-complete language is still solved by the
    brute-force oracle and the result flagged accordingly.
    """
    for scope, rel in inst.constraints:
        doms = [inst.domains[v] for v in scope]
        if not _relation_drawn_from(rel, lang, doms):
            raise InvalidArgumentError(
                f"constraint over {scope} is not drawn from the language")
    verdict: ClassifierVerdict = classify_language(lang)
    if not verdict.tractable:
        if not force_oracle:
            return PipelineResult("np-complete",
                                  witness_pair=verdict.witness_pair)
        from .harness import brute_force_solve
        res = brute_force_solve(inst)
        return PipelineResult(res.status, res.assignment,
                              witness_pair=verdict.witness_pair,
                              oracle_used=True)
    attached = Instance(inst.variables, inst.domains, inst.constraints,
                        verdict.algebra)
    res, trace = solve(attached, verdict.algebra, verdict.graph, config)
    return PipelineResult(res.status, res.assignment, trace=trace.as_dict())
