import itertools

import pytest

from ccsp.classify import (AFFINE, MAJORITY, ConstraintLanguage,
                           EdgeLabeledGraph, PairLabel, semilattice_label)
from ccsp.errors import InvalidArgumentError
from ccsp.harness import (GeneratorConfig, brute_force_solve, canonical_a3,
                          canonical_algebra, gen_algebra, gen_instance)
from ccsp.model import Instance, close_under_ops, relation, verify_assignment
from ccsp.solver import (SolveConfig, classify_and_solve, lev, solve,
                         solve_semilattice_free)


def graph_of(n, kind):
    return EdgeLabeledGraph(n, {p: PairLabel(kind) for p in
                                itertools.combinations(range(n), 2)})


def test_lev_measure():
    alg, graph = canonical_a3()
    inst = Instance(["v", "w"], {"v": {0, 1, 2}, "w": {1, 2}}, [], alg)
    assert lev(inst, graph) == 3
    sl_free = Instance(["v"], {"v": {1, 2}}, [], alg)
    assert lev(sl_free, graph) == 0


# -- semilattice-free base solver ---------------------------------------------

def test_triangle_disequality_unsat():
    graph = graph_of(2, MAJORITY)
    alg = canonical_algebra(graph)
    neq = relation([(0, 1), (1, 0)])
    inst = Instance(["x", "y", "z"], {v: {0, 1} for v in "xyz"},
                    [(("x", "y"), neq), (("y", "z"), neq), (("x", "z"), neq)],
                    alg)
    assert not solve_semilattice_free(inst, graph, alg).is_sat


def test_xor_system_sat():
    graph = graph_of(2, AFFINE)
    alg = canonical_algebra(graph)
    xor1 = relation([(0, 1), (1, 0)])   # x + y = 1
    eq = relation([(0, 0), (1, 1)])     # x + z = 0
    inst = Instance(["x", "y", "z"], {v: {0, 1} for v in "xyz"},
                    [(("x", "y"), xor1), (("y", "z"), xor1), (("x", "z"), eq)],
                    alg)
    res = solve_semilattice_free(inst, graph, alg)
    assert res.is_sat
    assert verify_assignment(inst, res.assignment) == []


def test_empty_constraints_sat():
    graph = graph_of(3, MAJORITY)
    alg = canonical_algebra(graph)
    inst = Instance(["x", "y"], {"x": {0, 2}, "y": {1}}, [], alg)
    res = solve_semilattice_free(inst, graph, alg)
    assert res.is_sat


def test_sl_free_rejects_semilattice_domains():
    alg, graph = canonical_a3()
    inst = Instance(["v"], {"v": {0, 1}}, [], alg)
    with pytest.raises(InvalidArgumentError):
        solve_semilattice_free(inst, graph, alg)


def test_mixed_base_solver():
    alg, graph = canonical_a3()
    # domain {0,2} is majority, {1,2} affine; mix both in one instance
    rel = close_under_ops([(0, 1), (2, 2), (0, 2)], alg)
    inst = Instance(["a", "b"], {"a": {0, 2}, "b": {1, 2}},
                    [(("a", "b"), relation(
                        {t for t in rel.tuples if t[0] in (0, 2) and t[1] in (1, 2)},
                        signature=[{0, 2}, {1, 2}]))], alg)
    res = solve_semilattice_free(inst, graph, alg)
    assert res.status == brute_force_solve(inst).status


# -- driver --------------------------------------------------------------------

def test_chain_of_order_constraints():
    graph = EdgeLabeledGraph(2, {(0, 1): semilattice_label([(0, 1)])})
    alg = canonical_algebra(graph)
    order = close_under_ops([(0, 0), (0, 1), (1, 1)], alg)
    names = [f"v{i}" for i in range(5)]
    cons = [((names[i], names[i + 1]), order) for i in range(4)]
    inst = Instance(names, {v: {0, 1} for v in names}, cons, alg)
    res, trace = solve(inst, alg, graph)
    assert res.is_sat
    assert verify_assignment(inst, res.assignment) == []


def test_single_variable_unary():
    alg, graph = canonical_a3()
    inst = Instance(["v"], {"v": {0, 1, 2}},
                    [(("v",), relation([(0,)], signature=[{0, 1, 2}]))], alg)
    res, trace = solve(inst, alg, graph)
    assert res.is_sat and res.assignment == {"v": 0}


def test_exclusion_path_reaches_leftover_domain():
    alg, graph = canonical_a3()
    # force the {1,2} component of v to fail so {0} remains
    diag = relation([(1, 1), (2, 2), (0, 0)])
    pin2 = relation([(2,)], signature=[{0, 1, 2}])
    pin1 = relation([(1,)], signature=[{0, 1, 2}])
    inst = Instance(["v", "a", "b"],
                    {"v": {0, 1, 2}, "a": {0, 1, 2}, "b": {0, 1, 2}},
                    [(("v", "a"), diag)], alg)
    res, trace = solve(inst, alg, graph)
    assert res.status == brute_force_solve(inst).status


def test_measure_counters_clean_across_random_suite():
    lev_checks = 0
    for seed in range(80):
        cfg = GeneratorConfig(seed=seed, domain_size=2 + seed % 3,
                              variable_count=4 + seed % 4,
                              constraint_count=3 + seed % 5, max_arity=3,
                              label_weights=[(3, 1, 2), (1, 1, 1)][seed % 2])
        alg, graph = gen_algebra(cfg)
        inst = gen_instance(alg, graph, cfg)
        res, trace = solve(inst, alg, graph)
        assert trace.lev_violations == 0
        assert trace.shrink_violations == 0
        lev_checks += trace.lev_checks
        want = brute_force_solve(inst)
        assert res.status == want.status
    assert lev_checks > 0  # the retraction branch was really exercised


def test_retraction_branch_end_to_end():
    """All domains are as-components but a semilattice edge is present."""
    graph = EdgeLabeledGraph(3, {
        (0, 1): semilattice_label([(0, 1)]),
        (0, 2): PairLabel(AFFINE),
        (1, 2): PairLabel(AFFINE)})
    alg = canonical_algebra(graph)
    rel = close_under_ops([(0, 1), (1, 2), (2, 0)], alg)
    inst = Instance(["x", "y"], {"x": {0, 1, 2}, "y": {0, 1, 2}},
                    [(("x", "y"), relation(rel.tuples,
                                           signature=[{0, 1, 2}] * 2))], alg)
    res, trace = solve(inst, alg, graph)
    want = brute_force_solve(inst)
    assert res.status == want.status
    if res.is_sat:
        assert verify_assignment(inst, res.assignment) == []


# -- classify_and_solve ---------------------------------------------------------

ONE_IN_3 = ConstraintLanguage(2, (relation([(1, 0, 0), (0, 1, 0), (0, 0, 1)]),))
XOR3 = ConstraintLanguage(
    2, (relation([t for t in itertools.product((0, 1), repeat=3)
                  if sum(t) % 2 == 0]),))


def test_classify_and_solve_refuses_hard_language():
    rel = relation([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    inst = Instance(["x", "y", "z"], {v: {0, 1} for v in "xyz"},
                    [(("x", "y", "z"), rel)])
    out = classify_and_solve(ONE_IN_3, inst)
    assert out.status == "np-complete"
    assert out.witness_pair == (0, 1)
    assert out.assignment is None


def test_classify_and_solve_oracle_override():
    rel = relation([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    inst = Instance(["x", "y", "z"], {v: {0, 1} for v in "xyz"},
                    [(("x", "y", "z"), rel)])
    out = classify_and_solve(ONE_IN_3, inst, force_oracle=True)
    assert out.oracle_used and out.status == "sat"


def test_classify_and_solve_affine_language():
    rel = relation([t for t in itertools.product((0, 1), repeat=3)
                    if sum(t) % 2 == 0])
    inst = Instance(["x", "y", "z"], {v: {0, 1} for v in "xyz"},
                    [(("x", "y", "z"), rel)])
    out = classify_and_solve(XOR3, inst)
    assert out.status == "sat"
    assert out.trace is not None


def test_classify_and_solve_rejects_foreign_relation():
    inst = Instance(["x", "y"], {v: {0, 1} for v in "xy"},
                    [(("x", "y"), relation([(0, 1)]))])
    with pytest.raises(InvalidArgumentError):
        classify_and_solve(XOR3, inst)


def test_fast_probe_config():
    alg, graph = canonical_a3()
    rel = close_under_ops([(0, 1), (1, 2), (2, 0)], alg)
    graph2 = EdgeLabeledGraph(3, {
        (0, 1): semilattice_label([(0, 1)]),
        (0, 2): PairLabel(AFFINE),
        (1, 2): PairLabel(AFFINE)})
    alg2 = canonical_algebra(graph2)
    rel2 = close_under_ops([(0, 1), (1, 2), (2, 0)], alg2)
    inst = Instance(["x", "y"], {"x": {0, 1, 2}, "y": {0, 1, 2}},
                    [(("x", "y"), relation(rel2.tuples,
                                           signature=[{0, 1, 2}] * 2))], alg2)
    plain, _ = solve(inst, alg2, graph2)
    probed, _ = solve(inst, alg2, graph2, SolveConfig(fast_probe=True))
    assert plain.status == probed.status == brute_force_solve(inst).status


def _parity_with_top() -> tuple:
    """Affine pair {0,1} under two semilattice arcs from 2.

    Distinct triples containing 2 evaluate to their first non-2 argument,
    which keeps parity relations with an all-2 escape tuple closed exactly.
    """
    from ccsp.model import Algebra

    graph = EdgeLabeledGraph(3, {(0, 1): PairLabel(AFFINE),
                                 (0, 2): semilattice_label([(2, 0)]),
                                 (1, 2): semilattice_label([(2, 1)])})
    f = ((0, 0, 0), (1, 1, 1), (0, 1, 2))

    def complete(affine_rule):
        def value(x, y, z):
            s = {x, y, z}
            if len(s) == 1:
                return x
            if len(s) == 3:
                return x if x != 2 else (y if y != 2 else z)
            if sorted(s) == [0, 1]:
                return affine_rule(x, y, z)
            return f[f[x][y]][z]
        return tuple(tuple(tuple(value(x, y, z) for z in range(3))
                           for y in range(3)) for x in range(3))

    g = complete(lambda x, y, z: x)
    h = complete(lambda x, y, z: (x + y + z) % 2)
    alg = Algebra(3, f, f, g, h)
    return alg, graph


def test_exclusion_restart_on_failed_parity_strand():
    """A width-4 parity contradiction inside the {0,1} component forces the
    strand to fail; excluding the component leaves the all-2 solution."""
    from ccsp.classify import check_uniformity_laws

    alg, graph = _parity_with_top()
    assert check_uniformity_laws(alg, graph) == []
    even = {t for t in itertools.product((0, 1), repeat=3) if sum(t) % 2 == 0}
    odd = {t for t in itertools.product((0, 1), repeat=3) if sum(t) % 2 == 1}
    ce = close_under_ops(even | {(2, 2, 2)}, alg)
    co = close_under_ops(odd | {(2, 2, 2)}, alg)
    assert len(ce) == 5 and len(co) == 5
    sig3 = [{0, 1, 2}] * 3
    re = relation(ce.tuples, signature=sig3)
    ro = relation(co.tuples, signature=sig3)
    names = ["x1", "x2", "x3", "x4", "x5", "x6"]
    cons = [(("x1", "x2", "x3"), re), (("x3", "x4", "x5"), re),
            (("x5", "x6", "x1"), re), (("x2", "x4", "x6"), ro)]
    inst = Instance(names, {v: {0, 1, 2} for v in names}, cons, alg)
    res, trace = solve(inst, alg, graph)
    assert res.status == brute_force_solve(inst).status == "sat"
    assert res.assignment == {v: 2 for v in names}
    assert trace.branch_counts.get("exclusion-restart", 0) >= 1
    assert trace.shrink_violations == 0


def test_repeated_variable_scope_through_full_solve():
    alg, graph = canonical_a3()
    rel = close_under_ops([(1, 1), (2, 2), (1, 2)], alg)
    rel3 = close_under_ops([(1, 1, 2), (2, 2, 1), (1, 1, 1)], alg)
    inst = Instance(["a", "b"], {"a": {0, 1, 2}, "b": {0, 1, 2}},
                    [(("a", "a"), relation(rel.tuples,
                                           signature=[{0, 1, 2}] * 2)),
                     (("a", "b", "a"), relation(rel3.tuples,
                                                signature=[{0, 1, 2}] * 3))],
                    alg)
    res, trace = solve(inst, alg, graph)
    want = brute_force_solve(inst)
    assert res.status == want.status
    if res.is_sat:
        assert verify_assignment(inst, res.assignment) == []


def test_classify_synthesize_solve_three_element_language():
    """Relations generated by closure over a 3-element algebra classify as
    tractable, synthesis passes the uniformity laws, and the pipeline's
    verdicts agree with the oracle."""
    from ccsp.classify import ConstraintLanguage, check_uniformity_laws, \
        classify_language
    from ccsp.harness import Rng

    alg0, graph0 = canonical_a3()
    rng = Rng(314)
    rels = []
    for i in range(2):
        r = rng.split(i)
        seeds = {tuple(r.choice(range(3)) for _ in range(2)) for _ in range(2)}
        rels.append(relation(close_under_ops(seeds, alg0).tuples))
    lang = ConstraintLanguage(3, tuple(rels))
    verdict = classify_language(lang)
    assert verdict.tractable
    assert check_uniformity_laws(verdict.algebra, verdict.graph,
                                 lang.relations) == []
    inst = Instance(["u", "v", "w"], {x: {0, 1, 2} for x in "uvw"},
                    [(("u", "v"), rels[0]), (("v", "w"), rels[1])],
                    verdict.algebra)
    res, _ = solve(inst, verdict.algebra, verdict.graph)
    assert res.status == brute_force_solve(inst).status
