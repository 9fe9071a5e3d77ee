import itertools

import pytest
from hypothesis import given, settings, strategies as st

from ccsp.errors import InvalidArgumentError
from ccsp.harness import canonical_a3
from ccsp.model import (Instance, algebra_violations, apply_componentwise,
                        close_under_ops, is_closed_under_ops, project,
                        relation, summ, validate_instance, verify_assignment)


@pytest.fixture(scope="module")
def a3():
    return canonical_a3()


def test_project_constant_column():
    r = relation([(0, 1), (1, 1)])
    assert project(r, [1]).tuples == {(1,)}


def test_project_identity():
    r = relation([(0, 1), (1, 1), (1, 0)])
    assert project(r, range(2)).tuples == r.tuples


def test_project_drops_first_column():
    r = relation([(0, 0, 1), (0, 1, 0), (1, 0, 0)])
    assert project(r, [1, 2]).tuples == {(0, 0), (0, 1), (1, 0)}


def test_project_rejects_bad_indices():
    r = relation([(0, 1)])
    with pytest.raises(InvalidArgumentError):
        project(r, [])
    with pytest.raises(InvalidArgumentError):
        project(r, [2])


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_project_composes(data):
    arity = data.draw(st.integers(2, 4))
    tuples = data.draw(st.sets(
        st.tuples(*([st.integers(0, 2)] * arity)), min_size=1, max_size=8))
    r = relation(tuples)
    outer = data.draw(st.lists(st.integers(0, arity - 1), min_size=1,
                               max_size=arity, unique=True))
    inner = data.draw(st.lists(st.integers(0, len(outer) - 1), min_size=1,
                               max_size=len(outer), unique=True))
    via = project(project(r, outer), inner)
    direct = project(r, [outer[i] for i in inner])
    assert via.tuples == direct.tuples


def test_apply_componentwise_idempotent(a3):
    alg, _ = a3
    assert apply_componentwise(alg.f, ((1, 1), (1, 1))) == (1, 1)


def test_apply_componentwise_f_on_a3(a3):
    alg, _ = a3
    assert apply_componentwise(alg.f, ((0, 2), (1, 0))) == (1, 2)


def test_apply_componentwise_maltsev_identity():
    # all-affine pair {0,1}: h is the parity operation there
    alg, _ = canonical_a3()
    t, s = (1, 2), (2, 1)
    assert apply_componentwise(alg.h, (t, t, s)) == s


def test_apply_componentwise_arity_mismatch(a3):
    alg, _ = a3
    with pytest.raises(InvalidArgumentError):
        apply_componentwise(alg.f, ((0, 1), (0, 1), (0, 1)))
    with pytest.raises(InvalidArgumentError):
        apply_componentwise(alg.f, ((0, 1), (0,)))


def test_close_singleton(a3):
    alg, _ = a3
    assert close_under_ops([(1, 1)], alg).tuples == {(1, 1)}


def test_close_full_product(a3):
    alg, _ = a3
    prod = set(itertools.product((0, 1), (1, 2)))
    assert close_under_ops(prod, alg).tuples == prod


def test_close_forces_p_image(a3):
    alg, _ = a3
    closed = close_under_ops([(1, 1), (2, 2), (1, 0)], alg)
    assert (1, 2) in closed.tuples
    assert apply_componentwise(alg.p, ((1, 0), (2, 2))) == (1, 2)


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_close_idempotent_and_monotone(data):
    alg, _ = canonical_a3()
    seed = data.draw(st.sets(st.tuples(st.integers(0, 2), st.integers(0, 2)),
                             min_size=1, max_size=5))
    closed = close_under_ops(seed, alg)
    again = close_under_ops(closed.tuples, alg)
    assert again.tuples == closed.tuples
    bigger = data.draw(st.sets(st.tuples(st.integers(0, 2), st.integers(0, 2)),
                               min_size=0, max_size=3))
    sup = close_under_ops(seed | bigger, alg)
    assert closed.tuples <= sup.tuples


def test_closure_is_polymorphism_invariant(a3):
    alg, _ = a3
    closed = close_under_ops([(0, 1, 2), (1, 1, 0), (2, 0, 1)], alg)
    assert is_closed_under_ops(closed, alg) is None


def test_algebra_violations_clean(a3):
    alg, _ = a3
    assert algebra_violations(alg) == []


def test_algebra_violations_flag_nonconservative(a3):
    alg, _ = a3
    f = [list(r) for r in alg.f]
    f[0][1] = 2
    from ccsp.model import Algebra
    bad = Algebra(3, tuple(tuple(r) for r in f), alg.p, alg.g, alg.h)
    assert any("not conservative" in v for v in algebra_violations(bad))


def _tiny_instance(alg):
    rel = close_under_ops([(1, 1), (2, 2)], alg)
    return Instance(["u", "w"], {"u": {1, 2}, "w": {1, 2}},
                    [(("u", "w"), rel)], alg)


def test_validate_wellformed(a3):
    alg, _ = a3
    assert validate_instance(_tiny_instance(alg)) == []


def test_validate_tuple_outside_domain(a3):
    alg, _ = a3
    rel = relation([(0, 1), (1, 1)])
    inst = Instance(["u", "w"], {"u": {1}, "w": {1}}, [(("u", "w"), rel)], alg)
    problems = validate_instance(inst)
    assert any("leaves" in p for p in problems)


def test_validate_detects_unclosed_relation(a3):
    alg, _ = a3
    # {(1,0),(2,2)} is not closed: p maps it onto (1,2)
    rel = relation([(1, 0), (2, 2)], signature=[{1, 2}, {0, 2}])
    inst = Instance(["u", "w"], {"u": {1, 2}, "w": {0, 2}},
                    [(("u", "w"), rel)], alg)
    problems = validate_instance(inst)
    assert any("not closed under" in p for p in problems)


def test_summ_and_verify(a3):
    alg, _ = a3
    inst = _tiny_instance(alg)
    assert summ(inst) == 4
    assert verify_assignment(inst, {"u": 1, "w": 1}) == []
    assert verify_assignment(inst, {"u": 1, "w": 2}) != []
