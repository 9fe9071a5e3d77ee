"""Core data model: operation tables, relations, instances, assignments.

Elements of an algebra are dense integer ids 0..size-1.  All values here are
treated as immutable after construction; every operation is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError

ValueTuple = tuple[int, ...]


@dataclass(frozen=True)
class Algebra:
    """A finite algebra with two binary (f, p) and two ternary (g, h) tables.

    Tables are nested tuples indexed by element id.  The intended algebras
    are conservative (op value is always one of its arguments) and
    idempotent; `algebra_violations` checks this.
    """

    size: int
    f: tuple[tuple[int, ...], ...]
    p: tuple[tuple[int, ...], ...]
    g: tuple[tuple[tuple[int, ...], ...], ...]
    h: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def universe(self) -> range:
        return range(self.size)

    def binary_ops(self) -> dict[str, tuple[tuple[int, ...], ...]]:
        return {"f": self.f, "p": self.p}

    def ternary_ops(self) -> dict[str, tuple]:
        return {"g": self.g, "h": self.h}

    def all_ops(self) -> dict[str, tuple]:
        return {**self.binary_ops(), **self.ternary_ops()}

    def fv(self, a: int, b: int) -> int:
        return self.f[a][b]

    def pv(self, a: int, b: int) -> int:
        return self.p[a][b]

    def gv(self, a: int, b: int, c: int) -> int:
        return self.g[a][b][c]

    def hv(self, a: int, b: int, c: int) -> int:
        return self.h[a][b][c]


def table_arity(table) -> int:
    """Nesting depth of an operation table."""
    arity = 0
    node = table
    while isinstance(node, (tuple, list)):
        arity += 1
        node = node[0]
    return arity


def algebra_violations(alg: Algebra) -> list[str]:
    """Check conservativity, idempotency and the absorption identity.

    Absorption: f(x, f(x, y)) == f(x, y) for all x, y.  Returns a list of
    human-readable violation records; empty means all laws hold.
    """
    out: list[str] = []
    n = alg.size
    for name, tab in alg.binary_ops().items():
        for a in range(n):
            for b in range(n):
                v = tab[a][b]
                if v not in (a, b):
                    out.append(f"{name}({a},{b})={v} is not conservative")
        for a in range(n):
            if tab[a][a] != a:
                out.append(f"{name}({a},{a})={tab[a][a]} is not idempotent")
    for name, tab in alg.ternary_ops().items():
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    v = tab[a][b][c]
                    if v not in (a, b, c):
                        out.append(f"{name}({a},{b},{c})={v} is not conservative")
        for a in range(n):
            if tab[a][a][a] != a:
                out.append(f"{name}({a},{a},{a}) is not idempotent")
    for a in range(n):
        for b in range(n):
            if alg.f[a][alg.f[a][b]] != alg.f[a][b]:
                out.append(f"absorption fails: f({a},f({a},{b})) != f({a},{b})")
    return out


@dataclass(frozen=True)
class Relation:
    """An explicit finite set of equal-length tuples with per-position domains."""

    arity: int
    tuples: frozenset[ValueTuple]
    signature: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.arity < 1:
            raise InvalidArgumentError("relation arity must be positive")
        if len(self.signature) != self.arity:
            raise InvalidArgumentError("signature length must equal arity")
        for t in self.tuples:
            if len(t) != self.arity:
                raise InvalidArgumentError(f"tuple {t} has wrong arity")
            for i, v in enumerate(t):
                if v not in self.signature[i]:
                    raise InvalidArgumentError(
                        f"tuple {t} leaves signature at position {i}")

    def __iter__(self):
        return iter(self.tuples)

    def __len__(self):
        return len(self.tuples)

    def __contains__(self, t) -> bool:
        return t in self.tuples

    def sorted_tuples(self) -> list[ValueTuple]:
        return sorted(self.tuples)

    def is_subdirect(self) -> bool:
        """True if every position's projection covers its signature domain."""
        for i, dom in enumerate(self.signature):
            if {t[i] for t in self.tuples} != set(dom):
                return False
        return True


def relation(tuples: Iterable[Sequence[int]],
             signature: Optional[Sequence[Iterable[int]]] = None) -> Relation:
    """Build a Relation; signature defaults to per-position value sets."""
    tups = frozenset(tuple(t) for t in tuples)
    if not tups:
        if signature is None:
            raise InvalidArgumentError("empty relation needs an explicit signature")
        sig = tuple(frozenset(d) for d in signature)
        return Relation(len(sig), tups, sig)
    arity = len(next(iter(tups)))
    if signature is None:
        sig = tuple(frozenset(t[i] for t in tups) for i in range(arity))
    else:
        sig = tuple(frozenset(d) for d in signature)
    return Relation(arity, tups, sig)


def project(rel: Relation, indices: Sequence[int]) -> Relation:
    """Project a relation onto the given 0-based positions, preserving order.

    Output tuples are deduplicated; the signature is restricted accordingly.
    """
    idx = list(indices)
    if not idx:
        raise InvalidArgumentError("projection index set must be nonempty")
    for i in idx:
        if not 0 <= i < rel.arity:
            raise InvalidArgumentError(f"projection index {i} out of range")
    tups = frozenset(tuple(t[i] for i in idx) for t in rel.tuples)
    sig = tuple(rel.signature[i] for i in idx)
    return Relation(len(idx), tups, sig)


def apply_componentwise(table, args: Sequence[ValueTuple]) -> ValueTuple:
    """Apply an operation table position by position to argument tuples."""
    k = table_arity(table)
    if len(args) != k:
        raise InvalidArgumentError(f"operation needs {k} arguments, got {len(args)}")
    arity = len(args[0])
    for t in args:
        if len(t) != arity:
            raise InvalidArgumentError("argument tuples must share arity")
    out = []
    for i in range(arity):
        node = table
        for t in args:
            node = node[t[i]]
        out.append(node)
    return tuple(out)


def _np_table(table) -> np.ndarray:
    return np.asarray(table, dtype=np.int64)


def _encode(rows: np.ndarray, size: int) -> np.ndarray:
    powers = (size ** np.arange(rows.shape[1], dtype=np.int64))
    return rows @ powers


def close_under_ops(seed: Iterable[Sequence[int]], alg: Algebra) -> Relation:
    """Least superset of the seed closed under componentwise f, p, g, h.

    Conservative operations never introduce new per-position values, so the
    signature is the seed's per-position value sets.
    """
    seed_tuples = [tuple(t) for t in seed]
    if not seed_tuples:
        raise InvalidArgumentError("closure needs a nonempty seed")
    arity = len(seed_tuples[0])
    for t in seed_tuples:
        if len(t) != arity:
            raise InvalidArgumentError("seed tuples must share arity")

    size = alg.size
    binaries = [_np_table(alg.f), _np_table(alg.p)]
    ternaries = [_np_table(alg.g), _np_table(alg.h)]

    rows = np.unique(np.asarray(seed_tuples, dtype=np.int64), axis=0)
    known = set(_encode(rows, size).tolist())
    frontier = rows

    while frontier.size:
        fresh_codes: set[int] = set()
        fresh_rows: list[np.ndarray] = []

        def collect(candidates: np.ndarray):
            flat = candidates.reshape(-1, arity)
            codes = _encode(flat, size)
            uniq_codes, first = np.unique(codes, return_index=True)
            for code, at in zip(uniq_codes.tolist(), first.tolist()):
                if code not in known and code not in fresh_codes:
                    fresh_codes.add(code)
                    fresh_rows.append(flat[at])

        for tab in binaries:
            collect(tab[frontier[:, None, :], rows[None, :, :]])
            collect(tab[rows[:, None, :], frontier[None, :, :]])
        for tab in ternaries:
            collect(tab[frontier[:, None, None, :], rows[None, :, None, :],
                        rows[None, None, :, :]])
            collect(tab[rows[:, None, None, :], frontier[None, :, None, :],
                        rows[None, None, :, :]])
            collect(tab[rows[:, None, None, :], rows[None, :, None, :],
                        frontier[None, None, :, :]])

        if not fresh_rows:
            break
        frontier = np.stack(fresh_rows)
        rows = np.concatenate([rows, frontier])
        known.update(fresh_codes)

    return relation(
        (tuple(r) for r in rows.tolist()),
        signature=[{t[i] for t in seed_tuples} for i in range(arity)],
    )


def is_closed_under_ops(rel: Relation, alg: Algebra) -> Optional[tuple]:
    """Return None if closed; else a witness (op_name, arg_tuples, image)."""
    tups = rel.sorted_tuples()
    if not tups:
        return None
    rows = np.asarray(tups, dtype=np.int64)
    codes = set(_encode(rows, alg.size).tolist())
    powers = alg.size ** np.arange(rel.arity, dtype=np.int64)

    for name, tab in alg.binary_ops().items():
        imgs = _np_table(tab)[rows[:, None, :], rows[None, :, :]]
        bad = ~np.isin(imgs.reshape(-1, rel.arity) @ powers, list(codes))
        if bad.any():
            at = int(np.argmax(bad))
            i, j = divmod(at, len(tups))
            return (name, (tups[i], tups[j]),
                    apply_componentwise(tab, (tups[i], tups[j])))
    n = len(tups)
    for name, tab in alg.ternary_ops().items():
        arr = _np_table(tab)
        for i in range(n):
            imgs = arr[rows[i, None, None, :], rows[:, None, :], rows[None, :, :]]
            bad = ~np.isin(imgs.reshape(-1, rel.arity) @ powers, list(codes))
            if bad.any():
                at = int(np.argmax(bad))
                j, k = divmod(at, n)
                return (name, (tups[i], tups[j], tups[k]),
                        apply_componentwise(tab, (tups[i], tups[j], tups[k])))
    return None


class Constraint(NamedTuple):
    scope: tuple  # variable names, possibly with repetition
    relation: Relation


class Instance:
    """A CSP instance: variables, per-variable domains, constraints."""

    def __init__(self, variables: Sequence, domains: Mapping,
                 constraints: Iterable, algebra: Optional[Algebra] = None):
        self.variables = tuple(variables)
        self.domains = {v: frozenset(domains[v]) for v in self.variables}
        cons = []
        for c in constraints:
            scope, rel = c
            cons.append(Constraint(tuple(scope), rel))
        self.constraints = tuple(cons)
        self.algebra = algebra

    def with_domains(self, domains: Mapping) -> "Instance":
        return Instance(self.variables, domains, self.constraints, self.algebra)

    def __repr__(self):
        return (f"Instance({len(self.variables)} vars, "
                f"{len(self.constraints)} constraints)")


def summ(inst: Instance) -> int:
    """Size measure: total count of domain values over all variables."""
    return sum(len(inst.domains[v]) for v in inst.variables)


def verify_assignment(inst: Instance, assignment: Mapping) -> list[Constraint]:
    """Return the constraints an assignment violates (empty list = solution)."""
    bad = []
    for c in inst.constraints:
        try:
            image = tuple(assignment[v] for v in c.scope)
        except KeyError:
            bad.append(c)
            continue
        if image not in c.relation:
            bad.append(c)
    for v in inst.variables:
        if v in assignment and assignment[v] not in inst.domains[v]:
            bad.append(Constraint((v,), relation([(a,) for a in inst.domains[v]],
                                                 signature=[inst.domains[v]])))
    return bad


@dataclass(frozen=True)
class SolveResult:
    status: str  # "sat" | "unsat"
    assignment: Optional[dict] = None

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


def sat(assignment: Mapping) -> SolveResult:
    return SolveResult("sat", dict(assignment))


UNSAT = SolveResult("unsat", None)


def validate_instance(inst: Instance) -> list[str]:
    """Collect violations of the instance invariants.

    Includes the check that every constraint relation is closed under the
    algebra's four operations (when an algebra is attached).
    """
    out: list[str] = []
    size = inst.algebra.size if inst.algebra else None
    for v in inst.variables:
        dom = inst.domains[v]
        if not dom:
            out.append(f"domain of {v!r} is empty")
        if size is not None and any(a not in range(size) for a in dom):
            out.append(f"domain of {v!r} leaves the universe")
    for k, c in enumerate(inst.constraints):
        for v in c.scope:
            if v not in inst.domains:
                out.append(f"constraint {k} scope names unknown variable {v!r}")
        if len(c.scope) != c.relation.arity:
            out.append(f"constraint {k} arity mismatch")
            continue
        if any(v not in inst.domains for v in c.scope):
            continue
        for i, v in enumerate(c.scope):
            if not c.relation.signature[i] <= inst.domains[v]:
                out.append(
                    f"constraint {k} signature at position {i} leaves domain of {v!r}")
        for t in c.relation.tuples:
            if any(t[i] not in inst.domains[c.scope[i]] for i in range(len(t))):
                out.append(f"constraint {k} tuple {t} leaves the domains")
                break
        if inst.algebra is not None and len(c.relation) > 0:
            witness = is_closed_under_ops(c.relation, inst.algebra)
            if witness is not None:
                name, args, image = witness
                out.append(
                    f"constraint {k} not closed under {name}: "
                    f"{name}{args} = {image} missing")
    return out
