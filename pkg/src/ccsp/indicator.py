"""Backtracking search for conservative operation tables.

A candidate k-ary operation is a table assigning to each k-tuple of
elements one of its own entries (conservativity; idempotency follows on
constant tuples).  Preserving a relation R means: for every k-tuple of rows
of R, the componentwise image is again in R.  Each such row combination
yields one constraint linking the table cells found in its columns.

The search assigns cells in a most-constrained-first order with forward
checking on the per-combination constraints.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Optional, Sequence

from .errors import InvalidArgumentError
from .model import Relation

Cell = tuple[int, ...]


class _Constraint:
    __slots__ = ("cells", "tuples")

    def __init__(self, cells: tuple[Cell, ...], tuples: list[tuple[int, ...]]):
        self.cells = cells
        self.tuples = tuples


def _cell_order_key(cell: Cell) -> tuple:
    return (len(set(cell)), cell)


def search_operation(size: int, arity: int, relations: Sequence[Relation],
                     pinned: Optional[dict[Cell, int]] = None,
                     prefer: Optional[Callable[[Cell], Sequence[int]]] = None,
                     ) -> Optional[dict[Cell, int]]:
    """Find a conservative table preserving all relations, or None.

    `pinned` fixes chosen cells (values must be conservative).  `prefer`
    orders the candidate values of a free cell; default tries the first
    argument first.
    """
    pinned = pinned or {}
    domains: dict[Cell, list[int]] = {}
    for cell in itertools.product(range(size), repeat=arity):
        options = []
        for v in cell:
            if v not in options:
                options.append(v)
        if cell in pinned:
            want = pinned[cell]
            if want not in options:
                raise InvalidArgumentError(
                    f"pinned value {want} at {cell} is not conservative")
            options = [want]
        elif prefer is not None:
            ranked = [v for v in prefer(cell) if v in options]
            options = ranked + [v for v in options if v not in ranked]
        domains[cell] = options

    constraints: list[_Constraint] = []
    seen_scopes: set[tuple] = set()
    for rel in relations:
        rows = rel.sorted_tuples()
        if not rows:
            continue
        for combo in itertools.product(rows, repeat=arity):
            if all(t == combo[0] for t in combo[1:]):
                continue
            cells = tuple(tuple(t[i] for t in combo) for i in range(rel.arity))
            scope_key = (id(rel), cells)
            if scope_key in seen_scopes:
                continue
            seen_scopes.add(scope_key)
            constraints.append(_Constraint(cells, rows))

    by_cell: dict[Cell, list[_Constraint]] = {}
    for con in constraints:
        for c in set(con.cells):
            by_cell.setdefault(c, []).append(con)

    assignment: dict[Cell, int] = {c: opts[0] for c, opts in domains.items()
                                   if len(opts) == 1}

    def consistent(con: _Constraint) -> bool:
        picks = [assignment.get(c) for c in con.cells]
        for t in con.tuples:
            if all(p is None or p == t[i] for i, p in enumerate(picks)):
                return True
        return False

    for con in constraints:
        if all(c in assignment for c in con.cells) and not consistent(con):
            return None

    free = sorted((c for c, opts in domains.items() if len(opts) > 1),
                  key=lambda c: (-len(by_cell.get(c, ())), _cell_order_key(c)))

    def forward_values(cell: Cell) -> list[int]:
        """Values of `cell` surviving all constraints it completes."""
        values = []
        for v in domains[cell]:
            assignment[cell] = v
            ok = all(consistent(con) for con in by_cell.get(cell, ())
                     if all(c in assignment for c in con.cells))
            del assignment[cell]
            if ok:
                values.append(v)
        return values

    def dfs(i: int) -> bool:
        if i == len(free):
            return True
        cell = free[i]
        for v in forward_values(cell):
            assignment[cell] = v
            if dfs(i + 1):
                return True
            del assignment[cell]
        return False

    if not dfs(0):
        return None
    return dict(assignment)


def table_from_assignment(size: int, arity: int, assignment: dict[Cell, int]):
    """Materialize a nested-tuple table from a full cell assignment."""
    def build(prefix: tuple[int, ...]):
        if len(prefix) == arity:
            return assignment[prefix]
        return tuple(build(prefix + (v,)) for v in range(size))
    return build(())


def enumerate_conservative_tables(size: int, arity: int) -> Iterable[dict[Cell, int]]:
    """All conservative tables; exponential, for small cross-check oracles."""
    cells = list(itertools.product(range(size), repeat=arity))
    option_lists = []
    for cell in cells:
        opts = []
        for v in cell:
            if v not in opts:
                opts.append(v)
        option_lists.append(opts)
    for values in itertools.product(*option_lists):
        yield dict(zip(cells, values))


def preserves(table, relations: Sequence[Relation], arity: int) -> bool:
    """Direct check that a nested-tuple table preserves every relation."""
    for rel in relations:
        rows = rel.sorted_tuples()
        for combo in itertools.product(rows, repeat=arity):
            out = []
            for i in range(rel.arity):
                node = table
                for t in combo:
                    node = node[t[i]]
                out.append(node)
            if tuple(out) not in rel.tuples:
                return False
    return True
