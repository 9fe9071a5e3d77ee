"""JSON file formats for algebras, languages, instances, and results.

Algebra files carry the universe, the pair labels (with the operative
direction for semilattice pairs), and the four tables.  Tables may be
omitted when a "relations" list is present; loading then classifies the
language and synthesizes the tables, failing with the NP-complete witness
when no tables exist.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Union

from .classify import (AFFINE, MAJORITY, SEMILATTICE,
                       ClassifierVerdict, ConstraintLanguage,
                       EdgeLabeledGraph, PairLabel, classify_language,
                       semilattice_label)
from .errors import InvalidArgumentError
from .model import Algebra, Constraint, Instance, relation
from .solver import PipelineResult

JsonLike = Union[dict, str, Path]


def _as_obj(source: JsonLike) -> dict:
    if isinstance(source, dict):
        return source
    text = Path(source).read_text()
    return json.loads(text)


def var_str(v) -> str:
    """Serialized variable name; multiplied-instance pairs become 'v@b'."""
    if isinstance(v, tuple) and len(v) == 2:
        return f"{var_str(v[0])}@{v[1]}"
    return str(v)


def graph_to_obj(graph: EdgeLabeledGraph) -> list:
    out = []
    for (a, b) in graph.pairs():
        lab = graph.label(a, b)
        entry = {"pair": [a, b], "label": lab.kind}
        if lab.kind == SEMILATTICE:
            entry["direction"] = list(lab.orientation)
        out.append(entry)
    return out


def graph_from_obj(size: int, labels: list) -> EdgeLabeledGraph:
    out = {}
    for entry in labels:
        a, b = entry["pair"]
        kind = entry["label"]
        if kind == SEMILATTICE:
            direction = entry.get("direction")
            if direction is None:
                direction = [min(a, b), max(a, b)]
            out[(min(a, b), max(a, b))] = semilattice_label(
                [tuple(direction)])
        elif kind in (MAJORITY, AFFINE):
            out[(min(a, b), max(a, b))] = PairLabel(kind)
        else:
            raise InvalidArgumentError(f"unknown label {kind!r}")
    return EdgeLabeledGraph(size, out)


def algebra_to_obj(alg: Algebra, graph: EdgeLabeledGraph) -> dict:
    return {
        "universe": list(range(alg.size)),
        "labels": graph_to_obj(graph),
        "f": [list(r) for r in alg.f],
        "p": [list(r) for r in alg.p],
        "g": [[list(r) for r in plane] for plane in alg.g],
        "h": [[list(r) for r in plane] for plane in alg.h],
    }


def language_from_obj(source: JsonLike) -> ConstraintLanguage:
    obj = _as_obj(source)
    universe = obj.get("universe")
    if universe is None:
        raise InvalidArgumentError("language file needs a universe")
    size = len(universe)
    rels = []
    for tuples in obj.get("relations", []):
        rels.append(relation([tuple(t) for t in tuples],
                             signature=None if tuples else [range(size)]))
    return ConstraintLanguage(size, tuple(rels))


def algebra_from_obj(source: JsonLike) -> tuple[Algebra, EdgeLabeledGraph]:
    """Load tables directly, or synthesize them from bundled relations."""
    obj = _as_obj(source)
    universe = obj.get("universe")
    if universe is None:
        raise InvalidArgumentError("algebra file needs a universe")
    size = len(universe)
    if all(k in obj for k in ("f", "p", "g", "h")):
        freeze2 = lambda t: tuple(tuple(int(x) for x in r) for r in t)
        freeze3 = lambda t: tuple(tuple(tuple(int(x) for x in r)
                                        for r in pl) for pl in t)
        alg = Algebra(size, freeze2(obj["f"]), freeze2(obj["p"]),
                      freeze3(obj["g"]), freeze3(obj["h"]))
        graph = graph_from_obj(size, obj.get("labels", []))
        if len(graph.labels) != size * (size - 1) // 2:
            raise InvalidArgumentError("labels must cover every pair")
        return alg, graph
    if "relations" not in obj:
        raise InvalidArgumentError(
            "algebra file needs either tables or relations to synthesize from")
    verdict: ClassifierVerdict = classify_language(language_from_obj(obj))
    if not verdict.tractable:
        raise InvalidArgumentError(
            f"language is NP-complete (witness pair {verdict.witness_pair}); "
            "no algebra exists")
    return verdict.algebra, verdict.graph


def instance_to_obj(inst: Instance,
                    algebra: Optional[Union[dict, str]] = None) -> dict:
    obj = {
        "variables": [var_str(v) for v in inst.variables],
        "domains": {var_str(v): sorted(inst.domains[v])
                    for v in inst.variables},
        "constraints": [
            {"scope": [var_str(v) for v in c.scope],
             "tuples": sorted(list(t) for t in c.relation.tuples)}
            for c in inst.constraints
        ],
    }
    if algebra is not None:
        obj["algebra"] = algebra
    return obj


def instance_from_obj(source: JsonLike, base_dir: Optional[Path] = None
                      ) -> tuple[Instance, Optional[Algebra],
                                 Optional[EdgeLabeledGraph]]:
    obj = _as_obj(source)
    alg = graph = None
    ref = obj.get("algebra")
    if ref is not None:
        if isinstance(ref, str):
            path = Path(ref)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            alg, graph = algebra_from_obj(path)
        else:
            alg, graph = algebra_from_obj(ref)
    variables = list(obj["variables"])
    domains = {v: frozenset(obj["domains"][v]) for v in variables}
    cons = []
    for c in obj.get("constraints", []):
        scope = tuple(c["scope"])
        for v in scope:
            if v not in domains:
                raise InvalidArgumentError(f"scope names unknown variable {v!r}")
        tuples = [tuple(t) for t in c["tuples"]]
        sig = [domains[v] for v in scope]
        cons.append(Constraint(scope, relation(tuples, signature=sig)))
    return Instance(variables, domains, cons, alg), alg, graph


def result_to_obj(res: PipelineResult) -> dict:
    out: dict = {"status": res.status}
    if res.assignment is not None:
        out["assignment"] = {var_str(v): a for v, a in
                             sorted(res.assignment.items(), key=lambda kv: var_str(kv[0]))}
    if res.witness_pair is not None:
        out["witness_pair"] = list(res.witness_pair)
    if res.trace is not None:
        out["trace"] = res.trace
    if res.oracle_used:
        out["oracle_used"] = True
    return out


def dump(obj: dict, path: Optional[Union[str, Path]] = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
