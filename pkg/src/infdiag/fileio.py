"""Diagram file format, evidence expressions, and joint-table documents.

Diagrams are JSON: ``{"name": ..., "objective": "maximize"|"minimize",
"nodes": [...]}`` where each node is ``{"id", "kind", "outcomes",
"parents"}`` plus a kind-specific payload: ``table`` (rows of
probabilities) for chance nodes, ``map`` (one outcome index per parent
configuration) for deterministic nodes, ``values`` (one real per parent
configuration) for the value node.  Rows follow the canonical order:
first-listed parent varies slowest.

Evidence expressions: ``NODE=OUTCOME`` for a plain observation, or
``NODE|DEC1,DEC2=alt1:alt2:out,...`` with one clause per configuration of
the named decision predecessors.

Joint tables (for conditional-outcome analyses): ``{"node", "decisionParents",
"joint": {"alt:out|alt2:out2": p, ...}}``.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .core import (
    LOAD_RENORM_TOL,
    PROB_TOL,
    Diagram,
    DiagramError,
    Node,
    NodeKind,
    OutcomeSpace,
    Violation,
    iter_label_configs,
    validate,
)
from .evidence import Evidence
from .transforms import Policy
from .valuation import JointConditionalTable, build_joint


class ParseError(DiagramError):
    """The document is not well-formed."""


class ValidationFailure(DiagramError):
    """The document parsed but the diagram breaks structural invariants."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


_KINDS = {k.value: k for k in NodeKind}


def _require(doc: dict, key: str, where: str) -> Any:
    if key not in doc:
        raise ParseError(f"{where}: missing field {key!r}")
    return doc[key]


def load_diagram(
    text: str | bytes, *, require_no_forgetting: bool = True
) -> Diagram:
    """Parse, normalize, and validate a diagram document.

    Chance rows whose sums are off by more than the strict tolerance but
    within the load tolerance are renormalized (published tables are often
    rounded); anything worse is left for validation to reject.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    objective = doc.get("objective", "maximize")
    if objective not in ("maximize", "minimize"):
        raise ParseError(f"objective: must be maximize or minimize, got {objective!r}")
    name = doc.get("name", "diagram")
    raw_nodes = _require(doc, "nodes", "top level")
    if not isinstance(raw_nodes, list):
        raise ParseError("nodes: must be an array")

    nodes: list[Node] = []
    for i, raw in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(raw, dict):
            raise ParseError(f"{where}: must be an object")
        nid = _require(raw, "id", where)
        kind_name = _require(raw, "kind", where)
        if kind_name not in _KINDS:
            raise ParseError(f"{where}.kind: unknown kind {kind_name!r}")
        kind = _KINDS[kind_name]
        parents = tuple(raw.get("parents", []))
        space = None
        if kind is not NodeKind.VALUE:
            outcomes = _require(raw, "outcomes", where)
            if not isinstance(outcomes, list) or not outcomes:
                raise ParseError(f"{where}.outcomes: must be a non-empty array")
            space = OutcomeSpace(tuple(str(o) for o in outcomes))
        table = None
        try:
            if kind is NodeKind.CHANCE:
                table = np.array(_require(raw, "table", where), dtype=float)
                if table.ndim != 2:
                    raise ParseError(f"{where}.table: must be an array of rows")
                sums = table.sum(axis=1)
                for r in range(table.shape[0]):
                    off = abs(sums[r] - 1.0)
                    if PROB_TOL < off <= LOAD_RENORM_TOL:
                        table[r] = table[r] / sums[r]
            elif kind is NodeKind.DETERMINISTIC:
                table = np.array(_require(raw, "map", where), dtype=np.int64)
            elif kind is NodeKind.VALUE:
                table = np.array(_require(raw, "values", where), dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: bad table data: {exc}") from None
        nodes.append(Node(id=str(nid), kind=kind, space=space, parents=parents, table=table))

    try:
        diagram = Diagram(nodes, objective=objective, name=str(name))
    except DiagramError as exc:
        raise ParseError(str(exc)) from None
    problems = validate(diagram, require_no_forgetting=require_no_forgetting)
    if problems:
        raise ValidationFailure(problems)
    return diagram


def diagram_document(diagram: Diagram) -> dict:
    nodes = []
    for nid in sorted(diagram.nodes):
        node = diagram.node(nid)
        raw: dict[str, Any] = {
            "id": node.id,
            "kind": node.kind.value,
            "parents": list(node.parents),
        }
        if node.space is not None:
            raw["outcomes"] = list(node.space.labels)
        if node.kind is NodeKind.CHANCE:
            raw["table"] = [[float(x) for x in row] for row in node.table]
        elif node.kind is NodeKind.DETERMINISTIC:
            raw["map"] = [int(x) for x in node.table]
        elif node.kind is NodeKind.VALUE:
            raw["values"] = [float(x) for x in node.table]
        nodes.append(raw)
    return {"name": diagram.name, "objective": diagram.objective, "nodes": nodes}


def save_diagram(diagram: Diagram) -> bytes:
    """Canonical serialization: nodes sorted by id, keys sorted, floats in
    shortest round-trip form so load(save(d)) reproduces d exactly."""
    doc = diagram_document(diagram)
    return (json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


# -- evidence expressions -----------------------------------------------------


def parse_evidence(expr: str) -> Evidence:
    """``NODE=OUTCOME`` or ``NODE|D1,D2=a1:a2:out,...`` (one clause per
    decision-predecessor configuration)."""
    if "=" not in expr:
        raise ParseError(f"evidence {expr!r}: expected NODE=OUTCOME")
    head, _, rhs = expr.partition("=")
    head = head.strip()
    rhs = rhs.strip()
    if not head or not rhs:
        raise ParseError(f"evidence {expr!r}: empty node or outcome")
    if "|" not in head:
        return Evidence.simple(head, rhs)
    node, _, decs = head.partition("|")
    node = node.strip()
    n_decs = len([d for d in decs.split(",") if d.strip()])
    if n_decs == 0:
        raise ParseError(f"evidence {expr!r}: no decision predecessors named")
    mapping: dict[tuple[str, ...], str] = {}
    for clause in rhs.split(","):
        parts = [p.strip() for p in clause.split(":")]
        if len(parts) != n_decs + 1:
            raise ParseError(
                f"evidence {expr!r}: clause {clause!r} needs {n_decs} alternative(s) "
                "and one outcome, colon-separated"
            )
        mapping[tuple(parts[:-1])] = parts[-1]
    return Evidence.of_conditional(node, mapping)


def evidence_to_document(ev: Evidence) -> dict:
    if ev.is_simple:
        return {"node": ev.node, "outcome": ev.outcome}
    return {
        "node": ev.node,
        "conditional": {",".join(cfg): out for cfg, out in ev.conditional},
    }


def evidence_from_document(doc: dict) -> Evidence:
    if not isinstance(doc, dict) or "node" not in doc:
        raise ParseError("evidence document needs a 'node' field")
    if "expr" in doc:
        return parse_evidence(doc["expr"])
    if "outcome" in doc and doc["outcome"] is not None:
        return Evidence.simple(str(doc["node"]), str(doc["outcome"]))
    cond = doc.get("conditional")
    if not isinstance(cond, dict) or not cond:
        raise ParseError("evidence document needs 'outcome' or 'conditional'")
    mapping = {
        tuple(s.strip() for s in key.split(",")): str(out) for key, out in cond.items()
    }
    return Evidence.of_conditional(str(doc["node"]), mapping)


# -- joint documents -----------------------------------------------------------


def parse_vector_label(label: str) -> tuple[tuple[tuple[str, ...], str], ...]:
    """Split ``alt1:out1|alt2:out2`` into ((config, outcome), ...)."""
    parts = []
    for comp in label.split("|"):
        if ":" not in comp:
            raise ParseError(f"vector component {comp!r} must be CONFIG:OUTCOME")
        cfg, _, out = comp.rpartition(":")
        parts.append((tuple(s.strip() for s in cfg.split(",")), out.strip()))
    return tuple(parts)


def load_joint(text: str | bytes, diagram: Diagram) -> JointConditionalTable:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    node_id = _require(doc, "node", "joint")
    parents = tuple(_require(doc, "decisionParents", "joint"))
    raw = _require(doc, "joint", "joint")
    node_parents = diagram.parents(node_id)
    if parents != node_parents:
        raise ParseError(
            f"joint names decision predecessors {list(parents)} but {node_id!r} "
            f"has {list(node_parents)}"
        )
    configs = tuple(iter_label_configs([diagram.space(p) for p in parents]))
    probabilities: dict[tuple[str, ...], float] = {}
    for label, p in raw.items():
        comps = parse_vector_label(label)
        by_config = {cfg: out for cfg, out in comps}
        if set(by_config) != set(configs):
            raise ParseError(
                f"vector {label!r} must name every configuration of {list(parents)}"
            )
        probabilities[tuple(by_config[cfg] for cfg in configs)] = float(p)
    return build_joint(diagram, node_id, probabilities)


# -- presentation helpers -------------------------------------------------------


def fmt(x: float) -> str:
    return f"{x:.10g}"


def policy_rows(policy: Policy) -> list[tuple[str, str, str]]:
    """(decision, configuration, choice) rows, sorted for stable output."""
    rows = []
    for dec in sorted(policy):
        rule = policy[dec]
        for config, choice in rule.as_mapping().items():
            label = ",".join(f"{p}={v}" for p, v in zip(rule.parents, config)) or "-"
            rows.append((dec, label, choice))
    return rows


def policy_document(policy: Policy) -> dict:
    out = {}
    for dec in sorted(policy):
        rule = policy[dec]
        out[dec] = {
            "parents": list(rule.parents),
            "choices": {
                (",".join(cfg) or "-"): choice
                for cfg, choice in rule.as_mapping().items()
            },
        }
    return out
