"""Brute-force enumeration oracle, independent of the reduction engine.

Everything here works directly on the raw node tables with plain Python
loops: enumerate every configuration of every non-value node, weight it by
the product of conditional probabilities, and fold the alternating
sum/optimize structure of the decision sequence by recursion over
observation blocks.  No arc reversal, no table surgery, no numpy
broadcasting, so a bug in the engine cannot hide here.
"""

from __future__ import annotations

import itertools

from infdiag.core import Diagram, NodeKind


def _row_index(sizes: list[int], config: tuple[int, ...]) -> int:
    idx = 0
    for size, c in zip(sizes, config):
        idx = idx * size + c
    return idx


def _config_weight(diagram: Diagram, assignment: dict[str, int]) -> float:
    """Product of P(node = assigned | parents as assigned) over all chance
    and deterministic nodes; decisions contribute no factor."""
    w = 1.0
    for nid, node in diagram.nodes.items():
        if node.kind in (NodeKind.DECISION, NodeKind.VALUE):
            continue
        sizes = [len(diagram.space(p)) for p in node.parents]
        row = _row_index(sizes, tuple(assignment[p] for p in node.parents))
        if node.kind is NodeKind.CHANCE:
            w *= float(node.table[row, assignment[nid]])
        else:
            if int(node.table[row]) != assignment[nid]:
                return 0.0
    return w


def _value(diagram: Diagram, assignment: dict[str, int]) -> float:
    vid = diagram.value_id()
    node = diagram.node(vid)
    sizes = [len(diagram.space(p)) for p in node.parents]
    row = _row_index(sizes, tuple(assignment[p] for p in node.parents))
    return float(node.table[row])


def _blocks(diagram: Diagram) -> list[tuple[str, list[str]]]:
    """The observe/decide structure: for each decision in temporal order,
    the not-yet-seen variables it observes, then the decision itself, then
    whatever nobody observes."""
    decisions = [
        nid
        for nid in diagram.topological_order()
        if diagram.kind(nid) is NodeKind.DECISION
    ]
    seen: set[str] = set()
    blocks: list[tuple[str, list[str]]] = []
    for dec in decisions:
        obs = [
            p
            for p in diagram.parents(dec)
            if p not in seen and diagram.kind(p) is not NodeKind.DECISION
        ]
        if obs:
            blocks.append(("sum", obs))
            seen.update(obs)
        blocks.append(("opt", [dec]))
        seen.add(dec)
    rest = [
        nid
        for nid in diagram.nodes
        if diagram.kind(nid) is not NodeKind.VALUE and nid not in seen
    ]
    blocks.append(("sum", rest))
    return blocks


def oracle_evaluate(diagram: Diagram, condition: dict[str, str] | None = None) -> float:
    """Optimal expected value by exhaustive rollback over the decision
    sequence, optionally conditioned on observed outcomes (by indicator
    weighting and renormalization)."""
    cond_idx = {
        nid: diagram.space(nid).labels.index(label)
        for nid, label in (condition or {}).items()
    }
    blocks = _blocks(diagram)
    pick = max if diagram.objective == "maximize" else min

    def weight(assignment: dict[str, int]) -> float:
        for nid, want in cond_idx.items():
            if assignment[nid] != want:
                return 0.0
        return _config_weight(diagram, assignment)

    def rec(i: int, assignment: dict[str, int]) -> float:
        if i == len(blocks):
            w = weight(assignment)
            return w * _value(diagram, assignment) if w else 0.0
        op, nids = blocks[i]
        spaces = [range(len(diagram.space(n))) for n in nids]
        if op == "sum":
            total = 0.0
            for combo in itertools.product(*spaces):
                assignment.update(zip(nids, combo))
                total += rec(i + 1, assignment)
            return total
        best = None
        for combo in itertools.product(*spaces):
            assignment.update(zip(nids, combo))
            v = rec(i + 1, assignment)
            best = v if best is None else pick(best, v)
        return best

    total = rec(0, {})
    if cond_idx:
        mass = oracle_evidence_mass(diagram, condition or {})
        if mass <= 0.0:
            raise ZeroDivisionError("conditioning on a zero-probability event")
        return total / mass
    return total


def oracle_evidence_mass(diagram: Diagram, condition: dict[str, str]) -> float:
    """Total probability of the observed outcomes, maximized over nothing:
    decision configurations must not affect it for the mass to be
    well-defined, which callers ensure by conditioning only on nodes with
    no decision ancestors.  Decisions are fixed at their first alternative.
    """
    cond_idx = {
        nid: diagram.space(nid).labels.index(label) for nid, label in condition.items()
    }
    nids = [n for n in diagram.nodes if diagram.kind(n) is not NodeKind.VALUE]
    spaces = []
    for n in nids:
        if diagram.kind(n) is NodeKind.DECISION:
            spaces.append([0])
        else:
            spaces.append(range(len(diagram.space(n))))
    mass = 0.0
    for combo in itertools.product(*spaces):
        assignment = dict(zip(nids, combo))
        if any(assignment[n] != want for n, want in cond_idx.items()):
            continue
        mass += _config_weight(diagram, assignment)
    return mass


def oracle_marginal(diagram: Diagram, node_id: str) -> list[float]:
    """Marginal of a chance node with no decision ancestors."""
    labels = diagram.space(node_id).labels
    return [oracle_evidence_mass(diagram, {node_id: lbl}) for lbl in labels]


def oracle_policy_value(
    diagram: Diagram, policy: dict, condition: dict[str, str] | None = None
) -> float:
    """Expected value of executing a fixed policy (engine decision rules),
    optionally conditioned on evidence.  Checks a claimed-optimal policy by
    recomputing its value with none of the engine's machinery."""
    cond_idx = {
        nid: diagram.space(nid).labels.index(label)
        for nid, label in (condition or {}).items()
    }
    nids = [n for n in diagram.nodes if diagram.kind(n) is not NodeKind.VALUE]
    total = 0.0
    mass = 0.0
    spaces = [range(len(diagram.space(n))) for n in nids]
    for combo in itertools.product(*spaces):
        assignment = dict(zip(nids, combo))
        if any(assignment[n] != want for n, want in cond_idx.items()):
            continue
        ok = True
        for dec, rule in policy.items():
            config = {
                p: diagram.space(p).labels[assignment[p]] for p in rule.parents
            }
            if rule.choice_for(config) != diagram.space(dec).labels[assignment[dec]]:
                ok = False
                break
        if not ok:
            continue
        w = _config_weight(diagram, assignment)
        total += w * _value(diagram, assignment)
        mass += w
    if cond_idx:
        if mass <= 0.0:
            raise ZeroDivisionError("conditioning on a zero-probability event")
        return total / mass
    return total
