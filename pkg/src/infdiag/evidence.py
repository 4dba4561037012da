"""Evidence absorption, propagation, and reversal on influence diagrams.

Observing an outcome of a chance node conditions the whole diagram on it:
chance predecessors get their Bayes posteriors (by reversing the arcs into
the observed node), successors get re-conditioned with the observed value
substituted, arcs into decision successors are dropped (the observation is
pure information for them once nothing else depends on it), and the
observed node leaves the diagram entirely so later reductions never pay
for its outcome space again.

When the observed node has decision predecessors, a plain outcome is not
well defined; the caller supplies a conditional observation instead: one
outcome per configuration of the decision predecessors.  Propagating it
makes every successor of the observed node depend on those decisions
directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import (
    Diagram,
    DiagramError,
    Node,
    NodeKind,
    StructureError,
    aligned,
    iter_configs,
    iter_label_configs,
    size_map,
    table_axes,
)
from .transforms import (
    SpaceStep,
    _member_step,
    _reverse_arc,
    _step,
    convert_deterministic,
)


class EvidenceError(DiagramError):
    """The evidence is not admissible on this diagram."""


class ImpossibleEvidenceError(EvidenceError):
    """The observed outcome has probability zero everywhere it could occur."""


@dataclass(frozen=True)
class Evidence:
    """An observation on one node.

    Either a plain outcome label, or (for nodes with decision
    predecessors) a conditional observation: one outcome label per
    configuration of the decision predecessors, keyed by their alternative
    labels in the node's stored parent order.
    """

    node: str
    outcome: str | None = None
    conditional: tuple[tuple[tuple[str, ...], str], ...] | None = None

    @staticmethod
    def simple(node: str, outcome: str) -> "Evidence":
        return Evidence(node=node, outcome=outcome)

    @staticmethod
    def of_conditional(node: str, mapping: Mapping[tuple[str, ...], str]) -> "Evidence":
        items = tuple(sorted((tuple(k), v) for k, v in mapping.items()))
        return Evidence(node=node, conditional=items)

    @property
    def is_simple(self) -> bool:
        return self.conditional is None

    def conditional_mapping(self) -> dict[tuple[str, ...], str]:
        if self.conditional is None:
            raise EvidenceError("evidence is a plain outcome, not conditional")
        return dict(self.conditional)

    def __str__(self) -> str:
        if self.is_simple:
            return f"{self.node}={self.outcome}"
        clauses = ",".join(f"{':'.join(cfg)}:{out}" for cfg, out in self.conditional)
        return f"{self.node}|.={clauses}"


@dataclass(frozen=True)
class PropagationResult:
    """A diagram with evidence fully folded in.

    ``evidence_weight`` is the probability mass of the observation when it
    is unconditionally defined (no decision predecessors).  For conditional
    observations the mass depends on the decision configuration, so the
    scalar stays 1.0 and ``weight_by_config`` carries the per-configuration
    lookup values.
    """

    diagram: Diagram
    evidence_weight: float
    steps: tuple[SpaceStep, ...] = ()
    weight_by_config: Mapping[tuple[str, ...], float] | None = None


def _reverse_parents_away(
    diagram: Diagram, node_id: str, steps: list[SpaceStep], op: str = "evidence-reversal"
) -> Diagram:
    """Reverse arcs from all chance (and converted deterministic)
    predecessors into ``node_id`` until only decision predecessors remain.
    Reversal runs latest-predecessor-first so no reversal can be blocked by
    an indirect path through another reversible predecessor."""
    while True:
        reversible = [
            p
            for p in diagram.parents(node_id)
            if diagram.kind(p) in (NodeKind.CHANCE, NodeKind.DETERMINISTIC)
        ]
        if not reversible:
            return diagram
        topo = diagram.topological_order()
        parent = max(reversible, key=topo.index)
        if diagram.kind(parent) is NodeKind.DETERMINISTIC:
            steps.append(
                _member_step(
                    diagram, "convert-deterministic", parent,
                    {parent, *diagram.parents(parent)},
                )
            )
            diagram = convert_deterministic(diagram, parent)
            continue
        if diagram.has_path(parent, node_id, skip_direct=True):
            raise StructureError(
                f"cannot reverse {parent!r} into {node_id!r}: an indirect path "
                "runs through a decision predecessor"
            )
        steps.append(
            _member_step(
                diagram, op, node_id,
                {parent, node_id, *diagram.parents(parent), *diagram.parents(node_id)},
                note=f"reversed {parent}",
            )
        )
        diagram, zero = _reverse_arc(diagram, parent, node_id)
        if zero:
            last = steps[-1]
            steps[-1] = SpaceStep(
                last.op,
                last.node,
                last.space,
                last.members,
                note=last.note + "; zero-probability marginal, row set uniform",
            )


def _folded_node(
    diagram: Diagram,
    succ_id: str,
    node_id: str,
    k_parents: list[str],
    chooser: Mapping[tuple[int, ...], int],
) -> Node:
    """Rebuild one successor with the observed node's axis substituted.

    ``chooser`` selects the observed outcome index per configuration of
    the decision predecessors ``k_parents`` (empty for a plain outcome);
    the successor ends up conditioned on those decisions instead of on the
    observed node."""
    s_node = diagram.node(succ_id)
    src_parents = list(s_node.parents)
    base = [p for p in src_parents if p != node_id]
    new_parents = base + [k for k in k_parents if k not in base]
    has_outcome = s_node.kind is NodeKind.CHANCE
    arr = table_axes(diagram, succ_id)
    sizes = size_map(diagram, set(new_parents) | {succ_id} if has_outcome else set(new_parents))
    out_shape = [sizes[p] for p in new_parents]
    if has_outcome:
        out_shape.append(diagram.size(succ_id))
    out = np.empty(out_shape, dtype=arr.dtype)
    k_sizes = [diagram.size(k) for k in k_parents]
    for cfg in iter_configs(k_sizes):
        o_idx = chooser[tuple(cfg)]
        src_sel: list = []
        for ax in src_parents:
            if ax == node_id:
                src_sel.append(o_idx)
            elif ax in k_parents:
                src_sel.append(cfg[k_parents.index(ax)])
            else:
                src_sel.append(slice(None))
        if has_outcome:
            src_sel.append(slice(None))
        dst_sel: list = []
        for ax in new_parents:
            if ax in k_parents:
                dst_sel.append(cfg[k_parents.index(ax)])
            else:
                dst_sel.append(slice(None))
        if has_outcome:
            dst_sel.append(slice(None))
        out[tuple(dst_sel)] = arr[tuple(src_sel)]
    table = out.reshape(-1, diagram.size(succ_id)) if has_outcome else out.reshape(-1)
    return s_node.replace(parents=tuple(new_parents), table=table)


def propagate_evidence(diagram: Diagram, ev: Evidence) -> PropagationResult:
    """Condition the diagram on an observation and drop the observed node.

    Deterministic nodes convert to chance first.  Chance predecessors are
    reversed into the node (their tables become posteriors), successors are
    re-conditioned on the observed value, arcs into decision successors are
    deleted, and the node is removed.
    """
    node = diagram.node(ev.node)
    if node.kind in (NodeKind.DECISION, NodeKind.VALUE):
        raise EvidenceError(f"cannot observe {node.kind.value} node {ev.node!r}")
    steps: list[SpaceStep] = []
    if node.kind is NodeKind.DETERMINISTIC:
        steps.append(
            _member_step(
                diagram, "convert-deterministic", ev.node,
                {ev.node, *node.parents},
            )
        )
        diagram = convert_deterministic(diagram, ev.node)
    diagram = _reverse_parents_away(diagram, ev.node, steps)
    k_parents = list(diagram.parents(ev.node))
    space = diagram.space(ev.node)
    rows = diagram.node(ev.node).table
    weight_by_config: dict[tuple[str, ...], float] | None = None

    if ev.is_simple:
        if k_parents:
            raise EvidenceError(
                f"{ev.node!r} has decision predecessors {k_parents}; observe "
                "conditional outcomes instead (one per decision configuration)"
            )
        idx = space.index(ev.outcome)
        weight = float(rows[0, idx])
        if weight <= 0.0:
            raise ImpossibleEvidenceError(
                f"observation {ev.node}={ev.outcome} has probability 0"
            )
        chooser: dict[tuple[int, ...], int] = {(): idx}
        note = f"{ev.node}={ev.outcome}"
    else:
        mapping = ev.conditional_mapping()
        spaces = [diagram.space(k) for k in k_parents]
        configs = list(iter_label_configs(spaces))
        if set(mapping) != set(configs):
            raise EvidenceError(
                f"conditional evidence on {ev.node!r} must name exactly one outcome "
                f"per configuration of {k_parents}"
            )
        chooser = {}
        weight_by_config = {}
        k_sizes = [len(s) for s in spaces]
        for row_i, (cfg_idx, cfg_labels) in enumerate(
            zip(iter_configs(k_sizes), configs)
        ):
            o_idx = space.index(mapping[cfg_labels])
            chooser[tuple(cfg_idx)] = o_idx
            weight_by_config[cfg_labels] = float(rows[row_i, o_idx])
        if all(w <= 0.0 for w in weight_by_config.values()):
            raise ImpossibleEvidenceError(
                f"conditional observation on {ev.node!r} has probability 0 "
                "under every decision configuration"
            )
        weight = 1.0
        note = str(ev)

    succ = diagram.successors(ev.node)
    folded = []
    for s in sorted(succ):
        if diagram.kind(s) is NodeKind.DECISION:
            continue
        # one substitution per successor table; the observed node never
        # joins a product over several successors at once
        steps.append(
            _member_step(
                diagram, "propagate-evidence", ev.node,
                {s, *diagram.parents(s), *k_parents},
                note=f"{note} into {s}",
            )
        )
        folded.append(_folded_node(diagram, s, ev.node, k_parents, chooser))
    diagram = diagram.updated(replace=folded)
    decision_succ = [s for s in sorted(succ) if diagram.kind(s) is NodeKind.DECISION]
    topo = diagram.topological_order()
    for dec in sorted(decision_succ, key=topo.index, reverse=True):
        steps.append(
            _member_step(
                diagram, "prune-decision-arc", ev.node,
                {dec, *diagram.parents(dec)},
                note=f"arc to {dec}",
            )
        )
        dn = diagram.node(dec)
        diagram = diagram.updated(
            replace=[dn.replace(parents=tuple(p for p in dn.parents if p != ev.node))]
        )
    diagram = diagram.updated(remove=[ev.node])
    return PropagationResult(
        diagram=diagram,
        evidence_weight=weight,
        steps=tuple(steps),
        weight_by_config=weight_by_config,
    )


def absorb_evidence(diagram: Diagram, ev: Evidence) -> PropagationResult:
    """Restrict the observed node's table to the observed column(s).

    This is the lookup half of propagation: the node stays in the diagram
    with all probability mass moved onto the observed label(s), while the
    looked-up masses are recorded per configuration.  The result is still
    a valid diagram.
    """
    node = diagram.node(ev.node)
    if node.kind is not NodeKind.CHANCE:
        raise EvidenceError(f"absorb evidence on chance nodes only; convert {ev.node!r} first")
    space = diagram.space(ev.node)
    decision_parents = [p for p in node.parents if diagram.kind(p) is NodeKind.DECISION]
    parent_spaces = [diagram.space(p) for p in node.parents]

    if ev.is_simple:
        if decision_parents:
            # tolerable only when the table ignores the decisions (the
            # plain-observation treatment); genuine dependence needs the
            # conditional form
            from .valuation import drop_vacuous_decision_arcs

            probe = drop_vacuous_decision_arcs(diagram, ev.node)
            if any(
                probe.kind(p) is NodeKind.DECISION for p in probe.parents(ev.node)
            ):
                raise EvidenceError(
                    f"{ev.node!r} has decision predecessors {decision_parents}; "
                    "use conditional evidence"
                )
        label_of = {cfg: ev.outcome for cfg in iter_label_configs(parent_spaces)}
    else:
        mapping = ev.conditional_mapping()
        dec_spaces = [diagram.space(p) for p in decision_parents]
        if set(mapping) != set(iter_label_configs(dec_spaces)):
            raise EvidenceError(
                f"conditional evidence on {ev.node!r} must cover every configuration "
                f"of {decision_parents}"
            )
        dec_pos = [node.parents.index(p) for p in decision_parents]
        label_of = {
            cfg: mapping[tuple(cfg[i] for i in dec_pos)]
            for cfg in iter_label_configs(parent_spaces)
        }

    # the observed column keeps all the mass; the space itself is kept so
    # successor tables stay well-shaped (the node is deleted by full
    # propagation, not here)
    weights: dict[tuple[str, ...], float] = {}
    new_rows = np.zeros_like(node.table)
    for row_i, cfg in enumerate(iter_label_configs(parent_spaces)):
        label = label_of[cfg]
        weights[cfg] = float(node.table[row_i, space.index(label)])
        new_rows[row_i, space.index(label)] = 1.0
    if all(w <= 0.0 for w in weights.values()):
        raise ImpossibleEvidenceError(
            f"observation on {ev.node!r} has probability 0 under every configuration"
        )
    restricted = node.replace(table=new_rows)
    scalar = next(iter(weights.values())) if not node.parents else 1.0
    return PropagationResult(
        diagram=diagram.updated(replace=[restricted]),
        evidence_weight=scalar,
        weight_by_config=weights,
    )


def evidence_reversal(diagram: Diagram, ev: Evidence) -> PropagationResult:
    """Condition on an observed outcome of a node with chance predecessors.

    Predecessor tables become their Bayes posteriors given the outcome and
    the observed node leaves the diagram; equivalent to reversing the
    predecessor arcs and then propagating.
    """
    node = diagram.node(ev.node)
    if node.kind is not NodeKind.CHANCE:
        raise StructureError(
            f"{ev.node!r} is {node.kind.value}; deterministic nodes convert first"
        )
    if not ev.is_simple:
        raise EvidenceError("evidence reversal takes a plain outcome; use propagate_evidence for conditional evidence")
    reversible = [
        p
        for p in node.parents
        if diagram.kind(p) in (NodeKind.CHANCE, NodeKind.DETERMINISTIC)
    ]
    if not reversible:
        raise StructureError(f"{ev.node!r} has no chance predecessor to update")
    return propagate_evidence(diagram, ev)


def evidence_reversal_deterministic(diagram: Diagram, ev: Evidence) -> PropagationResult:
    """Evidence reversal on a deterministic node: convert it to a chance
    node, then update the predecessors' posteriors.  The posterior puts
    mass only on predecessor configurations the function maps to the
    observed outcome."""
    node = diagram.node(ev.node)
    if node.kind is not NodeKind.DETERMINISTIC:
        raise StructureError(f"{ev.node!r} is not deterministic")
    return evidence_reversal(convert_deterministic(diagram, ev.node), ev)


def propagate_to_deterministic(diagram: Diagram, ev: Evidence, target: str) -> Diagram:
    """Partially apply a deterministic node's function at an observed input.

    The target stays deterministic with one fewer argument, which keeps its
    representation cheaper than converting it to a chance node would.
    """
    if not ev.is_simple:
        raise EvidenceError("partial application takes a plain outcome")
    t_node = diagram.node(target)
    if t_node.kind is not NodeKind.DETERMINISTIC:
        raise StructureError(f"{target!r} is not deterministic")
    if ev.node not in t_node.parents:
        raise StructureError(f"{ev.node!r} is not a predecessor of {target!r}")
    idx = diagram.space(ev.node).index(ev.outcome)
    folded = _folded_node(diagram, target, ev.node, [], {(): idx})
    return diagram.updated(replace=[folded])


def prune_decision_arc(diagram: Diagram, chance_id: str, decision_id: str) -> Diagram:
    """Delete an arc from a chance node to a decision node once the
    decision is the node's only remaining successor.  The observation can
    no longer influence anything the decision cares about, so the optimum
    and its expected value are unchanged."""
    node = diagram.node(chance_id)
    if node.kind not in (NodeKind.CHANCE, NodeKind.DETERMINISTIC):
        raise StructureError(f"{chance_id!r} is not a chance node")
    if diagram.kind(decision_id) is not NodeKind.DECISION:
        raise StructureError(f"{decision_id!r} is not a decision node")
    succ = diagram.successors(chance_id)
    if succ != {decision_id}:
        raise StructureError(
            f"{chance_id!r} must have {decision_id!r} as its only successor, has {sorted(succ)}"
        )
    dn = diagram.node(decision_id)
    return diagram.updated(
        replace=[dn.replace(parents=tuple(p for p in dn.parents if p != chance_id))]
    )


def marginal_probability(diagram: Diagram, node_id: str) -> np.ndarray:
    """Unconditional marginal distribution of a chance node.

    Requires the node to have no decision ancestor; otherwise the marginal
    depends on the decision taken and a conditional treatment is needed.
    """
    node = diagram.node(node_id)
    if node.kind is not NodeKind.CHANCE:
        raise StructureError(f"{node_id!r} is not a chance node")
    ancestors = diagram.ancestors(node_id)
    bad = sorted(a for a in ancestors if diagram.kind(a) is NodeKind.DECISION)
    if bad:
        raise StructureError(
            f"{node_id!r} has decision ancestors {bad}; its marginal is decision-dependent"
        )
    closure = [
        nid for nid in diagram.topological_order() if nid == node_id or nid in ancestors
    ]
    sizes = size_map(diagram, closure)
    axes: list[str] = []
    arr = np.ones(())
    for nid in closure:
        n = diagram.node(nid)
        t = table_axes(diagram, nid)
        if n.kind is NodeKind.DETERMINISTIC:
            t = np.eye(sizes[nid])[t]
        arr = aligned(arr, axes, axes + [nid], sizes) * aligned(
            t, [*n.parents, nid], axes + [nid], sizes
        )
        axes.append(nid)
    if arr.ndim > 1:
        arr = arr.sum(axis=tuple(range(arr.ndim - 1)))
    return arr
