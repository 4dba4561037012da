"""Standard reduction operations and full diagram evaluation.

Three transformations reduce any regular influence diagram to its bare
value node: arc reversal (Bayes rule between two chance nodes), chance
node removal (expectation into the value table), and decision node
removal (optimization over alternatives, recording the chosen rule).
Deterministic nodes convert to degenerate chance nodes when they must
take part in reversals, and barren nodes (no successors) drop freely.

Every step is costed by its computational outcome space: the product of
outcome-space sizes over the reduced node, its direct predecessors, its
direct successors, and the successors' predecessors.  The running log of
these costs is the :class:`SpaceLedger`; its maximum is the space
bottleneck of the whole evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    TIE_TOL,
    Diagram,
    Node,
    NodeKind,
    StructureError,
    aligned,
    configuration_count,
    iter_label_configs,
    size_map,
    table_axes,
)


@dataclass(frozen=True)
class SpaceStep:
    """One reduction action and the outcome-space cost charged for it."""

    op: str
    node: str
    space: int
    members: tuple[str, ...]
    note: str = ""


@dataclass
class SpaceLedger:
    steps: list[SpaceStep] = field(default_factory=list)

    @property
    def max_space(self) -> int:
        return max((s.space for s in self.steps), default=1)

    def add(self, step: SpaceStep) -> None:
        self.steps.append(step)

    def extend(self, steps) -> None:
        self.steps.extend(steps)


def reduction_space(diagram: Diagram, node_id: str) -> tuple[int, tuple[str, ...]]:
    """Computational outcome space of reducing ``node_id`` right now.

    Counts configurations over the node, its predecessors, its successors,
    and the successors' predecessors; the value node carries no outcome
    space and is excluded from the product.
    """
    members = {node_id}
    members.update(diagram.parents(node_id))
    succ = diagram.successors(node_id)
    members.update(succ)
    for s in succ:
        members.update(diagram.parents(s))
    members = {m for m in members if diagram.kind(m) is not NodeKind.VALUE}
    ordered = tuple(sorted(members))
    return configuration_count(diagram, ordered), ordered


def _step(diagram: Diagram, op: str, node_id: str, note: str = "") -> SpaceStep:
    space, members = reduction_space(diagram, node_id)
    return SpaceStep(op=op, node=node_id, space=space, members=members, note=note)


def _member_step(
    diagram: Diagram, op: str, node_id: str, members, note: str = ""
) -> SpaceStep:
    """A step charged for an explicit working set rather than the whole
    reduction neighborhood; evidence operations touch one successor (or one
    predecessor) at a time, so that is all they pay for."""
    kept = tuple(
        sorted(m for m in members if diagram.kind(m) is not NodeKind.VALUE)
    )
    return SpaceStep(
        op=op,
        node=node_id,
        space=configuration_count(diagram, kept),
        members=kept,
        note=note,
    )


@dataclass(frozen=True, eq=False)
class DecisionRule:
    """Optimal choice of one decision per configuration of the information
    parents that remained relevant when the decision was removed."""

    decision: str
    alternatives: tuple[str, ...]
    parents: tuple[str, ...]
    parent_labels: tuple[tuple[str, ...], ...]
    choices: np.ndarray  # alternative index per parent configuration

    def __post_init__(self) -> None:
        arr = np.array(self.choices, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "choices", arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DecisionRule):
            return NotImplemented
        return (
            self.decision == other.decision
            and self.alternatives == other.alternatives
            and self.parents == other.parents
            and self.parent_labels == other.parent_labels
            and bool(np.array_equal(self.choices, other.choices))
        )

    def as_mapping(self) -> dict[tuple[str, ...], str]:
        sizes = [len(labels) for labels in self.parent_labels]
        table = self.choices.reshape(sizes) if sizes else self.choices.reshape(())
        out: dict[tuple[str, ...], str] = {}
        for idx in np.ndindex(*sizes) if sizes else [()]:
            config = tuple(labels[i] for labels, i in zip(self.parent_labels, idx))
            out[config] = self.alternatives[int(table[idx])]
        return out

    def choice_for(self, config: dict[str, str]) -> str:
        idx = []
        for parent, labels in zip(self.parents, self.parent_labels):
            if parent not in config:
                raise StructureError(f"rule for {self.decision!r} needs a value for {parent!r}")
            idx.append(labels.index(config[parent]))
        sizes = [len(labels) for labels in self.parent_labels]
        table = self.choices.reshape(sizes) if sizes else self.choices.reshape(())
        return self.alternatives[int(table[tuple(idx)])]

    def sliced(self, parent: str, label: str) -> "DecisionRule":
        """Fix one information parent to a label and drop its axis."""
        if parent not in self.parents:
            return self
        axis = self.parents.index(parent)
        sizes = [len(labels) for labels in self.parent_labels]
        table = self.choices.reshape(sizes)
        picked = np.take(table, self.parent_labels[axis].index(label), axis=axis)
        return DecisionRule(
            decision=self.decision,
            alternatives=self.alternatives,
            parents=self.parents[:axis] + self.parents[axis + 1 :],
            parent_labels=self.parent_labels[:axis] + self.parent_labels[axis + 1 :],
            choices=picked.reshape(-1),
        )


Policy = dict[str, DecisionRule]


@dataclass
class EvaluationResult:
    ev: float
    policy: Policy
    ledger: SpaceLedger


# -- the three standard operations ----------------------------------------


def _reverse_arc(diagram: Diagram, src: str, dst: str) -> tuple[Diagram, bool]:
    """Flip the arc src -> dst by Bayes rule; both nodes end up conditioned
    on the union of their former predecessors.  Returns the new diagram and
    whether any conditional row was undefined (zero marginal, set uniform).
    """
    s_node, d_node = diagram.node(src), diagram.node(dst)
    if s_node.kind is not NodeKind.CHANCE or d_node.kind is not NodeKind.CHANCE:
        raise StructureError(f"arc reversal needs two chance nodes, got {src!r} -> {dst!r}")
    if src not in d_node.parents:
        raise StructureError(f"no arc {src!r} -> {dst!r} to reverse")
    if diagram.has_path(src, dst, skip_direct=True):
        raise StructureError(f"reversing {src!r} -> {dst!r} would create a cycle")

    union = [p for p in d_node.parents if p != src]
    union += [p for p in s_node.parents if p not in union]
    sizes = size_map(diagram, union + [src, dst])
    axes = union + [src, dst]

    p_src = aligned(table_axes(diagram, src), [*s_node.parents, src], axes, sizes)
    p_dst = aligned(table_axes(diagram, dst), [*d_node.parents, dst], axes, sizes)
    joint = p_src * p_dst

    src_axis = len(union)
    marginal = joint.sum(axis=src_axis)  # over (union..., dst)
    denom = np.expand_dims(marginal, axis=src_axis)
    zero = denom <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(zero, 1.0 / sizes[src], joint / np.where(zero, 1.0, denom))
    # reshape to the new parent orders: dst | union, src | union + dst
    new_dst = diagram.node(dst).replace(
        parents=tuple(union), table=marginal.reshape(-1, sizes[dst])
    )
    cond = np.moveaxis(cond, src_axis, -1)  # (union..., dst, src)
    new_src = diagram.node(src).replace(
        parents=tuple(union) + (dst,), table=cond.reshape(-1, sizes[src])
    )
    return diagram.updated(replace=[new_src, new_dst]), bool(zero.any())


def reverse_arc(diagram: Diagram, src: str, dst: str) -> Diagram:
    """Public arc reversal; see :func:`_reverse_arc` for the mechanics."""
    out, _ = _reverse_arc(diagram, src, dst)
    return out


def remove_chance_node(diagram: Diagram, node_id: str) -> Diagram:
    """Absorb a chance node whose only successor is the value node by
    taking the expectation of the value over the node's outcomes."""
    node = diagram.node(node_id)
    if node.kind is not NodeKind.CHANCE:
        raise StructureError(f"{node_id!r} is not a chance node")
    value_id = diagram.value_id()
    succ = diagram.successors(node_id)
    if succ != {value_id}:
        raise StructureError(
            f"{node_id!r} has successors {sorted(succ)}; reverse arcs until only the value node remains"
        )
    v_node = diagram.node(value_id)
    new_parents = [p for p in v_node.parents if p != node_id]
    new_parents += [p for p in node.parents if p not in new_parents]
    axes = [*new_parents, node_id]
    sizes = size_map(diagram, axes)
    probs = aligned(table_axes(diagram, node_id), [*node.parents, node_id], axes, sizes)
    values = aligned(table_axes(diagram, value_id), list(v_node.parents), axes, sizes)
    new_table = (probs * values).sum(axis=-1)
    new_value = v_node.replace(parents=tuple(new_parents), table=new_table.reshape(-1))
    return diagram.updated(replace=[new_value], remove=[node_id])


def remove_decision_node(diagram: Diagram, node_id: str) -> tuple[Diagram, DecisionRule]:
    """Optimize out a decision whose only successor is the value node.

    Requires every other value predecessor to be known at decision time.
    The value table becomes the per-configuration optimum; the returned
    rule records the optimizing alternative (lowest index on ties).
    """
    node = diagram.node(node_id)
    if node.kind is not NodeKind.DECISION:
        raise StructureError(f"{node_id!r} is not a decision node")
    value_id = diagram.value_id()
    succ = diagram.successors(node_id)
    if succ != {value_id}:
        raise StructureError(f"decision {node_id!r} still has successors {sorted(succ - {value_id})}")
    v_node = diagram.node(value_id)
    remaining = [p for p in v_node.parents if p != node_id]
    unseen = [p for p in remaining if p not in node.parents]
    if unseen:
        raise StructureError(
            f"decision {node_id!r} cannot be removed: value also depends on unobserved {unseen}"
        )
    axes = [*remaining, node_id]
    sizes = size_map(diagram, axes)
    values = aligned(table_axes(diagram, value_id), list(v_node.parents), axes, sizes)
    if diagram.objective == "maximize":
        best = values.max(axis=-1)
        tied = values >= best[..., None] - TIE_TOL
    else:
        best = values.min(axis=-1)
        tied = values <= best[..., None] + TIE_TOL
    choices = tied.argmax(axis=-1)  # first alternative within tolerance of the optimum
    rule = DecisionRule(
        decision=node_id,
        alternatives=diagram.space(node_id).labels,
        parents=tuple(remaining),
        parent_labels=tuple(diagram.space(p).labels for p in remaining),
        choices=choices.reshape(-1),
    )
    new_value = v_node.replace(parents=tuple(remaining), table=best.reshape(-1))
    return diagram.updated(replace=[new_value], remove=[node_id]), rule


def convert_deterministic(diagram: Diagram, node_id: str) -> Diagram:
    """Turn a deterministic node into the equivalent degenerate chance node."""
    node = diagram.node(node_id)
    if node.kind is not NodeKind.DETERMINISTIC:
        raise StructureError(f"{node_id!r} is not deterministic")
    n = len(diagram.space(node_id))
    table = np.eye(n)[node.table]
    return diagram.updated(
        replace=[node.replace(kind=NodeKind.CHANCE, table=table)]
    )


def remove_barren(diagram: Diagram) -> Diagram:
    """Repeatedly drop chance and deterministic nodes with no successors."""
    out, _ = _sweep_barren(diagram, None, locked=None)
    return out


def _sweep_barren(
    diagram: Diagram, ledger: SpaceLedger | None, locked: str | None
) -> tuple[Diagram, bool]:
    changed = False
    while True:
        succ = diagram.successor_map()
        barren = sorted(
            nid
            for nid, node in diagram.nodes.items()
            if node.kind in (NodeKind.CHANCE, NodeKind.DETERMINISTIC)
            and not succ[nid]
            and nid != locked
        )
        if not barren:
            return diagram, changed
        for nid in barren:
            if ledger is not None:
                ledger.add(_step(diagram, "remove-barren", nid))
            diagram = diagram.updated(remove=[nid])
        changed = True


# -- full evaluation ---------------------------------------------------------


def _elimination_candidates(diagram: Diagram, locked: str | None) -> list[str]:
    value_id = diagram.value_id()
    succ = diagram.successor_map()
    out = []
    for nid, node in diagram.nodes.items():
        if nid == locked or node.kind is NodeKind.VALUE:
            continue
        if node.kind in (NodeKind.CHANCE, NodeKind.DETERMINISTIC):
            if any(diagram.kind(s) is NodeKind.DECISION for s in succ[nid]):
                continue
            out.append(nid)
        else:  # decision
            if not succ[nid]:
                # influences nothing: removable with an arbitrary choice
                out.append(nid)
                continue
            if succ[nid] != {value_id}:
                continue
            others = [p for p in diagram.parents(value_id) if p != nid]
            if all(p in node.parents for p in others):
                out.append(nid)
    return out


def _eliminate_chance(diagram: Diagram, nid: str, ledger: SpaceLedger) -> Diagram:
    value_id = diagram.value_id()
    if diagram.kind(nid) is NodeKind.DETERMINISTIC:
        ledger.add(_step(diagram, "convert-deterministic", nid))
        diagram = convert_deterministic(diagram, nid)
    while True:
        succ = diagram.successors(nid) - {value_id}
        if not succ:
            break
        topo = diagram.topological_order()
        target = min(succ, key=topo.index)
        if diagram.kind(target) is NodeKind.DETERMINISTIC:
            ledger.add(_step(diagram, "convert-deterministic", target))
            diagram = convert_deterministic(diagram, target)
        ledger.add(_step(diagram, "reverse-arc", nid, note=f"into {target}"))
        diagram, zero = _reverse_arc(diagram, nid, target)
        if zero:
            last = ledger.steps[-1]
            ledger.steps[-1] = SpaceStep(
                last.op, last.node, last.space, last.members,
                note=(last.note + "; zero-probability marginal, row set uniform").strip("; "),
            )
    if value_id in diagram.successors(nid):
        ledger.add(_step(diagram, "remove-chance", nid))
        return remove_chance_node(diagram, nid)
    ledger.add(_step(diagram, "remove-barren", nid))
    return diagram.updated(remove=[nid])


def reduce_diagram(
    diagram: Diagram, *, locked: str | None = None
) -> tuple[Diagram, Policy, SpaceLedger]:
    """Reduce a diagram as far as admissible steps allow.

    Steps are chosen greedily: among currently eliminable nodes, pick the
    one with the smallest computational outcome space, breaking ties by
    node id.  With ``locked`` set, that node is never eliminated and the
    reduction stops once it and the value node are all that remain, which
    leaves the value table conditioned on the locked node's outcomes.
    """
    ledger = SpaceLedger()
    policy: Policy = {}
    diagram, _ = _sweep_barren(diagram, ledger, locked)
    while True:
        rest = [
            nid for nid, n in diagram.nodes.items()
            if n.kind is not NodeKind.VALUE and nid != locked
        ]
        if not rest:
            break
        candidates = _elimination_candidates(diagram, locked)
        if not candidates:
            raise StructureError(
                "no admissible reduction step; the diagram is not regular enough to evaluate"
            )
        pick = min(candidates, key=lambda nid: (reduction_space(diagram, nid)[0], nid))
        if diagram.kind(pick) is NodeKind.DECISION:
            if not diagram.successors(pick):
                # an earlier decision orphaned by a later removal; any
                # alternative is optimal, take the first for determinism
                ledger.add(_step(diagram, "remove-decision", pick, note="no successors, choice arbitrary"))
                policy[pick] = DecisionRule(
                    decision=pick,
                    alternatives=diagram.space(pick).labels,
                    parents=(),
                    parent_labels=(),
                    choices=np.zeros(1, dtype=np.int64),
                )
                diagram = diagram.updated(remove=[pick])
            else:
                ledger.add(_step(diagram, "remove-decision", pick))
                diagram, rule = remove_decision_node(diagram, pick)
                policy[pick] = rule
        else:
            diagram = _eliminate_chance(diagram, pick, ledger)
        diagram, _ = _sweep_barren(diagram, ledger, locked)
    return diagram, policy, ledger


def evaluate(diagram: Diagram) -> EvaluationResult:
    """Reduce to the bare value node; return the expected value, the
    collected decision rules, and the per-step outcome-space ledger."""
    reduced, policy, ledger = reduce_diagram(diagram)
    value = reduced.node(reduced.value_id())
    if value.parents:
        raise StructureError(f"reduction stalled with value parents {value.parents}")
    return EvaluationResult(ev=float(value.table[0]), policy=policy, ledger=ledger)
