"""Value-of-evidence analytics.

The value of evidence (VOE) of an outcome is the expected value of the
diagram conditioned on observing that outcome, minus the baseline expected
value; it can be negative.  Three classic decision-analysis measures fall
out of the per-outcome VOE values directly:

* outcome sensitivity: max VOE minus min VOE over the outcomes;
* value of perfect information (VOPI): probability-weighted sum of VOEs,
  never below zero;
* value of control (VOC): the optimal VOE over the outcomes.

Each also has an independent "standard" computation (adding an
informational arc for VOPI, turning the chance node into a decision for
VOC); both routes are provided so they can check each other.

For a node with decision predecessors the observable object is the vector
of conditional outcomes (one per decision configuration).  Working with
those vectors needs a joint distribution over them, supplied externally as
a :class:`JointConditionalTable`; its one-dimensional margins must match
the node's conditional rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .core import (
    LOAD_RENORM_TOL,
    PROB_TOL,
    Diagram,
    DiagramError,
    Node,
    NodeKind,
    OutcomeSpace,
    StructureError,
    iter_label_configs,
    table_axes,
)
from .evidence import (
    Evidence,
    EvidenceError,
    PropagationResult,
    _reverse_parents_away,
    marginal_probability,
    propagate_evidence,
)
from .transforms import (
    EvaluationResult,
    Policy,
    SpaceStep,
    convert_deterministic,
    evaluate,
)


class ValuationError(DiagramError):
    """A metric cannot be computed as requested."""


# -- joint over conditional-outcome vectors ---------------------------------


def vector_label(configs: Sequence[tuple[str, ...]], vector: Sequence[str]) -> str:
    return "|".join(
        f"{','.join(cfg)}:{out}" for cfg, out in zip(configs, vector)
    )


@dataclass(frozen=True)
class JointConditionalTable:
    """Joint distribution over a node's conditional-outcome vectors.

    ``configs`` enumerates the decision-predecessor configurations in
    canonical row order; a vector assigns one outcome label per
    configuration.  ``entries`` maps each vector to its probability.
    """

    node: str
    decision_parents: tuple[str, ...]
    configs: tuple[tuple[str, ...], ...]
    entries: Mapping[tuple[str, ...], float]

    def vectors(self) -> tuple[tuple[str, ...], ...]:
        return tuple(self.entries)

    def probability(self, vector: tuple[str, ...]) -> float:
        return float(self.entries[vector])

    def margin(self, config_index: int) -> dict[str, float]:
        """Marginal distribution of the outcome at one configuration."""
        out: dict[str, float] = {}
        for vector, p in self.entries.items():
            out[vector[config_index]] = out.get(vector[config_index], 0.0) + p
        return out

    def label(self, vector: tuple[str, ...]) -> str:
        return vector_label(self.configs, vector)


def build_joint(
    diagram: Diagram,
    node_id: str,
    probabilities: Mapping[tuple[str, ...], float],
) -> JointConditionalTable:
    """Assemble and sanity-check a joint table against the diagram.

    Keys are outcome vectors ordered by the canonical enumeration of the
    node's decision-predecessor configurations.  The vector set must be the
    full product of the node's outcome space, entries must sum to one, and
    every one-dimensional margin must reproduce the node's conditional row
    (within the load tolerance, so published rounded tables pass).
    """
    node = diagram.node(node_id)
    k_parents = tuple(
        p for p in node.parents if diagram.kind(p) is NodeKind.DECISION
    )
    if not k_parents:
        raise ValuationError(f"{node_id!r} has no decision predecessors")
    if len(k_parents) != len(node.parents):
        raise ValuationError(
            f"{node_id!r} also has chance predecessors; reverse them away before "
            "supplying a conditional-outcome joint"
        )
    configs = tuple(iter_label_configs([diagram.space(k) for k in k_parents]))
    space = diagram.space(node_id)
    expected = set(iter_label_configs([space] * len(configs)))
    if set(probabilities) != expected:
        raise ValuationError(
            f"joint for {node_id!r} must assign a probability to each of the "
            f"{len(expected)} outcome vectors"
        )
    total = float(sum(probabilities.values()))
    if abs(total - 1.0) > LOAD_RENORM_TOL:
        raise ValuationError(f"joint probabilities sum to {total:.9g}, not 1")
    joint = JointConditionalTable(
        node=node_id,
        decision_parents=k_parents,
        configs=configs,
        entries={v: float(p) for v, p in sorted(probabilities.items())},
    )
    _check_margins(diagram, joint)
    return joint


def _check_margins(diagram: Diagram, joint: JointConditionalTable) -> None:
    node = diagram.node(joint.node)
    space = diagram.space(joint.node)
    for i, _cfg in enumerate(joint.configs):
        margin = joint.margin(i)
        row = node.table[i]
        for j, label in enumerate(space.labels):
            if abs(margin.get(label, 0.0) - float(row[j])) > LOAD_RENORM_TOL:
                raise ValuationError(
                    f"joint margin for {joint.node!r} at configuration "
                    f"{_cfg} disagrees with the node's conditional row "
                    f"({margin.get(label, 0.0):.6g} vs {float(row[j]):.6g} on {label!r})"
                )


def condition_joint(
    joint: JointConditionalTable, config: tuple[str, ...], outcome: str
) -> tuple[tuple[tuple[str, ...], ...], dict[tuple[str, ...], float]]:
    """Bayes-condition the joint on the outcome at one configuration.

    Returns the remaining configurations and the conditional distribution
    over the outcome vectors at those configurations.
    """
    if config not in joint.configs:
        raise ValuationError(f"{config} is not a configuration of {joint.decision_parents}")
    idx = joint.configs.index(config)
    mass = sum(p for v, p in joint.entries.items() if v[idx] == outcome)
    if mass <= 0.0:
        raise ValuationError(
            f"conditioning on {outcome!r} at {config} has probability 0"
        )
    remaining = joint.configs[:idx] + joint.configs[idx + 1 :]
    dist: dict[tuple[str, ...], float] = {}
    for vector, p in joint.entries.items():
        if vector[idx] != outcome:
            continue
        rest = vector[:idx] + vector[idx + 1 :]
        dist[rest] = dist.get(rest, 0.0) + p / mass
    return remaining, dist


# -- report -----------------------------------------------------------------


@dataclass(frozen=True)
class VoeEntry:
    outcome: str
    probability: float
    ev_after: float
    voe: float
    policy: Policy
    vector: tuple[str, ...] | None = None


@dataclass(frozen=True)
class VoeReport:
    node: str
    mode: str  # "naive" or "full"
    objective: str
    baseline_ev: float
    entries: tuple[VoeEntry, ...]

    def probabilities_sum(self) -> float:
        return float(sum(e.probability for e in self.entries))


def outcome_sensitivity(report: VoeReport) -> float:
    """Spread of the per-outcome VOE values: max minus min, which equals
    the spread of the conditional expected values themselves."""
    if not report.entries:
        raise ValuationError("empty report")
    values = [e.voe for e in report.entries]
    return max(values) - min(values)


def vopi_from_voe(report: VoeReport) -> float:
    """Probability-weighted sum of the VOE values."""
    return float(sum(e.probability * e.voe for e in report.entries))


def value_of_control(report: VoeReport) -> float:
    """The optimal VOE over the outcomes (max when maximizing)."""
    if not report.entries:
        raise ValuationError("empty report")
    values = [e.voe for e in report.entries]
    return max(values) if report.objective == "maximize" else min(values)


# -- preparation helpers ------------------------------------------------------


def drop_vacuous_decision_arcs(diagram: Diagram, node_id: str) -> Diagram:
    """Remove arcs from decision predecessors the node's table ignores.

    A decision predecessor is vacuous when the conditional rows are
    identical across its alternatives for every configuration of the other
    predecessors; the shared row then serves as the node's conditional
    without that arc.
    """
    while True:
        node = diagram.node(node_id)
        dropped = False
        for parent in node.parents:
            if diagram.kind(parent) is not NodeKind.DECISION:
                continue
            axis = node.parents.index(parent)
            arr = table_axes(diagram, node_id)
            first = np.take(arr, 0, axis=axis)
            same = all(
                np.allclose(np.take(arr, i, axis=axis), first, atol=PROB_TOL, rtol=0.0)
                for i in range(1, diagram.size(parent))
            )
            if not same:
                continue
            new_parents = tuple(p for p in node.parents if p != parent)
            diagram = diagram.updated(
                replace=[
                    node.replace(
                        parents=new_parents,
                        table=first.reshape(-1, diagram.size(node_id)),
                    )
                ]
            )
            dropped = True
            break
        if not dropped:
            return diagram


def _prepare_plain(diagram: Diagram, node_id: str) -> Diagram:
    """Convert a deterministic target and drop vacuous decision arcs so the
    node can be treated as an unconditionally observable chance node."""
    if diagram.kind(node_id) is NodeKind.DETERMINISTIC:
        diagram = convert_deterministic(diagram, node_id)
    return drop_vacuous_decision_arcs(diagram, node_id)


def _as_evidence(diagram: Diagram, node_id: str, outcome) -> Evidence:
    if isinstance(outcome, Evidence):
        return outcome
    if isinstance(outcome, str):
        return Evidence.simple(node_id, outcome)
    if isinstance(outcome, Mapping):
        return Evidence.of_conditional(node_id, outcome)
    raise EvidenceError(f"cannot interpret evidence {outcome!r}")


def propagate_observation(diagram: Diagram, ev: Evidence) -> PropagationResult:
    """Propagate evidence after the plain-observation preparation: convert
    a deterministic target and drop vacuous decision arcs first, so a node
    whose table ignores its decision predecessors accepts a plain outcome."""
    prepared = diagram
    if ev.is_simple and ev.node in diagram.nodes:
        prepared = _prepare_plain(diagram, ev.node)
    return propagate_evidence(prepared, ev)


def value_of_evidence(diagram: Diagram, node_id: str, outcome) -> float:
    """Expected value after observing ``outcome`` minus the baseline.

    ``outcome`` is a label, or a mapping from decision-predecessor
    configurations to labels for conditional observations.
    """
    ev = _as_evidence(diagram, node_id, outcome)
    baseline = evaluate(diagram).ev
    result = propagate_observation(diagram, ev)
    return evaluate(result.diagram).ev - baseline


def _voe_runs(
    diagram: Diagram, node_id: str, joint: JointConditionalTable | None
) -> Iterator[tuple[str, tuple[str, ...] | None, float, PropagationResult, EvaluationResult]]:
    """One conditioned evaluation per outcome (plain mode) or per outcome
    vector (full mode).  Yields (label, vector, probability, propagation,
    evaluation)."""
    if joint is None:
        prepared = _prepare_plain(diagram, node_id)
        remaining_decisions = [
            p
            for p in prepared.parents(node_id)
            if prepared.kind(p) is NodeKind.DECISION
        ]
        if remaining_decisions:
            raise ValuationError(
                f"{node_id!r} genuinely depends on decisions {remaining_decisions}; "
                "supply a conditional-outcome joint"
            )
        probs = marginal_probability(prepared, node_id)
        for i, label in enumerate(prepared.space(node_id).labels):
            result = propagate_evidence(prepared, Evidence.simple(node_id, label))
            yield label, None, float(probs[i]), result, evaluate(result.diagram)
    else:
        prepared = diagram
        if prepared.kind(node_id) is NodeKind.DETERMINISTIC:
            prepared = convert_deterministic(prepared, node_id)
        for vector in _canonical_vectors(prepared, joint):
            mapping = dict(zip(joint.configs, vector))
            result = propagate_evidence(
                prepared, Evidence.of_conditional(node_id, mapping)
            )
            yield (
                joint.label(vector),
                vector,
                joint.probability(vector),
                result,
                evaluate(result.diagram),
            )


def _canonical_vectors(
    diagram: Diagram, joint: JointConditionalTable
) -> Iterator[tuple[str, ...]]:
    space = diagram.space(joint.node)
    yield from iter_label_configs([space] * len(joint.configs))


def voe_report(
    diagram: Diagram, node_id: str, joint: JointConditionalTable | None = None
) -> VoeReport:
    """Per-outcome VOE values for a node.

    Without a joint the node's outcomes are treated as unconditionally
    observable and weighted by the marginal distribution.  With a joint the
    report has one entry per conditional-outcome vector, weighted by the
    supplied joint.
    """
    if joint is not None and diagram.kind(node_id) is NodeKind.CHANCE:
        _check_margins(diagram, joint)
    baseline = evaluate(diagram)
    entries = []
    for label, vector, prob, _prop, after in _voe_runs(diagram, node_id, joint):
        entries.append(
            VoeEntry(
                outcome=label,
                probability=prob,
                ev_after=after.ev,
                voe=after.ev - baseline.ev,
                policy=after.policy,
                vector=vector,
            )
        )
    return VoeReport(
        node=node_id,
        mode="naive" if joint is None else "full",
        objective=diagram.objective,
        baseline_ev=baseline.ev,
        entries=tuple(entries),
    )


# -- standard-method counterparts --------------------------------------------


def expansion_vector_id(node_id: str) -> str:
    return f"{node_id}__vector"


def conditional_expansion(
    diagram: Diagram, node_id: str, joint: JointConditionalTable
) -> Diagram:
    """Replace a decision-conditioned chance node by an equivalent pair: a
    root chance node over the conditional-outcome vectors distributed by
    the joint, plus a deterministic selector that reads the component the
    decision configuration picks.  Successors are untouched (the selector
    keeps the original id and outcome space), and the expected value is
    unchanged because the joint's margins reproduce the original
    conditional rows."""
    node = diagram.node(node_id)
    if node.kind is not NodeKind.CHANCE:
        raise ValuationError(f"{node_id!r} is not a chance node")
    if tuple(joint.decision_parents) != node.parents:
        raise ValuationError(
            f"joint conditions on {joint.decision_parents}, node on {node.parents}"
        )
    _check_margins(diagram, joint)
    vec_id = expansion_vector_id(node_id)
    if vec_id in diagram.nodes:
        raise ValuationError(f"node id {vec_id!r} already taken")
    vectors = list(_canonical_vectors(diagram, joint))
    labels = tuple(joint.label(v) for v in vectors)
    probs = np.array([[joint.probability(v) for v in vectors]])
    vector_node = Node(
        id=vec_id,
        kind=NodeKind.CHANCE,
        space=OutcomeSpace(labels),
        parents=(),
        table=probs,
    )
    space = diagram.space(node_id)
    rows = []
    for vector in vectors:
        for cfg_i in range(len(joint.configs)):
            rows.append(space.index(vector[cfg_i]))
    selector = Node(
        id=node_id,
        kind=NodeKind.DETERMINISTIC,
        space=space,
        parents=(vec_id, *joint.decision_parents),
        table=np.array(rows, dtype=np.int64),
    )
    return diagram.updated(replace=[selector], add=[vector_node])


def _add_informational_arcs(
    diagram: Diagram, source: str, decisions: Sequence[str]
) -> Diagram:
    replacements = []
    for dec in decisions:
        dn = diagram.node(dec)
        if source in dn.parents:
            continue
        replacements.append(dn.replace(parents=dn.parents + (source,)))
    return diagram.updated(replace=replacements) if replacements else diagram


def default_vopi_decision(diagram: Diagram, node_id: str) -> str:
    """The earliest decision in temporal order not already informed by the
    node; used when no decision is named explicitly."""
    decisions = diagram.decisions()
    if not decisions:
        raise ValuationError("diagram has no decision node")
    for dec in decisions:
        if node_id not in diagram.parents(dec):
            return dec
    return decisions[0]


def informed_evaluation(
    diagram: Diagram,
    node_id: str,
    decision: str,
    joint: JointConditionalTable | None = None,
) -> EvaluationResult:
    """Evaluate the diagram modified so the decision observes the node.

    The observation also reaches every later decision (information, once
    gained, persists).  With a joint supplied the node is first replaced by
    its conditional-outcome expansion so the new arc cannot close a cycle;
    the arc then starts at the root vector node.
    """
    if diagram.kind(decision) is not NodeKind.DECISION:
        raise ValuationError(f"{decision!r} is not a decision node")
    decisions = diagram.decisions()
    targets = list(decisions[decisions.index(decision):])
    if joint is None:
        prepared = _prepare_plain(diagram, node_id)
        if decision in prepared.ancestors(node_id) or any(
            prepared.kind(a) is NodeKind.DECISION for a in prepared.ancestors(node_id)
        ):
            raise ValuationError(
                f"informing {decision!r} of {node_id!r} would close a cycle; "
                "supply a conditional-outcome joint"
            )
        source = node_id
    else:
        prepared = conditional_expansion(diagram, node_id, joint)
        source = expansion_vector_id(node_id)
    return evaluate(_add_informational_arcs(prepared, source, targets))


def vopi_standard(
    diagram: Diagram,
    node_id: str,
    decision: str,
    joint: JointConditionalTable | None = None,
) -> float:
    """Value of perfect information by the arc-addition route: evaluate
    with the decision informed of the node, minus the baseline."""
    informed = informed_evaluation(diagram, node_id, decision, joint)
    return informed.ev - evaluate(diagram).ev


def voc_standard(diagram: Diagram, node_id: str) -> float:
    """Value of control by node conversion.

    The node's chance predecessors are reversed away first (so choosing an
    outcome carries the same posterior bookkeeping as observing it), then
    the node becomes the earliest decision, informing all others.
    """
    prepared = _prepare_plain(diagram, node_id)
    steps: list[SpaceStep] = []
    prepared = _reverse_parents_away(prepared, node_id, steps)
    remaining = prepared.parents(node_id)
    if remaining:
        raise ValuationError(
            f"cannot control {node_id!r}: decision predecessors {list(remaining)} "
            "remain; use the optimal-VOE route instead"
        )
    node = prepared.node(node_id)
    controlled = prepared.updated(
        replace=[node.replace(kind=NodeKind.DECISION, table=None, parents=())]
    )
    controlled = _add_informational_arcs(
        controlled, node_id, [d for d in controlled.decisions() if d != node_id]
    )
    return evaluate(controlled).ev - evaluate(diagram).ev
