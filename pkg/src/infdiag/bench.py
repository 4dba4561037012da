"""Two ways to compute per-outcome VOE values, with space accounting.

The propagation method conditions the diagram on one outcome at a time and
reduces each conditioned diagram separately.  The lock method marks the
evidence node non-removable, informs every decision of it, and runs a
single reduction that stops when only the locked node and the value node
remain; the value table then reads off the expected value conditional on
each outcome.

Both are driven by the same greedy ordering heuristic so their maximum
computational outcome spaces are comparable, and both are compared against
the standard arc-addition computation of the value of perfect information.
The standard pipeline continues the lock pipeline's reduction sequence to
its end, which is exactly the shared-sequence setting under which the
space claims are stated: the lock run's bottleneck can never exceed the
standard run's, and the per-outcome runs work on diagrams with one
variable fewer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Diagram,
    Node,
    NodeKind,
    OutcomeSpace,
    StructureError,
    validate,
)
from .evidence import marginal_probability
from .transforms import (
    Policy,
    SpaceLedger,
    SpaceStep,
    convert_deterministic,
    evaluate,
    reduce_diagram,
)
from .valuation import (
    JointConditionalTable,
    ValuationError,
    VoeEntry,
    VoeReport,
    _add_informational_arcs,
    _prepare_plain,
    _voe_runs,
    build_joint,
    vopi_from_voe,
)

VALUE_AGREEMENT_TOL = 1e-9


def _tagged(steps, tag: str) -> list[SpaceStep]:
    return [
        SpaceStep(s.op, s.node, s.space, s.members, note=f"[{tag}] {s.note}".strip())
        for s in steps
    ]


def voe_by_propagation(
    diagram: Diagram, node_id: str, joint: JointConditionalTable | None = None
) -> tuple[VoeReport, SpaceLedger]:
    """Method 1: propagate each outcome, reduce, difference against the
    baseline.  The ledger collects every step of every per-outcome run, so
    its maximum is the worst space any single conditioned evaluation needed.
    """
    baseline = evaluate(diagram)
    ledger = SpaceLedger()
    entries = []
    for label, vector, prob, prop, after in _voe_runs(diagram, node_id, joint):
        ledger.extend(_tagged(prop.steps, label))
        ledger.extend(_tagged(after.ledger.steps, label))
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
    report = VoeReport(
        node=node_id,
        mode="naive" if joint is None else "full",
        objective=diagram.objective,
        baseline_ev=baseline.ev,
        entries=tuple(entries),
    )
    return report, ledger


def _lock_run(
    diagram: Diagram, node_id: str
) -> tuple[Policy, SpaceLedger, np.ndarray, np.ndarray, Diagram]:
    """Reduce with ``node_id`` locked.  Returns the collected policy, the
    ledger, the conditional expected values per outcome, the node's
    marginal, and the fully reduced diagram (locked node plus value)."""
    reduced, policy, ledger = reduce_diagram(diagram, locked=node_id)
    node = reduced.node(node_id)
    if node.parents:
        raise StructureError(
            f"lock reduction stalled: {node_id!r} kept predecessors {node.parents}"
        )
    value = reduced.node(reduced.value_id())
    size = len(reduced.space(node_id))
    if value.parents == (node_id,):
        evs = np.asarray(value.table, dtype=float)
    elif value.parents == ():
        evs = np.full(size, float(value.table[0]))
    else:
        raise StructureError(
            f"lock reduction stalled: value still depends on {value.parents}"
        )
    probs = np.asarray(node.table[0], dtype=float)
    return policy, ledger, evs, probs, reduced


def _sliced_policy(policy: Policy, node_id: str, label: str) -> Policy:
    return {dec: rule.sliced(node_id, label) for dec, rule in policy.items()}


def voe_by_lock(diagram: Diagram, node_id: str) -> tuple[VoeReport, SpaceLedger]:
    """Method 2: lock the evidence node, inform every decision of it, and
    reduce once.  All per-outcome values come out of the final value table
    in a single pass."""
    baseline = evaluate(diagram)
    prepared = _prepare_plain(diagram, node_id)
    blocking = sorted(
        a for a in prepared.ancestors(node_id)
        if prepared.kind(a) is NodeKind.DECISION
    )
    if blocking or any(
        prepared.kind(p) is NodeKind.DECISION for p in prepared.parents(node_id)
    ):
        raise ValuationError(
            f"{node_id!r} depends on decisions; lock its conditional-outcome "
            "expansion instead"
        )
    with_arcs = _add_informational_arcs(prepared, node_id, prepared.decisions())
    policy, ledger, evs, probs, _ = _lock_run(with_arcs, node_id)
    entries = []
    for i, label in enumerate(prepared.space(node_id).labels):
        entries.append(
            VoeEntry(
                outcome=label,
                probability=float(probs[i]),
                ev_after=float(evs[i]),
                voe=float(evs[i]) - baseline.ev,
                policy=_sliced_policy(policy, node_id, label),
                vector=None,
            )
        )
    report = VoeReport(
        node=node_id,
        mode="naive",
        objective=diagram.objective,
        baseline_ev=baseline.ev,
        entries=tuple(entries),
    )
    return report, ledger


def voe_by_lock_conditional(
    diagram: Diagram, node_id: str, joint: JointConditionalTable
) -> tuple[VoeReport, SpaceLedger]:
    """Lock method for a node with decision predecessors: lock the root
    vector node of its conditional-outcome expansion."""
    from .valuation import conditional_expansion, expansion_vector_id

    baseline = evaluate(diagram)
    prepared = diagram
    if prepared.kind(node_id) is NodeKind.DETERMINISTIC:
        prepared = convert_deterministic(prepared, node_id)
    expanded = conditional_expansion(prepared, node_id, joint)
    vec_id = expansion_vector_id(node_id)
    locked_base = _add_informational_arcs(expanded, vec_id, expanded.decisions())
    policy, ledger, evs, probs, _ = _lock_run(locked_base, vec_id)
    labels = expanded.space(vec_id).labels
    entries = tuple(
        VoeEntry(
            outcome=labels[i],
            probability=float(probs[i]),
            ev_after=float(evs[i]),
            voe=float(evs[i]) - baseline.ev,
            policy=_sliced_policy(policy, vec_id, labels[i]),
            vector=None,
        )
        for i in range(len(labels))
    )
    report = VoeReport(
        node=node_id,
        mode="full",
        objective=diagram.objective,
        baseline_ev=baseline.ev,
        entries=entries,
    )
    return report, ledger


@dataclass
class MethodComparison:
    """Side-by-side results of the three VOPI pipelines on one node."""

    node: str
    decision: str
    vopi_propagation: float
    vopi_lock: float
    vopi_standard: float
    max_space_propagation: int
    max_space_lock: int
    max_space_standard: int
    report_propagation: VoeReport
    report_lock: VoeReport
    steps_propagation: int
    steps_lock: int
    steps_standard: int
    heuristic: str = "greedy smallest outcome space; standard continues the lock sequence"
    violations: list[str] = field(default_factory=list)

    @property
    def values_agree(self) -> bool:
        return not any(v.startswith("value") for v in self.violations)

    def rows(self, diagram_id: str) -> list[dict]:
        return [
            {
                "diagram": diagram_id,
                "method": "propagation",
                "metric": f"{self.vopi_propagation:.12g}",
                "max_space": self.max_space_propagation,
                "steps": self.steps_propagation,
            },
            {
                "diagram": diagram_id,
                "method": "lock",
                "metric": f"{self.vopi_lock:.12g}",
                "max_space": self.max_space_lock,
                "steps": self.steps_lock,
            },
            {
                "diagram": diagram_id,
                "method": "standard",
                "metric": f"{self.vopi_standard:.12g}",
                "max_space": self.max_space_standard,
                "steps": self.steps_standard,
            },
        ]


def _product_joint(diagram: Diagram, node_id: str) -> JointConditionalTable:
    """Joint over conditional-outcome vectors assuming independence across
    decision configurations: the product of the node's conditional rows.
    Margins match the rows exactly by construction."""
    from .core import iter_label_configs

    node = diagram.node(node_id)
    space = diagram.space(node_id)
    k_spaces = [diagram.space(p) for p in node.parents]
    configs = list(iter_label_configs(k_spaces))
    probs: dict[tuple[str, ...], float] = {}
    for vector in iter_label_configs([space] * len(configs)):
        p = 1.0
        for i, out in enumerate(vector):
            p *= float(node.table[i, space.index(out)])
        probs[vector] = p
    return build_joint(diagram, node_id, probs)


def compare_methods(diagram: Diagram, node_id: str, decision: str) -> MethodComparison:
    """Run all three VOPI pipelines on one node and compare values and
    maximum computational outcome spaces.

    Disagreements are reported in ``violations`` rather than raised: value
    agreement is a mathematical identity (any violation is a defect), while
    the space relations are empirical claims under the shared heuristic.
    The node's information is given to every decision from the named one
    onward, plus any earlier ones the lock pipeline needs; comparisons are
    meaningful when ``decision`` is the earliest decision.
    """
    if diagram.kind(decision) is not NodeKind.DECISION:
        raise ValuationError(f"{decision!r} is not a decision node")
    baseline = evaluate(diagram)
    prepared = diagram
    if prepared.kind(node_id) is NodeKind.DETERMINISTIC:
        prepared = convert_deterministic(prepared, node_id)
    prepared = _prepare_plain(prepared, node_id)

    decision_parents = [
        p for p in prepared.parents(node_id) if prepared.kind(p) is NodeKind.DECISION
    ]
    if decision_parents:
        # Conditional-outcome setting: all three pipelines work with the
        # vector of outcomes per decision configuration, weighted by the
        # independence joint built from the node's own rows.
        from .valuation import conditional_expansion, expansion_vector_id

        joint = _product_joint(prepared, node_id)
        report1, ledger1 = voe_by_propagation(prepared, node_id, joint)
        expanded = conditional_expansion(prepared, node_id, joint)
        vec_id = expansion_vector_id(node_id)
        locked_base = _add_informational_arcs(expanded, vec_id, expanded.decisions())
        lock_policy, ledger2, evs, probs, reduced = _lock_run(locked_base, vec_id)
        labels = expanded.space(vec_id).labels
        lock_entries = tuple(
            VoeEntry(
                outcome=labels[i],
                probability=float(probs[i]),
                ev_after=float(evs[i]),
                voe=float(evs[i]) - baseline.ev,
                policy=_sliced_policy(lock_policy, vec_id, labels[i]),
                vector=None,
            )
            for i in range(len(labels))
        )
        report2 = VoeReport(
            node=node_id,
            mode="full",
            objective=diagram.objective,
            baseline_ev=baseline.ev,
            entries=lock_entries,
        )
    else:
        blocking = sorted(
            a for a in prepared.ancestors(node_id)
            if prepared.kind(a) is NodeKind.DECISION
        )
        if blocking:
            raise ValuationError(
                f"{node_id!r} has decision ancestors {blocking}; no unconditional "
                "treatment exists"
            )
        report1, ledger1 = voe_by_propagation(prepared, node_id)
        locked_base = _add_informational_arcs(prepared, node_id, prepared.decisions())
        lock_policy, ledger2, evs, probs, reduced = _lock_run(locked_base, node_id)
        labels = prepared.space(node_id).labels
        report2 = VoeReport(
            node=node_id,
            mode="naive",
            objective=diagram.objective,
            baseline_ev=baseline.ev,
            entries=tuple(
                VoeEntry(
                    outcome=labels[i],
                    probability=float(probs[i]),
                    ev_after=float(evs[i]),
                    voe=float(evs[i]) - baseline.ev,
                    policy=_sliced_policy(lock_policy, node_id, labels[i]),
                    vector=None,
                )
                for i in range(len(labels))
            ),
        )

    # Standard pipeline: unlock and finish the very same reduction.
    std_result = evaluate(reduced)
    ledger_std = SpaceLedger(list(ledger2.steps) + list(std_result.ledger.steps))
    vopi_std = std_result.ev - baseline.ev
    vopi1 = vopi_from_voe(report1)
    vopi2 = vopi_from_voe(report2)

    violations: list[str] = []
    if abs(vopi1 - vopi_std) > VALUE_AGREEMENT_TOL:
        violations.append(
            f"value: propagation {vopi1!r} != standard {vopi_std!r}"
        )
    if abs(vopi2 - vopi_std) > VALUE_AGREEMENT_TOL:
        violations.append(f"value: lock {vopi2!r} != standard {vopi_std!r}")
    if ledger_std.max_space != ledger2.max_space:
        violations.append(
            f"space: standard {ledger_std.max_space} != lock {ledger2.max_space}"
        )
    if ledger_std.max_space < ledger1.max_space:
        violations.append(
            f"space: standard {ledger_std.max_space} < propagation {ledger1.max_space}"
        )
    return MethodComparison(
        node=node_id,
        decision=decision,
        vopi_propagation=vopi1,
        vopi_lock=vopi2,
        vopi_standard=vopi_std,
        max_space_propagation=ledger1.max_space,
        max_space_lock=ledger2.max_space,
        max_space_standard=ledger_std.max_space,
        report_propagation=report1,
        report_lock=report2,
        steps_propagation=len(ledger1.steps),
        steps_lock=len(ledger2.steps),
        steps_standard=len(ledger_std.steps),
        violations=violations,
    )


# -- random diagram generation -------------------------------------------------


def generate_random_diagram(seed: int, node_count: int, max_outcomes: int) -> Diagram:
    """A valid random diagram, deterministic in the seed.

    One value node; up to two decisions in a temporal order with full
    informational inheritance (each decision sees every earlier decision
    and everything it saw); random acyclic conditional structure with
    occasional deterministic nodes; row-normalized random tables bounded
    away from zero.  Every decision is guaranteed a directed path to the
    value node so the diagram is evaluable.
    """
    if node_count < 2:
        raise ValueError("need at least two nodes")
    if max_outcomes < 2:
        raise ValueError("need at least two outcomes")
    rng = random.Random(seed)
    m = node_count - 1
    n_decisions = rng.randint(0, min(2, m - 1)) if m > 1 else 0
    decision_pos = set(rng.sample(range(m), n_decisions))

    ids: list[str] = []
    kinds: dict[str, NodeKind] = {}
    sizes: dict[str, int] = {}
    parents: dict[str, list[str]] = {}
    d_i = c_i = 0
    for pos in range(m):
        if pos in decision_pos:
            d_i += 1
            nid = f"D{d_i}"
            kinds[nid] = NodeKind.DECISION
        else:
            c_i += 1
            nid = f"X{c_i}"
            kinds[nid] = NodeKind.CHANCE
        ids.append(nid)
        sizes[nid] = rng.randint(2, max_outcomes)
        parents[nid] = [p for p in ids[:-1] if rng.random() < 0.45]

    # some non-root chance nodes become deterministic
    for nid in ids:
        if kinds[nid] is NodeKind.CHANCE and parents[nid] and rng.random() < 0.2:
            kinds[nid] = NodeKind.DETERMINISTIC

    # informational inheritance between decisions
    decision_ids = [nid for nid in ids if kinds[nid] is NodeKind.DECISION]
    for i, later in enumerate(decision_ids):
        for earlier in decision_ids[:i]:
            for p in parents[earlier] + [earlier]:
                if p not in parents[later]:
                    parents[later].append(p)

    value_parents = [nid for nid in ids if rng.random() < 0.5]
    if not value_parents:
        value_parents = [ids[-1]]

    def reaches_value(nid: str) -> bool:
        if nid in value_parents:
            return True
        stack = [c for c in ids if nid in parents[c]]
        seen = set()
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            if cur in value_parents:
                return True
            stack.extend(c for c in ids if cur in parents[c])
        return False

    for dec in decision_ids:
        if not reaches_value(dec):
            value_parents.append(dec)

    nodes: list[Node] = []
    for nid in ids:
        space = OutcomeSpace(tuple(f"s{i}" for i in range(sizes[nid])))
        rows = 1
        for p in parents[nid]:
            rows *= sizes[p]
        if kinds[nid] is NodeKind.DECISION:
            table = None
        elif kinds[nid] is NodeKind.DETERMINISTIC:
            table = np.array(
                [rng.randrange(sizes[nid]) for _ in range(rows)], dtype=np.int64
            )
        else:
            raw = [
                [rng.uniform(0.05, 1.0) for _ in range(sizes[nid])]
                for _ in range(rows)
            ]
            table = np.array([[x / sum(row) for x in row] for row in raw])
        nodes.append(
            Node(
                id=nid,
                kind=kinds[nid],
                space=space,
                parents=tuple(parents[nid]),
                table=table,
            )
        )
    v_rows = 1
    for p in value_parents:
        v_rows *= sizes[p]
    nodes.append(
        Node(
            id="V",
            kind=NodeKind.VALUE,
            parents=tuple(value_parents),
            table=np.array([rng.uniform(-50.0, 50.0) for _ in range(v_rows)]),
        )
    )
    diagram = Diagram(nodes, objective="maximize", name=f"random-{seed}")
    problems = validate(diagram)
    if problems:
        raise StructureError(f"generator produced an invalid diagram: {problems}")
    return diagram
