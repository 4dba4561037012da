"""Influence-diagram data model.

An influence diagram is an acyclic directed graph over four node kinds:

* chance nodes carry a conditional probability table over a finite outcome
  space, one row per configuration of their predecessors;
* deterministic nodes carry a function table mapping every predecessor
  configuration to a single outcome;
* decision nodes carry only an outcome space (the decision alternatives);
  arcs into them are informational;
* the single value node carries one real number per configuration of its
  predecessors and has no outcome space and no successors.

All tables use one fixed row convention: predecessor configurations are
enumerated row-major with the first-listed predecessor varying slowest and
the last-listed varying fastest.  Every operation in this package and the
on-disk file format rely on that ordering.

Diagrams are immutable after construction.  Transformations build new
diagrams, so a diagram value can be shared freely across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

# Row sums of probability tables must match 1 to within this.
PROB_TOL = 1e-9
# Rows off by at most this much are renormalized when loading from disk
# (covers tables published with rounded entries); anything worse is rejected.
LOAD_RENORM_TOL = 1e-6
# Alternatives whose value is within this of the optimum count as tied;
# ties resolve to the lowest outcome index.
TIE_TOL = 1e-9


class DiagramError(Exception):
    """Base class for structural errors raised by diagram operations."""


class UnknownNodeError(DiagramError):
    """A node id does not exist in the diagram."""


class StructureError(DiagramError):
    """An operation's structural precondition does not hold."""


class NodeKind(enum.Enum):
    CHANCE = "chance"
    DETERMINISTIC = "deterministic"
    DECISION = "decision"
    VALUE = "value"


@dataclass(frozen=True)
class OutcomeSpace:
    """Ordered, distinct outcome labels of a node.

    The label order is fixed at construction and is the canonical index
    order for every table touching the node.  Labels compare
    case-sensitively.
    """

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownNodeError(f"outcome {label!r} not in space {self.labels}") from None


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Node:
    """One diagram node: identity, kind, outcome space, parents, payload.

    The payload interpretation depends on the kind:

    * chance: 2-d float array, shape ``(#parent configurations, #outcomes)``
    * deterministic: 1-d int array of outcome indices, one per configuration
    * value: 1-d float array, one value per configuration
    * decision: no payload
    """

    id: str
    kind: NodeKind
    space: OutcomeSpace | None = None
    parents: tuple[str, ...] = ()
    table: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        if self.table is not None:
            dtype = np.int64 if self.kind is NodeKind.DETERMINISTIC else np.float64
            object.__setattr__(self, "table", _frozen_array(self.table, dtype))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Node):
            return NotImplemented
        if (self.id, self.kind, self.space, self.parents) != (
            other.id,
            other.kind,
            other.space,
            other.parents,
        ):
            return False
        if self.table is None or other.table is None:
            return self.table is other.table
        return self.table.shape == other.table.shape and bool(
            np.array_equal(self.table, other.table)
        )

    def replace(self, **changes) -> "Node":
        fields = {
            "id": self.id,
            "kind": self.kind,
            "space": self.space,
            "parents": self.parents,
            "table": self.table,
        }
        fields.update(changes)
        return Node(**fields)


@dataclass(frozen=True)
class Violation:
    """One validation finding: the offending node, a rule name, and details."""

    node: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.node}: {self.message}"


class Diagram:
    """Immutable influence diagram: id-indexed nodes plus the objective."""

    __slots__ = ("name", "objective", "_nodes")

    def __init__(self, nodes: Iterable[Node], objective: str = "maximize", name: str = "diagram"):
        if objective not in ("maximize", "minimize"):
            raise DiagramError(f"objective must be maximize or minimize, got {objective!r}")
        node_map: dict[str, Node] = {}
        for node in nodes:
            if node.id in node_map:
                raise DiagramError(f"duplicate node id {node.id!r}")
            node_map[node.id] = node
        self.name = name
        self.objective = objective
        self._nodes = node_map

    # -- basic access ---------------------------------------------------

    @property
    def nodes(self) -> Mapping[str, Node]:
        return self._nodes

    def ids(self) -> tuple[str, ...]:
        return tuple(self._nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"no node {node_id!r} in diagram") from None

    def kind(self, node_id: str) -> NodeKind:
        return self.node(node_id).kind

    def parents(self, node_id: str) -> tuple[str, ...]:
        return self.node(node_id).parents

    def successor_map(self) -> dict[str, set[str]]:
        succ: dict[str, set[str]] = {nid: set() for nid in self._nodes}
        for node in self._nodes.values():
            for p in node.parents:
                if p in succ:
                    succ[p].add(node.id)
        return succ

    def successors(self, node_id: str) -> frozenset[str]:
        self.node(node_id)
        return frozenset(
            n.id for n in self._nodes.values() if node_id in n.parents
        )

    def value_id(self) -> str:
        values = [n.id for n in self._nodes.values() if n.kind is NodeKind.VALUE]
        if len(values) != 1:
            raise StructureError(f"diagram must have exactly one value node, found {values}")
        return values[0]

    def decisions(self) -> tuple[str, ...]:
        """Decision ids in temporal (topological) order."""
        order = self.topological_order()
        return tuple(nid for nid in order if self.kind(nid) is NodeKind.DECISION)

    def space(self, node_id: str) -> OutcomeSpace:
        sp = self.node(node_id).space
        if sp is None:
            raise StructureError(f"node {node_id!r} has no outcome space")
        return sp

    def size(self, node_id: str) -> int:
        return len(self.space(node_id))

    def parent_sizes(self, node_id: str) -> tuple[int, ...]:
        return tuple(self.size(p) for p in self.parents(node_id))

    # -- graph queries ----------------------------------------------------

    def topological_order(self) -> tuple[str, ...]:
        indeg = {nid: 0 for nid in self._nodes}
        for node in self._nodes.values():
            for p in node.parents:
                if p in self._nodes:
                    indeg[node.id] += 1
        ready = sorted(nid for nid, d in indeg.items() if d == 0)
        succ = self.successor_map()
        order: list[str] = []
        while ready:
            nid = ready.pop(0)
            order.append(nid)
            for child in sorted(succ[nid]):
                indeg[child] -= 1
                if indeg[child] == 0:
                    ready.append(child)
            ready.sort()
        if len(order) != len(self._nodes):
            raise StructureError("diagram contains a cycle")
        return tuple(order)

    def ancestors(self, node_id: str) -> frozenset[str]:
        seen: set[str] = set()
        stack = [p for p in self.parents(node_id) if p in self._nodes]
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            stack.extend(p for p in self.parents(nid) if p in self._nodes)
        return frozenset(seen)

    def has_path(self, src: str, dst: str, *, skip_direct: bool = False) -> bool:
        """True when a directed path src -> dst exists.

        With ``skip_direct`` the single arc src -> dst (if any) is ignored,
        which is the admissibility test for reversing that arc.
        """
        succ = self.successor_map()
        stack = [
            s
            for s in succ.get(src, ())
            if not (skip_direct and s == dst)
        ]
        seen: set[str] = set()
        while stack:
            nid = stack.pop()
            if nid == dst:
                return True
            if nid in seen:
                continue
            seen.add(nid)
            stack.extend(succ.get(nid, ()))
        return False

    # -- rebuilding -------------------------------------------------------

    def updated(
        self,
        replace: Iterable[Node] = (),
        remove: Iterable[str] = (),
        add: Iterable[Node] = (),
    ) -> "Diagram":
        removed = set(remove)
        replacements = {n.id: n for n in replace}
        nodes: list[Node] = []
        for nid, node in self._nodes.items():
            if nid in removed:
                continue
            nodes.append(replacements.pop(nid, node))
        if replacements:
            raise UnknownNodeError(f"cannot replace unknown nodes {sorted(replacements)}")
        nodes.extend(add)
        return Diagram(nodes, objective=self.objective, name=self.name)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Diagram):
            return NotImplemented
        return (
            self.objective == other.objective
            and set(self._nodes) == set(other._nodes)
            and all(self._nodes[nid] == other._nodes[nid] for nid in self._nodes)
        )

    def __repr__(self) -> str:
        return f"Diagram({self.name!r}, nodes={list(self._nodes)}, objective={self.objective!r})"


# -- spec'd structural queries -------------------------------------------


def direct_predecessors(diagram: Diagram, node_id: str) -> tuple[str, ...]:
    """The conditioning set of a node, in stored (canonical) order."""
    return diagram.parents(node_id)


def direct_successors(diagram: Diagram, node_id: str) -> frozenset[str]:
    """All nodes with an arc from ``node_id``."""
    return diagram.successors(node_id)


def configuration_count(diagram: Diagram, node_ids: Iterable[str]) -> int:
    """Product of outcome-space sizes over a node set; 1 for the empty set.

    The value node has no outcome space, so including it is an error.
    """
    count = 1
    for nid in node_ids:
        node = diagram.node(nid)
        if node.kind is NodeKind.VALUE:
            raise DiagramError("the value node has no outcome space")
        count *= len(diagram.space(nid))
    return count


# -- table geometry helpers ------------------------------------------------


def row_count(sizes: Sequence[int]) -> int:
    n = 1
    for s in sizes:
        n *= s
    return n


def config_to_row(sizes: Sequence[int], config: Sequence[int]) -> int:
    """Row index of a parent configuration (first parent varies slowest)."""
    idx = 0
    for size, c in zip(sizes, config):
        idx = idx * size + c
    return idx


def iter_configs(sizes: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All parent configurations in canonical row order."""
    if not sizes:
        yield ()
        return
    yield from np.ndindex(*sizes)


def iter_label_configs(spaces: Sequence[OutcomeSpace]) -> Iterator[tuple[str, ...]]:
    for config in iter_configs([len(s) for s in spaces]):
        yield tuple(space.labels[i] for space, i in zip(spaces, config))


def table_axes(diagram: Diagram, node_id: str) -> np.ndarray:
    """A node's table reshaped with one axis per parent (plus the outcome
    axis for chance nodes).  Pure view logic; the row convention makes this
    a plain reshape."""
    node = diagram.node(node_id)
    if node.table is None:
        raise StructureError(f"node {node_id!r} has no table")
    sizes = list(diagram.parent_sizes(node_id))
    if node.kind is NodeKind.CHANCE:
        sizes.append(len(diagram.space(node_id)))
    return node.table.reshape(sizes) if sizes else node.table.reshape(())


def aligned(
    arr: np.ndarray,
    src_axes: Sequence[str],
    dst_axes: Sequence[str],
    sizes: Mapping[str, int],
) -> np.ndarray:
    """Broadcast an axis-per-variable array onto a superset axis order.

    ``src_axes`` names the axes of ``arr`` (in order); ``dst_axes`` is the
    target order and must contain every source axis.
    """
    missing = [a for a in src_axes if a not in dst_axes]
    if missing:
        raise StructureError(f"cannot align axes, target lacks {missing}")
    perm_src = list(src_axes)
    out = arr
    for axis in dst_axes:
        if axis not in perm_src:
            out = np.expand_dims(out, axis=-1)
            perm_src.append(axis)
    order = [perm_src.index(a) for a in dst_axes]
    out = np.transpose(out, order)
    shape = tuple(sizes[a] for a in dst_axes)
    return np.broadcast_to(out, shape)


def size_map(diagram: Diagram, node_ids: Iterable[str]) -> dict[str, int]:
    return {nid: diagram.size(nid) for nid in node_ids}


# -- validation -------------------------------------------------------------


def _expected_shape(diagram: Diagram, node: Node) -> tuple[int, ...] | None:
    try:
        rows = row_count([len(diagram.space(p)) for p in node.parents])
    except (UnknownNodeError, StructureError):
        return None
    if node.kind is NodeKind.CHANCE:
        return (rows, len(node.space)) if node.space else None
    return (rows,)


def validate(diagram: Diagram, *, require_no_forgetting: bool = True) -> list[Violation]:
    """Check every structural invariant; return all findings (empty = valid).

    Violations are data, not exceptions: a malformed diagram yields the
    complete list of broken rules rather than failing on the first one.
    ``require_no_forgetting`` can be cleared for diagrams whose decision
    ordering is managed externally.
    """
    out: list[Violation] = []
    nodes = diagram.nodes

    # node-local shape rules
    for node in nodes.values():
        if len(set(node.parents)) != len(node.parents):
            out.append(Violation(node.id, "parent-dup", "duplicate parent listed"))
        if node.id in node.parents:
            out.append(Violation(node.id, "self-arc", "node lists itself as a parent"))
        for p in node.parents:
            if p not in nodes:
                out.append(Violation(node.id, "unknown-parent", f"parent {p!r} does not exist"))
        if node.kind is NodeKind.VALUE:
            if node.space is not None:
                out.append(Violation(node.id, "space-on-value", "value node must not have an outcome space"))
        else:
            if node.space is None or len(node.space) < 1:
                out.append(Violation(node.id, "missing-space", "node needs a non-empty outcome space"))
            elif len(set(node.space.labels)) != len(node.space.labels):
                out.append(Violation(node.id, "label-dup", f"duplicate outcome labels {node.space.labels}"))
        if node.kind is NodeKind.DECISION:
            if node.table is not None:
                out.append(Violation(node.id, "decision-table", "decision nodes carry no table"))
        elif node.table is None:
            out.append(Violation(node.id, "missing-table", "node needs a table"))

    # value-node count
    value_ids = [n.id for n in nodes.values() if n.kind is NodeKind.VALUE]
    if len(value_ids) != 1:
        out.append(
            Violation(
                value_ids[0] if value_ids else "<diagram>",
                "single-value",
                f"exactly one value node required, found {len(value_ids)}",
            )
        )

    # acyclicity (remaining checks need a usable graph)
    try:
        topo = diagram.topological_order()
    except StructureError:
        out.append(Violation("<diagram>", "acyclic", "graph contains a directed cycle"))
        return out

    succ = diagram.successor_map()
    for vid in value_ids:
        if succ[vid]:
            out.append(Violation(vid, "value-sink", f"value node has successors {sorted(succ[vid])}"))

    # table contents
    for node in nodes.values():
        if node.table is None or node.space is None and node.kind is not NodeKind.VALUE:
            continue
        expected = _expected_shape(diagram, node)
        if expected is None:
            continue
        if node.table.shape != expected:
            out.append(
                Violation(
                    node.id,
                    "table-shape",
                    f"table shape {node.table.shape} != expected {expected}",
                )
            )
            continue
        if node.kind is NodeKind.CHANCE:
            if (node.table < -PROB_TOL).any() or (node.table > 1 + PROB_TOL).any():
                out.append(Violation(node.id, "prob-range", "probabilities outside [0, 1]"))
            sums = node.table.sum(axis=1)
            bad = np.abs(sums - 1.0) > PROB_TOL
            if bad.any():
                row = int(np.argmax(bad))
                out.append(
                    Violation(
                        node.id,
                        "row-sum",
                        f"row {row} sums to {sums[row]:.12g}, must be 1 within {PROB_TOL}",
                    )
                )
        elif node.kind is NodeKind.DETERMINISTIC:
            n = len(node.space)
            if (node.table < 0).any() or (node.table >= n).any():
                out.append(Violation(node.id, "det-range", f"entries must index the {n} outcomes"))

    # decision ordering: a temporal total order plus no-forgetting
    decision_ids = [nid for nid in topo if nodes[nid].kind is NodeKind.DECISION]
    for i, earlier in enumerate(decision_ids):
        for later in decision_ids[i + 1 :]:
            if not diagram.has_path(earlier, later):
                out.append(
                    Violation(
                        later,
                        "decision-order",
                        f"no directed path orders decisions {earlier!r} and {later!r}",
                    )
                )
            elif require_no_forgetting and earlier not in nodes[later].parents:
                out.append(
                    Violation(
                        later,
                        "no-forgetting",
                        f"decision must list earlier decision {earlier!r} as informational predecessor",
                    )
                )
    return out
