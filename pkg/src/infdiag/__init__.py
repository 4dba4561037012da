"""Exact influence-diagram evaluation with evidence propagation and
value-of-evidence analytics."""

from .core import (
    Diagram,
    DiagramError,
    Node,
    NodeKind,
    OutcomeSpace,
    StructureError,
    UnknownNodeError,
    Violation,
    configuration_count,
    direct_predecessors,
    direct_successors,
    validate,
)
from .evidence import (
    Evidence,
    EvidenceError,
    ImpossibleEvidenceError,
    PropagationResult,
    absorb_evidence,
    evidence_reversal,
    evidence_reversal_deterministic,
    marginal_probability,
    propagate_evidence,
    propagate_to_deterministic,
    prune_decision_arc,
)
from .transforms import (
    DecisionRule,
    EvaluationResult,
    Policy,
    SpaceLedger,
    SpaceStep,
    convert_deterministic,
    evaluate,
    reduce_diagram,
    remove_barren,
    remove_chance_node,
    remove_decision_node,
    reverse_arc,
)
from .valuation import (
    JointConditionalTable,
    ValuationError,
    VoeEntry,
    VoeReport,
    build_joint,
    condition_joint,
    conditional_expansion,
    informed_evaluation,
    outcome_sensitivity,
    value_of_control,
    value_of_evidence,
    voc_standard,
    voe_report,
    vopi_from_voe,
    vopi_standard,
)
from .bench import (
    MethodComparison,
    compare_methods,
    generate_random_diagram,
    voe_by_lock,
    voe_by_propagation,
)

__version__ = "0.1.0"
