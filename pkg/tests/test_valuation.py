import numpy as np
import pytest

from infdiag.core import Diagram, Node, NodeKind, OutcomeSpace, validate
from infdiag.transforms import evaluate
from infdiag.valuation import (
    ValuationError,
    build_joint,
    condition_joint,
    conditional_expansion,
    default_vopi_decision,
    drop_vacuous_decision_arcs,
    expansion_vector_id,
    informed_evaluation,
    outcome_sensitivity,
    value_of_control,
    value_of_evidence,
    voc_standard,
    voe_report,
    vopi_from_voe,
    vopi_standard,
)
from infdiag.bench import generate_random_diagram

from oracle import oracle_evaluate


def diagonal_joint(mars):
    """Outcome identical under both destinations: all mass on the diagonal."""
    return build_joint(
        mars,
        "Mission",
        {
            ("Failure", "Failure"): 0.4,
            ("Failure", "Success"): 0.0,
            ("Success", "Failure"): 0.0,
            ("Success", "Success"): 0.6,
        },
    )


class TestValueOfEvidence:
    def test_failure_is_negative(self, mars):
        assert value_of_evidence(mars, "Mission", "Failure") == pytest.approx(-46.0, abs=1e-9)

    def test_success_is_positive(self, mars):
        assert value_of_evidence(mars, "Mission", "Success") == pytest.approx(44.0, abs=1e-9)

    def test_certain_outcome_is_worthless(self):
        d = Diagram(
            [
                Node("X", NodeKind.CHANCE, OutcomeSpace(("sure", "never")), table=[[1.0, 0.0]]),
                Node("D", NodeKind.DECISION, OutcomeSpace(("a", "b"))),
                Node("V", NodeKind.VALUE, parents=("X", "D"), table=[3.0, 1.0, 0.0, 0.0]),
            ]
        )
        assert value_of_evidence(d, "X", "sure") == pytest.approx(0.0, abs=1e-12)


class TestVoeReport:
    def test_naive_entries(self, mars):
        rep = voe_report(mars, "Mission")
        by_outcome = {e.outcome: e for e in rep.entries}
        assert by_outcome["Failure"].voe == pytest.approx(-46.0, abs=1e-9)
        assert by_outcome["Failure"].probability == pytest.approx(0.4)
        assert by_outcome["Success"].voe == pytest.approx(44.0, abs=1e-9)
        assert by_outcome["Success"].probability == pytest.approx(0.6)
        assert rep.probabilities_sum() == pytest.approx(1.0, abs=1e-6)
        for e in rep.entries:
            assert e.voe == pytest.approx(e.ev_after - rep.baseline_ev, abs=1e-9)

    def test_full_conditional_entries(self, mars, mars_joint):
        rep = voe_report(mars, "Mission", mars_joint)
        expected = {
            "Mars:Failure|Venus:Failure": (-46.0, 0.354, "Mars", 10.0),
            "Mars:Success|Venus:Failure": (-6.0, 0.046, "Mars", 50.0),
            "Mars:Failure|Venus:Success": (44.0, 0.046, "Venus", 100.0),
            "Mars:Success|Venus:Success": (44.0, 0.554, "Venus", 100.0),
        }
        assert {e.outcome for e in rep.entries} == set(expected)
        for e in rep.entries:
            voe, prob, dest, val = expected[e.outcome]
            assert e.voe == pytest.approx(voe, abs=1e-6)
            assert e.probability == pytest.approx(prob, abs=1e-12)
            assert e.ev_after == pytest.approx(val, abs=1e-6)
            assert e.policy["Destination"].as_mapping() == {(): dest}

    def test_split_landing_report(self, split):
        rep = voe_report(split, "MarsLanding")
        by_outcome = {e.outcome: e for e in rep.entries}
        assert by_outcome["Failure"].voe == pytest.approx(-46.0, abs=0.01)
        assert by_outcome["Success"].voe == pytest.approx(35.57, abs=0.01)
        assert by_outcome["Success"].ev_after == pytest.approx(91.57, abs=0.01)
        assert by_outcome["Success"].policy["Destination"].as_mapping() == {(): "Venus"}

    def test_genuine_decision_dependence_needs_joint(self, conditional_instance):
        with pytest.raises(ValuationError):
            voe_report(conditional_instance, "I")


class TestOutcomeSensitivity:
    def test_naive_spread(self, mars):
        assert outcome_sensitivity(voe_report(mars, "Mission")) == pytest.approx(90.0, abs=1e-9)

    def test_single_outcome_spread_is_zero(self):
        d = Diagram(
            [
                Node("X", NodeKind.CHANCE, OutcomeSpace(("only",)), table=[[1.0]]),
                Node("V", NodeKind.VALUE, parents=("X",), table=[5.0]),
            ]
        )
        assert outcome_sensitivity(voe_report(d, "X")) == 0.0

    def test_full_conditional_spread(self, mars, mars_joint):
        assert outcome_sensitivity(voe_report(mars, "Mission", mars_joint)) == pytest.approx(
            90.0, abs=1e-6
        )


class TestVopi:
    def test_naive_weighted_sum(self, mars):
        assert vopi_from_voe(voe_report(mars, "Mission")) == pytest.approx(8.0, abs=1e-9)

    def test_full_conditional(self, mars, mars_joint):
        assert vopi_from_voe(voe_report(mars, "Mission", mars_joint)) == pytest.approx(
            9.84, abs=1e-6
        )

    def test_split_landing(self, split):
        assert vopi_from_voe(voe_report(split, "MarsLanding")) == pytest.approx(2.94, abs=0.01)

    def test_standard_naive(self, mars):
        informed = informed_evaluation(mars, "Mission", "Destination")
        assert informed.ev == pytest.approx(64.0, abs=1e-9)
        assert vopi_standard(mars, "Mission", "Destination") == pytest.approx(8.0, abs=1e-9)

    def test_standard_full(self, mars, mars_joint):
        informed = informed_evaluation(mars, "Mission", "Destination", mars_joint)
        assert informed.ev == pytest.approx(65.84, abs=1e-6)
        assert vopi_standard(mars, "Mission", "Destination", mars_joint) == pytest.approx(
            9.84, abs=1e-6
        )

    def test_already_informed_node_is_worthless(self):
        d = Diagram(
            [
                Node("X", NodeKind.CHANCE, OutcomeSpace(("a", "b")), table=[[0.5, 0.5]]),
                Node("D", NodeKind.DECISION, OutcomeSpace(("u", "v")), parents=("X",)),
                Node("V", NodeKind.VALUE, parents=("X", "D"), table=[4.0, 0.0, 0.0, 4.0]),
            ]
        )
        assert vopi_standard(d, "X", "D") == pytest.approx(0.0, abs=1e-9)

    def test_decision_ancestor_blocks_naive_arc(self, conditional_instance):
        with pytest.raises(ValuationError):
            vopi_standard(conditional_instance, "I", "K")

    def test_default_decision_is_earliest_uninformed(self, mars):
        assert default_vopi_decision(mars, "Mission") == "Destination"


class TestVoc:
    def test_report_maximum(self, mars):
        assert value_of_control(voe_report(mars, "Mission")) == pytest.approx(44.0, abs=1e-9)

    def test_full_conditional_maximum(self, mars, mars_joint):
        assert value_of_control(voe_report(mars, "Mission", mars_joint)) == pytest.approx(
            44.0, abs=1e-6
        )

    def test_split_landing_maximum(self, split):
        assert value_of_control(voe_report(split, "MarsLanding")) == pytest.approx(35.57, abs=0.01)

    def test_standard_conversion(self, mars):
        assert voc_standard(mars, "Mission") == pytest.approx(44.0, abs=1e-9)

    def test_certain_node_with_optimal_outcome(self):
        d = Diagram(
            [
                Node("X", NodeKind.CHANCE, OutcomeSpace(("good", "bad")), table=[[1.0, 0.0]]),
                Node("V", NodeKind.VALUE, parents=("X",), table=[9.0, 1.0]),
            ]
        )
        assert voc_standard(d, "X") == pytest.approx(0.0, abs=1e-12)

    def test_conversion_matches_report_on_random_diagrams(self):
        checked = 0
        for seed in range(60):
            d = generate_random_diagram(seed, 3 + seed % 4, 2 + seed % 3)
            nid = next(
                (
                    n
                    for n in d.ids()
                    if d.kind(n) is NodeKind.CHANCE
                    and not any(d.kind(a) is NodeKind.DECISION for a in d.ancestors(n))
                ),
                None,
            )
            if nid is None:
                continue
            rep = voe_report(d, nid)
            assert voc_standard(d, nid) == pytest.approx(value_of_control(rep), abs=1e-9)
            checked += 1
        assert checked >= 20


class TestConditionalExpansion:
    def test_expansion_preserves_value_and_policy(self, mars, mars_joint):
        expanded = conditional_expansion(mars, "Mission", mars_joint)
        assert validate(expanded) == []
        base = evaluate(mars)
        after = evaluate(expanded)
        assert after.ev == pytest.approx(base.ev, abs=1e-6)
        assert after.policy["Destination"].as_mapping() == base.policy["Destination"].as_mapping()

    def test_vector_node_structure(self, mars, mars_joint):
        expanded = conditional_expansion(mars, "Mission", mars_joint)
        vec = expanded.node(expansion_vector_id("Mission"))
        assert vec.parents == ()
        assert len(vec.space) == 4
        selector = expanded.node("Mission")
        assert selector.kind is NodeKind.DETERMINISTIC
        assert selector.parents == (vec.id, "Destination")

    def test_diagonal_joint_reproduces_plain_information_value(self, mars):
        # outcomes perfectly correlated across destinations: learning the
        # vector is exactly learning the one realized outcome
        joint = diagonal_joint(mars)
        assert vopi_standard(mars, "Mission", "Destination", joint) == pytest.approx(
            8.0, abs=1e-9
        )
        rep = voe_report(mars, "Mission", joint)
        assert vopi_from_voe(rep) == pytest.approx(8.0, abs=1e-9)

    def test_product_joint_agrees_with_enumeration_oracle(self, mars):
        # independent per-destination outcomes: both routes must agree with
        # each other and with brute-force enumeration of the expanded diagram
        joint = build_joint(
            mars,
            "Mission",
            {
                ("Failure", "Failure"): 0.16,
                ("Failure", "Success"): 0.24,
                ("Success", "Failure"): 0.24,
                ("Success", "Success"): 0.36,
            },
        )
        expanded = conditional_expansion(mars, "Mission", joint)
        vec = expansion_vector_id("Mission")
        informed = informed_evaluation(mars, "Mission", "Destination", joint)
        from infdiag.valuation import _add_informational_arcs

        oracle_ev = oracle_evaluate(
            _add_informational_arcs(expanded, vec, ("Destination",))
        )
        assert informed.ev == pytest.approx(oracle_ev, abs=1e-9)
        assert vopi_from_voe(voe_report(mars, "Mission", joint)) == pytest.approx(
            informed.ev - 56.0, abs=1e-9
        )

    def test_margin_mismatch_rejected(self, mars):
        with pytest.raises(ValuationError):
            build_joint(
                mars,
                "Mission",
                {
                    ("Failure", "Failure"): 0.5,
                    ("Failure", "Success"): 0.0,
                    ("Success", "Failure"): 0.0,
                    ("Success", "Success"): 0.5,
                },
            )


class TestConditionJoint:
    def test_second_landing_given_first(self, mars_joint):
        remaining, dist = condition_joint(mars_joint, ("Mars",), "Success")
        assert remaining == (("Venus",),)
        assert dist[("Failure",)] == pytest.approx(0.077, abs=0.001)
        assert dist[("Success",)] == pytest.approx(0.923, abs=0.001)
        remaining, dist = condition_joint(mars_joint, ("Mars",), "Failure")
        assert dist[("Failure",)] == pytest.approx(0.885, abs=0.001)
        assert dist[("Success",)] == pytest.approx(0.115, abs=0.001)

    def test_product_joint_conditioning_leaves_margin(self, mars):
        joint = build_joint(
            mars,
            "Mission",
            {
                ("Failure", "Failure"): 0.16,
                ("Failure", "Success"): 0.24,
                ("Success", "Failure"): 0.24,
                ("Success", "Success"): 0.36,
            },
        )
        _, dist = condition_joint(joint, ("Mars",), "Success")
        assert dist[("Success",)] == pytest.approx(0.6, abs=1e-12)
        assert dist[("Failure",)] == pytest.approx(0.4, abs=1e-12)

    def test_zero_mass_conditioning_rejected(self):
        from infdiag.valuation import JointConditionalTable

        joint = JointConditionalTable(
            node="Mission",
            decision_parents=("Destination",),
            configs=(("Mars",), ("Venus",)),
            entries={
                ("Failure", "Failure"): 1.0,
                ("Failure", "Success"): 0.0,
                ("Success", "Failure"): 0.0,
                ("Success", "Success"): 0.0,
            },
        )
        with pytest.raises(ValuationError):
            condition_joint(joint, ("Mars",), "Success")


class TestVacuousArcs:
    def test_identical_rows_drop_the_arc(self, mars):
        d = drop_vacuous_decision_arcs(mars, "Mission")
        assert d.parents("Mission") == ()
        np.testing.assert_allclose(d.node("Mission").table, [[0.6, 0.4]])
        assert evaluate(d).ev == pytest.approx(56.0)

    def test_genuine_dependence_kept(self, conditional_instance):
        d = drop_vacuous_decision_arcs(conditional_instance, "I")
        assert d.parents("I") == ("K",)
