import json

import numpy as np
import pytest

from infdiag.core import Diagram, Node, NodeKind, OutcomeSpace
from infdiag.evidence import Evidence
from infdiag.fileio import (
    ParseError,
    ValidationFailure,
    evidence_from_document,
    evidence_to_document,
    load_diagram,
    load_joint,
    parse_evidence,
    policy_rows,
    save_diagram,
)
from infdiag.transforms import evaluate
from infdiag.bench import generate_random_diagram


class TestLoad:
    def test_bundled_example_evaluates(self, mars_path):
        d = load_diagram(mars_path.read_bytes())
        assert evaluate(d).ev == pytest.approx(56.0, abs=1e-9)

    def test_bad_row_sum_rejected_with_location(self, mars_path):
        doc = json.loads(mars_path.read_text())
        doc["nodes"][1]["table"] = [[0.55, 0.4], [0.6, 0.4]]
        with pytest.raises(ValidationFailure) as err:
            load_diagram(json.dumps(doc))
        assert any(v.rule == "row-sum" and v.node == "Mission" and "row 0" in v.message
                   for v in err.value.violations)

    def test_slightly_off_rows_renormalize(self, mars_path):
        doc = json.loads(mars_path.read_text())
        doc["nodes"][1]["table"] = [[0.6000001, 0.4], [0.6, 0.4]]
        d = load_diagram(json.dumps(doc))
        np.testing.assert_allclose(d.node("Mission").table.sum(axis=1), [1.0, 1.0], atol=1e-12)

    def test_json_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            load_diagram(b'{"nodes": [,]}')
        assert "line 1" in str(err.value)

    def test_missing_field_named(self):
        with pytest.raises(ParseError) as err:
            load_diagram(json.dumps({"nodes": [{"id": "X", "kind": "chance"}]}))
        assert "outcomes" in str(err.value)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ParseError):
            load_diagram(json.dumps({"nodes": [{"id": "X", "kind": "wheel", "outcomes": ["a"]}]}))


class TestRoundTrip:
    def test_mars_round_trip_identity(self, mars):
        assert load_diagram(save_diagram(mars)) == mars

    def test_generated_diagrams_round_trip_exactly(self):
        for seed in range(25):
            d = generate_random_diagram(seed, 2 + seed % 6, 2 + seed % 3)
            again = load_diagram(save_diagram(d))
            assert again == d
            assert save_diagram(again) == save_diagram(d)

    def test_serialization_is_byte_stable(self, mars):
        assert save_diagram(mars) == save_diagram(mars)

    def test_post_evidence_diagram_round_trips(self, mars):
        from infdiag.valuation import propagate_observation

        reduced = propagate_observation(mars, Evidence.simple("Mission", "Success")).diagram
        assert load_diagram(save_diagram(reduced)) == reduced


class TestEvidenceSyntax:
    def test_simple(self):
        ev = parse_evidence("Mission=Success")
        assert ev.is_simple and ev.node == "Mission" and ev.outcome == "Success"

    def test_conditional(self):
        ev = parse_evidence("Mission|Destination=Mars:Success,Venus:Failure")
        assert not ev.is_simple
        assert ev.conditional_mapping() == {("Mars",): "Success", ("Venus",): "Failure"}

    def test_two_decision_conditional(self):
        ev = parse_evidence("N|D1,D2=a:c:out1,a:d:out2,b:c:out3,b:d:out4")
        assert ev.conditional_mapping()[("a", "d")] == "out2"

    def test_malformed_rejected(self):
        with pytest.raises(ParseError):
            parse_evidence("Mission")
        with pytest.raises(ParseError):
            parse_evidence("Mission|=x")
        with pytest.raises(ParseError):
            parse_evidence("Mission|D=Mars")

    def test_document_round_trip(self):
        for expr in ("Mission=Success", "Mission|Destination=Mars:Success,Venus:Failure"):
            ev = parse_evidence(expr)
            assert evidence_from_document(evidence_to_document(ev)) == ev


class TestJoint:
    def test_table_loads_with_margins(self, mars, joint_path):
        joint = load_joint(joint_path.read_bytes(), mars)
        assert joint.decision_parents == ("Destination",)
        assert joint.probability(("Success", "Success")) == pytest.approx(0.554)
        assert joint.margin(0) == pytest.approx({"Failure": 0.4, "Success": 0.6})

    def test_wrong_parents_rejected(self, mars, joint_path):
        doc = json.loads(joint_path.read_text())
        doc["decisionParents"] = ["Mission"]
        with pytest.raises(ParseError):
            load_joint(json.dumps(doc), mars)

    def test_bad_vector_label_rejected(self, mars, joint_path):
        doc = json.loads(joint_path.read_text())
        doc["joint"]["nonsense"] = doc["joint"].pop("Mars:Failure|Venus:Failure")
        with pytest.raises(ParseError):
            load_joint(json.dumps(doc), mars)


def test_policy_rows_stable_order(mars):
    result = evaluate(mars)
    assert policy_rows(result.policy) == [("Destination", "-", "Venus")]


def test_unused_objective_rejected():
    with pytest.raises(ParseError):
        load_diagram(json.dumps({"objective": "both", "nodes": []}))
