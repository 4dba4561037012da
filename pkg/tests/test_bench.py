import numpy as np
import pytest

from infdiag.bench import (
    compare_methods,
    generate_random_diagram,
    voe_by_lock,
    voe_by_lock_conditional,
    voe_by_propagation,
)
from infdiag.core import NodeKind, validate
from infdiag.transforms import evaluate
from infdiag.valuation import ValuationError, build_joint, vopi_from_voe

from oracle import oracle_evaluate, oracle_policy_value


def applicable_node(d):
    for nid in d.ids():
        if d.kind(nid) is NodeKind.CHANCE and not any(
            d.kind(a) is NodeKind.DECISION for a in d.ancestors(nid)
        ):
            return nid
    return None


class TestPropagationMethod:
    def test_mars_report_and_space(self, mars):
        report, ledger = voe_by_propagation(mars, "Mission")
        by_outcome = {e.outcome: e.voe for e in report.entries}
        assert by_outcome == pytest.approx({"Success": 44.0, "Failure": -46.0}, abs=1e-9)
        assert ledger.max_space == 4

    def test_full_conditional_values(self, mars, mars_joint):
        report, _ = voe_by_propagation(mars, "Mission", mars_joint)
        assert sorted(round(e.voe, 6) for e in report.entries) == [-46.0, -6.0, 44.0, 44.0]

    def test_single_chance_node(self):
        d = generate_random_diagram(1, 2, 2)
        nid = applicable_node(d)
        report, ledger = voe_by_propagation(d, nid)
        assert len(report.entries) == len(d.space(nid))
        assert ledger.max_space >= 1


class TestLockMethod:
    def test_identical_to_propagation_on_mars(self, mars):
        rep1, _ = voe_by_propagation(mars, "Mission")
        rep2, _ = voe_by_lock(mars, "Mission")
        for e1, e2 in zip(rep1.entries, rep2.entries):
            assert e1.outcome == e2.outcome
            assert e1.voe == pytest.approx(e2.voe, abs=1e-9)
            assert e1.probability == pytest.approx(e2.probability, abs=1e-9)

    def test_locked_node_feeding_value_reads_off_rows(self):
        from infdiag.core import Diagram, Node, OutcomeSpace

        d = Diagram(
            [
                Node("X", NodeKind.CHANCE, OutcomeSpace(("a", "b")), table=[[0.25, 0.75]]),
                Node("V", NodeKind.VALUE, parents=("X",), table=[8.0, 2.0]),
            ]
        )
        report, _ = voe_by_lock(d, "X")
        evs = {e.outcome: e.ev_after for e in report.entries}
        assert evs == pytest.approx({"a": 8.0, "b": 2.0})

    def test_reports_match_on_random_diagrams(self):
        checked = 0
        for seed in range(120):
            d = generate_random_diagram(seed, 3 + seed % 4, 2 + seed % 3)
            nid = applicable_node(d)
            if nid is None:
                continue
            rep1, _ = voe_by_propagation(d, nid)
            rep2, _ = voe_by_lock(d, nid)
            for e1, e2 in zip(rep1.entries, rep2.entries):
                assert e1.outcome == e2.outcome
                assert e1.voe == pytest.approx(e2.voe, abs=1e-9)
                assert e1.ev_after == pytest.approx(e2.ev_after, abs=1e-9)
                assert e1.probability == pytest.approx(e2.probability, abs=1e-9)
                # both policies are optimal for the conditioned problem
                if e1.probability > 0:
                    expected = oracle_evaluate(d, {nid: e1.outcome})
                    assert oracle_policy_value(d, e1.policy, {nid: e1.outcome}) == pytest.approx(
                        expected, abs=1e-9
                    )
                    assert oracle_policy_value(d, e2.policy, {nid: e1.outcome}) == pytest.approx(
                        expected, abs=1e-9
                    )
            checked += 1
        assert checked >= 50

    def test_decision_dependence_blocks_plain_lock(self, conditional_instance):
        with pytest.raises(ValuationError):
            voe_by_lock(conditional_instance, "I")


class TestCompareMethods:
    def test_mars_all_pipelines_agree(self, mars):
        cmp = compare_methods(mars, "Mission", "Destination")
        assert cmp.vopi_propagation == pytest.approx(8.0, abs=1e-9)
        assert cmp.vopi_lock == pytest.approx(8.0, abs=1e-9)
        assert cmp.vopi_standard == pytest.approx(8.0, abs=1e-9)
        assert cmp.violations == []
        assert cmp.max_space_propagation <= cmp.max_space_standard
        assert cmp.max_space_lock == cmp.max_space_standard

    def test_constructed_instance_is_strictly_cheaper_by_propagation(self, conditional_instance):
        cmp = compare_methods(conditional_instance, "I", "K")
        assert cmp.violations == []
        assert cmp.vopi_propagation == pytest.approx(cmp.vopi_standard, abs=1e-9)
        assert cmp.max_space_propagation < cmp.max_space_standard
        assert cmp.max_space_lock == cmp.max_space_standard

    def test_no_violations_on_random_diagrams(self):
        checked = 0
        for seed in range(150):
            d = generate_random_diagram(seed, 3 + seed % 5, 2 + seed % 3)
            decisions = d.decisions()
            nid = applicable_node(d)
            if not decisions or nid is None:
                continue
            cmp = compare_methods(d, nid, decisions[0])
            assert cmp.violations == [], f"seed {seed}: {cmp.violations}"
            checked += 1
        assert checked >= 60

    def test_csv_rows_shape(self, mars):
        cmp = compare_methods(mars, "Mission", "Destination")
        rows = cmp.rows("mars-venus")
        assert [r["method"] for r in rows] == ["propagation", "lock", "standard"]
        assert all(set(r) == {"diagram", "method", "metric", "max_space", "steps"} for r in rows)


class TestGenerator:
    def test_smallest_case_is_chance_plus_value(self):
        d = generate_random_diagram(1, 2, 2)
        kinds = sorted(n.kind.value for n in d.nodes.values())
        assert kinds == ["chance", "value"]
        assert validate(d) == []

    def test_deterministic_in_seed(self):
        for seed in (0, 7, 123):
            assert generate_random_diagram(seed, 6, 4) == generate_random_diagram(seed, 6, 4)

    def test_distinct_seeds_differ(self):
        assert generate_random_diagram(1, 6, 4) != generate_random_diagram(2, 6, 4)

    def test_thousand_samples_validate(self):
        for seed in range(1000):
            d = generate_random_diagram(seed, 2 + seed % 6, 2 + seed % 3)
            assert validate(d) == [], f"seed {seed}"

    def test_every_sample_evaluates(self):
        for seed in range(200):
            d = generate_random_diagram(seed, 2 + seed % 6, 2 + seed % 3)
            res = evaluate(d)
            assert np.isfinite(res.ev)
