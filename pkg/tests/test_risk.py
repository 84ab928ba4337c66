import numpy as np
import pytest
from helpers import make_random_graph

from defgraph import (
    DefenseGraph,
    GateSpec,
    Node,
    NodeKind,
    assess_vehicle,
    build_risk_table,
    enumerate_joint,
    risk,
    sensitivity_sweep,
    threat_likelihood,
)
from defgraph.inference import _clamp_false


def two_technique_graph() -> DefenseGraph:
    return DefenseGraph("duo", (
        Node("t_alpha", NodeKind.TECHNIQUE, prior=0.8),
        Node("t_beta", NodeKind.TECHNIQUE, prior=0.6),
        Node("comp", NodeKind.COMPONENT, gate=GateSpec.noisy_or((0.9, 0.9), 0.0)),
    ), (("t_alpha", "comp"), ("t_beta", "comp")), impact=0.5)


class TestRisk:
    def test_product_of_quoted_likelihood_and_impact(self):
        assert abs(risk(0.053, 0.833) - 0.044149) < 1e-6  # 0.053 * 0.833 by hand

    def test_degenerate_values(self):
        assert risk(0.0, 0.7) == 0.0
        assert risk(1.0, 1.0) == 1.0

    @pytest.mark.parametrize("likelihood,impact", [(-0.1, 0.5), (1.1, 0.5), (0.5, 2.0)])
    def test_inputs_must_be_probabilities(self, likelihood, impact):
        with pytest.raises(ValueError):
            risk(likelihood, impact)


class TestBuildRiskTable:
    def test_two_techniques_give_four_rows(self):
        table = build_risk_table(two_technique_graph())
        assert [r.subset_mask for r in table.rows] == [0, 1, 2, 3]
        assert table.rows[0].enabled_ids == ()
        assert table.rows[1].enabled_ids == ("t_alpha",)
        assert table.rows[2].enabled_ids == ("t_beta",)
        assert table.rows[3].enabled_ids == ("t_alpha", "t_beta")

    def test_bundled_scenario_has_64_rows_and_certain_undefended_exploit(self, gps):
        table = build_risk_table(gps)
        assert len(table.rows) == 64
        assert table.rows[0].likelihood == 1.0
        assert table.impact == gps.impact
        assert [r.subset_mask for r in table.rows] == list(range(64))

    def test_risk_column_is_likelihood_times_impact(self, gps):
        table = build_risk_table(gps)
        for row in table.rows:
            assert abs(row.risk - row.likelihood * table.impact) <= 1e-12

    def test_rows_match_per_subset_enumeration_oracle(self, gps):
        table = build_risk_table(gps)
        techs = gps.technique_ids
        rng = np.random.default_rng(5150)
        for mask in [0, 63, *rng.integers(1, 63, size=6)]:
            row = table.rows[int(mask)]
            disabled = {t for j, t in enumerate(techs) if not int(mask) >> j & 1}
            oracle = enumerate_joint(_clamp_false(gps, disabled), "gps").p_false
            assert abs(row.likelihood - oracle) <= 1e-10

    def test_too_many_techniques_rejected(self):
        n = 17
        nodes = [Node(f"t{i:02d}", NodeKind.TECHNIQUE, prior=0.5) for i in range(n)]
        nodes.append(Node("comp", NodeKind.COMPONENT,
                          gate=GateSpec.noisy_or((0.9,) * n, 0.0)))
        g = DefenseGraph("wide", tuple(nodes),
                         tuple((f"t{i:02d}", "comp") for i in range(n)))
        with pytest.raises(ValueError, match="17 techniques"):
            build_risk_table(g)


class TestSensitivitySweep:
    def test_zero_error_reproduces_table_exactly(self, gps):
        assert sensitivity_sweep(gps, [0.0])[0.0] == build_risk_table(gps)

    def test_total_error_with_leakless_sink_means_certain_exploit(self, gps):
        table = sensitivity_sweep(gps, [1.0])[1.0]
        assert all(row.likelihood == 1.0 for row in table.rows)

    def test_likelihood_never_decreases_with_error(self, gps):
        sweep = sensitivity_sweep(gps, [0.0, 0.05, 0.25])
        tables = list(sweep.values())
        for lo, hi in zip(tables, tables[1:]):
            for row_lo, row_hi in zip(lo.rows, hi.rows):
                assert row_hi.likelihood >= row_lo.likelihood

    def test_error_outside_unit_interval_rejected(self, gps):
        with pytest.raises(ValueError):
            sensitivity_sweep(gps, [0.5, 1.5])
        with pytest.raises(ValueError):
            sensitivity_sweep(gps, [-0.01])

    def test_monotone_on_random_flat_graphs(self):
        for i in range(6):
            g = make_random_graph(np.random.default_rng(700 + i), max_nodes=10,
                                  component_gate="noisy_or", flat=True)
            sweep = sensitivity_sweep(g, [0.0, 0.1, 0.5])
            tables = list(sweep.values())
            for lo, hi in zip(tables, tables[1:]):
                for row_lo, row_hi in zip(lo.rows, hi.rows):
                    assert row_hi.likelihood >= row_lo.likelihood - 1e-12


class TestAssessVehicle:
    def test_empty_input_gives_empty_vector(self):
        assert assess_vehicle([]).entries == ()

    def test_single_graph_matches_direct_calls(self, gps):
        vector = assess_vehicle([gps])
        entry = vector.entries[0]
        assert entry.component == "gps_anti_spoofing"
        expected = threat_likelihood(gps, gps.technique_ids)
        assert entry.likelihood == expected
        assert entry.risk == risk(expected, gps.impact)

    def test_two_graphs_preserve_order_and_subsets(self, gps):
        duo = two_technique_graph()
        vector = assess_vehicle([duo, gps], enabled=[["t_alpha"], []])
        assert [e.component for e in vector.entries] == ["duo", "gps_anti_spoofing"]
        assert vector.entries[0].likelihood == threat_likelihood(duo, ["t_alpha"])
        assert vector.entries[1].likelihood == 1.0

    def test_duplicate_component_names_rejected(self, gps):
        with pytest.raises(ValueError, match="duplicate"):
            assess_vehicle([gps, gps])

    def test_subset_count_mismatch_rejected(self, gps):
        with pytest.raises(ValueError):
            assess_vehicle([gps], enabled=[[], []])
