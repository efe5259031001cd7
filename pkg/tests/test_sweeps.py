import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlin_metrology.sweeps import (
    ConfigError,
    ResultTable,
    emit,
    fidelity_onset,
    level_crossings,
    parse_config,
    parse_grid,
    parse_number,
    run_critical_phase,
    run_fidelity_heatmap,
    run_lindblad_curves,
    run_qfi_curves,
)


def _body(csv_text):
    return csv_text.split("\n", 1)[1]


def test_parse_number_literals():
    assert parse_number("pi/2000") == pytest.approx(math.pi / 2000)
    assert parse_number("-3*pi/4") == pytest.approx(-3 * math.pi / 4)
    assert parse_number("0.25") == 0.25
    for bad in ("__import__('os')", "pi**2", "e"):
        with pytest.raises(ValueError):
            parse_number(bad)


def test_parse_grid_forms():
    assert parse_grid("1,2,3") == [1.0, 2.0, 3.0]
    assert parse_grid("1:2:0.25") == [1.0, 1.25, 1.5, 1.75, 2.0]
    assert len(parse_grid("-10:10:0.1")) == 201


def test_heatmap_defaults():
    config = parse_config({}, "heatmap")
    assert config.scalar("dim") == 201
    assert config.scalar("phi") == pytest.approx(math.pi / 2000)
    assert len(config.grid("z")) == 101
    assert config.size == 101 * 201


def test_config_rejections():
    with pytest.raises(ConfigError, match="bogus"):
        parse_config({"bogus": 1}, "heatmap")
    with pytest.raises(ConfigError, match="epsilon"):
        parse_config({"epsilon": [0.5]}, "critical-phase")
    with pytest.raises(ConfigError, match="experiment"):
        parse_config({}, "nope")
    with pytest.raises(ConfigError, match="samples"):
        parse_config({"samples": 10}, "critical-phase")
    with pytest.raises(ConfigError, match="z"):
        parse_config({"z": [0.5]}, "heatmap")


def test_config_aliases_and_json_text():
    config = parse_config('{"experiment": "CriticalPhase", "seed": 3}')
    assert config.experiment == "critical-phase" and config.seed == 3


@pytest.mark.parametrize("experiment", ["heatmap", "critical-phase", "qfi", "lindblad", "verify"])
def test_emit_roundtrip(experiment):
    config = parse_config({"seed": 5, "output_path": "x.csv"}, experiment)
    assert parse_config(emit(config)) == config
    assert parse_config(json.loads(json.dumps(emit(config)))) == config


@given(
    st.lists(st.floats(1, 3), min_size=1, max_size=4),
    st.lists(st.integers(1, 3), min_size=1, max_size=3),
    st.integers(0, 100),
)
def test_emit_roundtrip_property(zs, ks, seed):
    config = parse_config({"z": zs, "k": ks, "seed": seed}, "critical-phase")
    assert parse_config(emit(config)) == config


def test_result_table_csv_roundtrip(tmp_path):
    table = ResultTable({"a": [1.0, 2.5], "b": [3, 4]}, {"note": "x"})
    path = tmp_path / "t.csv"
    table.to_csv(path)
    back = ResultTable.read_csv(path)
    assert back.names == ["a", "b"]
    np.testing.assert_array_equal(back.column("a"), [1.0, 2.5])
    assert back.metadata["note"] == "x"
    assert "version" in back.metadata and "timestamp" in back.metadata
    mirror = json.loads(table.to_json())
    assert mirror["columns"]["b"] == [3, 4]
    with pytest.raises(ValueError):
        ResultTable({"a": [1], "b": [1, 2]})


def test_level_crossings_interpolates():
    ks = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    vals = np.array([0.5, 0.95, 1.0, 0.95, 0.5])
    lower, upper = level_crossings(ks, vals, 0.9)
    assert upper == pytest.approx(1 + 0.05 / 0.45)
    assert lower == pytest.approx(-upper)
    assert math.isnan(level_crossings(ks, np.ones(5), 0.9)[1])


def test_small_heatmap_anchors():
    config = parse_config({"z": [1.0, 2.0, 3.0], "k": "-3:3:0.5"}, "heatmap")
    result = run_fidelity_heatmap(config)
    table = result.table
    assert len(table) == 3 * 13
    assert np.all(table.select(z=1.0).column("avg_fidelity") >= 1 - 1e-9)
    row = table.select(z=2.0)
    assert row.column("avg_fidelity")[row.column("k") == 1.0][0] == pytest.approx(0.9675, abs=0.01)
    contour = result.contour.select(z=2.0).rows()[0]
    assert 1 < contour["k_upper"] < 2 and -2 < contour["k_lower"] < -1


def test_heatmap_threads_match_sequential():
    config = parse_config({"z": "1:3:0.5", "k": "-2:2:0.5"}, "heatmap")
    seq = run_fidelity_heatmap(config, threads=1)
    par = run_fidelity_heatmap(config, threads=4)
    assert _body(seq.table.to_csv_string()) == _body(par.table.to_csv_string())


def test_critical_phase_sweep_deterministic_and_passing():
    config = parse_config({"z": [1.0, 2.0], "k": [1, 2], "dim": [41], "samples": 100, "seed": 7}, "critical-phase")
    a = run_critical_phase(config, threads=1)
    b = run_critical_phase(config, threads=3)
    assert _body(a.to_csv_string()) == _body(b.to_csv_string())
    assert all(a.columns["pass"])
    lin = a.select(z=1.0)
    np.testing.assert_allclose(lin.column("min_fidelity_at_bound"), 1, atol=1e-12)
    ref = parse_config({"z": [2.0], "k": [1], "dim": [101]}, "critical-phase")
    assert run_critical_phase(ref).column("bound_phi")[0] == pytest.approx(0.1 / 201)


def test_qfi_sweep_examples():
    table = run_qfi_curves(parse_config({"z": [1.0, 2.0], "k": [0, 1]}, "qfi"))
    for row in table.rows():
        if row["k"] == 0 or row["z"] == 1.0:
            assert row["effective_J_matrix"] == row["i_phiphi"]
        if row["z"] == 1.0:
            assert row["i_phiphi"] == pytest.approx(40**2)
    kerr_row = table.select(z=2.0, k=1).rows()[0]
    assert kerr_row["effective_J_matrix"] == pytest.approx(0, abs=1e-6)
    assert "Schur" in table.metadata["note"]


def test_lindblad_sweep_small():
    config = parse_config({"z": [1.0, 2.0], "phi": [0.01, 0.5, 2.0]}, "lindblad")
    table = run_lindblad_curves(config)
    assert len(table) == 6
    assert set(table.names) >= {"phi", "z", "kappa", "fidelity_recovered", "fidelity_unrecovered", "trace_error"}
    assert table.column("trace_error").max() < 1e-8


def test_lindblad_phi_cap_applies():
    config = parse_config({"z": [4.0], "phi": [1e-4, 0.01, 1.0]}, "lindblad")
    assert run_lindblad_curves(config).column("phi").tolist() == pytest.approx([1e-4, 0.01])


def test_fidelity_onset():
    assert fidelity_onset([0.01, 0.1, 1.0], [0.99, 0.96, 0.9]) == pytest.approx(10 ** (-1 + 1 / 6))
    assert fidelity_onset([0.1, 1.0], [0.99, 0.99]) == math.inf
