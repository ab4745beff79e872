import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenario_witness.io import (
    CsvSink,
    FormatError,
    read_state,
    read_witness,
    write_json,
    write_state,
    write_witness,
)
from scenario_witness.partitions import full_separability_structure
from scenario_witness.states import DensityMatrix, RngStream, ghz_state, random_density_matrix
from scenario_witness.witness import find_witness


def test_state_round_trip_bit_exact(tmp_path):
    rho = random_density_matrix(6, RngStream(1), (2, 3))
    write_state(tmp_path / "s.json", rho)
    back = read_state(tmp_path / "s.json")
    assert back.dims == (2, 3)
    assert np.array_equal(back.matrix, rho.matrix)


def test_state_file_layout(tmp_path):
    write_state(tmp_path / "s.json", ghz_state())
    data = json.loads((tmp_path / "s.json").read_text())
    assert data["dims"] == [2, 2, 2]
    assert data["matrix"][0][7] == pytest.approx([0.5, 0.0], abs=1e-15)


def test_witness_round_trip(tmp_path):
    res = find_witness(random_density_matrix(4, RngStream(2), (2, 2)), full_separability_structure((2, 2)), 20, seed=4)
    write_witness(tmp_path / "w.json", res)
    w, meta = read_witness(tmp_path / "w.json")
    assert np.array_equal(w, res.witness)
    assert meta["objective"] == res.objective and meta["N"] == 20 and meta["seed"] == 4
    assert meta["structure"] == res.structure


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=8, max_size=8))
def test_matrix_round_trip_property(tmp_path_factory, vals):
    from scenario_witness.io import matrix_from_json, matrix_to_json

    m = np.array(vals[:4]).reshape(2, 2) + 1j * np.array(vals[4:]).reshape(2, 2)
    text = json.dumps(matrix_to_json(m))
    assert np.array_equal(matrix_from_json(json.loads(text)), m)


@pytest.mark.parametrize("payload", [
    "not json",
    "[1, 2]",
    '{"dims": [2]}',
    '{"dims": [2], "matrix": [[1, 0, 0]]}',
    '{"dims": [2], "matrix": "x"}',
    '{"dims": [2, 2], "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}',
])
def test_malformed_witness(tmp_path, payload):
    p = tmp_path / "bad.json"
    p.write_text(payload)
    with pytest.raises(FormatError):
        read_witness(p)


def test_invalid_state_rejected(tmp_path):
    p = tmp_path / "s.json"
    write_json(p, {"dims": [2], "matrix": [[[2, 0], [0, 0]], [[0, 0], [0, 0]]]})
    with pytest.raises(FormatError):
        read_state(p)


def test_non_finite_written_as_null(tmp_path):
    write_json(tmp_path / "x.json", {"a": float("inf"), "b": [1.0, float("nan")]})
    assert json.loads((tmp_path / "x.json").read_text()) == {"a": None, "b": [1.0, None]}


def test_csv_sink_flushes(tmp_path):
    p = tmp_path / "t.csv"
    sink = CsvSink(p, ["a", "b"])
    sink.write({"a": 1, "b": 0.1})
    assert p.read_text().splitlines() == ["a,b", "1,0.1"]
    sink.close()
