"""File round-trips and deterministic formatting."""

import json

import numpy as np

from spinquench.io import (
    error_json,
    fmt,
    jsonable,
    load_config,
    read_csv_columns,
    write_config,
    write_csv,
    write_json,
    write_operator_csv,
    write_spectrum_csv,
)
from spinquench.errors import NoValidWindow
from spinquench.model import SpinorModel, build_hamiltonian
from spinquench.scaling import ScalingFit


def test_float_round_trip(tmp_path):
    values = [0.1, 1.0 / 3.0, 1e-300, 12345.678901234567, -0.0]
    write_csv(tmp_path / "t.csv", ["i", "x"], ((i, v) for i, v in enumerate(values)))
    _, cols = read_csv_columns(tmp_path / "t.csv")
    assert np.array_equal(cols[1], np.array(values))


def test_fmt_variants():
    assert fmt(None) == ""
    assert fmt(np.float64(0.5)) == "0.5"
    assert fmt(np.int64(7)) == "7"
    assert fmt("text") == "text"


def test_operator_and_spectrum_dumps(tmp_path):
    op = build_hamiltonian(SpinorModel(8, -1.0, 0.3))
    write_operator_csv(tmp_path / "op.csv", op)
    header, cols = read_csv_columns(tmp_path / "op.csv")
    assert header == ["k", "diagonal", "offdiagonal"]
    assert np.array_equal(cols[1], op.diagonal)
    assert np.array_equal(cols[2][:-1], op.offdiagonal)
    assert np.isnan(cols[2][-1])  # no bond after the last site

    write_spectrum_csv(tmp_path / "s.csv", np.array([-1.5, 0.25, 3.0]))
    header, cols = read_csv_columns(tmp_path / "s.csv")
    assert header == ["alpha", "energy"]
    assert np.array_equal(cols[0], [1, 2, 3])
    assert np.array_equal(cols[1], [-1.5, 0.25, 3.0])


def test_json_schema_and_dataclasses(tmp_path):
    fit = ScalingFit(offset_a=0.1, amplitude_b=2.0, exponent_gamma=0.5,
                     r_squared=1.0, rmse=0.0, sse=0.0)
    write_json(tmp_path / "f.json", {"fit": fit, "arr": np.arange(3),
                                     "flag": np.bool_(True), "inf": np.inf})
    payload = json.loads((tmp_path / "f.json").read_text())
    assert payload["schema_version"] == 1
    assert payload["fit"]["exponent_gamma"] == 0.5
    assert payload["arr"] == [0, 1, 2]
    assert payload["flag"] is True
    assert payload["inf"] == "inf"


def test_error_json():
    payload = json.loads(error_json(NoValidWindow("no plateau")))
    assert payload["error"] == "NoValidWindow"
    assert payload["message"] == "no plateau"


def test_config_round_trip(tmp_path):
    sections = {"model": {"n-atoms": 100, "c1-sign": "fm"},
                "quench": {"qi": -3.0, "qf": 0.5}}
    write_config(tmp_path / "c.ini", sections)
    loaded = load_config(tmp_path / "c.ini")
    assert loaded["model"]["n-atoms"] == "100"
    assert float(loaded["quench"]["qf"]) == 0.5
