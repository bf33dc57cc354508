"""JSON round trips for states and map expressions; CSV formatting."""

import json

import numpy as np
import pytest

from gme_maps.criteria import eta_map, mu_map, phi_b
from gme_maps.detect import ScanRow
from gme_maps.maps import apply
from gme_maps.serialize import (dumps_report, mapexpr_from_json,
                                mapexpr_to_json, scan_csv, state_from_json,
                                state_to_json)
from gme_maps.states import PureState, ghz, ppt_family
from helpers import hermitian_op


def test_pure_state_roundtrip():
    psi = ghz(3, 3)
    doc = state_to_json(psi)
    assert doc["format"] == "mpop-v1"
    assert doc["dims"] == [3, 3, 3]
    back = state_from_json(json.loads(json.dumps(doc)))
    assert isinstance(back, PureState)
    assert np.array_equal(back.vec, psi.vec)


def test_density_roundtrip():
    rho = ppt_family((0.2, 0.3, 0.4))
    back = state_from_json(json.loads(json.dumps(state_to_json(rho))))
    assert np.array_equal(back.mat, rho.mat)
    assert back.dims == rho.dims


def test_state_format_errors():
    with pytest.raises(ValueError):
        state_from_json({"format": "mpop-v2", "dims": [2], "vector": [[1, 0]]})
    with pytest.raises(ValueError):
        state_from_json({"format": "mpop-v1", "dims": [2, 2]})
    with pytest.raises(ValueError):
        state_from_json({"format": "mpop-v1", "dims": [2, 2], "vector": [[1, 0]]})


@pytest.mark.parametrize("factory", [
    lambda: eta_map(3).expr,
    lambda: mu_map(3, 3).expr,
    lambda: phi_b(4).expr,
])
def test_mapexpr_roundtrip(factory):
    expr = factory()
    doc = mapexpr_to_json(expr)
    assert doc["format"] == "mapexpr-v1"
    back = mapexpr_from_json(json.loads(json.dumps(doc)))
    rng = np.random.default_rng(1)
    dims = (2, 2, 2) if expr.dim == 8 else ((3, 3, 3) if expr.dim == 27 else (4, 4, 4))
    rho = hermitian_op(dims, rng)
    a = apply(expr, rho).mat
    b = apply(back, rho).mat
    assert np.max(np.abs(a - b)) <= 1e-12


def test_mapexpr_unknown_kind():
    with pytest.raises(ValueError):
        mapexpr_from_json({"format": "mapexpr-v1", "root": {"kind": "mystery"}})


def test_scan_csv_format():
    rows = [ScanRow(0.1, -0.02236, True), ScanRow(0.34, 0.00184, False)]
    text = scan_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == "param,min_eig,detected"
    assert lines[1].startswith("0.1,") and lines[1].endswith(",true")
    assert lines[2].endswith(",false")


def test_dumps_report_deterministic():
    rep = {"b": 1.5, "a": np.float64(0.25), "v": np.array([1 + 2j])}
    assert dumps_report(rep) == dumps_report(rep)
    assert json.loads(dumps_report(rep))["v"] == [[1.0, 2.0]]
