import json

import numpy as np
import pytest

from ucbenders.cases import builtin_case, builtin_case_names
from ucbenders.system import (
    CaseError,
    IslandingError,
    SystemCase,
    Generator,
    Line,
    case_from_dict,
    compute_ptdf,
    dc_flows,
    enumerate_contingencies,
    load_case,
    save_case,
)


def triangle_case():
    """Three buses in a triangle with equal reactances."""
    gens = [Generator("g1", "b1", 0, 100, 10, 0, 0, 100, 100, 1, 1, 1)]
    lines = [
        Line("l12", "b1", "b2", 0.1, 100),
        Line("l23", "b2", "b3", 0.1, 100),
        Line("l13", "b1", "b3", 0.1, 100),
    ]
    demand = np.zeros((3, 1))
    return SystemCase(["b1", "b2", "b3"], gens, lines, 1, demand, "b1")


def test_ptdf_triangle_split():
    # unit injection at b2 withdrawn at the reference: 2/3 direct, 1/3 around
    case = triangle_case()
    ptdf = compute_ptdf(case)
    col = ptdf[:, 1]
    assert col[0] == pytest.approx(-2.0 / 3.0)
    assert col[1] == pytest.approx(1.0 / 3.0)
    assert col[2] == pytest.approx(-1.0 / 3.0)  # l13 is oriented b1 -> b3
    # reference-bus column is zero
    assert np.allclose(ptdf[:, 0], 0.0)


@pytest.mark.parametrize("name", ["desk1", "desk3", "desk4", "rts24"])
def test_ptdf_matches_dc_solve(name):
    case = builtin_case(name)
    rng = np.random.default_rng(42)
    for cid in enumerate_contingencies(case):
        outage = None if cid == "base" else cid
        ptdf = compute_ptdf(case, outage)
        for _ in range(20):
            inj = rng.normal(size=case.n_buses)
            inj -= inj.mean()
            flows = dc_flows(case, inj, outage)
            assert np.abs(ptdf @ inj - flows).max() <= 1e-8


def test_contingency_counts():
    assert len(enumerate_contingencies(builtin_case("desk1"))) == 4
    assert len(enumerate_contingencies(builtin_case("desk3"))) == 6
    assert len(enumerate_contingencies(builtin_case("rts24"))) == 35
    # the single tiny2 line would island the grid, so only the base case stays
    assert enumerate_contingencies(builtin_case("tiny2")) == ["base"]


def test_islanding_outage_raises():
    case = builtin_case("tiny2")
    with pytest.raises(IslandingError):
        compute_ptdf(case, "l1")


def test_rts24_shape():
    case = builtin_case("rts24")
    assert case.n_buses == 24
    assert case.n_gens == 10
    assert case.n_lines == 34
    assert case.horizon == 24


def test_case_round_trip(tmp_path):
    case = builtin_case("desk2")
    path = tmp_path / "case.json"
    save_case(case, path)
    again = load_case(path)
    assert again.buses == case.buses
    assert np.allclose(again.base_demand, case.base_demand)
    assert [g.id for g in again.generators] == [g.id for g in case.generators]
    assert [ln.id for ln in again.lines] == [ln.id for ln in case.lines]


def test_builtin_names():
    names = builtin_case_names()
    for expected in ("desk1", "desk2", "desk3", "desk4", "desk5", "rts24", "tiny2"):
        assert expected in names
    with pytest.raises(FileNotFoundError):
        builtin_case("nope")


def base_doc():
    return builtin_case("desk1").to_dict()


def test_validation_unknown_bus():
    doc = base_doc()
    doc["generators"][0]["bus"] = "zz"
    with pytest.raises(CaseError, match="zz"):
        case_from_dict(doc)


def test_validation_duplicate_gen():
    doc = base_doc()
    doc["generators"][1]["id"] = doc["generators"][0]["id"]
    with pytest.raises(CaseError, match="duplicate generator"):
        case_from_dict(doc)


def test_validation_demand_shape():
    doc = base_doc()
    doc["demand"]["b1"] = [1.0]
    with pytest.raises(CaseError, match="b1"):
        case_from_dict(doc)


def test_validation_negative_demand():
    doc = base_doc()
    doc["demand"]["b1"][0] = -5.0
    with pytest.raises(CaseError, match="non-negative"):
        case_from_dict(doc)


def test_validation_disconnected():
    doc = base_doc()
    doc["buses"].append("b9")
    doc["demand"]["b9"] = [0.0, 0.0, 0.0]
    with pytest.raises(CaseError, match="not connected"):
        case_from_dict(doc)


def test_validation_unknown_field():
    doc = base_doc()
    doc["voltage"] = 1.0
    with pytest.raises(CaseError, match="voltage"):
        case_from_dict(doc)


def test_validation_zero_initial_status():
    doc = base_doc()
    doc["generators"][0]["initial_status"] = 0
    with pytest.raises(CaseError, match="initial_status"):
        case_from_dict(doc)


def test_bad_json_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(CaseError, match="parse"):
        load_case(path)


def test_initial_condition_horizons():
    g = Generator("g", "b", 0, 10, 1, 0, 0, 5, 5, 3, 2, 1)  # on for 1 h, min_up 3
    assert g.must_run_hours(6) == 2
    assert g.must_off_hours(6) == 0
    g2 = Generator("g", "b", 0, 10, 1, 0, 0, 5, 5, 3, 4, -1)  # off 1 h, min_down 4
    assert g2.must_off_hours(6) == 3
    assert g2.must_run_hours(6) == 0


def test_unbalanced_injection_rejected():
    case = triangle_case()
    with pytest.raises(CaseError, match="balanced"):
        dc_flows(case, np.array([1.0, 1.0, 0.0]))
