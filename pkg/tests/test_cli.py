import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from polyflat.cli import main
from polyflat.jsonio import parse_polytope, parse_potential

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

TRIANGLE = {
    "dim": 2,
    "bounded": True,
    "halfspaces": [
        {"normal": [1, 0], "offset": 0},
        {"normal": [0, 1], "offset": 0},
        {"normal": [-1, -1], "offset": 1},
    ],
}

TRAPEZOID = {
    "dim": 2,
    "bounded": True,
    "halfspaces": [
        {"normal": [1, 0], "offset": 0},
        {"normal": [0, 1], "offset": 0},
        {"normal": [-1, -1], "offset": 2},
        {"normal": [0, -1], "offset": 1},
    ],
}


def write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture
def tri_input(tmp_path):
    return write(
        tmp_path,
        "tri.json",
        {"polytope": TRIANGLE, "potential": {"guillemin_of": "polytope", "scale": 1.0}},
    )


def test_validate_triangle(tri_input, tmp_path, capsys):
    assert main(["validate", tri_input]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["delzant"]["valid"] and out["zero_sum"]


def test_validate_trapezoid(tmp_path, capsys):
    path = write(tmp_path, "trap.json", TRAPEZOID)
    assert main(["validate", path]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["delzant"]["valid"] and not out["zero_sum"]


def test_validate_malformed(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 2,')
    assert main(["validate", str(path)]) == 2


def test_validate_missing_file():
    assert main(["validate", "/nonexistent/nowhere.json"]) == 2


def test_divergence_table(tri_input, tmp_path, capsys):
    points = write(
        tmp_path, "pts.json", {"pairs": [[[0.25, 0.25], [1 / 3, 1 / 3]]]}
    )
    assert main(["divergence", tri_input, "--points", points]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["rows"][0]["divergence"] == pytest.approx(
        0.5 * math.log(0.75) + 0.5 * math.log(1.5), abs=1e-9
    )


def test_geodesic_csv_roundtrip(tri_input, tmp_path):
    spec = write(
        tmp_path,
        "spec.json",
        {
            "kind": "dual",
            "start": [0.25, 0.25],
            "direction": [1.0, 1.0],
            "t_grid": [0.0, 0.5, 1.0, 2.0, 4.0],
        },
    )
    out_path = tmp_path / "trace.csv"
    assert main(
        ["geodesic", tri_input, "--spec", spec, "--format", "csv", "--out", str(out_path)]
    ) == 0
    phi = parse_potential({"guillemin_of": "polytope", "scale": 1.0}, parse_polytope(TRIANGLE))
    rows = [
        row
        for row in csv.DictReader(
            line for line in out_path.read_text().splitlines() if not line.startswith("#")
        )
    ]
    finite = [row for row in rows if row["t"] != "inf"]
    assert len(finite) == 5
    for row in finite:
        x = np.array([float(row["x_1"]), float(row["x_2"])])
        y = np.array([float(row["y_1"]), float(row["y_2"])])
        np.testing.assert_allclose(phi.gradient(x), y, atol=1e-9)
    limit_row = rows[-1]
    assert limit_row["t"] == "inf"
    assert float(limit_row["x_1"]) == pytest.approx(0.5, abs=1e-8)


def test_geodesic_flat_truncates(tri_input, tmp_path, capsys):
    spec = write(
        tmp_path,
        "spec.json",
        {
            "kind": "flat",
            "start": [1 / 3, 1 / 3],
            "direction": [1.0, 0.0],
            "t_grid": [0.0, 0.1, 0.2, 0.5],
        },
    )
    assert main(["geodesic", tri_input, "--spec", spec]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["rows"]) == 3  # t = 0.5 is outside
    assert out["notes"] and "0.333333333333" in out["notes"][0]


def test_boundary_table(tri_input, tmp_path, capsys):
    points = write(tmp_path, "bpts.json", {"pairs": [[[0.5, 0.5], [0.4, 0.6]]]})
    assert main(["boundary", tri_input, "--face", "3", "--points", points]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["rows"][0]["divergence"] == pytest.approx(0.02041099726, abs=1e-9)


def test_pythagoras_command(tri_input, tmp_path, capsys):
    triple = write(
        tmp_path,
        "triple.json",
        {"kind": "boundary_foot", "face": [3], "eta": [0.3, 0.7], "xi": [0.25, 0.25]},
    )
    assert main(["pythagoras", tri_input, "--triple", triple]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pass"]
    np.testing.assert_allclose(out["eta_prime"], [0.5, 0.5], atol=1e-8)


def test_torify_roundtrip(tmp_path, capsys):
    path = write(tmp_path, "tri.json", TRIANGLE)
    assert main(["torify", path]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["zero_sum"] and out["pass"]
    mix = write(tmp_path, "mix.json", out["mixture"])
    assert main(["torify", mix]) == 0
    out2 = json.loads(capsys.readouterr().out)
    assert out2["pass"]


def test_torify_trapezoid_fails(tmp_path, capsys):
    path = write(tmp_path, "trap.json", TRAPEZOID)
    assert main(["torify", path]) == 1
    out = json.loads(capsys.readouterr().out)
    assert not out["zero_sum"] and out["delzant"]["valid"]


def test_verify_all_bundled_scenarios(capsys):
    assert main(["verify-all", str(SCENARIOS / "triangle.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pass"] and all(c["pass"] for c in out["checks"])
    assert main(["verify-all", str(SCENARIOS / "square.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pass"]


def test_verify_all_negative_control(capsys):
    assert main(["verify-all", str(SCENARIOS / "triangle_negative_control.json")]) == 1
    out = json.loads(capsys.readouterr().out)
    failing = [c for c in out["checks"] if not c["pass"]]
    assert failing
    assert all(c["check"] == "pythagoras-boundary-foot" for c in failing)
    assert all(c["residual"] >= 1e-4 for c in failing)


def test_verify_all_deterministic(tmp_path):
    out1 = tmp_path / "run1.json"
    out2 = tmp_path / "run2.json"
    for out in (out1, out2):
        assert main(
            ["verify-all", str(SCENARIOS / "triangle.json"), "--seed", "7", "--out", str(out)]
        ) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_verify_all_scenario_list(tmp_path, capsys):
    scenarios = [
        json.loads((SCENARIOS / "triangle.json").read_text()),
        json.loads((SCENARIOS / "square.json").read_text()),
    ]
    for sc in scenarios:
        sc["samples"] = {"continuity_pairs": 1, "boundary_feet": 2, "interior_triples": 5}
        sc["product_check"] = False
    path = write(tmp_path, "both.json", scenarios)
    assert main(["verify-all", path]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pass"] and len(out["scenarios"]) == 2


def test_verify_all_tolerance_override(capsys):
    # an absurdly tight tolerance forces a failure
    assert (
        main(
            [
                "verify-all",
                str(SCENARIOS / "triangle.json"),
                "--tol",
                "continuity_gap=1e-300",
            ]
        )
        == 1
    )
    capsys.readouterr()
