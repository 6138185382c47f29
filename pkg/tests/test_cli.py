"""End-to-end tests of the command line interface, run in process."""

import csv
import json

import pytest

from nama.cli import main

SEGMENT_TABLE = [
    {"L_power": 1, "divisor_powers": {}, "stratum": [], "value": "2"},
    {"L_power": 1, "divisor_powers": {}, "stratum": [0], "value": "1"},
    {"L_power": 1, "divisor_powers": {}, "stratum": [1], "value": "1"},
    {"L_power": 0, "divisor_powers": {}, "stratum": [0, 1], "value": "1"},
    {"L_power": 0, "divisor_powers": {"0": 1}, "stratum": [0],
     "value": "-1"},
    {"L_power": 0, "divisor_powers": {"1": 1}, "stratum": [0], "value": "1"},
    {"L_power": 0, "divisor_powers": {"0": 1}, "stratum": [1], "value": "1"},
    {"L_power": 0, "divisor_powers": {"1": 1}, "stratum": [1],
     "value": "-1"},
]

SEGMENT_MODEL = {
    "n": 1,
    "semistable": True,
    "divisors": [{"id": 0}, {"id": 1}],
    "faces": [[0], [1], [0, 1]],
    "intersection_table": SEGMENT_TABLE,
}


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def read_manifest(out_dir):
    with open(out_dir / "manifest.json") as fh:
        return json.load(fh)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_model_validate_reports_relations(tmp_path):
    cfg = write_config(tmp_path, SEGMENT_MODEL)
    out = tmp_path / "out"
    assert main(["model", "validate", cfg, "--out", str(out)]) == 0
    manifest = read_manifest(out)
    assert manifest["command"] == "model validate"
    assert manifest["passed"] is True
    assert manifest["outputs"] == ["model_validate.csv"]
    assert manifest["summary"]["divisors"] == 2
    assert manifest["options"]["config_document"]["n"] == 1


def test_model_skeleton_emits_the_flat_measure(tmp_path):
    cfg = write_config(tmp_path, SEGMENT_MODEL)
    out = tmp_path / "out"
    assert main(["model", "skeleton", cfg, "--out", str(out)]) == 0
    manifest = read_manifest(out)
    assert manifest["summary"]["skeleton_dim"] == 1
    assert manifest["summary"]["is_maximal"] is True
    assert manifest["summary"]["total_mass"] == "1"
    assert (out / "skeleton.csv").exists()


def test_namma_writes_exact_masses(tmp_path):
    doc = dict(SEGMENT_MODEL, coefficients={"0": "0", "1": "1/4"})
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["namma", cfg, "--out", str(out)]) == 0
    rows = read_csv(out / "namma.csv")
    assert rows[0] == ["divisor", "coefficient", "mass"]
    masses = {row[0]: row[2] for row in rows[1:]}
    assert masses == {"0": "5/4", "1": "3/4"}
    manifest = read_manifest(out)
    assert manifest["summary"]["total"] == "2"
    assert manifest["summary"]["expected"] == "2"


def test_realma_solve_converges_on_the_unit_square(tmp_path):
    doc = {"domain": {"box": [[0, 1], [0, 1]]},
           "density": 1,
           "boundary": {"quadratic": [[1, 0], [0, 1]]}}
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["realma", "solve", cfg, "--grid", "5",
                 "--out", str(out)]) == 0
    manifest = read_manifest(out)
    assert manifest["summary"]["converged"] is True
    assert manifest["summary"]["residual"] < 1e-8
    assert (out / "solution.csv").exists()


def test_realma_measure_locates_the_kink_mass(tmp_path):
    doc = {"domain": {"interval": [0, 1]},
           "nodes": [[0], ["1/2"], [1]],
           "values": [0, "-1/8", 0]}
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["realma", "measure", cfg, "--out", str(out)]) == 0
    rows = read_csv(out / "measure.csv")
    assert rows[0] == ["node_x0", "value", "mass"]
    masses = {row[0]: row[-1] for row in rows[1:]}
    assert masses["1/2"] == "1/2"
    manifest = read_manifest(out)
    assert manifest["summary"]["total_mass"] == "1/2"
    assert manifest["summary"]["degenerate"] is False


def test_compare_vilsmeier_masses_on_a_cycle(tmp_path):
    doc = {"cycle": {"degrees": [1, 2, 1],
                     "coefficients": [0, "1/2", "1/3"]}}
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["compare", "vilsmeier", cfg, "--out", str(out)]) == 0
    rows = read_csv(out / "compare_vilsmeier.csv")
    masses = [row[2] for row in rows[1:]]
    assert masses[:3] == ["11/6", "4/3", "5/6"]


def test_compare_mode_flag_and_positional_must_agree(tmp_path):
    doc = {"cycle": {"degrees": [1, 1, 1], "coefficients": [0, 0, 0]}}
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["compare", "--mode", "vilsmeier", cfg,
                 "--out", str(out)]) == 0
    assert main(["compare", "vilsmeier", "--mode", "pde", cfg,
                 "--out", str(out)]) == 1
    assert main(["compare", cfg, "--out", str(out)]) == 1


def test_compare_lowerface_checks_the_expected_density(tmp_path):
    doc = dict(SEGMENT_MODEL,
               potential={"face": "0", "gradients": {"0": 0, "1": 0},
                          "hessian": []},
               expected=1)
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["compare", "lowerface", cfg, "--out", str(out)]) == 0

    doc["expected"] = 2
    cfg2 = write_config(tmp_path, doc, "bad.json")
    out2 = tmp_path / "out2"
    assert main(["compare", "lowerface", cfg2, "--out", str(out2)]) == 2
    manifest = read_manifest(out2)
    assert manifest["passed"] is False
    assert "failure" in manifest["summary"]


def test_compare_pde_residual_on_the_segment(tmp_path):
    doc = dict(SEGMENT_MODEL,
               potential={"face": "0,1", "gradients": {"0": 0, "1": 0},
                          "hessian": [[2]]},
               residues={"0,1": 1})
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["compare", "pde", cfg, "--out", str(out)]) == 0
    manifest = read_manifest(out)
    assert manifest["summary"]["rhs"] == "2"
    assert manifest["summary"]["max_residual"] == pytest.approx(0.0)


def test_compare_matching_accepts_a_transported_potential(tmp_path):
    doc = {
        "n": 2,
        "semistable": True,
        "divisors": [{"id": k} for k in range(4)],
        "faces": [[0], [1], [2], [3],
                  [0, 1], [0, 2], [1, 2], [1, 3], [2, 3],
                  [0, 1, 2], [1, 2, 3]],
        "matching": {
            "face_a": "0,1,2",
            "face_b": "1,2,3",
            "degrees": {"1": 2},
            "a": {"quadratic": [[1, 0], [0, 2]], "linear": [0, "1/3"]},
            "b": {"quadratic": [[9, 4], [4, 2]],
                  "linear": ["2/3", "1/3"]},
            "wall_points": [[0], ["1/4"], ["1/2"]],
        },
    }
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["compare", "matching", cfg, "--out", str(out)]) == 0
    manifest = read_manifest(out)
    assert manifest["summary"]["max_residual"] == pytest.approx(0.0)

    doc["matching"]["b"]["linear"] = ["2/3", "2/3"]
    cfg2 = write_config(tmp_path, doc, "bad.json")
    assert main(["compare", "matching", cfg2,
                 "--out", str(tmp_path / "out2")]) == 2


def test_compare_mass_balances_the_segment(tmp_path):
    doc = {
        "n": 1,
        "semistable": True,
        "divisors": [{"id": 0}, {"id": 1}],
        "faces": [[0], [1], [0, 1]],
        "mass_terms": [{"face": "0,1", "density": 2}],
        "expected": 2,
    }
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["compare", "mass", cfg, "--out", str(out)]) == 0
    manifest = read_manifest(out)
    assert manifest["summary"]["discrepancy"] == "0"


def test_hybrid_pushforward_runs_a_small_batch(tmp_path):
    out = tmp_path / "out"
    code = main(["hybrid", "pushforward", "--n", "2", "--t-exp", "30",
                 "--samples", "4000", "--out", str(out)])
    assert code == 0
    manifest = read_manifest(out)
    assert manifest["summary"]["statistic"] == "dyadic-cells"
    assert manifest["summary"]["distance"] >= 0.0
    assert (out / "histogram.csv").exists()


def test_hybrid_growth_recovers_the_expected_exponent(tmp_path):
    out = tmp_path / "out"
    code = main(["hybrid", "growth", "--n", "2",
                 "--t-exp", "20,40,80", "--samples", "20000",
                 "--out", str(out)])
    assert code == 0
    manifest = read_manifest(out)
    assert manifest["summary"]["expected"] == 2
    assert abs(manifest["summary"]["exponent"] - 2.0) < 0.2
    assert len(read_csv(out / "growth.csv")) == 4


def test_geometry_subcommands_pass_their_checks(tmp_path):
    out1 = tmp_path / "slag"
    assert main(["geometry", "slag-check", "--n", "2",
                 "--out", str(out1)]) == 0
    m1 = read_manifest(out1)
    assert m1["summary"]["lagrangian_residual"] == 0.0
    assert m1["summary"]["phase_residual"] < 1e-12

    out2 = tmp_path / "calabi"
    assert main(["geometry", "calabi", "--n", "3", "--out", str(out2)]) == 0
    m2 = read_manifest(out2)
    assert m2["summary"]["constant"] == pytest.approx(64 / 81)
    assert m2["summary"]["residual"] < 1e-12

    out3 = tmp_path / "gcal"
    assert main(["geometry", "gcalabi", "--m", "1", "--n", "2",
                 "--out", str(out3)]) == 0
    m3 = read_manifest(out3)
    assert m3["summary"]["slope"] == pytest.approx(-1.0, abs=0.05)


def test_config_errors_exit_with_status_one(tmp_path):
    missing = str(tmp_path / "nope.json")
    assert main(["model", "validate", missing]) == 1

    bad = write_config(tmp_path, dict(SEGMENT_MODEL, plot=True))
    assert main(["model", "validate", bad]) == 1

    cfg = write_config(tmp_path, SEGMENT_MODEL, "ok.json")
    assert main(["compare", "sideways", cfg]) == 1


def test_reruns_are_byte_identical(tmp_path):
    doc = dict(SEGMENT_MODEL, coefficients={"0": "0", "1": "1/4"})
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["namma", cfg, "--out", str(out)]) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(["namma", cfg, "--out", str(out)]) == 0
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    assert first == second
