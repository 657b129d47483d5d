import csv
import io
import json

import pytest

from gptctx.cli import main
from gptctx.core import DEFAULT_TOL, make_simplex
from gptctx.io import FIXTURES, fixture_path, load_fixture, load_system, DocumentError


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


class TestValidate:
    def test_zoo(self):
        code, text = run("validate", "toy-bit")
        assert code == 0 and json.loads(text)["passed"]

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run("validate", str(bad))[0] == 2

    def test_missing_keys(self, tmp_path):
        doc = tmp_path / "partial.json"
        doc.write_text(json.dumps({"label": "x", "dim": 2}))
        assert run("validate", str(doc))[0] == 2

    def test_unknown_zoo_name(self):
        assert run("validate", "qutrit")[0] == 2

    def test_unnormalised(self, tmp_path):
        doc = make_simplex(2).to_dict()
        doc["state_vertices"][1] = [0.0, 0.5]
        path = tmp_path / "u.json"
        path.write_text(json.dumps(doc))
        code, text = run("validate", str(path))
        assert code == 1
        names = {v["invariant"] for v in json.loads(text)["violations"]}
        assert "unit-normalization" in names

    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "sq.json"
        path.write_text(json.dumps(load_system("squit").to_dict()))
        assert run("validate", str(path))[0] == 0

    def test_tolerance_restored(self):
        run("validate", "squit", "--tol", "1e-6")
        from gptctx import core
        assert core.DEFAULT_TOL == DEFAULT_TOL

    def test_bad_tolerance(self):
        with pytest.raises(SystemExit):
            run("validate", "squit", "--tol", "0")


class TestExcess:
    def test_trit(self):
        code, text = run("excess", "simplex:3", "--m-max", "3")
        doc = json.loads(text)
        assert code == 0
        assert doc["estimates"][2]["upper"] == 0.0
        assert "wall_time" not in doc["estimates"][0]

    def test_squit_rows(self):
        code, text = run("excess", "squit", "--m-max", "3", "--restarts", "4")
        assert code == 0
        assert all(row["lower"] >= 0.25 - 1e-9 for row in json.loads(text)["estimates"])

    def test_csv_matches_json(self, tmp_path):
        csv_path = tmp_path / "ex.csv"
        code, text = run("excess", "noisy-bit:0.2", "--m-max", "3", "--restarts", "4", "--csv-out", str(csv_path))
        doc = json.loads(text)
        rows = list(csv.DictReader(csv_path.open()))
        assert [int(r["m"]) for r in rows] == [1, 2, 3]
        for rec, row in zip(doc["estimates"], rows):
            assert float(row["upper"]) == rec["upper"]
            assert float(row["lower"]) == rec["lower"]
            assert int(row["stabilized"]) == int(doc["stabilized"])

    def test_csv_format(self):
        code, text = run("excess", "simplex:2", "--m-max", "2", "--format", "csv")
        assert text.splitlines()[0] == "m,upper,lower,stabilized,wall_time"

    def test_reproducible(self):
        args = ("excess", "polygon:5", "--m-max", "2", "--restarts", "3", "--seed", "7")
        assert run(*args)[1] == run(*args)[1]


class TestPom:
    def test_noisy_bit(self):
        code, text = run("pom", "noisy-bit:0.25", "--bits", "2", "--restarts", "4")
        assert code == 0 and json.loads(text)["value"] == pytest.approx(0.625, abs=1e-6)

    def test_yield(self):
        code, text = run("pom", "noisy-bit:0.25", "--bits", "2", "--yield-dmax", "3", "--restarts", "4")
        doc = json.loads(text)
        assert doc["yield"] == pytest.approx(0.75, abs=1e-6)
        assert [t["d"] for t in doc["yield_trace"]] == [1, 2, 3]

    def test_three_bits(self):
        code, text = run("pom", "simplex:2", "--bits", "3", "--restarts", "4")
        assert json.loads(text)["value"] == pytest.approx(2 / 3, abs=1e-6)

    def test_xor_parity(self):
        code, text = run("pom", "simplex:4", "--bits", "3", "--parity", "xor", "--restarts", "8")
        assert json.loads(text)["value"] <= 5 / 6 + 1e-9

    def test_reproducible(self):
        args = ("pom", "polygon:5", "--restarts", "3", "--seed", "11")
        assert run(*args)[1] == run(*args)[1]


class TestCompare:
    def test_holds(self):
        code, text = run("compare", "simplex:3", "simplex:2")
        doc = json.loads(text)
        assert code == 0 and doc["verdict"] == "holds" and doc["n_free"] == 2
        assert "certificate" not in doc

    def test_noisy_bit_and_bit_both_ways(self):
        assert run("compare", "noisy-bit:0.25", "simplex:2")[0] == 0
        assert run("compare", "simplex:2", "noisy-bit:0.25")[0] == 0

    def test_refuted(self):
        code, text = run("compare", "squit", "simplex:2", "--restarts", "4")
        assert code == 1 and json.loads(text)["verdict"] == "refuted"

    def test_inconclusive(self):
        assert run("compare", "simplex:3", "noisy-bit:0.25", "--n-free-max", "1", "--restarts", "4")[0] == 4

    def test_certificate_output(self):
        code, text = run("compare", "simplex:2", "squit", "--with-certificate")
        assert json.loads(text)["certificate"]["target"]["dim"] == 3


class TestRealize:
    @pytest.mark.parametrize("name,code,status", [
        ("bit_in_trit", 0, "feasible"), ("toy_bit_model", 1, "infeasible"), ("identity_d2", 0, "feasible"),
        ("bit_in_trit_plain", 1, "infeasible"), ("restricted_effects", 0, "feasible"),
    ])
    def test_fixtures(self, name, code, status):
        got, text = run("realize", "--simulation", str(fixture_path(name)))
        assert got == code
        doc = json.loads(text)
        assert doc["status"] == status
        assert ("map" in doc) == (status == "feasible")

    def test_zoo_refs_inside_simulation(self, tmp_path):
        path = tmp_path / "sim.json"
        path.write_text(json.dumps({"source": "simplex:2", "target": "simplex:2",
                                    "state_map": [[1, 0], [0, 1]], "effect_map": [[1, 0], [0, 1]]}))
        assert run("realize", "--simulation", str(path))[0] == 0

    def test_bad_simulation(self, tmp_path):
        path = tmp_path / "sim.json"
        path.write_text(json.dumps({"source": "simplex:2"}))
        assert run("realize", "--simulation", str(path))[0] == 2


class TestFixtures:
    def test_listing(self):
        code, text = run("fixture")
        assert text.split() == list(FIXTURES)

    @pytest.mark.parametrize("name", FIXTURES)
    def test_loadable(self, name):
        sim = load_fixture(name)
        assert json.loads(run("fixture", name)[1])["state_map"] == sim.state_map.tolist()

    def test_unknown(self):
        with pytest.raises(KeyError):
            fixture_path("nope")


def test_document_errors():
    with pytest.raises(DocumentError):
        load_system("/nonexistent/file.json")
