import io
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from extremal.cli import run
from extremal.crabb_davie import build_crabb_davie
from extremal.serialize import (
    dump_json,
    load_json,
    matrix_to_json,
    polynomial_to_json,
    tuple_from_json,
    tuple_to_json,
)
from extremal.tuples import OperatorTuple
from extremal.vonneumann import MultiPolynomial

GOLDEN = Path(__file__).parent / "golden"
UPDATE = os.environ.get("EXTREMAL_UPDATE_GOLDEN") == "1"
S = 2**-0.5


def schema_of(obj):
    """Key structure and value kinds of a report, ignoring values."""
    if isinstance(obj, dict):
        return {k: schema_of(v) for k, v in sorted(obj.items())}
    if isinstance(obj, list):
        return "list"
    if isinstance(obj, bool):
        return "bool"
    if isinstance(obj, (int, float)):
        return "number"
    if obj is None:
        return "null"
    return "string"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code, _ = run(list(argv), stdout=out, stderr=err)
    report = json.loads(out.getvalue())
    return code, report, err.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {}

    def put(name, obj):
        p = tmp_path / name
        dump_json(obj, p)
        paths[name] = str(p)
        return str(p)

    put("pauli.json", {"unitaries": [matrix_to_json(np.array([[0, 1], [1, 0]])),
                                     matrix_to_json(np.diag([1, -1])), matrix_to_json(np.eye(2))]})
    put("ident.json", [matrix_to_json(np.eye(2))] * 3)
    put("nonunitary.json", [matrix_to_json(np.eye(2)), matrix_to_json(2 * np.eye(2))])
    put("det_one.json", {"J": 2, "x": [[1, 0], [S, S], [0, 1]]})
    put("det_zero.json", {"J": 2, "x": [[1, 0], [1, 0], [0, [1.0, 0.0]]]})
    put("cd.json", tuple_to_json(build_crabb_davie().tuple))
    put("bad.json", tuple_to_json(OperatorTuple((np.eye(2), np.array([[0, 1], [1, 0]]), np.diag([1, -1])))))
    put("zero.json", tuple_to_json(OperatorTuple((np.zeros((2, 2)),) * 2)))
    put("contraction.json", tuple_to_json(OperatorTuple((np.array([[0.5, 0.3], [0, -0.2]]),))))
    put("poly.json", polynomial_to_json(
        MultiPolynomial(3, {(1, 1, 1): 0.5, (3, 0, 0): -1 / 6, (0, 3, 0): -1 / 6, (0, 0, 3): -1 / 6})
    ))
    put("garbage.json", {"rows": 1})
    paths["dir"] = str(tmp_path)
    return paths


def check_golden(name, report):
    path = GOLDEN / f"{name}.json"
    got = schema_of(report)
    if UPDATE:
        path.write_text(json.dumps(got, indent=2, sort_keys=True) + "\n")
    assert got == json.loads(path.read_text())


class TestGolden:
    def test_parrott(self, files):
        code, rep, _ = call("parrott", "--unitaries", files["ident.json"], "--extend")
        assert code == 0 and rep["results"]["extremal"] is False
        assert rep["results"]["certificate"]["verdicts"]["nontrivial"]
        check_golden("parrott", rep)

    def test_crabb_davie_check(self, files):
        code, rep, _ = call("crabb-davie", "--check")
        assert code == 0 and rep["results"]["passed"]
        check_golden("crabb_davie_check", rep)

    def test_crabb_davie_probe(self, files):
        code, rep, _ = call("crabb-davie", "--probe", "1", "5", "3")
        assert code == 0 and rep["seed"] == 3
        assert rep["results"]["max_solution_dim"] == 0
        check_golden("crabb_davie_probe", rep)

    def test_varopoulos_extremal(self, files):
        code, rep, _ = call("varopoulos", "--vectors", files["det_one.json"])
        assert code == 0
        assert rep["results"]["decision"] == "Extremal"
        assert abs(rep["results"]["lambda_det_abs"] - 1) < 1e-9
        check_golden("varopoulos_extremal", rep)

    def test_varopoulos_with_certificate(self, files):
        code, rep, _ = call("varopoulos", "--vectors", files["det_zero.json"])
        assert code == 0 and rep["results"]["decision"] == "NotExtremal"
        assert rep["results"]["certificate"]["verdicts"]["nontrivial"]
        check_golden("varopoulos_not_extremal", rep)

    def test_check(self, files):
        code, rep, _ = call("check", "--tuple", files["cd.json"])
        assert code == 0 and rep["results"]["in_family"]
        check_golden("check", rep)

    def test_probe(self, files):
        code, rep, _ = call("probe", "--tuple", files["zero.json"], "--k", "1", "--samples", "2", "--seed", "1")
        assert code == 0 and rep["results"]["found"]
        check_golden("probe", rep)

    def test_vn_poly(self, files):
        code, rep, _ = call("vn", "--tuple", files["cd.json"], "--poly", files["poly.json"], "--grid", "128")
        assert code == 0 and rep["results"]["certified_violation"]
        check_golden("vn_poly", rep)

    def test_vn_search(self, files):
        code, rep, _ = call("vn", "--tuple", files["contraction.json"], "--search", "2", "2", "--grid", "16",
                            "--seed", "5")
        assert code == 0 and rep["seed"] == 5
        assert not rep["results"]["certified_violation"]
        check_golden("vn_search", rep)

    def test_build(self, files):
        out = os.path.join(files["dir"], "built.json")
        code, rep, _ = call("build", "parrott", "--unitaries", files["pauli.json"], "--out", out)
        assert code == 0
        check_golden("build", rep)

    def test_error_report(self, files):
        code, rep, _ = call("parrott", "--unitaries", files["nonunitary.json"])
        assert code == 2
        assert rep["error"]["kind"] == "NonUnitaryInput"
        check_golden("error", rep)


class TestExitCodes:
    def test_non_commuting_check(self, files):
        code, rep, err = call("check", "--tuple", files["bad.json"])
        assert code == 2
        assert rep["results"]["commuting"]["worst_pair"] == [1, 2]
        assert "worst pair (1, 2)" in err

    def test_missing_file(self, files):
        assert call("check", "--tuple", os.path.join(files["dir"], "nope.json"))[0] == 2

    def test_malformed_json(self, files):
        assert call("check", "--tuple", files["garbage.json"])[0] == 2

    def test_probe_k_limit(self, files):
        assert call("probe", "--tuple", files["zero.json"], "--k", "9", "--seed", "0")[0] == 2

    def test_usage_error_prints_schema(self, capsys):
        with pytest.raises(SystemExit) as info:
            run(["vn"])
        assert info.value.code == 2
        assert "JSON schemas" in capsys.readouterr().err

    def test_seed_generated_and_reported(self, files):
        code, rep, err = call("probe", "--tuple", files["zero.json"], "--samples", "1")
        assert code == 0 and isinstance(rep["seed"], int)
        assert f"[seed {rep['seed']}]" in err

    def test_tolerance_flag(self, files):
        _, rep, _ = call("check", "--tuple", files["cd.json"], "--eps-rank", "1e-6")
        assert rep["tolerances"]["eps_rank"] == 1e-6

    def test_env_tolerance(self, files, monkeypatch):
        monkeypatch.setenv("EXTREMAL_EPS_RANK", "1e-7")
        _, rep, _ = call("check", "--tuple", files["cd.json"])
        assert rep["tolerances"]["eps_rank"] == 1e-7

    def test_bad_tolerance(self, files):
        assert call("check", "--tuple", files["cd.json"], "--eps-rank", "-1")[0] == 2

    def test_module_entry_point(self, files):
        proc = subprocess.run(
            [sys.executable, "-m", "extremal", "varopoulos", "--vectors", files["det_one.json"]],
            capture_output=True, text=True, check=False,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["results"]["decision"] == "Extremal"


class TestRoundTrip:
    @pytest.mark.parametrize("kind,flag,name", [
        ("crabb-davie", None, None),
        ("parrott", "--unitaries", "pauli.json"),
        ("varopoulos", "--vectors", "det_one.json"),
    ])
    def test_build_roundtrip(self, files, kind, flag, name):
        out = os.path.join(files["dir"], f"{kind}.json")
        argv = ["build", kind, "--out", out] + ([flag, files[name]] if flag else [])
        code, rep, _ = call(*argv)
        assert code == 0
        again = tuple_from_json(load_json(out))
        inline = tuple_from_json(rep["results"]["tuple"])
        for a, b in zip(again, inline):
            assert np.array_equal(a, b)

    def test_emit_roundtrip_bit_identical(self, files):
        out = os.path.join(files["dir"], "emit.json")
        assert call("crabb-davie", "--emit", out)[0] == 0
        for a, b in zip(tuple_from_json(load_json(out)), build_crabb_davie().tuple):
            assert np.array_equal(a, b)

    def test_irrational_entries_roundtrip(self, files, rng):
        m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        path = os.path.join(files["dir"], "m.json")
        dump_json(tuple_to_json(OperatorTuple((m,))), path)
        assert np.array_equal(tuple_from_json(load_json(path))[0], m)

    def test_report_reparses(self, files):
        out = io.StringIO()
        run(["varopoulos", "--vectors", files["det_zero.json"]], stdout=out, stderr=io.StringIO())
        text = out.getvalue()
        assert json.dumps(json.loads(text), indent=2) + "\n" == text
