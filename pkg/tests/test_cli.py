import json

import pytest

from vplab.cli import main

CHAIN = """domain: 0, 1, 2
U: 0
R: (0,1), (1,2)
I: c -> 0
"""
LONGER = """domain: 0, 1, 2, 3
U: 0
R: (0,1), (1,2), (2,3)
I: c -> 0
"""


@pytest.fixture
def files(tmp_path):
    a, b = tmp_path / "a.struct", tmp_path / "b.struct"
    a.write_text(CHAIN)
    b.write_text(LONGER)
    return str(a), str(b)


def run_json(capsys, *argv):
    code = main([*argv, "--json"])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_eval(files, capsys):
    code, rep = run_json(capsys, "eval", *files, "--formula", "E v0. (R(c:c, v0) & !U(v0))")
    assert code == 0
    assert rep["schema"] and rep["provenance"] and rep["kind"] == "eval"
    assert [r["holds"] for r in rep["results"]] == [True, True]


def test_eval_reports_divergence(tmp_path, capsys):
    p = tmp_path / "s.struct"
    p.write_text("domain: 0\nI: a -> 0, b -> 0\n")
    code, rep = run_json(capsys, "eval", str(p), "--formula", "c:a = c:b")
    assert code == 0
    (row,) = rep["results"]
    assert row["holds"] and not row["bottom_up"] and row["diverges"]


def test_eval_formula_file_and_env(files, tmp_path, capsys):
    f = tmp_path / "phi.txt"
    f.write_text("R(v0, v1)\n")
    code, rep = run_json(capsys, "eval", files[0], "--formula-file", str(f), "--env", "v0=0, v1=1")
    assert code == 0 and rep["results"][0]["holds"]


def test_embed(files, capsys):
    code, rep = run_json(capsys, "embed", *files, "--kind", "hom")
    assert code == 0 and rep["counts"]["morphisms"] >= 1
    assert all(r["verified"] for r in rep["results"])


def test_rigid(capsys):
    code, rep = run_json(capsys, "rigid", "--n", "4")
    assert code == 0 and rep["results"]["verified"]


def test_vp_family_is_deterministic(capsys):
    argv = ("vp-family", "--family", "nat", "--nmax", "4", "--mode", "k-elementary", "--seed", "3")
    _, r1 = run_json(capsys, *argv)
    _, r2 = run_json(capsys, *argv, "--workers", "3")
    for r in (r1, r2):
        r.pop("wall_time")
        r["config"].pop("workers")
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)
    assert r1["results"]["witnesses"] == "none"


def test_vp_family_replacement(capsys):
    code, rep = run_json(capsys, "vp-family", "--family", "replacement", "--A", "n:2",
                         "--F", "n:0 -> n:5, n:1 -> n:6")
    assert code == 0 and rep["results"]["unflatten_depth"] is not None


def test_twist(capsys):
    code, rep = run_json(capsys, "twist", "--seeds", "n:1", "--perm", "({}, n:1)")
    assert code == 0
    assert rep["results"]["foundation_witness"]["z"] == "{}"


def test_fm_carries_truncation(capsys, tmp_path):
    spec = tmp_path / "p.spec"
    spec.write_text("indices: i, j\norder: i<=j\nN: 3\ns: 1\n")
    code, rep = run_json(capsys, "fm", "--spec", str(spec))
    assert code == 0
    assert rep["truncation"] == {"N": 3, "s": 1}
    assert rep["results"]["realization"]["agrees"]


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 2, "mode": "search"}))
    _, rep = run_json(capsys, "rigid", "--config", str(cfg), "--n", "3")
    assert rep["results"]["n"] == 3 and rep["results"]["mode"] == "search"


@pytest.mark.parametrize("argv", [
    ["embed"],
    ["eval", "missing.struct", "--formula", "U(v0)"],
    ["rigid", "--n", "0"],
    ["fm", "--indices", "i", "--N", "2", "--s", "2"],
    ["twist", "--perm", "({}, n:1"],
    ["rigid", "--workers", "0"],
])
def test_validation_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "invalid input" in capsys.readouterr().err


def test_bad_config_key_exits_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["rigid", "--config", str(cfg)]) == 2


def test_guard_exits_3(capsys):
    assert main(["rigid", "--n", "8", "--mode", "search", "--guard", "5"]) == 3
    assert "guard" in capsys.readouterr().err


def test_selftest_subset(capsys):
    assert main(["selftest", "--only", "2,6"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 2


def test_selftest_detects_fault(capsys):
    assert main(["selftest", "--only", "1", "--inject-fault", "negation"]) == 1
    assert "[FAIL]" in capsys.readouterr().out


def test_selftest_guard_skips(capsys):
    code, rep = run_json(capsys, "selftest", "--only", "1,6", "--guard", "10")
    assert code == 0 and rep["counts"]["skipped"] == [1]
