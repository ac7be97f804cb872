from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from fvkit.cli import main
from fvkit.io import structure_to_text
from fvkit.semantics.builtins import gf

REPO = Path(__file__).resolve().parent.parent


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "f.fml").write_text("(sig ring)\n(exists y (= (* x y) 1))\n(= (* x x) x)\n")
    (tmp_path / "f4.str").write_text(structure_to_text(gf(4)))
    (tmp_path / "p.prod").write_text("(product (factors (builtin gf 2) (builtin gf 3)) (carrier full))")
    return tmp_path


def run_json(capsys, argv, code=0):
    assert main(argv) == code
    return json.loads(capsys.readouterr().out)


# ------------------------------------------------------------ single commands


def test_parse_prints_canonical_forms(workdir, capsys):
    assert main(["parse", "f.fml"]) == 0
    assert capsys.readouterr().out == "(exists y (= (* x y) 1))\n(= (* x x) x)\n"
    assert main(["parse", "f4.str"]) == 0
    assert capsys.readouterr().out == structure_to_text(gf(4))
    assert run_json(capsys, ["parse", "p.prod"]) == {"factors": ["F2", "F3"], "elements": 6, "full": True}


def test_eval_lists_satisfying_elements(workdir, capsys):
    out = run_json(capsys, ["eval", "f.fml", "--structure", "(builtin zmod 6)"])
    units, idem = out["results"]
    assert units["satisfying"] == [[1], [5]]
    assert idem["satisfying"] == [[0], [1], [3], [4]]
    out = run_json(capsys, ["eval", "f.fml", "--structure", "(builtin zmod 6)", "--assign", "x=5"])
    assert [r["value"] for r in out["results"]] == [True, False]


def test_product_checks(workdir, capsys):
    out = run_json(capsys, ["product", "p.prod", "--formulas", "f.fml", "--check", "gamma", "identities", "definability"])
    assert {k: r["status"] for k, r in out["reports"].items()} == {
        "gamma": "pass", "identities": "pass", "definability": "pass"}


def test_fv_commands(workdir, capsys):
    seqs = run_json(capsys, ["fv", "compile", "f.fml"])
    assert [s["formula"] for s in seqs] == ["(exists y (= (* x y) 1))", "(= (* x x) x)"]
    out = run_json(capsys, ["fv", "eval", "f.fml", "--product", "p.prod", "--assign", "x=1,2"])
    assert [(r["transfer"], r["direct"]) for r in out] == [(True, True), (False, False)]
    out = run_json(capsys, ["fv", "verify", "f.fml", "--product", "p.prod"])
    assert [r["status"] for r in out] == ["pass", "pass"]
    assert main(["fv", "eval", "f.fml", "--product", "p.prod"]) == 3


def test_ring_commands(workdir, capsys):
    out = run_json(capsys, ["ring", "decompose", "--structure", "(builtin zmod 6)"])
    assert sorted(out["stalk_sizes"]) == [2, 3] and out["status"] == "pass"
    derdir = workdir / "ders"
    out = run_json(capsys, ["ring", "derivations", "--structure", "(builtin dual 2)", "--derivation-dir", str(derdir)])
    assert out["count"] == 4 and len(list(derdir.glob("*.der"))) == 4
    good = sorted(derdir.glob("*.der"))[1]
    out = run_json(capsys, ["ring", "check", "--structure", "(builtin dual 2)", "--derivation", str(good)])
    assert out["derivation"]["status"] == "pass" and not out["vnr"]
    (workdir / "bad.der").write_text("(derivation (0 0) (1 1) (2 0) (3 1))")
    out = run_json(capsys, ["ring", "check", "--structure", "(builtin dual 2)", "--derivation", "bad.der"], code=1)
    assert out["derivation"]["status"] == "fail"
    assert main(["ring", "decompose", "--structure", "(builtin zmod 4)"]) == 3


def test_pair_check(workdir, capsys):
    (workdir / "f4p.str").write_text(
        structure_to_text(gf(4)).replace("(signature ring)", "(signature ring_pair)").rstrip()[:-1] + "\n  (rel P (0) (1)))\n"
    )
    out = run_json(capsys, ["pair", "check", "--structure", "f4p.str", "--formulas", "f.fml"])
    assert out["D2"]["witnesses"][0]["first"] == "x^2 + x + 1"
    assert out["p_part"]["P2"]["status"] == "pass" and out["relativization"]["status"] == "pass"
    assert main(["pair", "check"]) == 3


def test_axioms_emit_and_eval(workdir, capsys):
    out_dir = workdir / "tv"
    assert main(["axioms", "emit", "--theory", "T_v", "--out", str(out_dir)]) == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["theory"] == "T_v" and manifest["signature_file"] == "valued_ring.sig"
    for ax in manifest["axioms"]:
        assert main(["parse", str(out_dir / ax["file"])]) == 0
    capsys.readouterr()
    out = run_json(capsys, ["axioms", "eval", "--theory", "T_v", "--structure", "(builtin gf 3)", "--trivial-valuation"])
    assert {v["verdict"] for v in out["verdicts"]} == {"pass"}
    assert main(["axioms", "emit", "--theory", "T_v"]) == 3


def test_corpus_is_deterministic_and_counted(workdir, capsys):
    for name in ("a", "b"):
        assert main(["corpus", "--max-depth", "1", "--vars", "x,y", "--term-depth", "1", "--sample", "40",
                     "--seed", "7", "--out", name]) == 0
    assert (workdir / "a" / "corpus.fml").read_bytes() == (workdir / "b" / "corpus.fml").read_bytes()
    meta = json.loads((workdir / "a" / "corpus.json").read_text())
    assert meta["count"] == 40
    # depth 0, two variables, term depth 2: every atomic shape
    assert main(["corpus", "--max-depth", "0", "--vars", "x,y", "--kinds", "atom"]) == 0
    lines = capsys.readouterr().out.splitlines()
    m = 4
    assert len(lines) - 1 == m * m * sum((2 * m) ** i for i in range(3))
    full = json.loads((workdir / "a" / "corpus.json").read_text())["size"]
    atoms = m * m * (1 + 2 * m)
    assert full == (2 * atoms + 2 * atoms**2) * (1 + math.perm(2, 1) * 2)


# ------------------------------------------------------------ exit codes


def test_missing_and_malformed_inputs(workdir, capsys):
    assert main(["parse", "absent.str"]) == 2
    assert "file not found" in capsys.readouterr().err
    (workdir / "bad.fml").write_text("(sig ring)\n(= x\n")
    assert main(["parse", "bad.fml"]) == 3
    assert "bad.fml:2:1" in capsys.readouterr().err
    (workdir / "c.toml").write_text("[[suite]]\nkind = 'vnr'\nstructures = ['absent.str']\n")
    assert main(["run", "c.toml"]) == 2
    assert "file not found" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main(["ring", "check"])
    assert info.value.code == 3


# ------------------------------------------------------------ shipped suites


@pytest.mark.slow
def test_fv_core_suite_passes(monkeypatch, capsys, tmp_path):
    monkeypatch.chdir(REPO)
    out = tmp_path / "report.json"
    assert main(["run", "suites/fv_core.toml", "--no-timing", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    checks = [c for s in report["suites"] for c in s["checks"]]
    assert checks and all(c["witness_count"] == 0 for c in checks)
    assert "timing" not in report and len(report["digest"]) == 64


@pytest.mark.parametrize("name", ["projector", "vnr", "pairs", "burris", "axioms"])
def test_shipped_suites_pass(monkeypatch, tmp_path, name):
    monkeypatch.chdir(REPO)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", f"suites/{name}.toml", "--no-timing", "--out", str(a)]) == 0
    assert main(["run", f"suites/{name}.toml", "--no-timing", "--jobs", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_pairs_suite_lists_density_failures_as_report_only(monkeypatch, tmp_path):
    monkeypatch.chdir(REPO)
    out = tmp_path / "r.json"
    assert main(["run", "suites/pairs.toml", "--no-timing", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert {r["check"] for r in report["report_only"]} == {"dense_D2"}
