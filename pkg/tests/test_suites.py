from __future__ import annotations

import json

import pytest

from fvkit.io import LoadError, MissingFileError
from fvkit.suites import (
    ConfigError,
    Overrides,
    dumps_report,
    exit_status,
    iter_failures,
    record,
    report_digest,
    run_suite,
)

CONFIG = """
name = "small"

[[suite]]
name = "transfer"
kind = "fv-verify"
fields = ["(builtin gf 2)", "(builtin gf 3)"]
max_factors = 2
formula_texts = ["(exists y (= (* x y) 1))", "(forall y (= (* y y) y))"]
corpus = { sample = 3, seed = 1, max_depth = 1, term_depth = 1 }

[[suite]]
name = "projector"
kind = "projector"
fields = ["(builtin gf 2)", "(builtin gf 3)"]
max_factors = 2
formula_texts = ["(exists y (= (* x y) 1))"]

[[suite]]
name = "regular"
kind = "vnr"
structures = ["z6.str", "(builtin zmod 4)"]
derivations = [{ structure = "(builtin dual 2)", table = "d.der" }]

[[suite]]
name = "burris"
kind = "burris"
structures = ["(builtin gf 2)", "(builtin gf 3)"]
formula_texts = ["(exists u (and (not (= u 0)) (not (= u 1))))"]

[[suite]]
name = "theories"
kind = "axioms"
theories = [{ name = "T_v" }, { name = "char0", n = 2 }]
evaluate = [
  { theory = "T_v", structure = "(builtin gf 3)", valuation = "trivial", expect = "pass" },
  { theory = "vnr", structure = "(builtin zmod 4)" },
]
"""


@pytest.fixture
def config(tmp_path):
    (tmp_path / "z6.str").write_text("(builtin zmod 6)\n")
    (tmp_path / "d.der").write_text("(derivation (0 0) (1 0) (2 1) (3 1))\n")
    p = tmp_path / "suite.toml"
    p.write_text(CONFIG)
    return p


def checks(report, suite):
    return next(s for s in report["suites"] if s["name"] == suite)["checks"]


def test_report_structure_and_status(config):
    report = run_suite(config)
    assert report["suite"] == "small"
    assert [s["name"] for s in report["suites"]] == ["transfer", "projector", "regular", "burris", "theories"]
    assert report["status"] == "pass" and exit_status(report) == 0
    assert list(iter_failures(report)) == []
    assert set(report["inputs"]) == {"z6.str", "d.der"}
    transfer = checks(report, "transfer")
    assert len(transfer) == 5 and all(c["check"] == "fv_verify" for c in transfer)
    # products of one or two factors from {F2, F3}: 2 + 3 of them
    assert transfer[0]["assignments_checked"] == 2 + 3 + 4 + 6 + 9


def test_report_only_checks_never_fail_a_run(config):
    report = run_suite(config)
    only = {(r["suite"], r["check"]) for r in report["report_only"]}
    assert ("burris", "burris_converse") in only
    assert ("regular", "vnr") in only
    assert ("regular", "differential_maximal_ideals") in only
    assert ("theories", "theory_evaluation") in only


def test_digest_ignores_timing_and_jobs(config):
    a = run_suite(config)
    b = run_suite(config, jobs=2)
    assert b["timing"]["jobs"] == 2
    assert report_digest(a) == report_digest(b)
    assert json.loads(dumps_report(a))["status"] == "pass"


def test_overrides_change_the_corpus(config):
    a = run_suite(config, Overrides(seed=5))
    b = run_suite(config)
    assert a["overrides"] == {"seed": 5, "max_witnesses": 20}
    assert report_digest(a) != report_digest(b)


def test_assertive_failure_sets_exit_status(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text(
        '[[suite]]\nkind = "axioms"\ntheories = [{ name = "vnr" }]\n'
        'evaluate = [{ theory = "vnr", structure = "(builtin zmod 4)", expect = "pass" }]\n'
    )
    report = run_suite(p)
    assert report["status"] == "fail" and exit_status(report) == 1
    failures = list(iter_failures(report))
    assert [f["check"] for f in failures] == ["theory_evaluation"]
    assert failures[0]["witnesses"] == [{"label": "vnr", "verdict": "fail"}]


def test_witnesses_are_truncated_but_counted():
    r = record("c", {}, {"witnesses": list(range(30))}, max_witnesses=20)
    assert r["witness_count"] == 30 and len(r["witnesses"]) == 20 and r["status"] == "fail"


@pytest.mark.parametrize(
    "text, error",
    [
        ("name = 'x'\n", ConfigError),
        ("[[suite]]\nkind = 'nonsense'\n", ConfigError),
        ("[[suite\n", LoadError),
        ("[[suite]]\nkind = 'vnr'\nstructures = ['absent.str']\n", MissingFileError),
    ],
)
def test_bad_configurations(tmp_path, text, error):
    p = tmp_path / "c.toml"
    p.write_text(text)
    with pytest.raises(error):
        run_suite(p)


def test_missing_configuration(tmp_path):
    with pytest.raises(MissingFileError):
        run_suite(tmp_path / "none.toml")
