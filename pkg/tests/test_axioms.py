from __future__ import annotations

import itertools

import pytest

from fvkit.axioms import (
    THEORIES,
    Axiom,
    AxiomCorpusEntry,
    TheoryError,
    all_theories,
    emit_theory,
    evaluate_theory,
    monic_root_axiom,
    scheme_G,
    trivial_valuation,
)
from fvkit.semantics.builtins import dual_numbers, gf, with_derivation, with_projector, zmod
from fvkit.semantics.evaluate import EvaluationError, eval_formula
from fvkit.semantics.structure import FiniteStructure, expand
from fvkit.syntax.ast import free_vars
from fvkit.syntax.signatures import RING, VALUED_RING, VALUED_RING_DELTA
from fvkit.syntax.text import parse_formula, print_formula
from fvkit.vnr import FiniteRing, enumerate_derivations

from oracle import TableView, holds


def verdicts(entry, A) -> dict[str, str]:
    return {v["label"]: v["verdict"] for v in evaluate_theory(entry, A)["verdicts"]}


# ------------------------------------------------------------ corpus shape


@pytest.mark.parametrize("name", list(THEORIES))
def test_theory_roundtrips_and_manifest(name):
    entry = emit_theory(name)
    assert entry.theory == name and entry.axioms
    for a in entry.axioms:
        text = print_formula(a.formula)
        assert parse_formula(text, entry.signature) == a.formula
        if a.kind == "axiom":
            assert free_vars(a.formula) == ()
    m = entry.manifest()
    assert m["signature"] == entry.signature.name
    assert [x["file"] for x in m["axioms"]] == [f"{a.label}.fml" for a in entry.axioms]
    assert len({x["label"] for x in m["axioms"]}) == len(entry.axioms)


def test_parameters_change_the_corpus():
    assert len(emit_theory("char0", n=3).axioms) == 3
    assert len(emit_theory("T_reg", n=7).axioms) == len(emit_theory("T_reg", n=5).axioms) + 1
    assert emit_theory("G", n=2, sigma="(= x2 x0)").params == {"n": 2, "sigma": "(= x2 x0)"}
    assert [e.theory for e in all_theories()] == list(THEORIES)


def test_theory_errors():
    with pytest.raises(TheoryError, match="unknown theory"):
        emit_theory("nope")
    with pytest.raises(TheoryError):
        emit_theory("char0", n=0)
    with pytest.raises(TheoryError):
        emit_theory("ell_n", n=1)
    with pytest.raises(TheoryError):
        emit_theory("T_reg_v_p", p=1)
    with pytest.raises(TheoryError, match="unexpected free"):
        scheme_G(parse_formula("(= x3 x0)", VALUED_RING_DELTA), 1)
    f = parse_formula("(= x 0)", RING)
    with pytest.raises(TheoryError, match="duplicate"):
        AxiomCorpusEntry("t", RING, (Axiom("a", f, kind="definition"), Axiom("a", f, kind="definition")))
    with pytest.raises(TheoryError, match="not a sentence"):
        AxiomCorpusEntry("t", RING, (Axiom("a", f),))


# ------------------------------------------------------------ verdicts


@pytest.mark.parametrize("n", range(1, 13))
def test_ring_and_regularity_verdicts_on_zmod(n):
    A = zmod(n)
    v = verdicts(emit_theory("vnr"), A)
    assert all(v[k] == "pass" for k in v if k.startswith("ring_"))
    squarefree = all(n % (p * p) for p in range(2, n + 1))
    assert v["vnr"] == ("pass" if squarefree else "fail")


def test_ring_axioms_catch_a_broken_multiplication():
    F = zmod(3)
    tables = dict(F.functions)
    tables["*"] = tuple((a - b) % 3 for a in range(3) for b in range(3))
    bad = FiniteStructure(RING, 3, tables, F.constants, name="bad")
    v = verdicts(emit_theory("ring"), bad)
    assert v["ring_mul_comm"] == "fail" and v["ring_add_comm"] == "pass"


def test_no_minimal_idempotent_fails_on_finite_rings():
    entry = emit_theory("no_minimal_idempotent")
    assert verdicts(entry, zmod(1)) == {"no_minimal_idempotent": "pass"}
    for A in (zmod(6), gf(4), dual_numbers(2)):
        assert verdicts(entry, A) == {"no_minimal_idempotent": "fail"}


@pytest.mark.parametrize("q", [2, 3, 5, 7])
def test_char0_instances_follow_divisibility(q):
    v = verdicts(emit_theory("char0", n=7), gf(q))
    assert v == {f"char0_{k}": ("fail" if k % q == 0 else "pass") for k in range(1, 8)}


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_monic_roots_match_oracle(q):
    F = gf(q)
    for d in (1, 2, 3):
        ax = monic_root_axiom(d, f"root_{d}")
        assert eval_formula(F, ax.formula) == holds(TableView(F), ax.formula, {})
    assert eval_formula(F, monic_root_axiom(1, "r").formula)
    assert not eval_formula(F, monic_root_axiom(2, "r").formula)  # finite fields are not closed


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_projector_definition_holds_in_fields(q):
    assert verdicts(emit_theory("projector_def"), with_projector(gf(q))) == {"B": "pass"}


def test_derivation_axioms_agree_with_enumeration():
    R = dual_numbers(2)
    entry = emit_theory("A")
    found = []
    for table in itertools.product(range(4), repeat=4):
        v = verdicts(entry, with_derivation(R, table))
        if v["d_additive"] == v["d_leibniz"] == "pass":
            found.append(table)
    assert found == enumerate_derivations(FiniteRing(R))


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7])
def test_trivial_valuation_models_T_v(q):
    r = evaluate_theory(emit_theory("T_v"), trivial_valuation(gf(q)))
    assert {v["verdict"] for v in r["verdicts"]} == {"pass"}
    assert r["dagger_violations"] == []


def test_broken_valuation_is_detected():
    K = trivial_valuation(gf(3))
    broken = expand(K, VALUED_RING, relations={"div": [(0, 1)], "Div": K.relations["Div"]})
    r = evaluate_theory(emit_theory("T_v"), broken)
    failed = {v["label"] for v in r["verdicts"] if v["verdict"] == "fail"}
    assert "Tv_1" in failed and "dagger_div" in failed
    assert r["dagger_violations"]


def test_chi_entries_are_definitions_and_signatures_are_checked():
    entry = emit_theory("chi")
    assert {a.kind for a in entry.axioms} == {"definition"}
    with pytest.raises(EvaluationError):
        evaluate_theory(entry, gf(2))
    with pytest.raises(EvaluationError):
        evaluate_theory(emit_theory("T_v"), gf(2))

