from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fvkit.fv import (
    CompileError,
    DeterminingSequence,
    Partition,
    ba_from_sexpr,
    ba_to_sexpr,
    burris_check,
    burris_decompose,
    eval_ba,
    fv_compile,
    fv_eval,
    fv_truth_sets,
    fv_verify,
    pair_claim_check,
    pair_decompose,
    quantified_agreement,
    set_partitions,
)
from fvkit.pairs import pair_corpus
from fvkit.product import BooleanProduct, ProductError
from fvkit.semantics.builtins import gf, zmod
from fvkit.syntax.ast import And, Eq, Exists, Not, Var, free_vars
from fvkit.syntax.signatures import RING, RING_PAIR
from fvkit.syntax.text import parse_formula, print_formula

from oracle import ProductView, TableView, holds
from strategies import atoms, formulas

PRODUCTS = [(2,), (2, 3), (3, 2), (2, 2, 2), (4, 2)]


def product_of(sizes):
    return BooleanProduct(tuple(gf(q) for q in sizes))


# ------------------------------------------------------------ compilation


def test_atomic_formula_sequence():
    f = parse_formula("(= (* x y) 1)", RING)
    ds = fv_compile(f)
    assert ds.psis == (f,)
    assert ds.phi_star == Eq(Var("z1"), parse_formula("(= 1 1)", RING).right)
    assert ds.variables == ("x", "y")


def test_negation_and_conjunction_share_factor_formulas():
    f = parse_formula("(and (= x 0) (not (= x 0)) (= x 1))", RING)
    ds = fv_compile(f)
    assert ds.length == 2
    assert fv_compile(f, dedup=False).length == 3


def test_existential_introduces_partition():
    ds = fv_compile(parse_formula("(exists y (= (* x y) 1))", RING))
    assert isinstance(ds.phi_star, Partition)
    assert ds.length == 2
    assert all(isinstance(p, Exists) for p in ds.psis)


def test_cap_is_enforced():
    f = parse_formula("(exists y (exists z (and (= x y) (= y z) (= x z))))", RING)
    with pytest.raises(CompileError):
        fv_compile(f, cap=12)
    assert fv_compile(f, cap=256).length <= 256


def test_json_roundtrip():
    f = parse_formula("(forall y (or (= (* x y) 0) (= y 1)))", RING)
    ds = fv_compile(f)
    again = DeterminingSequence.from_json(ds.to_json(), RING)
    assert again == ds
    assert ba_from_sexpr(ba_to_sexpr(ds.phi_star)) == ds.phi_star


def test_sequence_validation():
    with pytest.raises(CompileError):
        DeterminingSequence(Eq(Var("z2"), Var("z2")), (parse_formula("(= x 0)", RING),), ("x",))
    with pytest.raises(CompileError):
        DeterminingSequence(Eq(Var("z1"), Var("z1")), (parse_formula("(= x 0)", RING),), ())


# ------------------------------------------------------------ BA evaluation


def test_partition_selector_semantics():
    # two blocks bounded by z1 and its complement's superset: a labelling exists
    sel = ba_from_sexpr(
        ["partition", [["b1", "z1"], ["b2", "1"]], ["=", "b1", "z1"]]
    )
    assert eval_ba(sel, {"z1": 0b011}, 3)
    # every point must be covered by some bound
    sel = ba_from_sexpr(["partition", [["b1", "z1"]], ["=", "b1", "b1"]])
    assert not eval_ba(sel, {"z1": 0b01}, 2)
    assert eval_ba(sel, {"z1": 0b11}, 2)


@pytest.mark.parametrize(
    "text", ["(exists y (= (* x y) 1))", "(forall y (or (= y 0) (= (* y y) y)))", "(and (= x 0) (exists y (= y x)))"]
)
def test_selector_agrees_with_quantified_form(text):
    ds = fv_compile(parse_formula(text, RING))
    for points in (1, 2):
        assert quantified_agreement(ds, points) == []


# ------------------------------------------------------------ transfer


@settings(max_examples=80, deadline=None)
@given(formulas(quantifier_depth=2, size=1), st.sampled_from(PRODUCTS))
def test_transfer_matches_direct_oracle(f, sizes):
    try:
        ds = fv_compile(f, cap=16)
    except CompileError:
        return
    A = product_of(sizes)
    V = ProductView(A.factors)
    names = ds.variables
    for tup in itertools.product(A.elements, repeat=len(names)):
        env = dict(zip(names, tup))
        assert fv_eval(A, ds, env) == holds(V, f, env)


@settings(max_examples=40, deadline=None)
@given(formulas(quantifier_depth=2, size=1), st.sampled_from(PRODUCTS))
def test_verify_finds_no_disagreement(f, sizes):
    try:
        ds = fv_compile(f, cap=16)
    except CompileError:
        return
    A = product_of(sizes)
    r = fv_verify(A, f, ds=ds)
    assert r["status"] == "pass"
    assert r["assignments_checked"] == len(A.elements) ** len(ds.variables)


def test_truth_sets_are_bitmasks_over_factors():
    A = product_of((2, 3))
    ds = fv_compile(parse_formula("(= x 0)", RING))
    assert fv_truth_sets(A, ds, [(0, 1)]) == [0b01]
    assert fv_truth_sets(A, ds, {"x": (1, 0)}) == [0b10]
    with pytest.raises(ProductError):
        fv_truth_sets(A, ds, [])


def test_verify_detects_a_wrong_sequence():
    A = product_of((2, 3))
    f = parse_formula("(= x 0)", RING)
    wrong = DeterminingSequence(Not(Eq(Var("z1"), parse_formula("(= 1 1)", RING).right)), (f,), ("x",))
    r = fv_verify(A, f, ds=wrong)
    assert r["status"] == "fail"
    assert len(r["witnesses"]) == 6  # every assignment flips


def test_verify_options_and_partial_carriers():
    A = product_of((2, 3))
    f = parse_formula("(exists y (= (* x y) 1))", RING)
    r = fv_verify(A, f, max_assignments=4, record=True)
    assert r["assignments_checked"] == 4 and len(r["verdicts"]) == 4
    assert r["verdicts"][0] == {"assignment": [[0, 0]], "direct": False, "transfer": False}
    D = BooleanProduct((gf(2), gf(2)), carrier={(0, 0), (1, 1)})
    with pytest.raises(ProductError):
        fv_verify(D, f)


def test_sentences_transfer():
    f = parse_formula("(forall y (= (* y y) y))", RING)
    assert fv_verify(product_of((2, 2, 2)), f)["status"] == "pass"
    assert fv_eval(product_of((2, 2)), fv_compile(f), {}) is True
    assert fv_eval(product_of((2, 3)), fv_compile(f), {}) is False


# ------------------------------------------------------------ decompositions


def test_set_partitions_are_bell_many():
    bell = [1]
    for n in range(6):  # Bell recurrence as the oracle
        bell.append(sum(__import__("math").comb(n, k) * bell[k] for k in range(n + 1)))
    for n in range(6):
        parts = set_partitions(range(n))
        assert len(parts) == bell[n]
        assert len({tuple(sorted(map(tuple, p))) for p in parts}) == bell[n]


def test_burris_decomposition_shape():
    f = parse_formula("(exists u (and (= (* u u) u) (not (= u 0)) (not (= u 1))))", RING)
    dec = burris_decompose(f)
    assert print_formula(dec.base) == "(exists u (= (* u u) u))"
    assert [print_formula(p) for p in dec.parts] == [
        "(exists u (and (= (* u u) u) (not (= u 0))))",
        "(exists u (and (= (* u u) u) (not (= u 1))))",
    ]
    with pytest.raises(Exception):
        burris_decompose(parse_formula("(forall u (= u u))", RING))


def test_burris_converse_fails_in_f2():
    dec = burris_decompose(parse_formula("(exists u (and (not (= u 0)) (not (= u 1))))", RING))
    F2 = gf(2)
    M = TableView(F2)
    assert holds(M, dec.rhs, {}) and not holds(M, dec.formula, {})
    r = burris_check(dec, [F2, gf(3)])
    assert r["status"] == "pass"
    assert r["converse"] == {
        "status": "fails",
        "witnesses": [{"structure": "F2", "assignment": [], "lhs": False, "rhs": True}],
    }


def _existential(pool=("x", "y")):
    lit = st.one_of(atoms(pool), st.builds(Not, atoms(pool)))
    return st.builds(
        lambda v, items: Exists(v, And(tuple(items)) if len(items) > 1 else items[0]),
        st.sampled_from(pool),
        st.lists(lit, min_size=1, max_size=3),
    )


@settings(max_examples=60, deadline=None)
@given(_existential())
def test_burris_forward_implication(f):
    assert burris_check(burris_decompose(f), [gf(2), gf(3), zmod(4)])["status"] == "pass"


PAIR_CLAIMS = [
    "(exists u (and (P u) (= (* u u) x) (not (= u 0))))",
    "(exists u (exists w (and (P u) (= (+ u w) x) (not (= w 0)) (not (= u 1)))))",
    "(exists u (and (P (* u u)) (not (P u))))",
]


@pytest.mark.parametrize("text", PAIR_CLAIMS)
def test_pair_claim_forward(text):
    f = parse_formula(text, RING_PAIR)
    dec = pair_decompose(f)
    for A in pair_corpus()[:3]:
        r = pair_claim_check(dec, A)
        assert r["status"] == "pass", (text, A)
        assert r["partitions"] == len(set_partitions(range(len(dec.negatives))))


def test_pair_decompose_names_compound_predicate_arguments():
    dec = pair_decompose(parse_formula("(exists u (and (P (* u u)) (not (P u))))", RING_PAIR))
    assert dec.bound == ("u", "w")
    assert dec.p_bound == ("w",) and dec.free_bound == ("u",)
    assert print_formula(dec.rewritten) == "(exists u (exists w (and (P w) (= w (* u u)) (not (P u)))))"
    assert free_vars(dec.phi0) == ()
