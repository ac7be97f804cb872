from __future__ import annotations

import itertools

import pytest

from fvkit.pairs import (
    PairError,
    PairStructure,
    dense_pair_check,
    fiber_substructures,
    make_pair,
    p_part,
    pair_corpus,
    pair_product,
    prime_subfield_pair,
    relativization_check,
    root_closure_failures,
    splice_check,
    subdirect_failures,
)
from fvkit.product import BooleanProduct, ProductError
from fvkit.semantics.builtins import gf, zmod
from fvkit.semantics.structure import expand
from fvkit.syntax.signatures import RING, RING_PAIR
from fvkit.syntax.text import parse_formula


def evaluate_poly(F, coeffs, r):
    acc = F.const("0")
    for c in reversed(coeffs):
        acc = F.apply("+", F.apply("*", acc, r), c)
    return acc


def root_closure_oracle(K, sub, d_max):
    zero = K.const("0")
    out = []
    for deg in range(1, d_max + 1):
        for coeffs in itertools.product(sub, repeat=deg + 1):
            if coeffs[-1] == zero:
                continue
            roots = {r for r in K.universe if evaluate_poly(K, coeffs, r) == zero}
            if roots and not roots & set(sub):
                out.append((deg, coeffs))
    return sorted(out, key=lambda t: (t[0], t[1][:-1], t[1][-1]))


# ------------------------------------------------------------ pair structures


def test_prime_subfield_pairs():
    for q, p in ((4, 2), (8, 2), (9, 3)):
        pair = prime_subfield_pair(gf(q))
        assert len(pair.sub_elements) == p
        assert pair.sub.size == p and pair.base.sig == RING
        assert [pair.embedding[i] for i in range(p)] == list(pair.sub_elements)
    with pytest.raises(PairError, match="proper"):
        prime_subfield_pair(gf(5))
    assert prime_subfield_pair(gf(5), allow_improper=True).sub.size == 5


def test_pair_validation():
    F4 = gf(4)
    with pytest.raises(PairError, match="substructure"):
        make_pair(F4, [0, 1, 2])
    with pytest.raises(PairError, match="empty"):
        PairStructure(expand(F4, RING_PAIR, relations={"P": []}))
    with pytest.raises(PairError):
        make_pair(make_pair(F4, [0, 1]).ambient, [0, 1])
    with pytest.raises(PairError, match="unary"):
        PairStructure(F4)


# ------------------------------------------------------------ predicate parts


@pytest.mark.parametrize("A", pair_corpus(), ids=lambda A: " x ".join(F.name for F in A.factors))
def test_p_part_is_the_product_of_fibers(A):
    part = p_part(A, corpus=[parse_formula("(= x y)", RING)])
    inside = {e for e in A.elements if all((c,) in F.relations["P"] for c, F in zip(e, A.factors))}
    assert {part.to_ambient(e) for e in part.product.elements} == inside
    assert part.gamma["status"] == "pass"
    assert splice_check(A) == []


def test_p_part_needs_a_full_product():
    pair = prime_subfield_pair(gf(4))
    D = pair_product([pair, pair], carrier={(a, a) for a in range(4)})
    with pytest.raises(ProductError):
        p_part(D)


def test_relativization_agrees_on_the_predicate_part():
    corpus = [
        parse_formula(t, RING)
        for t in ("(exists y (= (* y y) x))", "(forall y (or (= y 0) (exists z (= (* y z) 1))))", "(= (+ x x) 0)")
    ]
    for A in pair_corpus()[:3]:
        r = relativization_check(A, corpus)
        assert r["status"] == "pass" and r["tuples_checked"] > 0


# ------------------------------------------------------------ fibers


def test_fibers_of_the_diagonal():
    A = BooleanProduct((gf(2), gf(4)))
    D = {(0, 0), (1, 1)}
    fib = fiber_substructures(A, D)
    assert [F.size for F in fib.fibers] == [2, 2]
    assert not fib.is_box
    assert fib.local((1, 1)) == (1, 1)
    assert subdirect_failures(A, D, [{0, 1}, {0, 1, 2, 3}]) == [
        {"coordinate": 1, "element": 2},
        {"coordinate": 1, "element": 3},
    ]
    with pytest.raises(ProductError, match="closed"):
        fiber_substructures(A, {(0, 0), (1, 1), (1, 2)})
    with pytest.raises(ProductError):
        fiber_substructures(A, set())


# ------------------------------------------------------------ density


@pytest.mark.parametrize("q, d_max", [(4, 2), (4, 3), (8, 3), (9, 2)])
def test_root_closure_matches_oracle(q, d_max):
    pair = prime_subfield_pair(gf(q))
    got = [(w["degree"], tuple(w["coefficients"])) for w in root_closure_failures(pair, d_max)]
    assert got == root_closure_oracle(pair.base, pair.sub_elements, d_max)


def test_dense_pair_conditions_on_f4_over_f2():
    A = pair_product([prime_subfield_pair(gf(4))])
    r = dense_pair_check(A, d_max=2)
    assert r["D2"]["status"] == "fail"
    assert r["D2"]["witnesses"][0]["first"] == "x^2 + x + 1"
    assert r["D2"]["witnesses"][0]["count"] == 1
    assert r["D3"]["status"] == "pass"
    # one index point: both generated algebras are {empty, {0}}
    assert r["D1"]["equal"] and r["D1"]["atoms"] == {"predicate_side": 1, "ambient": 1}
    assert r["D4"]["status"] == "pass"


def test_dense_pair_ball_condition():
    A = pair_product([prime_subfield_pair(gf(4))])
    chi = parse_formula("(= x y)", RING)
    r = dense_pair_check(A, chi=chi)
    # singleton balls {b}: only the two predicate elements are hit
    assert r["D3"]["status"] == "fail"
    assert sorted(w["parameters"] for w in r["D3"]["witnesses"]) == [[2], [3]]
    with pytest.raises(PairError):
        dense_pair_check(A, chi=parse_formula("(= 0 1)", RING))


def test_dense_pair_needs_full_product():
    pair = make_pair(zmod(4), range(4), allow_improper=True)
    D = pair_product([pair, pair], carrier={(a, a) for a in range(4)})
    with pytest.raises(ProductError):
        dense_pair_check(D)
