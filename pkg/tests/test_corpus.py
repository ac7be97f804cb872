from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fvkit.corpus import (
    ACCEPTANCE_SPEC,
    CorpusError,
    CorpusSpec,
    corpus_size,
    corpus_text,
    generate_corpus,
    sample_ranks,
)
from fvkit.syntax.ast import And, App, Const, Eq, Exists, Forall, Not, Or, Var
from fvkit.syntax.signatures import RING
from fvkit.syntax.text import parse_formula, print_formula


def closed_form_size(v: int, term_depth: int, max_depth: int, kinds=("atom", "not", "and", "or")) -> int:
    m = v + 2
    atoms = m * m * sum((2 * m) ** i for i in range(term_depth + 1))
    per_kind = {"atom": atoms, "not": atoms, "and": atoms**2, "or": atoms**2}
    prefixes = sum(math.perm(v, q) * 2**q for q in range(max_depth + 1))
    return sum(per_kind[k] for k in kinds) * prefixes


def naive_corpus(spec: CorpusSpec) -> set:
    """Enumerates the space by construction rather than by rank."""
    base = [Var(v) for v in spec.variables] + [Const("0"), Const("1")]
    terms, level = list(base), list(base)
    for _ in range(spec.term_depth):
        level = [App(op, (a, b)) for op in ("+", "*") for a in level for b in base]
        terms += level
    atoms = [Eq(t, s) for t in terms for s in base]
    matrices = []
    if "atom" in spec.kinds:
        matrices += atoms
    if "not" in spec.kinds:
        matrices += [Not(a) for a in atoms]
    if "and" in spec.kinds:
        matrices += [And((a, b)) for a in atoms for b in atoms]
    if "or" in spec.kinds:
        matrices += [Or((a, b)) for a in atoms for b in atoms]
    out = set(matrices)
    for q in range(1, spec.max_depth + 1):
        for names in itertools.permutations(spec.variables, q):
            for quants in itertools.product((Exists, Forall), repeat=q):
                for f in matrices:
                    for quant, var in reversed(list(zip(quants, names))):
                        f = quant(var, f)
                    out.add(f)
    return out


SMALL_SPECS = [
    CorpusSpec(max_depth=1, variables=("x",), term_depth=0),
    CorpusSpec(max_depth=2, variables=("x", "y"), term_depth=0, kinds=("atom", "not")),
    CorpusSpec(max_depth=1, variables=("x",), term_depth=1, kinds=("atom", "or")),
    CorpusSpec(max_depth=0, variables=("x",), term_depth=2, kinds=("atom", "not")),
]


@pytest.mark.parametrize("spec", SMALL_SPECS, ids=lambda s: f"d{s.max_depth}v{len(s.variables)}t{s.term_depth}")
def test_ranking_is_a_bijection_onto_the_space(spec):
    listed = list(spec)
    assert len(listed) == spec.size == corpus_size(spec)
    assert len(set(listed)) == spec.size
    assert set(listed) == naive_corpus(spec)
    assert spec.size == closed_form_size(len(spec.variables), spec.term_depth, spec.max_depth, spec.kinds)


def test_acceptance_space_size():
    assert ACCEPTANCE_SPEC.size == closed_form_size(3, 2, 2) == 477_610_800


@given(st.integers(0, ACCEPTANCE_SPEC.size - 1))
def test_ranked_formulas_are_well_formed(rank):
    f = ACCEPTANCE_SPEC.formula_at(rank)
    assert parse_formula(print_formula(f), RING) == f


def test_ranks_outside_the_space_are_rejected():
    with pytest.raises(CorpusError):
        ACCEPTANCE_SPEC.formula_at(ACCEPTANCE_SPEC.size)
    with pytest.raises(CorpusError):
        ACCEPTANCE_SPEC.formula_at(-1)


def test_first_and_last_formulas():
    assert print_formula(ACCEPTANCE_SPEC.formula_at(0)) == "(= x x)"
    last = ACCEPTANCE_SPEC.formula_at(ACCEPTANCE_SPEC.size - 1)
    assert isinstance(last, Forall) and isinstance(last.body, Forall) and isinstance(last.body.body, Or)


def test_sampling_is_seeded_sorted_and_distinct():
    a = sample_ranks(ACCEPTANCE_SPEC, 50, seed=3)
    assert a == sample_ranks(ACCEPTANCE_SPEC, 50, seed=3)
    assert a != sample_ranks(ACCEPTANCE_SPEC, 50, seed=4)
    assert a == sorted(set(a)) and len(a) == 50
    spec = SMALL_SPECS[0]
    assert sample_ranks(spec, None) == list(range(spec.size))
    assert sample_ranks(spec, spec.size + 5) == list(range(spec.size))
    with pytest.raises(CorpusError):
        sample_ranks(ACCEPTANCE_SPEC, -1)
    assert generate_corpus(ACCEPTANCE_SPEC, 5, seed=1) == [ACCEPTANCE_SPEC.formula_at(r) for r in sample_ranks(ACCEPTANCE_SPEC, 5, 1)]


def test_corpus_text_parses_back():
    fs = generate_corpus(ACCEPTANCE_SPEC, 20, seed=0)
    lines = corpus_text(fs).splitlines()
    assert lines[0] == "(sig ring)"
    assert [parse_formula(t, RING) for t in lines[1:]] == fs


@pytest.mark.parametrize(
    "kwargs",
    [
        {"max_depth": -1},
        {"variables": ()},
        {"variables": ("x", "x")},
        {"max_depth": 4},
        {"kinds": ("implies",)},
        {"kinds": ()},
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(CorpusError):
        CorpusSpec(**kwargs)


def test_kinds_are_canonically_ordered():
    assert CorpusSpec(kinds=("or", "atom")).kinds == ("atom", "or")
    assert CorpusSpec().to_json() == {"max_depth": 2, "variables": ["x", "y", "z"], "term_depth": 2,
                                      "kinds": ["atom", "not", "and", "or"]}
