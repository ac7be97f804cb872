"""Hypothesis strategies for ring-signature terms and formulas."""
from __future__ import annotations

from hypothesis import strategies as st

from fvkit.syntax.ast import And, App, Const, Eq, Exists, Forall, Imp, Not, Or, Var

POOL = ("x", "y", "z")


def terms(pool=POOL, depth: int = 2):
    leaves = st.one_of(st.sampled_from([Var(v) for v in pool]), st.sampled_from([Const("0"), Const("1")]))
    if depth == 0:
        return leaves
    sub = terms(pool, depth - 1)
    binary = st.builds(lambda op, a, b: App(op, (a, b)), st.sampled_from(["+", "-", "*"]), sub, sub)
    unary = st.builds(lambda a: App("neg", (a,)), sub)
    return st.one_of(leaves, binary, unary)


def atoms(pool=POOL, term_depth: int = 1):
    t = terms(pool, term_depth)
    return st.builds(Eq, t, t)


def formulas(pool=POOL, quantifier_depth: int = 2, size: int = 2, term_depth: int = 1):
    """Formulas with at most ``quantifier_depth`` nested quantifiers and
    ``size`` levels of connectives between them."""

    def build(q: int, s: int):
        base = atoms(pool, term_depth)
        options = [base]
        if s > 0:
            sub = build(q, s - 1)
            options += [
                st.builds(Not, sub),
                st.builds(lambda a, b: And((a, b)), sub, sub),
                st.builds(lambda a, b: Or((a, b)), sub, sub),
                st.builds(Imp, sub, sub),
            ]
        if q > 0:
            inner = build(q - 1, s)
            options += [
                st.builds(Exists, st.sampled_from(pool), inner),
                st.builds(Forall, st.sampled_from(pool), inner),
            ]
        return st.one_of(*options)

    return build(quantifier_depth, size)
