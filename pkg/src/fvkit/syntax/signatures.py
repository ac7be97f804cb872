"""Built-in signatures and small term-building helpers.

Symbol conventions: ``+ - *`` binary, ``neg`` unary minus, constants ``0 1``;
``p`` is the projector, ``d`` the derivation, ``P`` the pair predicate,
``inf`` the lattice meet, ``div``/``Div`` the valuation relations.
"""
from __future__ import annotations

import itertools
from functools import reduce
from typing import Sequence

from .ast import (
    And,
    App,
    Const,
    DaggerAxiom,
    Eq,
    Exists,
    Not,
    Rel,
    Signature,
    Term,
    Var,
    conj,
    disj,
    exists_many,
)

ZERO = Const("0")
ONE = Const("1")


def add(a: Term, b: Term) -> Term:
    return App("+", (a, b))


def sub(a: Term, b: Term) -> Term:
    return App("-", (a, b))


def mul(a: Term, b: Term) -> Term:
    return App("*", (a, b))


def neg(a: Term) -> Term:
    return App("neg", (a,))


def v(name: str) -> Var:
    return Var(name)


def total(terms: Sequence[Term]) -> Term:
    return reduce(add, terms) if terms else ZERO


def product(terms: Sequence[Term]) -> Term:
    return reduce(mul, terms) if terms else ONE


def numeral(n: int) -> Term:
    """``1 + 1 + ... + 1`` (``n`` times); ``0`` for ``n == 0``."""
    if n < 0:
        return neg(numeral(-n))
    return total([ONE] * n)


def power(t: Term, k: int) -> Term:
    return product([t] * k)


def neq(a: Term, b: Term):
    return Not(Eq(a, b))


RING = Signature(
    "ring",
    functions=(("+", 2), ("-", 2), ("*", 2), ("neg", 1)),
    constants=("0", "1"),
)
RING_P = RING.extend("ring_p", functions=[("p", 2)])
RING_PAIR = RING.extend("ring_pair", relations=[("P", 1)])
RING_DELTA = RING.extend("ring_delta", functions=[("d", 1)])
RING_DELTA_P = RING_DELTA.extend("ring_delta_p", functions=[("p", 2)])
LATTICE_RING = RING.extend("lattice_ring", functions=[("inf", 2)])

BOOLEAN_ALGEBRA = Signature(
    "boolean_algebra",
    functions=(("meet", 2), ("join", 2), ("compl", 1)),
    constants=("0", "1"),
)


def _valuation_dagger() -> list[DaggerAxiom]:
    x, y = v("x"), v("y")
    return [
        DaggerAxiom("div", ("x", "y"), Rel("Div", (y, x))),
        DaggerAxiom("Div", ("x", "y"), Rel("div", (y, x))),
    ]


VALUED_RING = RING.extend(
    "valued_ring", relations=[("div", 2), ("Div", 2)], dagger=_valuation_dagger()
)
VALUED_RING_DELTA = VALUED_RING.extend("valued_ring_delta", functions=[("d", 1)])
RCVF_RING = VALUED_RING.extend("rcvf_ring", functions=[("inf", 2)])


def ell_name(n: int) -> str:
    return f"ell{n}"


def dtilde_name(n: int, k: int) -> str:
    return f"Dt{n}_{k}"


def lambda_name(n: int, i: int) -> str:
    return f"lam{n}_{i}"


def pn_name(n: int) -> str:
    return f"P{n}"


def linear_dependence(xs: Sequence[Term], coeff_names: Sequence[str]):
    """``exists z1..zn (OR zi != 0 & sum zi*xi = 0 & AND P(zi))``."""
    zs = [v(c) for c in coeff_names]
    body = And(
        (
            disj(neq(z, ZERO) for z in zs),
            Eq(total([mul(z, x) for z, x in zip(zs, xs)]), ZERO),
            conj(Rel("P", (z,)) for z in zs),
        )
    )
    return exists_many(coeff_names, body)


def ell_dagger(n: int) -> DaggerAxiom:
    xs = [f"x{i}" for i in range(1, n + 1)]
    return DaggerAxiom(
        ell_name(n), tuple(xs), linear_dependence([v(x) for x in xs], [f"z{i}" for i in range(1, n + 1)])
    )


def monomials(n: int, k: int) -> list[tuple[int, ...]]:
    """Exponent vectors in ``n`` variables of total degree ``<= k``, ordered by
    degree, then reverse-lexicographically within a degree."""
    vecs = [m for m in itertools.product(range(k + 1), repeat=n) if sum(m) <= k]
    return sorted(vecs, key=lambda m: (sum(m), tuple(-e for e in m)))


def polynomial_relation(xs: Sequence[Term], k: int, coeff_prefix: str = "c"):
    """Non-trivial polynomial relation of degree ``<= k`` with P-coefficients."""
    mons = monomials(len(xs), k)
    names = [f"{coeff_prefix}{i}" for i in range(len(mons))]
    cs = [v(c) for c in names]
    terms = [mul(c, product([power(x, e) for x, e in zip(xs, m) if e])) for c, m in zip(cs, mons)]
    body = And(
        (
            conj(Rel("P", (c,)) for c in cs),
            disj(neq(c, ZERO) for c in cs),
            Eq(total(terms), ZERO),
        )
    )
    return exists_many(names, body)


def dtilde_dagger(n: int, k: int) -> DaggerAxiom:
    xs = [f"x{i}" for i in range(1, n + 1)]
    return DaggerAxiom(dtilde_name(n, k), tuple(xs), polynomial_relation([v(x) for x in xs], k))


def ell_signature(max_n: int = 3, with_lambda: bool = False) -> Signature:
    """Valued-field pair language with ``ell_n`` (n = 2..max_n) and ``P``.

    ``not P(x)`` is ``ell2(1, x)``; ``not ell_n`` is linear dependence."""
    if max_n < 2:
        raise ValueError("max_n must be >= 2")
    rels = [("P", 1)] + [(ell_name(n), n) for n in range(2, max_n + 1)]
    fns = []
    if with_lambda:
        fns = [(lambda_name(n, i), n + 1) for n in range(2, max_n) for i in range(1, n + 1)]
    dagger = [DaggerAxiom("P", ("x",), Rel(ell_name(2), (ONE, v("x"))))]
    dagger += [ell_dagger(n) for n in range(2, max_n + 1)]
    name = "ell_lambda_pairs" if with_lambda else "ell_pairs"
    return VALUED_RING.extend(name, functions=fns, relations=rels, dagger=dagger)


def dtilde_signature(max_n: int = 2, max_k: int = 2) -> Signature:
    """Ordered pair language with ``Dt_{n,k}`` = not D_{nk} and ``P``.

    ``not P(x)`` is ``Dt1_1(x)``: x satisfies no non-trivial linear relation
    over P."""
    if max_n < 1 or max_k < 1:
        raise ValueError("bounds must be >= 1")
    pairs = [(n, k) for n in range(1, max_n + 1) for k in range(1, max_k + 1)]
    rels = [("P", 1)] + [(dtilde_name(n, k), n) for n, k in pairs]
    dagger = [DaggerAxiom("P", ("x",), Rel(dtilde_name(1, 1), (v("x"),)))]
    dagger += [dtilde_dagger(n, k) for n, k in pairs]
    return LATTICE_RING.extend("dtilde_pairs", relations=rels, dagger=dagger)


def pcf_signature(p: int, max_n: int, coset_reps: dict[int, Sequence[int]]) -> Signature:
    """Valued ring plus ``P_n`` (n-th powers), n = 2..max_n.

    ``coset_reps[n]`` lists natural numbers representing the cosets of the
    n-th powers other than the trivial one; the complement of ``P_n`` is then
    ``OR_c exists y (x = c * y^n)``."""
    rels = [(pn_name(n), 1) for n in range(2, max_n + 1)]
    dagger = []
    for n in range(2, max_n + 1):
        reps = coset_reps.get(n, ())
        y = v("y")
        body = disj(Exists("y", Eq(v("x"), mul(numeral(c), power(y, n)))) for c in reps)
        if not reps:
            body = neq(v("x"), v("x"))
        dagger.append(DaggerAxiom(pn_name(n), ("x",), body))
    return VALUED_RING.extend(f"pcf{p}", relations=rels, dagger=dagger)


def prime_field_coset_reps(p: int, n: int) -> list[int]:
    """Least representatives of the non-trivial cosets of the n-th powers in
    the multiplicative group of Z/p."""
    powers = {pow(a, n, p) for a in range(1, p)}
    reps, covered = [], set(powers)
    for c in range(2, p):
        if c not in covered:
            reps.append(c)
            covered |= {c * q % p for q in powers}
    return reps


BUILTIN_SIGNATURES: dict[str, Signature] = {
    s.name: s
    for s in (
        RING,
        RING_P,
        RING_PAIR,
        RING_DELTA,
        RING_DELTA_P,
        LATTICE_RING,
        BOOLEAN_ALGEBRA,
        VALUED_RING,
        VALUED_RING_DELTA,
        RCVF_RING,
        ell_signature(3),
        ell_signature(3, with_lambda=True),
        dtilde_signature(),
    )
}


def builtin_signature(name: str) -> Signature:
    try:
        return BUILTIN_SIGNATURES[name]
    except KeyError:
        raise KeyError(f"unknown builtin signature {name!r}") from None

