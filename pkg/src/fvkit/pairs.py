"""Pair structures ``(A, D)`` with ``D`` named by a unary predicate, their
products, predicate-part extraction and finite-scale density checks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .product import BooleanProduct, ProductError, check_gamma_properties, report, truth_set
from .semantics.boolean import algebra_atoms, generated_subalgebra
from .semantics.evaluate import compile_formula
from .semantics.structure import FiniteStructure, StructureError, expand, reduct, substructure
from .syntax.ast import TRUE, Formula, Signature, free_vars
from .syntax.signatures import RING, RING_PAIR
from .syntax.text import parse_formula
from .syntax.transforms import relativize


class PairError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PairStructure:
    """``ambient`` interprets the base signature plus a unary predicate whose
    extension is a (by default proper) substructure."""

    ambient: FiniteStructure
    predicate: str = "P"
    allow_improper: bool = False

    def __post_init__(self) -> None:
        if self.ambient.sig.relation_arity.get(self.predicate) != 1:
            raise PairError(f"{self.predicate!r} is not a unary relation of {self.ambient.sig.name}")
        D = self.sub_elements
        if not D:
            raise PairError("the predicate is empty")
        if len(D) == self.ambient.size and not self.allow_improper:
            raise PairError("the predicate must name a proper substructure")
        try:
            self.sub
        except StructureError as exc:
            raise PairError(f"the predicate is not a substructure: {exc}") from exc

    @property
    def name(self) -> str:
        return self.ambient.name

    @cached_property
    def base_sig(self):
        s = self.ambient.sig
        if s == RING_PAIR:
            return RING
        rels = tuple((r, k) for r, k in s.relations if r != self.predicate)
        dagger = tuple(d for d in s.dagger if d.relation != self.predicate)
        return Signature(s.name + "-base", s.functions, s.constants, rels, dagger)

    @cached_property
    def sub_elements(self) -> tuple[int, ...]:
        return tuple(sorted(t[0] for t in self.ambient.relations[self.predicate]))

    @cached_property
    def base(self) -> FiniteStructure:
        """The ambient structure without the predicate."""
        return reduct(self.ambient, self.base_sig)

    @cached_property
    def _sub(self):
        return substructure(self.base, self.sub_elements, name=f"P({self.name})")

    @property
    def sub(self) -> FiniteStructure:
        return self._sub[0]

    @property
    def embedding(self) -> tuple[int, ...]:
        return self._sub[1]


def make_pair(A: FiniteStructure, elements: Iterable[int], name: str = "", allow_improper: bool = False) -> PairStructure:
    """Expand a ring-signature structure by ``P`` naming ``elements``."""
    if A.sig != RING:
        raise PairError("make_pair expects a ring-signature structure")
    els = sorted(set(elements))
    S = expand(A, RING_PAIR, relations={"P": [(a,) for a in els]}, name=name or f"({A.name}, sub)")
    return PairStructure(S, allow_improper=allow_improper)


def prime_subfield_pair(K: FiniteStructure, allow_improper: bool = False) -> PairStructure:
    """``(K, prime field)``; the prime field is generated by ``1``."""
    one, zero = K.const("1"), K.const("0")
    els, a = {zero}, one
    while a not in els:
        els.add(a)
        a = K.apply("+", a, one)
    return make_pair(K, els, f"({K.name}, F{len(els)})", allow_improper)


def pair_product(pairs: Sequence[PairStructure], carrier=None) -> BooleanProduct:
    pairs = tuple(pairs)
    return BooleanProduct(tuple(p.ambient for p in pairs), carrier=carrier)


def _pairs_of(A: BooleanProduct, predicate: str = "P") -> tuple[PairStructure, ...]:
    return tuple(PairStructure(F, predicate, allow_improper=True) for F in A.factors)


@dataclass(frozen=True, eq=False)
class PPart:
    product: BooleanProduct
    embeddings: tuple[tuple[int, ...], ...]
    gamma: dict

    def to_ambient(self, e: Sequence[int]) -> tuple[int, ...]:
        return tuple(emb[c] for emb, c in zip(self.embeddings, e))


def p_part(A: BooleanProduct, predicate: str = "P", corpus: Sequence[Formula] = ()) -> PPart:
    """Product of the predicate parts of the factors of a full pair product,
    with (P1)-(P3) checked on it."""
    if not A.is_full:
        raise ProductError("predicate parts are taken of full products")
    pairs = _pairs_of(A, predicate)
    D = BooleanProduct(tuple(p.sub for p in pairs), A.index)
    P_elements = {e for e in A.elements if all(e[j] in pairs[j].sub_elements for j in range(len(pairs)))}
    embeddings = tuple(p.embedding for p in pairs)
    mapped = {tuple(emb[c] for emb, c in zip(embeddings, e)) for e in D.elements}
    if mapped != P_elements:
        raise ProductError("predicate part differs from the product of the fibers")
    return PPart(D, embeddings, check_gamma_properties(D, corpus))


def splice_check(A: BooleanProduct, predicate: str = "P") -> list[dict]:
    """Patches of two predicate elements that leave the predicate."""
    pairs = _pairs_of(A, predicate)
    inside = [e for e in A.elements if all(c in p.sub_elements for c, p in zip(e, pairs))]
    out = []
    for f in inside:
        for g in inside:
            for U in A.all_subsets():
                h = tuple(a if x in U else b for x, a, b in zip(A.index, f, g))
                if not all(c in p.sub_elements for c, p in zip(h, pairs)):
                    out.append({"f": list(f), "g": list(g), "U": sorted(U, key=str)})
    return out


# ----------------------------------------------------------- fibers of a set


@dataclass(frozen=True, eq=False)
class Fibers:
    product: BooleanProduct
    elements: frozenset
    fibers: tuple[FiniteStructure, ...]
    embeddings: tuple[tuple[int, ...], ...]

    @property
    def is_box(self) -> bool:
        """``D`` equals the full product of its fibers."""
        return len(self.elements) == math.prod(len(e) for e in self.embeddings)

    def local(self, e: Sequence[int]) -> tuple[int, ...]:
        """Coordinates of ``e`` re-indexed inside the fibers."""
        return tuple(emb.index(c) for emb, c in zip(self.embeddings, e))


def fiber_substructures(A: BooleanProduct, D: Iterable[Sequence[int]]) -> Fibers:
    """The fibers ``D_x = {d(x) : d in D}`` as substructures of the factors."""
    D = frozenset(tuple(e) for e in D)
    if not D:
        raise ProductError("empty set of elements")
    for e in D:
        if not A.contains(e):
            raise ProductError(f"{e} is not in the product")
    for fn, k in A.sig.functions:
        for args in itertools.product(D, repeat=k):
            if A.apply(fn, *args) not in D:
                raise ProductError(f"set not closed under {fn!r}")
    for c in A.sig.constants:
        if A.constant(c) not in D:
            raise ProductError(f"set does not contain the constant {c!r}")
    fibers, embs = [], []
    for j, F in enumerate(A.factors):
        sub, emb = substructure(F, {e[j] for e in D}, name=f"{F.name}|D")
        fibers.append(sub)
        embs.append(emb)
    return Fibers(A, D, tuple(fibers), tuple(embs))


def subdirect_failures(A: BooleanProduct, D: Iterable[Sequence[int]], fibers: Sequence[Iterable[int]]) -> list[dict]:
    """Fiber elements that no member of ``D`` hits at their coordinate."""
    D = [tuple(e) for e in D]
    out = []
    for j, fib in enumerate(fibers):
        hit = {e[j] for e in D}
        for u in sorted(set(fib) - hit):
            out.append({"coordinate": A.index[j], "element": u})
    return out


def _truth_sets_over(factors: Sequence[FiniteStructure], index, tuples, f: Formula) -> set[frozenset]:
    names = free_vars(f)
    fns = [compile_formula(F, f) for F in factors]
    out = set()
    for tup in tuples:
        out.add(frozenset(x for j, (x, fn) in enumerate(zip(index, fns)) if fn({v: e[j] for v, e in zip(names, tup)})))
    return out


def pair_boolean_subalgebra(
    A: BooleanProduct, D: Iterable[Sequence[int]], corpus: Sequence[Formula]
) -> tuple[set[frozenset], list[frozenset]]:
    """Boolean algebra generated by the truth sets ``[phi(f)]^D`` computed in
    the fibers of ``D``, for ``f`` from ``D``; returned with its generators."""
    fib = fiber_substructures(A, D)
    local = [fib.local(e) for e in sorted(fib.elements)]
    gens: set[frozenset] = set()
    for f in corpus:
        k = len(free_vars(f))
        gens |= _truth_sets_over(fib.fibers, A.index, itertools.product(local, repeat=k), f)
    gens_sorted = sorted(gens, key=lambda s: (len(s), sorted(map(str, s))))
    return generated_subalgebra(A.index, gens_sorted), gens_sorted


def ambient_boolean_subalgebra(A: BooleanProduct, corpus: Sequence[Formula]) -> set[frozenset]:
    gens: set[frozenset] = set()
    for f in corpus:
        gens |= _truth_sets_over(A.factors, A.index, itertools.product(A.elements, repeat=len(free_vars(f))), f)
    return generated_subalgebra(A.index, gens)


def relativization_check(A: BooleanProduct, corpus: Sequence[Formula], predicate: str = "P") -> dict:
    """``[phi(f)]`` over the predicate parts equals ``[phi^P(f)]`` over the
    ambient factors, for every corpus formula and tuple from the predicate
    part."""
    part = p_part(A, predicate)
    D = part.product
    witnesses, checked = [], 0
    for f in corpus:
        fP = relativize(f, predicate)
        k = len(free_vars(f))
        for tup in itertools.product(D.elements, repeat=k):
            lhs = truth_set(D, f, tup)
            rhs = truth_set(A, fP, [part.to_ambient(e) for e in tup])
            checked += 1
            if lhs != rhs:
                witnesses.append({"formula": str(f), "tuple": [list(e) for e in tup]})
    return report("relativization", witnesses, tuples_checked=checked)


# --------------------------------------------------------------- density


def _poly_text(coeffs: Sequence[int], F: FiniteStructure) -> str:
    """``coeffs`` low -> high, labelled in ``F``; unit coefficients omitted."""
    one = F.const("1")
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == F.const("0"):
            continue
        mono = "" if i == 0 else "x" if i == 1 else f"x^{i}"
        lab = F.label(c)
        if not mono:
            terms.append(lab)
        elif c == one:
            terms.append(mono)
        else:
            terms.append(f"({lab})*{mono}")
    return " + ".join(terms) or "0"


def _has_root(F: FiniteStructure, coeffs: Sequence[int], candidates: Iterable[int]) -> bool:
    zero = F.const("0")
    for r in candidates:
        acc = zero
        for c in reversed(coeffs):
            acc = F.apply("+", F.apply("*", acc, r), c)
        if acc == zero:
            return True
    return False


def root_closure_failures(pair: PairStructure, d_max: int) -> list[dict]:
    """Polynomials of degree 1..``d_max`` with coefficients from the
    predicate part and a root in the ambient structure but none in the
    predicate part; degree ascending, coefficients in lexicographic order
    (constant term first)."""
    A = pair.base
    D = pair.sub_elements
    zero = A.const("0")
    out = []
    for deg in range(1, d_max + 1):
        for lower in itertools.product(D, repeat=deg):
            for lead in D:
                if lead == zero:
                    continue
                coeffs = tuple(lower) + (lead,)
                if _has_root(A, coeffs, A.universe) and not _has_root(A, coeffs, D):
                    out.append({"polynomial": _poly_text(coeffs, A), "coefficients": list(coeffs), "degree": deg})
    return out


DEFAULT_ALGEBRA_CORPUS = ("(= x 0)", "(= x y)", "(exists y (= (* x y) 1))")


def dense_pair_check(
    A: BooleanProduct,
    chi: Formula | None = None,
    d_max: int = 2,
    corpus: Sequence[Formula] | None = None,
    predicate: str = "P",
) -> dict:
    """Finite-scale versions of the four density conditions, keyed D1..D4.

    D1 compares the boolean algebras generated by truth sets over the
    predicate part and over the ambient product; D2 is root closure up to
    degree ``d_max``; D3 asks every non-empty ``chi``-ball in a factor to
    meet the fiber; D4 asks every ambient set containing a point to contain
    a predicate-side set with that point.
    """
    if not A.is_full:
        raise ProductError("density is checked on full pair products")
    pairs = _pairs_of(A, predicate)
    base = pairs[0].base_sig
    if corpus is None:
        corpus = [parse_formula(t, base) for t in DEFAULT_ALGEBRA_CORPUS]
    chi = TRUE if chi is None else chi
    names = free_vars(chi)
    if not names and chi != TRUE:
        raise PairError("chi needs a point variable")
    part = p_part(A, predicate)
    D_elems = [part.to_ambient(e) for e in part.product.elements]
    base_product = BooleanProduct(tuple(p.base for p in pairs), A.index)
    XD, _ = pair_boolean_subalgebra(base_product, D_elems, corpus)
    XA = ambient_boolean_subalgebra(base_product, corpus)
    d1 = {
        **report("D1", [] if XD == XA else [{"predicate_side": len(XD), "ambient": len(XA)}]),
        "equal": XD == XA,
        "atoms": {"predicate_side": len(algebra_atoms(XD)), "ambient": len(algebra_atoms(XA))},
        "note": "elementarity replaced by equality of the generated algebras",
    }
    d2_w = []
    for x, p in zip(A.index, pairs):
        fails = root_closure_failures(p, d_max)
        if fails:
            d2_w.append({"coordinate": x, "first": fails[0]["polynomial"], "count": len(fails), "failures": fails})
    d2 = {**report("D2", d2_w), "d_max": d_max, "note": "root closure up to the degree bound stands in for acl-closure"}
    d3_w, empty = [], 0
    if chi == TRUE:
        if not D_elems:
            d3_w.append({"reason": "predicate part is empty"})
    else:
        point, params = names[0], names[1:]
        for x, p in zip(A.index, pairs):
            fn = compile_formula(p.base, chi)
            for b in itertools.product(p.base.universe, repeat=len(params)):
                env = dict(zip(params, b))
                ball = [a for a in p.base.universe if fn({**env, point: a})]
                if not ball:
                    empty += 1
                    continue
                if not set(ball) & set(p.sub_elements):
                    d3_w.append({"coordinate": x, "parameters": list(b), "ball": ball})
    d3 = {**report("D3", d3_w), "empty_balls": empty}
    d4_w = []
    for e in sorted(XA, key=lambda s: (len(s), sorted(map(str, s)))):
        for x in e:
            if not any(t <= e and x in t for t in XD):
                d4_w.append({"set": sorted(e, key=str), "point": x})
    d4 = report("D4", d4_w)
    return {"check": "dense_pair", "D1": d1, "D2": d2, "D3": d3, "D4": d4}


def pair_corpus() -> list[BooleanProduct]:
    """Full pair products used by the extraction suite."""
    from .semantics.builtins import gf

    F4F2 = prime_subfield_pair(gf(4))
    F8F2 = prime_subfield_pair(gf(8))
    F9F3 = prime_subfield_pair(gf(9))
    return [
        pair_product([F4F2]),
        pair_product([F4F2, F4F2]),
        pair_product([F9F3]),
        pair_product([F4F2, F8F2]),
    ]
