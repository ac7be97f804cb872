"""Finite boolean products: truth sets, the (P1)-(P3) checks, patching and
the projector operation."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .semantics.evaluate import EvaluationError, compile_formula
from .semantics.structure import FiniteStructure, StructureError, product_structure, substructure
from .syntax.ast import Formula, free_vars, is_atomic

Element = tuple[int, ...]


class ProductError(ValueError):
    pass


def report(check: str, witnesses: list, **extra) -> dict:
    """Uniform report record ``{check, status, witnesses, ...}``."""
    return {"check": check, "status": "pass" if not witnesses else "fail", "witnesses": witnesses, **extra}


@dataclass(frozen=True, eq=False)
class BooleanProduct:
    """A product of finite structures over a finite index set.

    Elements are coordinate tuples ordered like ``factors``.  ``carrier`` is
    ``None`` for the full product, otherwise an explicit set of elements
    that must be closed under the operations and hit every factor element.
    """

    factors: tuple[FiniteStructure, ...]
    index: tuple[Hashable, ...] = ()
    carrier: frozenset | None = None

    def __post_init__(self) -> None:
        factors = tuple(self.factors)
        if not factors:
            raise ProductError("a product needs at least one factor")
        sig = factors[0].sig
        if any(F.sig != sig for F in factors):
            raise ProductError("factors have different signatures")
        index = tuple(self.index) or tuple(range(len(factors)))
        if len(index) != len(factors) or len(set(index)) != len(index):
            raise ProductError("index set must list one distinct point per factor")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "index", index)
        if self.carrier is not None:
            carrier = frozenset(tuple(e) for e in self.carrier)
            for e in carrier:
                if len(e) != len(factors) or any(not 0 <= c < F.size for c, F in zip(e, factors)):
                    raise ProductError(f"carrier element {e} is not in the direct product")
            object.__setattr__(self, "carrier", carrier)
            try:
                self.structure
            except StructureError as exc:
                raise ProductError(f"carrier is not a substructure: {exc}") from exc
            for j, F in enumerate(factors):
                hit = {e[j] for e in carrier}
                if len(hit) != F.size:
                    missing = sorted(set(F.universe) - hit)
                    raise ProductError(f"carrier is not subdirect: coordinate {index[j]} misses {missing}")

    # -- basic views -----------------------------------------------------

    @property
    def is_full(self) -> bool:
        return self.carrier is None

    @property
    def sig(self):
        return self.factors[0].sig

    @cached_property
    def _full(self):
        return product_structure(self.factors)

    @cached_property
    def elements(self) -> tuple[Element, ...]:
        """Carrier elements in lexicographic coordinate order."""
        if self.carrier is None:
            return tuple(itertools.product(*(F.universe for F in self.factors)))
        return tuple(sorted(self.carrier))

    @cached_property
    def _position(self) -> dict[Element, int]:
        return {e: i for i, e in enumerate(self.elements)}

    @cached_property
    def structure(self) -> FiniteStructure:
        """The carrier as a plain structure; element ``i`` is ``elements[i]``."""
        full = self._full
        if self.carrier is None:
            return full.structure
        sub, _ = substructure(full.structure, (full.encode(e) for e in sorted(self.carrier)), "carrier")
        return sub

    def position(self, e: Sequence[int]) -> int:
        try:
            return self._position[tuple(e)]
        except KeyError:
            raise ProductError(f"{tuple(e)} is not in the carrier") from None

    def contains(self, e: Sequence[int]) -> bool:
        return tuple(e) in self._position

    def constant(self, c: str) -> Element:
        return tuple(F.constants[c] for F in self.factors)

    def apply(self, fn: str, *args: Sequence[int]) -> Element:
        return tuple(F.apply(fn, *(a[j] for a in args)) for j, F in enumerate(self.factors))

    def subset_of(self, positions: Iterable[int]) -> frozenset:
        return frozenset(self.index[j] for j in positions)

    def all_subsets(self) -> list[frozenset]:
        """Subsets of the index set, by size then lexicographically."""
        n = len(self.index)
        out = []
        for k in range(n + 1):
            for combo in itertools.combinations(range(n), k):
                out.append(self.subset_of(combo))
        return out

    def __repr__(self) -> str:
        names = " x ".join(F.name or "?" for F in self.factors)
        return f"BooleanProduct({names}{'' if self.is_full else ', partial carrier'})"


def _bind(f: Formula, values) -> list[tuple[str, Element]]:
    names = free_vars(f)
    if isinstance(values, Mapping):
        missing = [v for v in names if v not in values]
        if missing:
            raise EvaluationError(f"free variables not assigned: {missing}")
        return [(v, tuple(values[v])) for v in names]
    values = [tuple(a) for a in values]
    if len(values) != len(names):
        raise EvaluationError(f"expected {len(names)} values for {names}, got {len(values)}")
    return list(zip(names, values))


def truth_set(A: BooleanProduct, f: Formula, values) -> frozenset:
    """Coordinates whose factor satisfies ``f`` at the coordinate values.

    ``values`` is a mapping from free variables to elements or a sequence
    aligned with ``free_vars(f)``."""
    bound = _bind(f, values)
    out = []
    for j, F in enumerate(A.factors):
        fn = compile_formula(F, f)
        if fn({v: e[j] for v, e in bound}):
            out.append(A.index[j])
    return frozenset(out)


def patch(A: BooleanProduct, f: Sequence[int], g: Sequence[int], U: Iterable[Hashable]) -> Element:
    """Element agreeing with ``f`` on ``U`` and with ``g`` off ``U``."""
    U = frozenset(U)
    unknown = U - set(A.index)
    if unknown:
        raise ProductError(f"points {sorted(map(str, unknown))} are not in the index set")
    h = tuple(a if x in U else b for x, a, b in zip(A.index, f, g))
    if not A.contains(h):
        raise ProductError(f"no patch witness for f={tuple(f)}, g={tuple(g)}, U={sorted(map(str, U))}")
    return h


def check_gamma_properties(A: BooleanProduct, corpus: Sequence[Formula], max_tuples: int | None = None) -> dict:
    """Check (P1)-(P3) on ``A``.

    Over a finite index set every subset is clopen, so (P1) and (P3) amount
    to truth sets being defined for every tuple; (P2) searches the carrier
    for each patch.  ``max_tuples`` bounds the tuples tried per formula.
    """
    subsets = A.all_subsets()
    p2 = []
    for f in A.elements:
        for g in A.elements:
            for U in subsets:
                h = tuple(a if x in U else b for x, a, b in zip(A.index, f, g))
                if not A.contains(h):
                    p2.append({"f": list(f), "g": list(g), "U": sorted(U, key=str)})
    p1, p3, counts = [], [], {"atomic": 0, "all": 0}
    points = set(A.index)
    for phi in corpus:
        k = len(free_vars(phi))
        tuples = itertools.product(A.elements, repeat=k)
        if max_tuples is not None:
            tuples = itertools.islice(tuples, max_tuples)
        for tup in tuples:
            S = truth_set(A, phi, tup)
            bad = not S <= points
            counts["all"] += 1
            if is_atomic(phi):
                counts["atomic"] += 1
                if bad:
                    p1.append({"formula": str(phi), "tuple": [list(e) for e in tup]})
            if bad:
                p3.append({"formula": str(phi), "tuple": [list(e) for e in tup]})
    results = {
        "P1": report("P1", p1, tuples_checked=counts["atomic"]),
        "P2": report("P2", p2, patches_checked=len(A.elements) ** 2 * len(subsets)),
        "P3": report("P3", p3, tuples_checked=counts["all"]),
    }
    witnesses = [w for r in results.values() for w in r["witnesses"]]
    return {**report("gamma_properties", witnesses), "properties": results}


def _require_group(A: BooleanProduct) -> None:
    fa = A.sig.function_arity
    if fa.get("+") != 2 or fa.get("-") != 2 or "0" not in A.sig.constants:
        raise ProductError("the projector needs factors expanding a group (+, -, 0)")


def projector_apply(A: BooleanProduct, a: Sequence[int], b: Sequence[int]) -> Element:
    """Componentwise ``p(a, b)``: ``a(x)`` where ``b(x) = 0``, else ``0``."""
    _require_group(A)
    zero = A.constant("0")
    out = tuple(ax if bx == z else z for ax, bx, z in zip(a, b, zero))
    if not A.contains(out):
        raise ProductError("carrier is not closed under the projector")
    return out


def projector_definability_check(A: BooleanProduct) -> dict:
    """For all ``a, b, c``: ``exists d (b d b = b & b c = 0 & (c - a)(1 - b d) = 0)``
    holds iff ``c = p(a, b)``.  Counterexamples are listed."""
    _require_group(A)
    if "*" not in A.sig.function_arity or "1" not in A.sig.constants:
        raise ProductError("definability check needs a ring signature")
    S = A.structure
    n = S.size
    mul, sub = S.np_table("*"), S.np_table("-")
    one, zero = S.const("1"), S.const("0")
    elems = A.elements
    pos = {e: i for i, e in enumerate(elems)}
    proj = np.array(
        [[pos[tuple(x if y == z else z for x, y, z in zip(elems[a], elems[b], A.constant("0")))] for b in range(n)] for a in range(n)]
    )
    d = np.arange(n)
    witnesses = []
    for b in range(n):
        bd = mul[b, d]
        ok_d = mul[bd, b] == b  # b d b = b
        one_minus_bd = sub[one, bd]
        for c in range(n):
            if mul[b, c] != zero:
                holds = np.zeros(n, dtype=bool)
            else:
                # rows: a, columns: d
                vanish = mul[sub[c, :][:, None], one_minus_bd[None, :]] == zero
                holds = np.any(vanish & ok_d[None, :], axis=1)
            expected = proj[:, b] == c
            for a in np.nonzero(holds != expected)[0]:
                witnesses.append(
                    {"a": list(elems[a]), "b": list(elems[b]), "c": list(elems[c]), "formula": bool(holds[a])}
                )
    return report("projector_definability", witnesses, triples_checked=n**3)


def _coordinates(A: BooleanProduct) -> np.ndarray:
    """Carrier elements as an ``(N, k)`` array of coordinates."""
    return np.array(A.elements, dtype=np.intp)


PROJECTOR_IDENTITIES = (
    ("or_zero", "u = 0 or v = 0  <->  p(u, v) = u"),
    ("and_zero", "u = 0 and v = 0  <->  p(u, v) + v = 0"),
    ("or_nonzero", "u = 0 or v != 0  <->  p(u, v) = 0"),
)


def projector_identity_check(A: BooleanProduct) -> dict:
    """The three projector encodings, read coordinatewise: for all ``u, v``
    in the carrier the two sides have the same truth set."""
    _require_group(A)
    E = _coordinates(A)
    N = len(E)
    u = E[:, None, :]
    v = E[None, :, :]
    zero = np.array(A.constant("0"))
    adds = [F.np_table("+") for F in A.factors]
    p = np.where(v == zero, u, zero)
    pv, vv = np.broadcast_arrays(p, v)
    p_plus_v = np.stack([adds[j][pv[..., j], vv[..., j]] for j in range(len(adds))], axis=-1)
    u0, v0 = u == zero, v == zero
    sides = {
        "or_zero": (u0 | v0, p == u),
        "and_zero": (u0 & v0, p_plus_v == zero),
        "or_nonzero": (u0 | ~v0, p == zero),
    }
    witnesses = []
    for name, (lhs, rhs) in sides.items():
        lhs, rhs = np.broadcast_to(lhs, (N, N, len(A.factors))), np.broadcast_to(rhs, (N, N, len(A.factors)))
        for a, b in zip(*np.nonzero(np.any(lhs != rhs, axis=-1))):
            witnesses.append({"identity": name, "u": list(A.elements[a]), "v": list(A.elements[b])})
    return report("projector_identities", witnesses, pairs_checked=N * N)


def discriminator_check(A: BooleanProduct) -> dict:
    """``p(u - w, u - v) = u - z`` against ``(u = v & w = z) | (u != v & u = z)``
    for all ``u, v, w, z``.  The assertive reading compares truth sets at
    every coordinate (the law lives in the factors); ``element_level``
    counts quadruples where the whole-element reading disagrees."""
    _require_group(A)
    E = _coordinates(A)
    N, k = E.shape
    shape = (N, N, N, N, k)
    u = E[:, None, None, None, :]
    v = E[None, :, None, None, :]
    w = E[None, None, :, None, :]
    z = E[None, None, None, :, :]
    zero = np.array(A.constant("0"))
    subs = [F.np_table("-") for F in A.factors]

    def sub(a, b):
        a, b = np.broadcast_arrays(a, b)
        return np.stack([subs[j][a[..., j], b[..., j]] for j in range(k)], axis=-1)

    x, y = sub(u, w), sub(u, v)
    p = np.where(y == zero, x, zero)  # indexed (u, v, w)
    uz = sub(u, z)  # indexed (u, z)
    left = np.broadcast_to(p, shape) == np.broadcast_to(uz, shape)
    right = ((u == v) & (w == z)) | ((u != v) & (u == z))
    right = np.broadcast_to(right, shape)
    coord_bad = np.any(left != right, axis=-1)
    elem_bad = np.all(left, axis=-1) != (
        (np.all(u == v, axis=-1) & np.all(w == z, axis=-1)) | (~np.all(u == v, axis=-1) & np.all(u == z, axis=-1))
    )
    witnesses = [
        {"u": list(A.elements[a]), "v": list(A.elements[b]), "w": list(A.elements[c]), "z": list(A.elements[d])}
        for a, b, c, d in zip(*np.nonzero(coord_bad))
    ]
    return report(
        "discriminator",
        witnesses,
        quadruples_checked=N**4,
        element_level={"disagreements": int(np.count_nonzero(elem_bad))},
    )
