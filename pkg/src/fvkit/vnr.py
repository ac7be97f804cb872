"""Finite commutative rings: idempotents, stalk decomposition, von Neumann
regularity, derivations and differential ideals."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .product import report
from .semantics.boolean import PowersetAlgebra
from .semantics.builtins import dual_numbers, gf, zmod
from .semantics.structure import FiniteStructure, StructureError, product_structure, structure_from_ops, substructure
from .syntax.signatures import BOOLEAN_ALGEBRA, RING

EXHAUSTIVE_LIMIT = 32
SAMPLE_SIZE = 20000


class RingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteRing:
    """A commutative ring with 1 on ``0..n-1`` (wraps a ring-signature
    structure).  The ring laws are checked on construction: exhaustively up
    to ``EXHAUSTIVE_LIMIT`` elements, on a seeded sample above."""

    structure: FiniteStructure

    def __post_init__(self) -> None:
        if not self.structure.sig.contains(RING):
            raise RingError("structure does not interpret the ring signature")
        bad = ring_law_violations(self)
        if bad:
            raise RingError(f"{self.name}: not a commutative ring with 1: {bad[0]}")

    @property
    def name(self) -> str:
        return self.structure.name

    @property
    def size(self) -> int:
        return self.structure.size

    @property
    def elements(self) -> range:
        return range(self.size)

    @cached_property
    def add(self) -> np.ndarray:
        return self.structure.np_table("+")

    @cached_property
    def mul(self) -> np.ndarray:
        return self.structure.np_table("*")

    @cached_property
    def sub(self) -> np.ndarray:
        return self.structure.np_table("-")

    @cached_property
    def neg(self) -> np.ndarray:
        return self.structure.np_table("neg")

    @property
    def zero(self) -> int:
        return self.structure.const("0")

    @property
    def one(self) -> int:
        return self.structure.const("1")

    def label(self, a: int) -> str:
        return self.structure.label(a)

    def __repr__(self) -> str:
        return f"FiniteRing({self.name}, size={self.size})"


def ring_law_violations(R: FiniteRing, seed: int = 0) -> list[str]:
    add, mul, neg = R.add, R.mul, R.neg
    n, z, o = R.size, R.zero, R.one
    out = []
    if n <= EXHAUSTIVE_LIMIT:
        a, b, c = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
        a, b, c = a.ravel(), b.ravel(), c.ravel()
    else:
        rng = np.random.default_rng(seed)
        a, b, c = rng.integers(0, n, size=(3, SAMPLE_SIZE))
    laws = {
        "additive associativity": add[add[a, b], c] == add[a, add[b, c]],
        "multiplicative associativity": mul[mul[a, b], c] == mul[a, mul[b, c]],
        "distributivity": mul[a, add[b, c]] == add[mul[a, b], mul[a, c]],
        "commutativity of +": add[a, b] == add[b, a],
        "commutativity of *": mul[a, b] == mul[b, a],
        "additive identity": add[a, z] == a,
        "multiplicative identity": mul[a, o] == a,
        "additive inverse": add[a, neg[a]] == z,
        "subtraction": R.sub[a, b] == add[a, neg[b]],
    }
    for law, ok in laws.items():
        if not np.all(ok):
            i = int(np.argmin(ok))
            out.append(f"{law} fails at {(int(a[i]), int(b[i]), int(c[i]))}")
    return out


def as_ring(A: FiniteStructure | FiniteRing) -> FiniteRing:
    return A if isinstance(A, FiniteRing) else FiniteRing(A)


# ---------------------------------------------------------------- idempotents


@dataclass(frozen=True, eq=False)
class IdempotentAlgebra:
    """The boolean algebra of idempotents: meet ``ef``, join
    ``e + f - ef``, complement ``1 - e``."""

    ring: FiniteRing
    elements: tuple[int, ...]

    def meet(self, e: int, f: int) -> int:
        return int(self.ring.mul[e, f])

    def join(self, e: int, f: int) -> int:
        R = self.ring
        return int(R.sub[R.add[e, f], R.mul[e, f]])

    def complement(self, e: int) -> int:
        return int(self.ring.sub[self.ring.one, e])

    def leq(self, e: int, f: int) -> bool:
        return self.meet(e, f) == e

    @cached_property
    def atoms(self) -> tuple[int, ...]:
        z = self.ring.zero
        nonzero = [e for e in self.elements if e != z]
        return tuple(e for e in nonzero if not any(f != e and self.leq(f, e) for f in nonzero))

    @cached_property
    def structure(self) -> FiniteStructure:
        """As a structure over the boolean-algebra signature (element ``i``
        is ``elements[i]``)."""
        pos = {e: i for i, e in enumerate(self.elements)}
        E = self.elements
        ops = {
            "meet": lambda i, j: pos[self.meet(E[i], E[j])],
            "join": lambda i, j: pos[self.join(E[i], E[j])],
            "compl": lambda i: pos[self.complement(E[i])],
        }
        return structure_from_ops(
            BOOLEAN_ALGEBRA,
            len(E),
            ops,
            {"0": pos[self.ring.zero], "1": pos[self.ring.one]},
            name=f"B({self.ring.name})",
            labels=[self.ring.label(e) for e in E],
        )

    def atom_support(self, e: int) -> frozenset:
        return frozenset(a for a in self.atoms if self.leq(a, e))

    def stone_check(self) -> list[dict]:
        """Violations of ``e -> {atoms below e}`` being an isomorphism onto
        the powerset of the atoms."""
        out = []
        P = PowersetAlgebra(self.atoms)
        image = {e: self.atom_support(e) for e in self.elements}
        if len(set(image.values())) != len(self.elements) or len(self.elements) != 2 ** len(self.atoms):
            out.append({"law": "bijective", "idempotents": len(self.elements), "atoms": len(self.atoms)})
        for e in self.elements:
            if image[self.complement(e)] != P.complement(image[e]):
                out.append({"law": "complement", "e": e})
            for f in self.elements:
                if image[self.meet(e, f)] != image[e] & image[f]:
                    out.append({"law": "meet", "e": e, "f": f})
                if image[self.join(e, f)] != image[e] | image[f]:
                    out.append({"law": "join", "e": e, "f": f})
        return out


def idempotents(R: FiniteRing) -> tuple[int, ...]:
    R = as_ring(R)
    return tuple(e for e in R.elements if R.mul[e, e] == e)


def idempotent_algebra(R: FiniteRing) -> IdempotentAlgebra:
    R = as_ring(R)
    return IdempotentAlgebra(R, idempotents(R))


# ------------------------------------------------------------------ regularity


def vnr_failures(R: FiniteRing) -> list[int]:
    """Elements ``x`` with no ``y`` such that ``x y x = x``."""
    R = as_ring(R)
    x = np.arange(R.size)
    xyx = R.mul[R.mul[x[:, None], x[None, :]], x[:, None]]
    ok = np.any(xyx == x[:, None], axis=1)
    return [int(a) for a in np.nonzero(~ok)[0]]


def is_vnr(R: FiniteRing) -> tuple[bool, list[int]]:
    bad = vnr_failures(R)
    return not bad, bad


# --------------------------------------------------------------------- ideals


def ideal_generated(R: FiniteRing, gens: Iterable[int]) -> frozenset:
    R = as_ring(R)
    out = {R.zero}
    frontier = set()
    for g in gens:
        frontier |= {int(v) for v in R.mul[g, :]}
    while frontier - out:
        new = frontier - out
        out |= new
        arr = np.array(sorted(out))
        frontier = {int(v) for v in R.add[arr[:, None], arr[None, :]].ravel()}
    return frozenset(out)


def principal_ideal(R: FiniteRing, a: int) -> frozenset:
    R = as_ring(R)
    return frozenset(int(v) for v in R.mul[a, :])


def all_ideals(R: FiniteRing) -> list[frozenset]:
    """Every ideal, found by growing from ``{0}`` one generator at a time."""
    R = as_ring(R)
    start = frozenset({R.zero})
    seen = {start}
    stack = [start]
    while stack:
        I = stack.pop()
        for a in R.elements:
            if a not in I:
                J = ideal_generated(R, set(I) | {a})
                if J not in seen:
                    seen.add(J)
                    stack.append(J)
    return sorted(seen, key=lambda I: (len(I), sorted(I)))


def maximal_ideals(R: FiniteRing, method: str = "auto") -> list[frozenset]:
    """Maximal ideals: ``(1 - a)R`` for the atoms ``a`` of the idempotents
    when ``R`` is regular (``method='auto'``), otherwise (or with
    ``method='exhaustive'``) from the list of all ideals."""
    R = as_ring(R)
    if method == "auto" and is_vnr(R)[0]:
        B = idempotent_algebra(R)
        return [principal_ideal(R, B.complement(a)) for a in B.atoms]
    proper = [I for I in all_ideals(R) if len(I) < R.size]
    return [I for I in proper if not any(I < J for J in proper)]


def is_field(R: FiniteRing) -> bool:
    """Finite integral domain test: no zero divisors and ``n - 1`` units."""
    R = as_ring(R)
    if R.size < 2:
        return False
    nz = np.array([a for a in R.elements if a != R.zero])
    prods = R.mul[nz[:, None], nz[None, :]]
    if np.any(prods == R.zero):
        return False
    units = np.any(prods == R.one, axis=1).sum()
    return int(units) == R.size - 1


def quotient(R: FiniteRing, I: frozenset, name: str = "") -> tuple[FiniteRing, tuple[int, ...]]:
    """``R / I``; cosets are numbered by their least element.  Returns the
    quotient ring and the projection as a table."""
    R = as_ring(R)
    I = sorted(I)
    rep_of, reps = {}, []
    for a in R.elements:
        if a in rep_of:
            continue
        k = len(reps)
        reps.append(a)
        for i in I:
            rep_of[int(R.add[a, i])] = k
    proj = tuple(rep_of[a] for a in R.elements)
    m = len(reps)
    ops = {
        "+": lambda i, j: proj[R.add[reps[i], reps[j]]],
        "-": lambda i, j: proj[R.sub[reps[i], reps[j]]],
        "*": lambda i, j: proj[R.mul[reps[i], reps[j]]],
        "neg": lambda i: proj[R.neg[reps[i]]],
    }
    labels = [R.label(r) + "+I" for r in reps]
    S = structure_from_ops(RING, m, ops, {"0": proj[R.zero], "1": proj[R.one]}, name=name or f"{R.name}/I", labels=labels)
    return FiniteRing(S), proj


@dataclass(frozen=True, eq=False)
class StalkDecomposition:
    ring: FiniteRing
    atoms: tuple[int, ...]
    ideals: tuple[frozenset, ...]
    stalks: tuple[FiniteRing, ...]
    projections: tuple[tuple[int, ...], ...]

    @cached_property
    def reconstruction(self) -> FiniteStructure:
        return product_structure([S.structure for S in self.stalks], f"prod stalks {self.ring.name}").structure

    @cached_property
    def isomorphism(self) -> tuple[int, ...]:
        """``R -> product of stalks`` as element indices of ``reconstruction``."""
        ps = product_structure([S.structure for S in self.stalks])
        return tuple(ps.encode([p[a] for p in self.projections]) for a in self.ring.elements)

    def check(self) -> list[dict]:
        """Violations: non-field stalks, non-bijectivity, non-homomorphism."""
        out = []
        for a, S in zip(self.atoms, self.stalks):
            if not is_field(S):
                out.append({"kind": "stalk not a field", "atom": a})
        phi = self.isomorphism
        P = self.reconstruction
        if len(set(phi)) != self.ring.size or P.size != self.ring.size:
            out.append({"kind": "not bijective", "ring": self.ring.size, "product": P.size})
        R = self.ring
        for op in ("+", "*", "-"):
            tbl = R.structure.np_table(op)
            for x in R.elements:
                for y in R.elements:
                    if phi[tbl[x, y]] != P.apply(op, phi[x], phi[y]):
                        out.append({"kind": f"does not preserve {op}", "x": x, "y": y})
        for c in ("0", "1"):
            if phi[R.structure.const(c)] != P.const(c):
                out.append({"kind": f"does not preserve {c}"})
        return out


def decompose_stalks(R: FiniteRing) -> StalkDecomposition:
    """Stalks ``R / (1 - a)R`` at the atoms ``a`` of the idempotents."""
    R = as_ring(R)
    ok, bad = is_vnr(R)
    if not ok:
        raise RingError(f"{R.name} is not von Neumann regular (e.g. x = {R.label(bad[0])})")
    B = idempotent_algebra(R)
    ideals, stalks, projs = [], [], []
    for a in B.atoms:
        M = principal_ideal(R, B.complement(a))
        S, proj = quotient(R, M, name=f"{R.name}/(1-{R.label(a)})")
        ideals.append(M)
        stalks.append(S)
        projs.append(proj)
    return StalkDecomposition(R, B.atoms, tuple(ideals), tuple(stalks), tuple(projs))


def crt_cross_check(R: FiniteRing) -> dict:
    """Whether every quotient by a maximal ideal (found exhaustively) is a
    field and ``R -> prod R/M`` is bijective; expected to agree with
    :func:`is_vnr`."""
    R = as_ring(R)
    Ms = maximal_ideals(R, method="exhaustive")
    quots = [quotient(R, M) for M in Ms]
    fields = all(is_field(Q) for Q, _ in quots)
    images = {tuple(p[a] for _, p in quots) for a in R.elements}
    sizes = int(np.prod([Q.size for Q, _ in quots])) if quots else 1
    bijective = len(images) == R.size == sizes
    return {"fields": fields, "bijective": bijective, "criterion": fields and bijective, "vnr": is_vnr(R)[0]}


# ----------------------------------------------------------------- derivations


def derivation_violations(R: FiniteRing, delta: Sequence[int]) -> dict[str, list]:
    R = as_ring(R)
    d = np.asarray(delta)
    if d.shape != (R.size,) or np.any((d < 0) | (d >= R.size)):
        raise RingError("derivation table must map each element into the ring")
    x = np.arange(R.size)
    a, b = x[:, None], x[None, :]
    add_ok = d[R.add[a, b]] == R.add[d[a], d[b]]
    leib_ok = d[R.mul[a, b]] == R.add[R.mul[d[a], b], R.mul[a, d[b]]]
    return {
        "additivity": [[int(i), int(j)] for i, j in zip(*np.nonzero(~add_ok))],
        "leibniz": [[int(i), int(j)] for i, j in zip(*np.nonzero(~leib_ok))],
    }


def constants(R: FiniteRing, delta: Sequence[int]) -> frozenset:
    R = as_ring(R)
    return frozenset(a for a in R.elements if delta[a] == R.zero)


def check_derivation(R: FiniteRing, delta: Sequence[int]) -> dict:
    """Additivity, Leibniz rule, vanishing on idempotents and the constants
    forming a subring that contains the idempotents."""
    R = as_ring(R)
    viol = derivation_violations(R, delta)
    E = idempotents(R)
    C = constants(R, delta)
    witnesses = [{"law": k, "pair": p} for k, ps in viol.items() for p in ps[:10]]
    for e in E:
        if delta[e] != R.zero:
            witnesses.append({"law": "idempotent is constant", "e": e, "image": int(delta[e])})
    closed = all(R.add[a, b] in C and R.mul[a, b] in C and R.neg[a] in C for a in C for b in C)
    if not closed or R.one not in C:
        witnesses.append({"law": "constants form a subring"})
    return report(
        "derivation",
        witnesses,
        idempotents=list(E),
        idempotent_images=[int(delta[e]) for e in E],
        constants=sorted(C),
    )


def additive_generators(R: FiniteRing) -> list[int]:
    """Greedy generating set of the additive group (``1`` tried first)."""
    R = as_ring(R)
    order = [R.one] + [a for a in R.elements if a not in (R.zero, R.one)]
    gens: list[int] = []
    span = {R.zero}
    for a in order:
        if a in span:
            continue
        gens.append(a)
        frontier = set(span)
        while frontier:
            new = {int(R.add[s, g]) for s in frontier for g in gens} - span
            span |= new
            frontier = new
    return gens


def enumerate_derivations(R: FiniteRing, chunk: int = 4096) -> list[tuple[int, ...]]:
    """Every derivation of ``R``.

    Images of the additive generators are chosen freely (the image of ``1``
    is forced to ``0``), extended additively along a spanning tree of the
    Cayley graph, and kept when consistent on every edge and Leibniz."""
    R = as_ring(R)
    n = R.size
    gens = additive_generators(R)
    # spanning tree: element -> (parent, generator index)
    parent = {R.zero: None}
    queue = [R.zero]
    for s in queue:
        for i, g in enumerate(gens):
            t = int(R.add[s, g])
            if t not in parent:
                parent[t] = (s, i)
                queue.append(t)
    order = queue[1:]
    choices = [[R.zero] if g == R.one else list(R.elements) for g in gens]
    x = np.arange(n)
    found = []
    combos = itertools.product(*choices)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        block = block.reshape(-1, len(gens))
        D = np.zeros((len(block), n), dtype=np.int64)
        D[:, R.zero] = R.zero
        for t in order:
            s, i = parent[t]
            D[:, t] = R.add[D[:, s], block[:, i]]
        ok = np.ones(len(block), dtype=bool)
        for i, g in enumerate(gens):
            ok &= np.all(D[:, R.add[x, g]] == R.add[D, block[:, i][:, None]], axis=1)
        D = D[ok]
        if len(D):
            lhs = D[:, R.mul]  # d(ab)
            rhs = R.add[R.mul[D[:, :, None], x[None, None, :]], R.mul[x[None, :, None], D[:, None, :]]]
            good = np.all((lhs == rhs).reshape(len(D), -1), axis=1)
            found.extend(tuple(int(v) for v in row) for row in D[good])
    return sorted(found)


def check_differential_ideals(R: FiniteRing, delta: Sequence[int], method: str = "auto") -> dict:
    """``delta(M) <= M`` for every maximal ideal ``M``."""
    R = as_ring(R)
    witnesses = []
    Ms = maximal_ideals(R, method)
    for M in Ms:
        for a in sorted(M):
            if delta[a] not in M:
                witnesses.append({"ideal": sorted(M), "element": a, "image": int(delta[a])})
    return report("differential_ideals", witnesses, maximal_ideals=[sorted(M) for M in Ms], vnr=is_vnr(R)[0])


def constants_subring(R: FiniteRing, delta: Sequence[int]) -> tuple[FiniteRing, tuple[int, ...]]:
    """The constants as a ring, with its embedding into ``R``."""
    R = as_ring(R)
    try:
        S, emb = substructure(R.structure, constants(R, delta), name=f"C({R.name})")
    except StructureError as exc:
        raise RingError(f"constants are not a subring: {exc}") from exc
    return FiniteRing(S), emb


def d_by_de(p: int = 2) -> tuple[int, ...]:
    """``d/de`` on ``F_p[e]/(e^2)``: ``a + b e -> b``.  It respects
    ``e^2 = 0`` only when ``2 = 0``, so ``p`` must be 2."""
    if p != 2:
        raise RingError("d/de is a derivation of F_p[e]/(e^2) only for p = 2")
    return tuple(i // p for i in range(p * p))


def product_derivation(rings: Sequence[FiniteRing], tables: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Componentwise derivation on the product of ``rings``."""
    ps = product_structure([r.structure for r in rings])
    return tuple(
        ps.encode([t[c] for t, c in zip(tables, ps.decode(i))]) for i in range(ps.structure.size)
    )


def product_ring(rings: Sequence[FiniteRing | FiniteStructure], name: str = "") -> FiniteRing:
    return FiniteRing(product_structure([as_ring(r).structure for r in rings], name).structure)


# ----------------------------------------------------------------- ring corpus


def vnr_corpus() -> list[FiniteRing]:
    """The regular rings used by the decomposition suite."""
    F2 = gf(2)
    return [
        FiniteRing(zmod(6)),
        FiniteRing(zmod(10)),
        FiniteRing(zmod(15)),
        FiniteRing(gf(4)),
        product_ring([F2, F2], "F2 x F2"),
        product_ring([F2, F2, F2], "F2 x F2 x F2"),
        FiniteRing(zmod(30)),
    ]


def derivation_corpus() -> list[FiniteRing]:
    """Rings for the derivation suite: regular and non-regular, order <= 16."""
    F2 = gf(2)
    eps = dual_numbers(2)
    rings = [FiniteRing(zmod(n)) for n in range(2, 13)]
    rings += [
        FiniteRing(gf(4)),
        FiniteRing(gf(8)),
        FiniteRing(gf(9)),
        product_ring([F2, F2], "F2 x F2"),
        product_ring([F2, gf(3)], "F2 x F3"),
        product_ring([F2, F2, F2], "F2 x F2 x F2"),
        FiniteRing(eps),
        FiniteRing(dual_numbers(3)),
        product_ring([eps, F2], "F2[e] x F2"),
        product_ring([eps, eps], "F2[e] x F2[e]"),
    ]
    return rings
