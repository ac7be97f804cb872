"""Constructors for the structures the toolkit works with: Z/n, finite
fields, truncated polynomial rings, powerset algebras, projector and
derivation expansions."""
from __future__ import annotations

from typing import Sequence

from ..syntax.signatures import BOOLEAN_ALGEBRA, RING, RING_DELTA, RING_P
from .structure import FiniteStructure, StructureError, expand, structure_from_ops

# monic irreducible moduli, coefficients low -> high
IRREDUCIBLE = {
    4: (2, (1, 1, 1)),  # x^2 + x + 1
    8: (2, (1, 1, 0, 1)),  # x^3 + x + 1
    9: (3, (1, 0, 1)),  # x^2 + 1
    16: (2, (1, 1, 0, 0, 1)),  # x^4 + x + 1
}

PRIMES = (2, 3, 5, 7, 11, 13)


def zmod(n: int) -> FiniteStructure:
    """The ring Z/n."""
    if n < 1:
        raise StructureError("modulus must be >= 1")
    ops = {
        "+": lambda a, b: (a + b) % n,
        "-": lambda a, b: (a - b) % n,
        "*": lambda a, b: (a * b) % n,
        "neg": lambda a: (-a) % n,
    }
    return structure_from_ops(RING, n, ops, {"0": 0, "1": 1 % n}, name=f"Z/{n}")


def _poly_label(coeffs: Sequence[int], var: str) -> str:
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if not c:
            continue
        mono = "" if i == 0 else var if i == 1 else f"{var}^{i}"
        if not mono:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}{mono}")
    return "+".join(terms) or "0"


def poly_quotient(p: int, modulus: Sequence[int], name: str = "", var: str = "x") -> FiniteStructure:
    """``Z/p[x] / (modulus)`` for a monic ``modulus`` (coefficients low -> high).

    Element ``i`` has coefficient vector given by the base-``p`` digits of
    ``i``, least significant first."""
    modulus = tuple(modulus)
    deg = len(modulus) - 1
    if deg < 1 or modulus[-1] % p != 1:
        raise StructureError("modulus must be monic of degree >= 1")
    size = p**deg

    def vec(i: int) -> list[int]:
        out = []
        for _ in range(deg):
            out.append(i % p)
            i //= p
        return out

    def idx(cs: Sequence[int]) -> int:
        return sum((c % p) * p**k for k, c in enumerate(cs))

    def mul(a: int, b: int) -> int:
        va, vb = vec(a), vec(b)
        prod = [0] * (2 * deg - 1)
        for i, x in enumerate(va):
            for j, y in enumerate(vb):
                prod[i + j] += x * y
        for k in range(len(prod) - 1, deg - 1, -1):
            c = prod[k] % p
            if c:
                for j in range(deg + 1):
                    prod[k - deg + j] -= c * modulus[j]
        return idx(prod[:deg])

    ops = {
        "+": lambda a, b: idx([x + y for x, y in zip(vec(a), vec(b))]),
        "-": lambda a, b: idx([x - y for x, y in zip(vec(a), vec(b))]),
        "*": mul,
        "neg": lambda a: idx([-x for x in vec(a)]),
    }
    labels = [_poly_label(vec(i), var) for i in range(size)]
    return structure_from_ops(RING, size, ops, {"0": 0, "1": 1}, name=name, labels=labels)


def gf(q: int) -> FiniteStructure:
    """The field with ``q`` elements, ``q`` a prime or in ``IRREDUCIBLE``."""
    if q in PRIMES or (q > 1 and all(q % d for d in range(2, int(q**0.5) + 1))):
        F = zmod(q)
        return FiniteStructure(F.sig, F.size, F.functions, F.constants, F.relations, f"F{q}")
    if q not in IRREDUCIBLE:
        raise StructureError(f"no built-in field of order {q}")
    p, modulus = IRREDUCIBLE[q]
    return poly_quotient(p, modulus, name=f"F{q}")


def dual_numbers(p: int = 2) -> FiniteStructure:
    """``F_p[e] / (e^2)``; element ``a + b e`` has index ``a + p b``."""
    return poly_quotient(p, (0, 0, 1), name=f"F{p}[e]", var="e")


def with_projector(A: FiniteStructure) -> FiniteStructure:
    """Expansion by ``p(a, b) = a if b = 0 else 0``; the projector of a field
    or domain, to be taken per factor of a product."""
    z = A.constants["0"]
    sig = A.sig.extend(A.sig.name + "+p", functions=[("p", 2)]) if A.sig != RING else RING_P
    return expand(A, sig, functions={"p": lambda a, b: a if b == z else z}, name=f"{A.name}^p")


def with_derivation(A: FiniteStructure, table: Sequence[int]) -> FiniteStructure:
    """Expansion of a ring by the unary function ``d`` given as a table."""
    table = tuple(table)
    if len(table) != A.size:
        raise StructureError("derivation table has wrong length")
    sig = RING_DELTA if A.sig == RING else A.sig.extend(A.sig.name + "+d", functions=[("d", 1)])
    return expand(A, sig, functions={"d": lambda a: table[a]}, name=f"({A.name}, d)")


def powerset_algebra(k: int) -> FiniteStructure:
    """The boolean algebra of subsets of ``{0..k-1}``; element = bitmask."""
    full = (1 << k) - 1
    ops = {
        "meet": lambda a, b: a & b,
        "join": lambda a, b: a | b,
        "compl": lambda a: full & ~a,
    }
    labels = ["{" + ",".join(str(i) for i in range(k) if m >> i & 1) + "}" for m in range(full + 1)]
    return structure_from_ops(
        BOOLEAN_ALGEBRA, full + 1, ops, {"0": 0, "1": full}, name=f"P({k})", labels=labels
    )


def builtin_structure(kind: str, arg: int) -> FiniteStructure:
    """``(builtin zmod 6)``, ``(builtin gf 4)``, ``(builtin powerset 3)``,
    ``(builtin dual 2)``."""
    makers = {"zmod": zmod, "gf": gf, "powerset": powerset_algebra, "dual": dual_numbers}
    if kind not in makers:
        raise StructureError(f"unknown builtin structure {kind!r}")
    return makers[kind](arg)
