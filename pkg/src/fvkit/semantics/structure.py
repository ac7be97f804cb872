"""Finite structures: universe ``0..n-1`` plus function, constant and relation
tables."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ..syntax.ast import Signature


class StructureError(ValueError):
    pass


def _flat_index(args: Sequence[int], n: int) -> int:
    idx = 0
    for a in args:
        idx = idx * n + a
    return idx


@dataclass(frozen=True, eq=False)
class FiniteStructure:
    """A finite ``sig``-structure on ``range(size)``.

    ``functions[f]`` is a flat row-major table of length ``size ** arity``;
    ``relations[r]`` is a frozenset of argument tuples.
    """

    sig: Signature
    size: int
    functions: Mapping[str, tuple[int, ...]]
    constants: Mapping[str, int]
    relations: Mapping[str, frozenset] = field(default_factory=dict)
    name: str = ""
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        n = self.size
        if n < 1:
            raise StructureError("universe must be non-empty")
        for f, k in self.sig.functions:
            tbl = self.functions.get(f)
            if tbl is None:
                raise StructureError(f"{self.name}: missing table for function {f!r}")
            if len(tbl) != n**k:
                raise StructureError(f"{self.name}: table for {f!r} has wrong length")
            if any(not 0 <= x < n for x in tbl):
                raise StructureError(f"{self.name}: table for {f!r} leaves the universe")
        for c in self.sig.constants:
            if c not in self.constants or not 0 <= self.constants[c] < n:
                raise StructureError(f"{self.name}: bad or missing constant {c!r}")
        for r, k in self.sig.relations:
            tuples = self.relations.get(r, frozenset())
            for t in tuples:
                if len(t) != k or any(not 0 <= x < n for x in t):
                    raise StructureError(f"{self.name}: bad tuple {t} for relation {r!r}")
        extra = (set(self.functions) - set(self.sig.function_arity)) | (
            set(self.relations) - set(self.sig.relation_arity)
        )
        if extra:
            raise StructureError(f"{self.name}: symbols outside the signature: {sorted(extra)}")
        object.__setattr__(self, "functions", {k: tuple(v) for k, v in self.functions.items()})
        object.__setattr__(
            self,
            "relations",
            {r: frozenset(tuple(t) for t in self.relations.get(r, ())) for r, _ in self.sig.relations},
        )
        object.__setattr__(self, "_compiled", {})

    # -- element access -------------------------------------------------

    @property
    def universe(self) -> range:
        return range(self.size)

    def apply(self, fn: str, *args: int) -> int:
        return self.functions[fn][_flat_index(args, self.size)]

    def holds(self, rel: str, *args: int) -> bool:
        return tuple(args) in self.relations[rel]

    def const(self, c: str) -> int:
        return self.constants[c]

    def label(self, a: int) -> str:
        return self.labels[a] if self.labels else str(a)

    def np_table(self, fn: str) -> np.ndarray:
        """Read-only numpy view of a function table, shape ``(n,) * arity``."""
        k = self.sig.function_arity[fn]
        arr = np.array(self.functions[fn], dtype=np.int64).reshape((self.size,) * k)
        arr.flags.writeable = False
        return arr

    def __repr__(self) -> str:
        return f"FiniteStructure({self.name or self.sig.name}, size={self.size})"


def structure_from_ops(
    sig: Signature,
    size: int,
    ops: Mapping[str, Callable[..., int]],
    constants: Mapping[str, int],
    relations: Mapping[str, Iterable[tuple[int, ...]]] | None = None,
    name: str = "",
    labels: Sequence[str] | None = None,
) -> FiniteStructure:
    """Tabulate Python callables into a :class:`FiniteStructure`."""
    tables = {}
    for f, k in sig.functions:
        op = ops[f]
        tables[f] = tuple(op(*args) for args in itertools.product(range(size), repeat=k))
    rels = {r: frozenset(tuple(t) for t in (relations or {}).get(r, ())) for r, _ in sig.relations}
    return FiniteStructure(
        sig, size, tables, dict(constants), rels, name, tuple(labels) if labels else None
    )


def expand(
    A: FiniteStructure,
    sig: Signature,
    functions: Mapping[str, Callable[..., int]] | None = None,
    relations: Mapping[str, Iterable[tuple[int, ...]]] | None = None,
    constants: Mapping[str, int] | None = None,
    name: str | None = None,
) -> FiniteStructure:
    """Expansion of ``A`` to the larger signature ``sig``."""
    if not sig.contains(A.sig):
        raise StructureError(f"{sig.name} does not extend {A.sig.name}")
    tables = dict(A.functions)
    for f, k in sig.functions:
        if f not in tables:
            op = (functions or {})[f]
            tables[f] = tuple(op(*args) for args in itertools.product(A.universe, repeat=k))
    rels = {r: A.relations.get(r, frozenset()) for r, _ in sig.relations}
    for r, tuples in (relations or {}).items():
        rels[r] = frozenset(tuple(t) for t in tuples)
    consts = {**A.constants, **(constants or {})}
    return FiniteStructure(sig, A.size, tables, consts, rels, name or A.name, A.labels)


def reduct(A: FiniteStructure, sig: Signature) -> FiniteStructure:
    if not A.sig.contains(sig):
        raise StructureError(f"{A.sig.name} does not contain {sig.name}")
    return FiniteStructure(
        sig,
        A.size,
        {f: A.functions[f] for f, _ in sig.functions},
        {c: A.constants[c] for c in sig.constants},
        {r: A.relations[r] for r, _ in sig.relations},
        A.name,
        A.labels,
    )


def substructure(A: FiniteStructure, elements: Iterable[int], name: str = "") -> tuple[FiniteStructure, tuple[int, ...]]:
    """Induced substructure on ``elements`` (must be closed), re-indexed.

    Returns the structure and the embedding ``new index -> old index``."""
    emb = tuple(sorted(set(elements)))
    if not emb:
        raise StructureError("empty substructure")
    back = {a: i for i, a in enumerate(emb)}
    for c, a in A.constants.items():
        if a not in back:
            raise StructureError(f"constant {c!r} outside the subset")
    tables = {}
    for f, k in A.sig.functions:
        tbl = []
        for args in itertools.product(emb, repeat=k):
            val = A.apply(f, *args)
            if val not in back:
                raise StructureError(f"subset not closed under {f!r}: {f}{args} = {val}")
            tbl.append(back[val])
        tables[f] = tuple(tbl)
    rels = {
        r: frozenset(tuple(back[a] for a in t) for t in tuples if all(a in back for a in t))
        for r, tuples in A.relations.items()
    }
    labels = tuple(A.label(a) for a in emb) if A.labels else None
    sub = FiniteStructure(
        A.sig, len(emb), tables, {c: back[a] for c, a in A.constants.items()}, rels, name or f"{A.name}|sub", labels
    )
    return sub, emb


def is_closed(A: FiniteStructure, elements: Iterable[int]) -> bool:
    try:
        substructure(A, elements)
    except StructureError:
        return False
    return True


@dataclass(frozen=True, eq=False)
class ProductStructure:
    """A direct product together with its coordinate encoding."""

    structure: FiniteStructure
    factors: tuple[FiniteStructure, ...]

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out, acc = [], 1
        for F in reversed(self.factors):
            out.append(acc)
            acc *= F.size
        return tuple(reversed(out))

    def encode(self, coords: Sequence[int]) -> int:
        return sum(c * s for c, s in zip(coords, self.strides))

    def decode(self, index: int) -> tuple[int, ...]:
        return tuple((index // s) % F.size for s, F in zip(self.strides, self.factors))


def product_structure(factors: Sequence[FiniteStructure], name: str = "") -> ProductStructure:
    """Componentwise product; relations hold iff they hold in every factor.

    Element ``i`` encodes coordinates in mixed radix, first factor most
    significant."""
    factors = tuple(factors)
    if not factors:
        raise StructureError("empty product")
    sig = factors[0].sig
    if any(F.sig != sig for F in factors):
        raise StructureError("factors have different signatures")
    coords = list(itertools.product(*(F.universe for F in factors)))
    index = {c: i for i, c in enumerate(coords)}
    size = len(coords)
    tables = {}
    for f, k in sig.functions:
        tbl = []
        for args in itertools.product(range(size), repeat=k):
            cs = [coords[a] for a in args]
            tbl.append(index[tuple(F.apply(f, *(c[j] for c in cs)) for j, F in enumerate(factors))])
        tables[f] = tuple(tbl)
    consts = {c: index[tuple(F.constants[c] for F in factors)] for c in sig.constants}
    rels = {}
    for r, k in sig.relations:
        per = [F.relations[r] for F in factors]
        rels[r] = frozenset(
            args
            for args in itertools.product(range(size), repeat=k)
            if all(tuple(coords[a][j] for a in args) in per[j] for j in range(len(factors)))
        )
    name = name or " x ".join(F.name or "?" for F in factors)
    labels = None
    if all(F.labels for F in factors):
        labels = tuple("(" + ",".join(F.label(x) for F, x in zip(factors, c)) + ")" for c in coords)
    S = FiniteStructure(sig, size, tables, consts, rels, name, labels)
    return ProductStructure(S, factors)
