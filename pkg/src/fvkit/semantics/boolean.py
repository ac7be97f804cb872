"""Powerset algebras of finite index sets."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Sequence

from ..syntax.signatures import BOOLEAN_ALGEBRA
from ..syntax.text import parse_formula
from .builtins import powerset_algebra
from .structure import FiniteStructure

# Ten boolean-lattice laws (commutativity, associativity, absorption,
# distributivity, complementation), each for meet and join.
BA_LAWS_TEXT = (
    "(forall a (forall b (= (meet a b) (meet b a))))",
    "(forall a (forall b (= (join a b) (join b a))))",
    "(forall a (forall b (forall c (= (meet a (meet b c)) (meet (meet a b) c)))))",
    "(forall a (forall b (forall c (= (join a (join b c)) (join (join a b) c)))))",
    "(forall a (forall b (= (meet a (join a b)) a)))",
    "(forall a (forall b (= (join a (meet a b)) a)))",
    "(forall a (forall b (forall c (= (meet a (join b c)) (join (meet a b) (meet a c))))))",
    "(forall a (forall b (forall c (= (join a (meet b c)) (meet (join a b) (join a c))))))",
    "(forall a (= (meet a (compl a)) 0))",
    "(forall a (= (join a (compl a)) 1))",
)


def ba_laws():
    return [parse_formula(t, BOOLEAN_ALGEBRA) for t in BA_LAWS_TEXT]


@dataclass(frozen=True)
class PowersetAlgebra:
    """All subsets of the finite index set ``points``.

    Subsets are exchanged as frozensets of points; internally as bitmasks.
    """

    points: tuple[Hashable, ...]

    @cached_property
    def _pos(self) -> dict:
        return {x: i for i, x in enumerate(self.points)}

    @property
    def top(self) -> frozenset:
        return frozenset(self.points)

    @property
    def bottom(self) -> frozenset:
        return frozenset()

    def mask(self, subset: Iterable[Hashable]) -> int:
        m = 0
        for x in subset:
            m |= 1 << self._pos[x]
        return m

    def subset(self, mask: int) -> frozenset:
        return frozenset(x for i, x in enumerate(self.points) if mask >> i & 1)

    def elements(self) -> Iterator[frozenset]:
        """All subsets, by size then lexicographically in point order."""
        n = len(self.points)
        masks = sorted(range(1 << n), key=lambda m: (bin(m).count("1"), [-(m >> i & 1) for i in range(n)]))
        for m in masks:
            yield self.subset(m)

    def atoms(self) -> list[frozenset]:
        return [frozenset([x]) for x in self.points]

    def complement(self, s: Iterable[Hashable]) -> frozenset:
        return self.top - frozenset(s)

    @cached_property
    def structure(self) -> FiniteStructure:
        return powerset_algebra(len(self.points))


def generated_subalgebra(points: Sequence[Hashable], generators: Iterable[frozenset]) -> set[frozenset]:
    """Boolean subalgebra of the powerset of ``points`` generated by
    ``generators``: unions of the atoms of the partition they induce."""
    top = frozenset(points)
    gens = [frozenset(g) for g in generators]
    # atoms of the generated algebra = classes of "same membership pattern"
    classes: dict[tuple, set] = {}
    for x in points:
        classes.setdefault(tuple(x in g for g in gens), set()).add(x)
    atoms = [frozenset(c) for c in classes.values()]
    out = set()
    for m in range(1 << len(atoms)):
        out.add(frozenset().union(*(a for i, a in enumerate(atoms) if m >> i & 1)))
    assert top in out
    return out


def algebra_atoms(algebra: Iterable[frozenset]) -> list[frozenset]:
    nonzero = [a for a in algebra if a]
    return sorted(
        (a for a in nonzero if not any(b < a for b in nonzero)),
        key=lambda s: sorted(map(str, s)),
    )
