"""Deterministic formula corpora over the ring signature.

The space is fixed by a :class:`CorpusSpec`: a variable pool, a term depth
and a quantifier depth.  Writing ``m = len(pool) + 2`` for the atomic
terms (pool variables, ``0``, ``1``):

* terms of level 0 are the ``m`` atomic terms; a term of level ``i > 0`` is
  ``(op a b)`` with ``op`` in ``+ *``, ``a`` of level ``i - 1`` and ``b`` of
  level 0, so level ``i`` has ``m (2m)^i`` terms;
* an atom is ``(= t s)`` with ``t`` of level at most ``term_depth`` and
  ``s`` of level 0: ``A = m^2 sum_{i <= term_depth} (2m)^i`` atoms;
* a matrix is an atom, a negated atom, or a conjunction or disjunction of
  two atoms: ``2A + 2A^2`` matrices (fewer if ``kinds`` is restricted);
* a prefix binds ``q <= max_depth`` distinct pool variables, each
  existentially or universally: ``sum_q v!/(v-q)! 2^q`` prefixes.

The corpus size is the product of the last two counts.  Formulas are
ordered by quantifier depth, prefix, matrix kind and then atoms, and
:func:`formula_at` maps a rank straight to its formula, so samples never
enumerate the space.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

from .syntax.ast import And, App, Const, Eq, Exists, Forall, Formula, Not, Or, Term, Var
from .syntax.text import print_formula

KINDS = ("atom", "not", "and", "or")
OPS = ("+", "*")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusSpec:
    max_depth: int = 2
    variables: tuple[str, ...] = ("x", "y", "z")
    term_depth: int = 2
    kinds: tuple[str, ...] = KINDS

    def __post_init__(self) -> None:
        if self.max_depth < 0 or self.term_depth < 0:
            raise CorpusError("bounds must be >= 0")
        if len(set(self.variables)) != len(self.variables) or not self.variables:
            raise CorpusError("variable pool must be non-empty and distinct")
        if self.max_depth > len(self.variables):
            raise CorpusError("quantifier depth exceeds the variable pool")
        unknown = set(self.kinds) - set(KINDS)
        if unknown or not self.kinds:
            raise CorpusError(f"matrix kinds must be drawn from {KINDS}")
        object.__setattr__(self, "kinds", tuple(k for k in KINDS if k in self.kinds))

    def to_json(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "variables": list(self.variables),
            "term_depth": self.term_depth,
            "kinds": list(self.kinds),
        }

    # -- building blocks -------------------------------------------------

    @cached_property
    def levels(self) -> tuple[tuple[Term, ...], ...]:
        base = tuple(Var(v) for v in self.variables) + (Const("0"), Const("1"))
        out = [base]
        for _ in range(self.term_depth):
            out.append(tuple(App(op, (a, b)) for op in OPS for a in out[-1] for b in base))
        return tuple(out)

    @cached_property
    def terms(self) -> tuple[Term, ...]:
        return tuple(t for level in self.levels for t in level)

    @property
    def atom_count(self) -> int:
        return len(self.terms) * len(self.levels[0])

    def atom(self, i: int) -> Eq:
        base = self.levels[0]
        return Eq(self.terms[i // len(base)], base[i % len(base)])

    def matrix_count(self, kind: str) -> int:
        return self.atom_count ** (2 if kind in ("and", "or") else 1)

    def matrix(self, kind: str, i: int) -> Formula:
        A = self.atom_count
        if kind == "atom":
            return self.atom(i)
        if kind == "not":
            return Not(self.atom(i))
        pair = (self.atom(i // A), self.atom(i % A))
        return And(pair) if kind == "and" else Or(pair)

    @property
    def matrices(self) -> int:
        return sum(self.matrix_count(k) for k in self.kinds)

    def prefix_count(self, q: int) -> int:
        return math.perm(len(self.variables), q) * 2**q

    def prefix(self, q: int, i: int) -> list[tuple[type, str]]:
        """The ``i``-th prefix of length ``q``: variables first, then the
        quantifier pattern (bit ``k`` set = universal at position ``k``)."""
        choice, pattern = divmod(i, 2**q)
        pool = list(self.variables)
        names = []
        for k in range(q):
            width = math.perm(len(pool) - 1, q - k - 1)
            j, choice = divmod(choice, width)
            names.append(pool.pop(j))
        return [(Forall if pattern >> (q - 1 - k) & 1 else Exists, v) for k, v in enumerate(names)]

    # -- the corpus --------------------------------------------------------

    @property
    def size(self) -> int:
        return self.matrices * sum(self.prefix_count(q) for q in range(self.max_depth + 1))

    def formula_at(self, rank: int) -> Formula:
        if not 0 <= rank < self.size:
            raise CorpusError(f"rank {rank} outside the corpus of size {self.size}")
        M = self.matrices
        for q in range(self.max_depth + 1):
            block = self.prefix_count(q) * M
            if rank < block:
                break
            rank -= block
        p, m = divmod(rank, M)
        for kind in self.kinds:
            if m < self.matrix_count(kind):
                break
            m -= self.matrix_count(kind)
        f = self.matrix(kind, m)
        for quant, var in reversed(self.prefix(q, p)):
            f = quant(var, f)
        return f

    def __iter__(self) -> Iterator[Formula]:
        for rank in range(self.size):
            yield self.formula_at(rank)


def corpus_size(spec: CorpusSpec) -> int:
    return spec.size


def sample_ranks(spec: CorpusSpec, count: int | None, seed: int = 0) -> list[int]:
    """Ranks of a seeded uniform sample without replacement, in canonical
    order; every rank when ``count`` is ``None`` or covers the space."""
    if count is None or count >= spec.size:
        return list(range(spec.size))
    if count < 0:
        raise CorpusError("sample size must be >= 0")
    return sorted(random.Random(seed).sample(range(spec.size), count))


def generate_corpus(spec: CorpusSpec, sample: int | None = None, seed: int = 0) -> list[Formula]:
    return [spec.formula_at(r) for r in sample_ranks(spec, sample, seed)]


def corpus_text(formulas: Sequence[Formula], sig_ref: str = "ring") -> str:
    return "\n".join([f"(sig {sig_ref})"] + [print_formula(f) for f in formulas]) + "\n"


ACCEPTANCE_SPEC = CorpusSpec(max_depth=2, variables=("x", "y", "z"), term_depth=2)
