"""Terms, formulas and signatures.

Formula and term values are frozen dataclasses, hashable and structurally
comparable.  Variables are referred to by name; capture is avoided by
renaming binders against the names actually present in the formula, so no
global counter is involved.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union

IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")
RESERVED = frozenset({"=", "not", "and", "or", "imp", "exists", "forall"})


class FormulaError(ValueError):
    """Ill-formed term, formula or signature."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple["Term", ...]

    def __str__(self) -> str:
        return "(" + " ".join([self.fn, *map(str, self.args)]) + ")"


Term = Union[Var, Const, App]

# ------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Eq, Rel, Not, And, Or, Imp, Exists, Forall]
Quantifier = (Exists, Forall)
TRUE = And(())
FALSE = Or(())


def conj(items: Iterable[Formula]) -> Formula:
    """Conjunction that avoids a one-element ``and`` wrapper."""
    items = tuple(items)
    return items[0] if len(items) == 1 else And(items)


def disj(items: Iterable[Formula]) -> Formula:
    items = tuple(items)
    return items[0] if len(items) == 1 else Or(items)


def iff(a: Formula, b: Formula) -> Formula:
    return And((Imp(a, b), Imp(b, a)))


def exists_many(names: Iterable[str], body: Formula) -> Formula:
    for v in reversed(tuple(names)):
        body = Exists(v, body)
    return body


def forall_many(names: Iterable[str], body: Formula) -> Formula:
    for v in reversed(tuple(names)):
        body = Forall(v, body)
    return body


# ------------------------------------------------------------ traversal


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, App):
        for a in t.args:
            yield from term_vars(a)


def _ordered(names: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(names))


def term_depth(t: Term) -> int:
    if isinstance(t, App):
        return 1 + max((term_depth(a) for a in t.args), default=0)
    return 0


def free_vars(f: Formula) -> tuple[str, ...]:
    """Free variables in order of first occurrence."""
    return _ordered(_free(f, frozenset()))


def _free(f: Formula, bound: frozenset) -> Iterator[str]:
    if isinstance(f, Eq):
        for t in (f.left, f.right):
            yield from (v for v in term_vars(t) if v not in bound)
    elif isinstance(f, Rel):
        for t in f.args:
            yield from (v for v in term_vars(t) if v not in bound)
    elif isinstance(f, Not):
        yield from _free(f.body, bound)
    elif isinstance(f, (And, Or)):
        for g in f.args:
            yield from _free(g, bound)
    elif isinstance(f, Imp):
        yield from _free(f.left, bound)
        yield from _free(f.right, bound)
    else:
        yield from _free(f.body, bound | {f.var})


def all_vars(f: Formula) -> set[str]:
    """Every variable name occurring in ``f``, bound or free."""
    out: set[str] = set()
    for node in walk(f):
        if isinstance(node, Quantifier):
            out.add(node.var)
        for t in atom_terms(node):
            out.update(term_vars(t))
    return out


def atom_terms(f: Formula) -> tuple[Term, ...]:
    if isinstance(f, Eq):
        return (f.left, f.right)
    if isinstance(f, Rel):
        return f.args
    return ()


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not, Exists, Forall)):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, Imp):
        return (f.left, f.right)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    yield f
    for g in children(f):
        yield from walk(g)


def is_atomic(f: Formula) -> bool:
    return isinstance(f, (Eq, Rel))


def is_quantifier_free(f: Formula) -> bool:
    return not any(isinstance(g, Quantifier) for g in walk(f))


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, Quantifier):
        return 1 + quantifier_depth(f.body)
    return max((quantifier_depth(g) for g in children(f)), default=0)


def max_term_depth(f: Formula) -> int:
    return max((term_depth(t) for g in walk(f) for t in atom_terms(g)), default=0)


def relation_symbols(f: Formula) -> set[str]:
    return {g.name for g in walk(f) if isinstance(g, Rel)}


def function_symbols(f: Formula) -> set[str]:
    out: set[str] = set()

    def visit(t: Term) -> None:
        if isinstance(t, App):
            out.add(t.fn)
            for a in t.args:
                visit(a)

    for g in walk(f):
        for t in atom_terms(g):
            visit(t)
    return out


def split_prefix(f: Formula) -> tuple[tuple[tuple[type, str], ...], Formula]:
    """Split the leading quantifier block: ``((Exists, 'x'), ...), matrix``."""
    prefix = []
    while isinstance(f, Quantifier):
        prefix.append((type(f), f.var))
        f = f.body
    return tuple(prefix), f


def join_prefix(prefix: Iterable[tuple[type, str]], matrix: Formula) -> Formula:
    for q, v in reversed(tuple(prefix)):
        matrix = q(v, matrix)
    return matrix


def is_prenex(f: Formula) -> bool:
    return is_quantifier_free(split_prefix(f)[1])


# --------------------------------------------------------- substitution


def fresh_name(base: str, avoid: set[str] | frozenset[str]) -> str:
    """``base`` with primes appended until it is not in ``avoid``."""
    name = base
    while name in avoid:
        name += "'"
    return name


def subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, App):
        return App(t.fn, tuple(subst_term(a, mapping) for a in t.args))
    return t


def map_terms(f: Formula, fn) -> Formula:
    """Apply ``fn`` to every top-level atom term (no binder handling)."""
    if isinstance(f, Eq):
        return Eq(fn(f.left), fn(f.right))
    if isinstance(f, Rel):
        return Rel(f.name, tuple(fn(a) for a in f.args))
    if isinstance(f, Not):
        return Not(map_terms(f.body, fn))
    if isinstance(f, And):
        return And(tuple(map_terms(g, fn) for g in f.args))
    if isinstance(f, Or):
        return Or(tuple(map_terms(g, fn) for g in f.args))
    if isinstance(f, Imp):
        return Imp(map_terms(f.left, fn), map_terms(f.right, fn))
    return type(f)(f.var, map_terms(f.body, fn))


def substitute(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Capture-avoiding substitution of terms for free variables."""
    mapping = {k: v for k, v in mapping.items()}
    if not mapping:
        return f
    if isinstance(f, Eq):
        return Eq(subst_term(f.left, mapping), subst_term(f.right, mapping))
    if isinstance(f, Rel):
        return Rel(f.name, tuple(subst_term(a, mapping) for a in f.args))
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, And):
        return And(tuple(substitute(g, mapping) for g in f.args))
    if isinstance(f, Or):
        return Or(tuple(substitute(g, mapping) for g in f.args))
    if isinstance(f, Imp):
        return Imp(substitute(f.left, mapping), substitute(f.right, mapping))
    # quantifier
    inner = {k: v for k, v in mapping.items() if k != f.var}
    body_free = set(free_vars(f.body))
    inner = {k: v for k, v in inner.items() if k in body_free}
    if not inner:
        return f
    incoming = {v for t in inner.values() for v in term_vars(t)}
    var = f.var
    body = f.body
    if var in incoming:
        avoid = incoming | all_vars(f.body) | set(inner)
        new = fresh_name(var, avoid)
        body = substitute(body, {var: Var(new)})
        var = new
    return type(f)(var, substitute(body, inner))


def rename_bound_apart(f: Formula, used: set[str] | None = None) -> Formula:
    """Rectify ``f``: every binder gets a distinct name, disjoint from the
    free variables.  First occurrences keep their names."""
    if used is None:
        used = set(free_vars(f))
    names = all_vars(f) | used

    def go(g: Formula) -> Formula:
        if isinstance(g, Quantifier):
            var, body = g.var, g.body
            if var in used:
                new = fresh_name(var, names | used)
                names.add(new)
                body = substitute(body, {var: Var(new)})
                var = new
            used.add(var)
            return type(g)(var, go(body))
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, And):
            return And(tuple(go(h) for h in g.args))
        if isinstance(g, Or):
            return Or(tuple(go(h) for h in g.args))
        if isinstance(g, Imp):
            return Imp(go(g.left), go(g.right))
        return g

    return go(f)


# ------------------------------------------------------------ signatures


@dataclass(frozen=True)
class DaggerAxiom:
    """Positive existential definition of a relation's complement:
    ``not rel(vars)`` holds iff ``formula`` holds."""

    relation: str
    vars: tuple[str, ...]
    formula: Formula


@dataclass(frozen=True)
class Signature:
    name: str
    functions: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()
    relations: tuple[tuple[str, int], ...] = ()
    dagger: tuple[DaggerAxiom, ...] = field(default=())

    def __post_init__(self) -> None:
        names = [s for s, _ in self.functions] + list(self.constants) + [
            s for s, _ in self.relations
        ]
        seen: set[str] = set()
        for s in names:
            if s in seen:
                raise FormulaError(f"signature {self.name}: duplicate symbol {s!r}")
            if s in RESERVED:
                raise FormulaError(f"signature {self.name}: reserved word {s!r}")
            seen.add(s)
        for s, k in self.functions + self.relations:
            if k < 1:
                raise FormulaError(f"signature {self.name}: arity of {s!r} must be >= 1")
        rels = dict(self.relations)
        for ax in self.dagger:
            if ax.relation not in rels:
                raise FormulaError(f"dagger entry for unknown relation {ax.relation!r}")
            if len(ax.vars) != rels[ax.relation]:
                raise FormulaError(
                    f"dagger entry for {ax.relation!r}: expected {rels[ax.relation]} variables"
                )
            if set(free_vars(ax.formula)) != set(ax.vars) or len(set(ax.vars)) != len(ax.vars):
                raise FormulaError(
                    f"dagger entry for {ax.relation!r}: free variables must be exactly {ax.vars}"
                )
            if not is_positive_existential(ax.formula):
                raise FormulaError(
                    f"dagger entry for {ax.relation!r} is not positive existential"
                )

    @cached_property
    def function_arity(self) -> dict[str, int]:
        return dict(self.functions)

    @cached_property
    def relation_arity(self) -> dict[str, int]:
        return dict(self.relations)

    @cached_property
    def dagger_map(self) -> dict[str, DaggerAxiom]:
        return {ax.relation: ax for ax in self.dagger}

    @cached_property
    def symbols(self) -> frozenset[str]:
        return frozenset(
            [s for s, _ in self.functions] + list(self.constants) + [s for s, _ in self.relations]
        )

    def extend(
        self,
        name: str,
        functions: Iterable[tuple[str, int]] = (),
        constants: Iterable[str] = (),
        relations: Iterable[tuple[str, int]] = (),
        dagger: Iterable[DaggerAxiom] = (),
    ) -> "Signature":
        return Signature(
            name,
            self.functions + tuple(functions),
            self.constants + tuple(constants),
            self.relations + tuple(relations),
            self.dagger + tuple(dagger),
        )

    def contains(self, other: "Signature") -> bool:
        return (
            set(other.functions) <= set(self.functions)
            and set(other.constants) <= set(self.constants)
            and set(other.relations) <= set(self.relations)
        )


def is_positive_existential(f: Formula) -> bool:
    """No universal quantifier, implication, or negation except directly in
    front of an equation (disequations such as ``z != 0`` are allowed)."""
    if isinstance(f, (Eq, Rel)):
        return True
    if isinstance(f, Not):
        return isinstance(f.body, Eq)
    if isinstance(f, (And, Or)):
        return all(is_positive_existential(g) for g in f.args)
    if isinstance(f, Exists):
        return is_positive_existential(f.body)
    return False


def check_term(t: Term, sig: Signature) -> None:
    if isinstance(t, Var):
        if not IDENT_RE.match(t.name) or t.name in sig.symbols or t.name in RESERVED:
            raise FormulaError(f"bad variable name {t.name!r}")
    elif isinstance(t, Const):
        if t.name not in sig.constants:
            raise FormulaError(f"unknown constant {t.name!r}")
    else:
        arity = sig.function_arity.get(t.fn)
        if arity is None:
            raise FormulaError(f"unknown function symbol {t.fn!r}")
        if arity != len(t.args):
            raise FormulaError(f"{t.fn!r} expects {arity} arguments, got {len(t.args)}")
        for a in t.args:
            check_term(a, sig)


def check_formula(f: Formula, sig: Signature) -> None:
    """Raise :class:`FormulaError` unless ``f`` is arity-correct over ``sig``."""
    for g in walk(f):
        if isinstance(g, Rel):
            arity = sig.relation_arity.get(g.name)
            if arity is None:
                raise FormulaError(f"unknown relation symbol {g.name!r}")
            if arity != len(g.args):
                raise FormulaError(f"{g.name!r} expects {arity} arguments, got {len(g.args)}")
        elif isinstance(g, Quantifier):
            if not IDENT_RE.match(g.var) or g.var in sig.symbols or g.var in RESERVED:
                raise FormulaError(f"bad bound variable {g.var!r}")
        for t in atom_terms(g):
            check_term(t, sig)
