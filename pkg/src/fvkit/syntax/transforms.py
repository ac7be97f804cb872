"""Syntactic transforms: NNF, prenex form, relativization, projector
translation and unfolding of derivation terms into jet variables."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .ast import (
    And,
    App,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Imp,
    Not,
    Or,
    Quantifier,
    Rel,
    Signature,
    Term,
    Var,
    all_vars,
    conj,
    fresh_name,
    is_quantifier_free,
    join_prefix,
    rename_bound_apart,
    split_prefix,
    substitute,
    term_vars,
    walk,
)


class ProjectorError(FormulaError):
    """Formula cannot be brought into projector form."""


# ------------------------------------------------------------------ NNF


def nnf(f: Formula) -> Formula:
    """Negation normal form: implications removed, negations on atoms only."""
    if isinstance(f, (Eq, Rel)):
        return f
    if isinstance(f, And):
        return And(tuple(nnf(g) for g in f.args))
    if isinstance(f, Or):
        return Or(tuple(nnf(g) for g in f.args))
    if isinstance(f, Imp):
        return Or((nnf(Not(f.left)), nnf(f.right)))
    if isinstance(f, Quantifier):
        return type(f)(f.var, nnf(f.body))
    g = f.body
    if isinstance(g, (Eq, Rel)):
        return f
    if isinstance(g, Not):
        return nnf(g.body)
    if isinstance(g, And):
        return Or(tuple(nnf(Not(h)) for h in g.args))
    if isinstance(g, Or):
        return And(tuple(nnf(Not(h)) for h in g.args))
    if isinstance(g, Imp):
        return And((nnf(g.left), nnf(Not(g.right))))
    if isinstance(g, Exists):
        return Forall(g.var, nnf(Not(g.body)))
    return Exists(g.var, nnf(Not(g.body)))


# --------------------------------------------------------------- prenex


def to_prenex(f: Formula) -> Formula:
    """Prenex normal form of ``f``.

    Bound variables are first renamed apart, the formula is put in NNF and
    quantifiers are pulled outside-in and left to right; when several
    quantifiers can be pulled next, an existential goes first.
    """
    g = nnf(rename_bound_apart(f))
    prefix, matrix = _prenex(g)
    return join_prefix(prefix, matrix)


def _prenex(f: Formula):
    if isinstance(f, Quantifier):
        prefix, matrix = _prenex(f.body)
        return ((type(f), f.var),) + prefix, matrix
    if isinstance(f, (And, Or)):
        parts = [_prenex(g) for g in f.args]
        queues = [list(p) for p, _ in parts]
        merged = []
        while any(queues):
            pick = next((q for q in queues if q and q[0][0] is Exists), None)
            if pick is None:
                pick = next(q for q in queues if q)
            merged.append(pick.pop(0))
        return tuple(merged), type(f)(tuple(m for _, m in parts))
    return (), f


# -------------------------------------------------------- relativization


def relativize(f: Formula, predicate: str = "P", sig: Signature | None = None) -> Formula:
    """Restrict every quantifier of ``f`` to the unary predicate."""
    if sig is not None:
        arity = sig.relation_arity.get(predicate)
        if arity is not None and arity != 1:
            raise FormulaError(f"{predicate!r} is not unary")
        if predicate in sig.symbols and arity is None:
            raise FormulaError(f"{predicate!r} is not a relation symbol")

    def go(g: Formula) -> Formula:
        if isinstance(g, Exists):
            return Exists(g.var, And((Rel(predicate, (Var(g.var),)), go(g.body))))
        if isinstance(g, Forall):
            return Forall(g.var, Imp(Rel(predicate, (Var(g.var),)), go(g.body)))
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


# ------------------------------------------------------------- projector

_ZERO = Const("0")


def _zero_term(a: Term, b: Term) -> Term:
    """A term whose vanishing expresses ``a = b``."""
    if b == _ZERO:
        return a
    if a == _ZERO:
        return b
    return App("-", (a, b))


def _encode(f: Formula, p: str) -> tuple[bool, Term]:
    """``(True, t)`` means ``f <-> t = 0``; ``(False, t)`` means ``f <-> t != 0``."""
    if isinstance(f, Eq):
        return True, _zero_term(f.left, f.right)
    if isinstance(f, Rel):
        raise ProjectorError(f"relation atom {f.name!r} cannot be encoded as an equation")
    if isinstance(f, Not):
        pos, t = _encode(f.body, p)
        return not pos, t
    if isinstance(f, Imp):
        return _encode(Or((Not(f.left), f.right)), p)
    if isinstance(f, (And, Or)):
        if not f.args:
            # empty conjunction is 0 = 0, empty disjunction 0 != 0
            return isinstance(f, And), _ZERO
        acc = _encode(f.args[0], p)
        for g in f.args[1:]:
            acc = _combine(acc, _encode(g, p), isinstance(f, And), p)
        return acc
    raise ProjectorError("quantifier inside matrix")


def _combine(x, y, is_and: bool, p: str):
    (px, a), (py, b) = x, y

    def P(u, w):
        return App(p, (u, w))

    if is_and:
        if px and py:  # a=0 & b=0  <->  p(a,b)+b = 0
            return True, App("+", (P(a, b), b))
        if not px and not py:  # not(a=0 | b=0)
            return False, App("-", (P(a, b), a))
        if not px and py:  # a!=0 & b=0  <->  not(a=0 | b!=0)
            return False, P(a, b)
        return False, P(b, a)
    if px and py:  # a=0 | b=0  <->  p(a,b) = a
        return True, App("-", (P(a, b), a))
    if not px and not py:  # not(a=0 & b=0)
        return False, App("+", (P(a, b), b))
    if px and not py:  # a=0 | b!=0  <->  p(a,b) = 0
        return True, P(a, b)
    return True, P(b, a)


def encode_open(f: Formula, p: str = "p") -> Formula:
    """Equivalent (in any abelian group expanded by the projector) atomic or
    negated-atomic formula for a relation-free open formula."""
    if not is_quantifier_free(f):
        raise ProjectorError("encode_open expects a quantifier-free formula")
    pos, t = _encode(f, p)
    atom = Eq(t, _ZERO)
    return atom if pos else Not(atom)


def _eliminate_negated_relations(f: Formula, sig: Signature | None) -> Formula:
    """Replace each negated relation atom (in NNF) by its complement formula."""

    def go(g: Formula) -> Formula:
        if isinstance(g, Not) and isinstance(g.body, Rel):
            r = g.body
            ax = sig.dagger_map.get(r.name) if sig is not None else None
            if ax is None:
                raise ProjectorError(f"negated relation {r.name!r} has no positive complement")
            body = rename_bound_apart(ax.formula, set(ax.vars) | all_vars(f))
            return substitute(body, dict(zip(ax.vars, r.args)))
        if isinstance(g, And):
            return And(tuple(go(h) for h in g.args))
        if isinstance(g, Or):
            return Or(tuple(go(h) for h in g.args))
        if isinstance(g, Quantifier):
            return type(g)(g.var, go(g.body))
        return g

    return go(f)


def projector_translate(f: Formula, sig: Signature | None = None, p: str = "p") -> Formula:
    """Translate ``f`` into ``forall w Q1 u1 ... Qm um h`` over the signature
    expanded by the projector, where ``h`` is atomic (or a conjunction of
    positive relation atoms and one equation when ``f`` uses relations).

    Equivalent to ``f`` in every structure with more than one element whose
    ``p`` is the projector.
    """
    g = to_prenex(f)
    if any(isinstance(h, Rel) for h in walk(g)):
        g = to_prenex(_eliminate_negated_relations(g, sig))
    prefix, matrix = split_prefix(g)
    parts = matrix.args if isinstance(matrix, And) else (matrix,)
    rel_atoms = tuple(h for h in parts if isinstance(h, Rel))
    rest = tuple(h for h in parts if not isinstance(h, Rel))
    if any(isinstance(h, Rel) for r in rest for h in walk(r)):
        raise ProjectorError("relation atom under a disjunction or negation")
    pos, t = _encode(conj(rest) if rest else And(()), p)
    w = fresh_name("w", all_vars(g))
    if pos:
        hat = Eq(t, _ZERO)
    else:
        # w = 0 | t != 0; some w != 0 exists once |D| > 1
        hat = Eq(App(p, (Var(w), t)), _ZERO)
    body = conj(rel_atoms + (hat,)) if rel_atoms else hat
    return Forall(w, join_prefix(prefix, body))


def projector_sentence_shape(f: Formula) -> str:
    """``'forall-w-atomic'`` or ``'forall-w-conjunction'`` (sanity helper)."""
    prefix, matrix = split_prefix(f)
    if not prefix or prefix[0][0] is not Forall:
        return "other"
    return "forall-w-atomic" if isinstance(matrix, Eq) else "forall-w-conjunction"


# ------------------------------------------------- differential unfolding


@dataclass(frozen=True)
class JetSpec:
    """Per-variable derivation orders ``m = (m1, ..., mn)``."""

    variables: tuple[str, ...]
    orders: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.variables) != len(self.orders) or any(m < 0 for m in self.orders):
            raise ValueError("orders must be non-negative, one per variable")

    def jet_names(self) -> dict[str, tuple[str, ...]]:
        return {x: tuple(jet_name(x, k) for k in range(m + 1)) for x, m in zip(self.variables, self.orders)}

    def jet_assignment(self, values: Mapping[str, int], derivation) -> dict[str, int]:
        """Values of the jet variables: ``x_dk = d^k(x)`` under ``values``."""
        out: dict[str, int] = {}
        for x, m in zip(self.variables, self.orders):
            a = values[x]
            for k in range(m + 1):
                out[jet_name(x, k)] = a
                a = derivation[a]
        return out


def jet_name(var: str, k: int) -> str:
    return f"{var}_d{k}"


def _push_derivation(t: Term, d: str, order: int) -> Term:
    """``d^order(t)`` rewritten so that ``d`` is applied to variables only."""
    if order == 0:
        return _normalize_d(t, d)
    if isinstance(t, Var):
        out: Term = t
        for _ in range(order):
            out = App(d, (out,))
        return out
    if isinstance(t, Const):
        if t.name in ("0", "1"):
            return _ZERO
        raise FormulaError(f"derivative of constant {t.name!r} is not determined")
    if t.fn == d:
        return _push_derivation(t.args[0], d, order + 1)
    once = _derive_once(t, d)
    return _push_derivation(once, d, order - 1)


def _derive_once(t: App, d: str) -> Term:
    def D(u: Term) -> Term:
        return App(d, (u,))

    if t.fn in ("+", "-"):
        return App(t.fn, (D(t.args[0]), D(t.args[1])))
    if t.fn == "neg":
        return App("neg", (D(t.args[0]),))
    if t.fn == "*":
        a, b = t.args
        return App("+", (App("*", (D(a), b)), App("*", (a, D(b)))))
    raise FormulaError(f"no derivation rule for {t.fn!r}")


def _normalize_d(t: Term, d: str) -> Term:
    if isinstance(t, App):
        if t.fn == d:
            return _push_derivation(t.args[0], d, 1)
        return App(t.fn, tuple(_normalize_d(a, d) for a in t.args))
    return t


def _jetify(t: Term, d: str, orders: dict[str, int]) -> Term:
    depth, inner = 0, t
    while isinstance(inner, App) and inner.fn == d:
        depth += 1
        inner = inner.args[0]
    if isinstance(inner, Var):
        orders[inner.name] = max(orders.get(inner.name, 0), depth)
        return Var(jet_name(inner.name, depth))
    if depth:
        raise FormulaError("derivation left on a compound term")
    if isinstance(t, App):
        return App(t.fn, tuple(_jetify(a, d, orders) for a in t.args))
    return t


def unfold_differential_terms(f: Formula, d: str = "d") -> tuple[Formula, JetSpec]:
    """Rewrite a quantifier-free formula with derivation symbol ``d`` as a
    formula in jet variables ``x_d0, x_d1, ...`` plus the order tuple."""
    if not is_quantifier_free(f):
        raise FormulaError("unfold_differential_terms expects a quantifier-free formula")
    order_of: dict[str, int] = {}
    for g in walk(f):
        if isinstance(g, (Eq, Rel)):
            for t in (g.left, g.right) if isinstance(g, Eq) else g.args:
                for x in term_vars(t):
                    order_of.setdefault(x, 0)
    existing = set(order_of)
    for x in existing:
        for k in range(8):
            if jet_name(x, k) in existing:
                raise FormulaError(f"variable {jet_name(x, k)!r} clashes with jet naming")

    def fix(t: Term) -> Term:
        return _jetify(_normalize_d(t, d), d, order_of)

    out = _map_atoms(f, fix)
    spec = JetSpec(tuple(order_of), tuple(order_of[x] for x in order_of))
    return out, spec


def _map_atoms(f: Formula, fn) -> Formula:
    if isinstance(f, Eq):
        return Eq(fn(f.left), fn(f.right))
    if isinstance(f, Rel):
        return Rel(f.name, tuple(fn(a) for a in f.args))
    if isinstance(f, Not):
        return Not(_map_atoms(f.body, fn))
    if isinstance(f, And):
        return And(tuple(_map_atoms(g, fn) for g in f.args))
    if isinstance(f, Or):
        return Or(tuple(_map_atoms(g, fn) for g in f.args))
    return Imp(_map_atoms(f.left, fn), _map_atoms(f.right, fn))


# ------------------------------------------------------ connective basis


def to_basic(f: Formula) -> Formula:
    """Rewrite over the basis ``not / and / exists`` (``or``, ``imp`` and
    ``forall`` expanded)."""
    if isinstance(f, (Eq, Rel)):
        return f
    if isinstance(f, Not):
        return Not(to_basic(f.body))
    if isinstance(f, And):
        return And(tuple(to_basic(g) for g in f.args))
    if isinstance(f, Or):
        return Not(And(tuple(Not(to_basic(g)) for g in f.args)))
    if isinstance(f, Imp):
        return Not(And((to_basic(f.left), Not(to_basic(f.right)))))
    if isinstance(f, Exists):
        return Exists(f.var, to_basic(f.body))
    return Not(Exists(f.var, Not(to_basic(f.body))))
