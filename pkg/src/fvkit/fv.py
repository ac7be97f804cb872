"""Determining sequences for finite full boolean products.

A determining sequence for ``f`` is a boolean-algebra formula ``Phi`` in
designated variables ``z1 .. zl`` together with factor formulas
``psi1 .. psil`` such that, in a product ``A`` over index set ``X``,

    A |= f[a]   iff   P(X) |= Phi[z_i := truth set of psi_i at a].

``Phi`` may contain a partition selector: ``Partition(blocks, body)`` holds
when the points of ``X`` can be labelled by blocks so that every point lies
inside the bound of its block and ``body`` holds with each block variable
set to the points carrying its label.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import sexpr
from .product import BooleanProduct, ProductError, report
from .semantics.boolean import powerset_algebra
from .semantics.evaluate import compile_formula, eval_formula, truth_table
from .syntax.ast import (
    TRUE,
    And,
    App,
    Const,
    Eq,
    Exists,
    Formula,
    FormulaError,
    Not,
    Or,
    Rel,
    Term,
    Var,
    all_vars,
    conj,
    exists_many,
    free_vars,
    fresh_name,
    split_prefix,
    term_vars,
)
from .syntax.signatures import BOOLEAN_ALGEBRA
from .syntax.text import formula_to_sexpr, term_from_sexpr, term_to_sexpr
from .syntax.transforms import to_basic

DEFAULT_CAP = 12

_BA_ZERO, _BA_ONE = Const("0"), Const("1")


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Partition selector over labelled block variables."""

    blocks: tuple[tuple[str, Term], ...]
    body: "BAFormula"


BAFormula = object  # Eq / Not / And / Or / Partition over BA terms


def designated(i: int) -> str:
    return f"z{i + 1}"


@dataclass(frozen=True)
class DeterminingSequence:
    phi_star: BAFormula
    psis: tuple[Formula, ...]
    variables: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        extra = {v for psi in self.psis for v in free_vars(psi)} - set(self.variables)
        if extra:
            raise CompileError(f"factor formulas have free variables outside {self.variables}: {sorted(extra)}")
        names = _ba_free(self.phi_star)
        allowed = {designated(i) for i in range(len(self.psis))}
        if not names <= allowed:
            raise CompileError(f"designated variables {sorted(names - allowed)} have no factor formula")

    @property
    def length(self) -> int:
        return len(self.psis)

    def to_json(self) -> dict:
        return {
            "phi_star": sexpr.dumps(ba_to_sexpr(self.phi_star)),
            "psis": [sexpr.dumps(formula_to_sexpr(p)) for p in self.psis],
            "variables": list(self.variables),
        }

    @staticmethod
    def from_json(data: Mapping, sig) -> "DeterminingSequence":
        from .syntax.text import parse_formula

        return DeterminingSequence(
            ba_from_sexpr(sexpr.parse_one(data["phi_star"])),
            tuple(parse_formula(p, sig) for p in data["psis"]),
            tuple(data.get("variables", ())),
        )


# ------------------------------------------------------ BA formula helpers


def _ba_term_vars(t: Term) -> set[str]:
    return set(term_vars(t))


def _ba_free(f: BAFormula) -> set[str]:
    if isinstance(f, Eq):
        return _ba_term_vars(f.left) | _ba_term_vars(f.right)
    if isinstance(f, Not):
        return _ba_free(f.body)
    if isinstance(f, (And, Or)):
        return set().union(*(_ba_free(g) for g in f.args))
    if isinstance(f, Partition):
        inner = _ba_free(f.body) - {b for b, _ in f.blocks}
        return inner.union(*(_ba_term_vars(t) for _, t in f.blocks))
    raise CompileError(f"not a boolean-algebra formula: {f!r}")


def _ba_names(f: BAFormula) -> set[str]:
    out = _ba_free(f)
    if isinstance(f, Partition):
        out |= {b for b, _ in f.blocks} | _ba_names(f.body)
    elif isinstance(f, Not):
        out |= _ba_names(f.body)
    elif isinstance(f, (And, Or)):
        for g in f.args:
            out |= _ba_names(g)
    return out


def _subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, App):
        return App(t.fn, tuple(_subst_term(a, mapping) for a in t.args))
    return t


def ba_substitute(f: BAFormula, mapping: Mapping[str, Term]) -> BAFormula:
    """Simultaneous substitution; block names are assumed fresh."""
    if isinstance(f, Eq):
        return Eq(_subst_term(f.left, mapping), _subst_term(f.right, mapping))
    if isinstance(f, Not):
        return Not(ba_substitute(f.body, mapping))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(ba_substitute(g, mapping) for g in f.args))
    inner = {k: v for k, v in mapping.items() if k not in {b for b, _ in f.blocks}}
    return Partition(
        tuple((b, _subst_term(t, mapping)) for b, t in f.blocks),
        ba_substitute(f.body, inner),
    )


def ba_to_sexpr(f: BAFormula):
    if isinstance(f, Partition):
        return ["partition", [[b, term_to_sexpr(t)] for b, t in f.blocks], ba_to_sexpr(f.body)]
    if isinstance(f, Not):
        return ["not", ba_to_sexpr(f.body)]
    if isinstance(f, (And, Or)):
        return ["and" if isinstance(f, And) else "or", *(ba_to_sexpr(g) for g in f.args)]
    return formula_to_sexpr(f)


def ba_from_sexpr(node) -> BAFormula:
    if not isinstance(node, list) or not node:
        raise CompileError(f"bad boolean-algebra formula {sexpr.dumps(node)!r}")
    head, args = node[0], node[1:]
    if head == "=" and len(args) == 2:
        return Eq(term_from_sexpr(args[0], BOOLEAN_ALGEBRA), term_from_sexpr(args[1], BOOLEAN_ALGEBRA))
    if head == "not" and len(args) == 1:
        return Not(ba_from_sexpr(args[0]))
    if head in ("and", "or"):
        return (And if head == "and" else Or)(tuple(ba_from_sexpr(a) for a in args))
    if head == "partition" and len(args) == 2:
        blocks = tuple((str(b), term_from_sexpr(t, BOOLEAN_ALGEBRA)) for b, t in args[0])
        return Partition(blocks, ba_from_sexpr(args[1]))
    raise CompileError(f"bad boolean-algebra formula {sexpr.dumps(node)!r}")


def _join_all(terms: Sequence[Term]) -> Term:
    if not terms:
        return _BA_ZERO
    out = terms[0]
    for t in terms[1:]:
        out = App("join", (out, t))
    return out


def _meet_all(terms: Sequence[Term]) -> Term:
    if not terms:
        return _BA_ONE
    out = terms[0]
    for t in terms[1:]:
        out = App("meet", (out, t))
    return out


def quantified_form(f: BAFormula) -> Formula:
    """The partition selectors spelled out with genuine quantifiers, giving
    an ordinary formula over the boolean-algebra signature."""
    if isinstance(f, Eq):
        return f
    if isinstance(f, Not):
        return Not(quantified_form(f.body))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(quantified_form(g) for g in f.args))
    names = [Var(b) for b, _ in f.blocks]
    clauses: list[Formula] = []
    for i, j in itertools.combinations(range(len(names)), 2):
        clauses.append(Eq(App("meet", (names[i], names[j])), _BA_ZERO))
    clauses.append(Eq(_join_all(names), _BA_ONE))
    for b, (_, bound) in zip(names, f.blocks):
        clauses.append(Eq(App("meet", (b, bound)), b))
    clauses.append(quantified_form(f.body))
    return exists_many([b for b, _ in f.blocks], And(tuple(clauses)))


# ---------------------------------------------------------------- evaluator


def _ba_term(t: Term, env: Mapping[str, int], full: int) -> int:
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return full if t.name == "1" else 0
    if t.fn == "meet":
        return _ba_term(t.args[0], env, full) & _ba_term(t.args[1], env, full)
    if t.fn == "join":
        return _ba_term(t.args[0], env, full) | _ba_term(t.args[1], env, full)
    return full & ~_ba_term(t.args[0], env, full)


def eval_ba(f: BAFormula, env: Mapping[str, int], points: int) -> bool:
    """Evaluate in the powerset algebra of ``points`` points; subsets are
    bitmasks.  Partition selectors enumerate labellings of the points."""
    full = (1 << points) - 1
    env = dict(env)

    def go(g: BAFormula) -> bool:
        if isinstance(g, Eq):
            return _ba_term(g.left, env, full) == _ba_term(g.right, env, full)
        if isinstance(g, Not):
            return not go(g.body)
        if isinstance(g, And):
            return all(go(h) for h in g.args)
        if isinstance(g, Or):
            return any(go(h) for h in g.args)
        bounds = [_ba_term(t, env, full) for _, t in g.blocks]
        choices = []
        for x in range(points):
            allowed = [j for j, m in enumerate(bounds) if m >> x & 1]
            if not allowed:
                return False
            choices.append(allowed)
        names = [b for b, _ in g.blocks]
        saved = {b: env.get(b) for b in names}
        try:
            for labels in itertools.product(*choices):
                masks = [0] * len(names)
                for x, j in enumerate(labels):
                    masks[j] |= 1 << x
                env.update(zip(names, masks))
                if go(g.body):
                    return True
            return False
        finally:
            for b, old in saved.items():
                if old is None:
                    env.pop(b, None)
                else:
                    env[b] = old

    return go(f)


# ----------------------------------------------------------------- compiler


class _Compiler:
    def __init__(self, cap: int, dedup: bool):
        self.cap = cap
        self.dedup = dedup
        self.blocks = 0

    def fresh_block(self) -> str:
        self.blocks += 1
        return f"b{self.blocks}"

    def run(self, f: Formula) -> tuple[BAFormula, list[Formula]]:
        if isinstance(f, (Eq, Rel)):
            return Eq(Var(designated(0)), _BA_ONE), [f]
        if isinstance(f, Not):
            phi, psis = self.run(f.body)
            return Not(phi), psis
        if isinstance(f, And):
            phis, psis = [], []
            for g in f.args:
                phi_g, psis_g = self.run(g)
                rename = {}
                for i, psi in enumerate(psis_g):
                    if self.dedup and psi in psis:
                        k = psis.index(psi)
                    else:
                        k = len(psis)
                        psis.append(psi)
                    rename[designated(i)] = Var(designated(k))
                phis.append(ba_substitute(phi_g, rename))
            self._check(len(psis))
            return (phis[0] if len(phis) == 1 else And(tuple(phis))), psis
        if isinstance(f, Exists):
            phi, psis = self.run(f.body)
            ell = len(psis)
            self._check(2**ell)
            blocks = [self.fresh_block() for _ in range(2**ell)]
            chis = []
            for S in range(2**ell):
                parts = [psi if S >> i & 1 else Not(psi) for i, psi in enumerate(psis)]
                chis.append(Exists(f.var, conj(parts) if parts else TRUE))
            mapping = {
                designated(i): _join_all([Var(blocks[S]) for S in range(2**ell) if S >> i & 1])
                for i in range(ell)
            }
            body = ba_substitute(phi, mapping)
            sel = Partition(tuple((blocks[S], Var(designated(S))) for S in range(2**ell)), body)
            return sel, chis
        raise CompileError(f"formula not in the not/and/exists basis: {f!r}")

    def _check(self, ell: int) -> None:
        if ell > self.cap:
            raise CompileError(f"determining sequence would need {ell} factor formulas (cap {self.cap})")


def fv_compile(f: Formula, cap: int = DEFAULT_CAP, dedup: bool = True) -> DeterminingSequence:
    """Determining sequence for ``f`` by induction on ``to_basic(f)``.

    Raises :class:`CompileError` when more than ``cap`` factor formulas
    would be needed."""
    phi, psis = _Compiler(cap, dedup).run(to_basic(f))
    return DeterminingSequence(phi, tuple(psis), free_vars(f))


# ----------------------------------------------------------- transfer side


def _assignment(ds: DeterminingSequence, values) -> dict[str, tuple[int, ...]]:
    if isinstance(values, Mapping):
        missing = [v for v in ds.variables if v not in values]
        if missing:
            raise ProductError(f"free variables not assigned: {missing}")
        return {v: tuple(values[v]) for v in ds.variables}
    values = [tuple(a) for a in values]
    if len(values) != len(ds.variables):
        raise ProductError(f"expected {len(ds.variables)} values, got {len(values)}")
    return dict(zip(ds.variables, values))


def fv_truth_sets(A: BooleanProduct, ds: DeterminingSequence, values) -> list[int]:
    """Bitmasks (bit j = j-th index point) of the truth sets of the psis."""
    env = _assignment(ds, values)
    masks = []
    for psi in ds.psis:
        m = 0
        for j, F in enumerate(A.factors):
            if compile_formula(F, psi)({v: e[j] for v, e in env.items()}):
                m |= 1 << j
        masks.append(m)
    return masks


def fv_eval(A: BooleanProduct, ds: DeterminingSequence, values) -> bool:
    """Decide ``A |= f[values]`` from the truth sets of the factor formulas."""
    masks = fv_truth_sets(A, ds, values)
    env = {designated(i): m for i, m in enumerate(masks)}
    return eval_ba(ds.phi_star, env, len(A.factors))


def _psi_masks(A: BooleanProduct, ds: DeterminingSequence) -> np.ndarray:
    """Truth-set bitmasks of every psi at every assignment: an integer array
    of shape ``(len(psis),) + (len(A.elements),) * len(variables)``."""
    k = len(ds.variables)
    n = len(A.elements)
    coords = np.array(A.elements, dtype=np.intp).T  # coords[j][i] = j-th coordinate of element i
    grids = [coords.reshape((len(A.factors),) + tuple(n if a == b else 1 for b in range(k))) for a in range(k)]
    out = np.zeros((ds.length,) + (n,) * k, dtype=np.int64)
    for i, psi in enumerate(ds.psis):
        for j, F in enumerate(A.factors):
            table = truth_table(F, psi, ds.variables)
            hit = table[tuple(g[j] for g in grids)] if k else table
            out[i] |= hit.astype(np.int64) << j
    return out


def fv_verify(
    A: BooleanProduct,
    f: Formula,
    ds: DeterminingSequence | None = None,
    cap: int = DEFAULT_CAP,
    max_assignments: int | None = None,
    record: bool = False,
) -> dict:
    """Compare direct evaluation of ``f`` on ``A`` with evaluation through
    its determining sequence for every assignment (or the first
    ``max_assignments`` in lexicographic order)."""
    if ds is None:
        ds = fv_compile(f, cap=cap)
    if not A.is_full:
        raise ProductError("transfer is only checked on full products")
    points = len(A.factors)
    direct = truth_table(A.structure, f, ds.variables).reshape(-1)
    masks = _psi_masks(A, ds).reshape(ds.length, -1)
    if max_assignments is not None:
        direct, masks = direct[:max_assignments], masks[:, :max_assignments]
    if ds.length:
        keys, inverse = np.unique(masks.T, axis=0, return_inverse=True)
    else:
        keys, inverse = np.zeros((1, 0), dtype=np.int64), np.zeros(direct.size, dtype=np.intp)
    values = np.array(
        [eval_ba(ds.phi_star, {designated(i): int(m) for i, m in enumerate(key)}, points) for key in keys],
        dtype=bool,
    )
    transfer = values[inverse.reshape(-1)]
    n, k = len(A.elements), len(ds.variables)

    def row(flat: int) -> dict:
        idx = np.unravel_index(flat, (n,) * k) if k else ()
        return {
            "assignment": [list(A.elements[int(i)]) for i in idx],
            "direct": bool(direct[flat]),
            "transfer": bool(transfer[flat]),
        }

    witnesses = [row(int(i)) for i in np.nonzero(direct != transfer)[0]]
    out = report("fv_verify", witnesses, assignments_checked=int(direct.size), psis=ds.length)
    if record:
        out["verdicts"] = [row(i) for i in range(direct.size)]
    return out


def quantified_agreement(ds: DeterminingSequence, points: int) -> list[dict]:
    """Disagreements between the selector evaluator and ordinary evaluation
    of :func:`quantified_form` in the powerset algebra, over every value of
    the designated variables."""
    P = powerset_algebra(points)
    g = quantified_form(ds.phi_star)
    names = [designated(i) for i in range(ds.length)]
    out = []
    for masks in itertools.product(range(1 << points), repeat=len(names)):
        env = dict(zip(names, masks))
        a = eval_ba(ds.phi_star, env, points)
        b = eval_formula(P, g, env)
        if a != b:
            out.append({"masks": list(masks), "selector": a, "quantified": b})
    return out


# ----------------------------------------------- existential decompositions


@dataclass(frozen=True)
class BurrisDecomposition:
    formula: Formula
    base: Formula
    parts: tuple[Formula, ...]

    @property
    def rhs(self) -> Formula:
        return conj((self.base,) + self.parts)


def _existential_literals(f: Formula) -> tuple[tuple[str, ...], list[Formula], list[Formula]]:
    prefix, matrix = split_prefix(f)
    if any(q is not Exists for q, _ in prefix):
        raise FormulaError("expected an existential formula")
    items = matrix.args if isinstance(matrix, And) else (matrix,)
    pos, neg = [], []
    for g in items:
        if isinstance(g, (Eq, Rel)):
            pos.append(g)
        elif isinstance(g, Not) and isinstance(g.body, (Eq, Rel)):
            neg.append(g)
        else:
            raise FormulaError("matrix must be a conjunction of atoms and negated atoms")
    return tuple(v for _, v in prefix), pos, neg


def burris_decompose(f: Formula) -> BurrisDecomposition:
    """``exists u (pos & neg_1 & ... & neg_k)`` split into the positive part
    and one formula per negated atom."""
    bound, pos, neg = _existential_literals(f)
    if not neg:
        return BurrisDecomposition(f, f, ())
    base = exists_many(bound, conj(pos) if pos else TRUE)
    parts = tuple(exists_many(bound, conj(pos + [n])) for n in neg)
    return BurrisDecomposition(f, base, parts)


def burris_check(dec: BurrisDecomposition, structures: Iterable) -> dict:
    """Forward implication (must hold) and converse (reported) of the
    decomposition over every assignment in every structure."""
    names = free_vars(dec.formula)
    lhs_f, rhs_f = dec.formula, dec.rhs
    forward, converse = [], []
    for A in structures:
        lhs, rhs = compile_formula(A, lhs_f), compile_formula(A, rhs_f)
        for tup in itertools.product(A.universe, repeat=len(names)):
            env = dict(zip(names, tup))
            a, b = lhs(env), rhs(env)
            if a and not b:
                forward.append({"structure": A.name, "assignment": list(tup)})
            if b and not a:
                converse.append({"structure": A.name, "assignment": list(tup), "lhs": a, "rhs": b})
    return {
        "check": "burris",
        "status": "pass" if not forward else "fail",
        "witnesses": forward,
        "converse": {"status": "holds" if not converse else "fails", "witnesses": converse},
    }


def set_partitions(items: Sequence) -> list[tuple[tuple, ...]]:
    """All partitions of ``items`` into non-empty blocks (blocks keep the
    item order; the empty sequence has the single empty partition)."""
    items = tuple(items)
    if not items:
        return [()]
    first, rest = items[0], items[1:]
    out = []
    for p in set_partitions(rest):
        out.append(((first,),) + p)
        for i in range(len(p)):
            out.append(p[:i] + ((first,) + p[i],) + p[i + 1 :])
    return out


@dataclass(frozen=True)
class PairDecomposition:
    """Pieces of an existential formula over a pair signature."""

    formula: Formula
    rewritten: Formula
    bound: tuple[str, ...]
    p_bound: tuple[str, ...]
    free_bound: tuple[str, ...]
    positives: tuple[Formula, ...]
    negatives: tuple[Formula, ...]
    predicate: str = "P"

    def _strip(self) -> tuple[Formula, ...]:
        return tuple(g for g in self.positives if not (isinstance(g, Rel) and g.name == self.predicate))

    @property
    def psi0(self) -> Formula:
        return conj(self.positives) if self.positives else TRUE

    @property
    def psi0_plus(self) -> Formula:
        rest = self._strip()
        return conj(rest) if rest else TRUE

    @property
    def phi0(self) -> Formula:
        return exists_many(self.bound, self.psi0)

    def psi_block(self, block: Sequence[int], plus: bool = False) -> Formula:
        base = self._strip() if plus else self.positives
        return conj(tuple(base) + tuple(self.negatives[j] for j in block))

    def phi_block(self, block: Sequence[int]) -> Formula:
        return exists_many(self.bound, self.psi_block(block))

    def partitions(self) -> list[tuple[tuple, ...]]:
        return set_partitions(range(len(self.negatives)))


def pair_decompose(f: Formula, predicate: str = "P") -> PairDecomposition:
    """Introduce ``P(w) & w = t`` for predicate atoms on compound terms and
    split the bound variables into predicate-constrained and free ones."""
    bound, pos, neg = _existential_literals(f)
    used = all_vars(f)
    new_bound = list(bound)
    positives: list[Formula] = []
    for g in pos:
        if isinstance(g, Rel) and g.name == predicate:
            (t,) = g.args
            if not (isinstance(t, Var) and t.name in bound):
                w = fresh_name("w", used)
                used.add(w)
                new_bound.append(w)
                positives.extend([Rel(predicate, (Var(w),)), Eq(Var(w), t)])
                continue
        positives.append(g)
    p_vars = {g.args[0].name for g in positives if isinstance(g, Rel) and g.name == predicate}
    p_bound = tuple(v for v in new_bound if v in p_vars)
    free_bound = tuple(v for v in new_bound if v not in p_vars)
    body = conj(tuple(positives) + tuple(neg)) if positives or neg else TRUE
    rewritten = exists_many(new_bound, body)
    return PairDecomposition(
        f, rewritten, tuple(new_bound), p_bound, free_bound, tuple(positives), tuple(neg), predicate
    )


def pair_claim_check(dec: PairDecomposition, A: BooleanProduct) -> dict:
    """Both sides of the coordinatewise criterion for every assignment of
    the free variables in the product of pair structures ``A``.

    The forward implication is asserted; the converse is reported."""
    names = free_vars(dec.formula)
    S = A.structure
    lhs = compile_formula(S, dec.formula)
    rewritten = compile_formula(S, dec.rewritten)
    phi0 = [compile_formula(F, dec.phi0) for F in A.factors]
    parts = dec.partitions()
    blocks = sorted({b for p in parts for b in p})
    block_fns = {b: [compile_formula(F, dec.phi_block(b)) for F in A.factors] for b in blocks}
    forward, converse, rewrite = [], [], []
    for idx in itertools.product(range(S.size), repeat=len(names)):
        tup = [A.elements[i] for i in idx]
        left = lhs(dict(zip(names, idx)))
        if left != rewritten(dict(zip(names, idx))):
            rewrite.append([list(e) for e in tup])
        local = [{v: e[j] for v, e in zip(names, tup)} for j in range(len(A.factors))]
        right = all(fn(env) for fn, env in zip(phi0, local)) and any(
            all(any(block_fns[b][j](local[j]) for j in range(len(A.factors))) for b in p) for p in parts
        )
        if left and not right:
            forward.append([list(e) for e in tup])
        if right and not left:
            converse.append([list(e) for e in tup])
    witnesses = [{"kind": "forward", "assignment": w} for w in forward] + [
        {"kind": "rewrite", "assignment": w} for w in rewrite
    ]
    return {
        **report("pair_claim", witnesses),
        "partitions": len(parts),
        "converse": {"status": "holds" if not converse else "fails", "witnesses": converse},
    }
