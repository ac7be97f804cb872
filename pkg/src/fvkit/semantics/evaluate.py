"""Brute-force Tarskian model checking over finite structures.

Formulas are compiled once per structure into nested closures over the
structure's tables; quantifiers are expanded depth-first with
short-circuiting.  :func:`truth_table` is a numpy alternative that
evaluates a formula at every assignment at once.
"""
from __future__ import annotations

import itertools
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ..syntax.ast import (
    And,
    Const,
    Eq,
    Exists,
    Formula,
    FormulaError,
    Imp,
    Not,
    Or,
    Rel,
    Term,
    Var,
    check_formula,
    free_vars,
    quantifier_depth,
)
from .structure import FiniteStructure

Env = dict
Assignment = Mapping[str, int]


class EvaluationError(ValueError):
    pass


def _compile_term(t: Term, A: FiniteStructure) -> Callable[[Env], int]:
    if isinstance(t, Var):
        name = t.name
        return lambda env: env[name]
    if isinstance(t, Const):
        val = A.constants[t.name]
        return lambda env: val
    tbl = A.functions[t.fn]
    n = A.size
    args = [_compile_term(a, A) for a in t.args]
    if len(args) == 1:
        (a,) = args
        return lambda env: tbl[a(env)]
    if len(args) == 2:
        a, b = args
        return lambda env: tbl[a(env) * n + b(env)]

    def app(env: Env) -> int:
        idx = 0
        for g in args:
            idx = idx * n + g(env)
        return tbl[idx]

    return app


def _compile(f: Formula, A: FiniteStructure) -> Callable[[Env], bool]:
    if isinstance(f, Eq):
        a, b = _compile_term(f.left, A), _compile_term(f.right, A)
        return lambda env: a(env) == b(env)
    if isinstance(f, Rel):
        tuples = A.relations[f.name]
        args = [_compile_term(t, A) for t in f.args]
        if len(args) == 1:
            (a,) = args
            return lambda env: (a(env),) in tuples
        return lambda env: tuple(g(env) for g in args) in tuples
    if isinstance(f, Not):
        g = _compile(f.body, A)
        return lambda env: not g(env)
    if isinstance(f, And):
        parts = [_compile(g, A) for g in f.args]
        if len(parts) == 2:
            p, q = parts
            return lambda env: p(env) and q(env)
        return lambda env: all(g(env) for g in parts)
    if isinstance(f, Or):
        parts = [_compile(g, A) for g in f.args]
        if len(parts) == 2:
            p, q = parts
            return lambda env: p(env) or q(env)
        return lambda env: any(g(env) for g in parts)
    if isinstance(f, Imp):
        p, q = _compile(f.left, A), _compile(f.right, A)
        return lambda env: (not p(env)) or q(env)
    body = _compile(f.body, A)
    var = f.var
    universe = range(A.size)
    sentinel = object()
    want = isinstance(f, Exists)

    def quant(env: Env) -> bool:
        saved = env.get(var, sentinel)
        try:
            if want:
                for e in universe:
                    env[var] = e
                    if body(env):
                        return True
                return False
            for e in universe:
                env[var] = e
                if not body(env):
                    return False
            return True
        finally:
            if saved is sentinel:
                del env[var]
            else:
                env[var] = saved

    return quant


def compile_formula(A: FiniteStructure, f: Formula) -> Callable[[Env], bool]:
    """Compiled predicate for ``f`` over ``A`` (cached on the structure)."""
    cache = A._compiled  # type: ignore[attr-defined]
    fn = cache.get(f)
    if fn is None:
        try:
            check_formula(f, A.sig)
        except FormulaError as exc:
            raise EvaluationError(f"signature mismatch with {A.sig.name}: {exc}") from exc
        raw = _compile(f, A)

        def fn(env: Env, _raw=raw) -> bool:
            return bool(_raw(env))

        cache[f] = fn
    return fn


def eval_formula(A: FiniteStructure, f: Formula, assignment: Assignment | None = None) -> bool:
    """``A |= f[assignment]``."""
    assignment = dict(assignment or {})
    missing = [v for v in free_vars(f) if v not in assignment]
    if missing:
        raise EvaluationError(f"free variables not assigned: {missing}")
    for v, a in assignment.items():
        if not 0 <= a < A.size:
            raise EvaluationError(f"value {a} for {v!r} outside the universe")
    return compile_formula(A, f)(assignment)


def definable_set(
    A: FiniteStructure,
    f: Formula,
    params: Assignment | None,
    free: Sequence[str],
) -> set[tuple[int, ...]]:
    """``{a : A |= f[a, params]}`` for ``a`` ranging over ``A^len(free)``."""
    params = dict(params or {})
    missing = [v for v in free_vars(f) if v not in params and v not in free]
    if missing:
        raise EvaluationError(f"free variables not covered: {missing}")
    fn = compile_formula(A, f)
    out = set()
    env = dict(params)
    for tup in itertools.product(A.universe, repeat=len(free)):
        env.update(zip(free, tup))
        if fn(env):
            out.add(tup)
    return out


def assignments(A: FiniteStructure, variables: Sequence[str]) -> Iterable[dict[str, int]]:
    for tup in itertools.product(A.universe, repeat=len(variables)):
        yield dict(zip(variables, tup))


def check_dagger(A: FiniteStructure) -> list[dict]:
    """Violations of ``not r(a) <-> phi_r(a)`` for every dagger entry."""
    out = []
    for ax in A.sig.dagger:
        fn = compile_formula(A, ax.formula)
        rel = A.relations[ax.relation]
        for tup in itertools.product(A.universe, repeat=len(ax.vars)):
            if (tup not in rel) != fn(dict(zip(ax.vars, tup))):
                out.append({"relation": ax.relation, "tuple": list(tup)})
    return out


MAX_CELLS = 1 << 25
CACHED_CELLS = 1 << 12


def truth_table(A: FiniteStructure, f: Formula, variables: Sequence[str], max_cells: int = MAX_CELLS) -> np.ndarray:
    """Boolean array ``T`` of shape ``(A.size,) * len(variables)`` with
    ``T[a] == A |= f[variables := a]``.

    Every variable gets an axis: the listed ones first, then one axis per
    quantifier nesting level, so intermediate arrays only span the
    variables they mention."""
    variables = tuple(variables)
    key = ("table", f, variables)
    cache = A._compiled  # type: ignore[attr-defined]
    if key in cache:
        return cache[key]
    missing = [v for v in free_vars(f) if v not in variables]
    if missing:
        raise EvaluationError(f"free variables not covered: {missing}")
    try:
        check_formula(f, A.sig)
    except FormulaError as exc:
        raise EvaluationError(f"signature mismatch with {A.sig.name}: {exc}") from exc
    n = A.size
    ndim = len(variables) + quantifier_depth(f)
    tables = {fn: A.np_table(fn) for fn in A.sig.function_arity}
    rel_tables = {}
    for r, k in A.sig.relations:
        arr = np.zeros((n,) * k, dtype=bool)
        for t in A.relations[r]:
            arr[t] = True
        rel_tables[r] = arr

    def axis_values(axis: int) -> np.ndarray:
        shape = [1] * ndim
        shape[axis] = n
        return np.arange(n).reshape(shape)

    def check_size(arr: np.ndarray) -> np.ndarray:
        if arr.size > max_cells:
            raise EvaluationError(f"truth table needs {arr.size} cells, limit {max_cells}")
        return arr

    def term(t: Term, axes: dict[str, int]) -> np.ndarray:
        if isinstance(t, Var):
            return axis_values(axes[t.name])
        if isinstance(t, Const):
            return np.full((1,) * ndim, A.constants[t.name])
        return check_size(tables[t.fn][tuple(term(a, axes) for a in t.args)])

    def go(g: Formula, axes: dict[str, int], level: int) -> np.ndarray:
        if isinstance(g, Eq):
            return check_size(term(g.left, axes) == term(g.right, axes))
        if isinstance(g, Rel):
            if not g.args:
                return np.full((1,) * ndim, bool(rel_tables[g.name][()]))
            return check_size(rel_tables[g.name][tuple(term(a, axes) for a in g.args)])
        if isinstance(g, Not):
            return ~go(g.body, axes, level)
        if isinstance(g, (And, Or)):
            out = np.full((1,) * ndim, isinstance(g, And))
            for h in g.args:
                out = check_size((out & go(h, axes, level)) if isinstance(g, And) else (out | go(h, axes, level)))
            return out
        if isinstance(g, Imp):
            return check_size(~go(g.left, axes, level) | go(g.right, axes, level))
        axis = len(variables) + level
        body = go(g.body, {**axes, g.var: axis}, level + 1)
        body = np.broadcast_to(body, body.shape[:axis] + (n,) + body.shape[axis + 1 :])
        reduce = np.any if isinstance(g, Exists) else np.all
        return reduce(body, axis=axis, keepdims=True)

    out = go(f, {v: i for i, v in enumerate(variables)}, 0)
    out = np.broadcast_to(out, (n,) * len(variables) + out.shape[len(variables) :])
    out = np.reshape(out, (n,) * len(variables)).copy()
    if out.size <= CACHED_CELLS:
        out.flags.writeable = False
        cache[key] = out
    return out
