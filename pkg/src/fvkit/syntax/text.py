"""Reading and writing terms, formulas and signatures as s-expressions."""
from __future__ import annotations

from .. import sexpr
from ..sexpr import Atom, SexprError
from .ast import (
    IDENT_RE,
    RESERVED,
    And,
    App,
    Const,
    DaggerAxiom,
    Eq,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Imp,
    Not,
    Or,
    Rel,
    Signature,
    Term,
    Var,
    free_vars,
)


def _err(msg: str, node) -> FormulaError:
    line, col = sexpr.position(node)
    return FormulaError(msg, line, col)


def _read(text_or_expr):
    if isinstance(text_or_expr, str) and not isinstance(text_or_expr, Atom):
        try:
            return sexpr.parse_one(text_or_expr)
        except SexprError as exc:
            raise FormulaError(str(exc)) from exc
    return text_or_expr


def term_from_sexpr(node, sig: Signature) -> Term:
    if isinstance(node, list):
        if not node:
            raise _err("empty term", node)
        head = node[0]
        if isinstance(head, list):
            raise _err("term head must be a symbol", head)
        arity = sig.function_arity.get(head)
        if arity is None:
            raise _err(f"unknown function symbol {head!r}", head)
        if arity != len(node) - 1:
            raise _err(f"{head!r} expects {arity} arguments, got {len(node) - 1}", head)
        return App(str(head), tuple(term_from_sexpr(a, sig) for a in node[1:]))
    name = str(node)
    if name in sig.constants:
        return Const(name)
    if name in sig.function_arity:
        raise _err(f"function symbol {name!r} used without arguments", node)
    if name in sig.relation_arity or name in RESERVED:
        raise _err(f"{name!r} cannot be used as a term", node)
    if not IDENT_RE.match(name):
        raise _err(f"unknown symbol {name!r}", node)
    return Var(name)


def _var_name(node, sig: Signature) -> str:
    if isinstance(node, list) or not IDENT_RE.match(node) or node in sig.symbols or node in RESERVED:
        raise _err(f"bad bound variable {sexpr.dumps(node)!r}", node)
    return str(node)


def formula_from_sexpr(node, sig: Signature) -> Formula:
    if not isinstance(node, list) or not node:
        raise _err(f"expected a formula, got {sexpr.dumps(node)!r}", node)
    head = node[0]
    if isinstance(head, list):
        raise _err("formula head must be a symbol", head)
    args = node[1:]

    def want(n: int) -> None:
        if len(args) != n:
            raise _err(f"{head!r} expects {n} arguments, got {len(args)}", head)

    if head == "=":
        want(2)
        return Eq(term_from_sexpr(args[0], sig), term_from_sexpr(args[1], sig))
    if head == "not":
        want(1)
        return Not(formula_from_sexpr(args[0], sig))
    if head == "and":
        return And(tuple(formula_from_sexpr(a, sig) for a in args))
    if head == "or":
        return Or(tuple(formula_from_sexpr(a, sig) for a in args))
    if head == "imp":
        want(2)
        return Imp(formula_from_sexpr(args[0], sig), formula_from_sexpr(args[1], sig))
    if head in ("exists", "forall"):
        want(2)
        q = Exists if head == "exists" else Forall
        return q(_var_name(args[0], sig), formula_from_sexpr(args[1], sig))
    arity = sig.relation_arity.get(head)
    if arity is None:
        raise _err(f"unknown relation symbol {head!r}", head)
    if arity != len(args):
        raise _err(f"{head!r} expects {arity} arguments, got {len(args)}", head)
    return Rel(str(head), tuple(term_from_sexpr(a, sig) for a in args))


def parse_term(text, sig: Signature) -> Term:
    return term_from_sexpr(_read(text), sig)


def parse_formula(text, sig: Signature) -> Formula:
    """Parse one formula (text or already-read s-expression) over ``sig``."""
    return formula_from_sexpr(_read(text), sig)


def term_to_sexpr(t: Term):
    if isinstance(t, App):
        return [t.fn, *(term_to_sexpr(a) for a in t.args)]
    return t.name


def formula_to_sexpr(f: Formula):
    if isinstance(f, Eq):
        return ["=", term_to_sexpr(f.left), term_to_sexpr(f.right)]
    if isinstance(f, Rel):
        return [f.name, *(term_to_sexpr(a) for a in f.args)]
    if isinstance(f, Not):
        return ["not", formula_to_sexpr(f.body)]
    if isinstance(f, And):
        return ["and", *(formula_to_sexpr(g) for g in f.args)]
    if isinstance(f, Or):
        return ["or", *(formula_to_sexpr(g) for g in f.args)]
    if isinstance(f, Imp):
        return ["imp", formula_to_sexpr(f.left), formula_to_sexpr(f.right)]
    head = "exists" if isinstance(f, Exists) else "forall"
    return [head, f.var, formula_to_sexpr(f.body)]


def print_term(t: Term) -> str:
    return sexpr.dumps(term_to_sexpr(t))


def print_formula(f: Formula) -> str:
    """Canonical single-line text of ``f``."""
    return sexpr.dumps(formula_to_sexpr(f))


# ------------------------------------------------------------ signatures


def signature_from_sexpr(node) -> Signature:
    if not isinstance(node, list) or len(node) < 2 or node[0] != "signature":
        raise _err("expected (signature <name> ...)", node)
    name = str(node[1])
    functions: list[tuple[str, int]] = []
    constants: list[str] = []
    relations: list[tuple[str, int]] = []
    dagger_raw: list = []
    for clause in node[2:]:
        if not isinstance(clause, list) or not clause:
            raise _err("malformed signature clause", clause)
        kind = clause[0]
        if kind in ("functions", "relations"):
            target = functions if kind == "functions" else relations
            for item in clause[1:]:
                if not isinstance(item, list) or len(item) != 2:
                    raise _err(f"expected (<symbol> <arity>) in {kind}", item)
                try:
                    target.append((str(item[0]), int(item[1])))
                except ValueError:
                    raise _err(f"bad arity {item[1]!r}", item[1]) from None
        elif kind == "constants":
            constants.extend(str(c) for c in clause[1:])
        elif kind == "dagger":
            dagger_raw.extend(clause[1:])
        else:
            raise _err(f"unknown signature clause {kind!r}", clause)
    base = Signature(name, tuple(functions), tuple(constants), tuple(relations))
    dagger = []
    for item in dagger_raw:
        if not isinstance(item, list) or len(item) not in (2, 3):
            raise _err("expected (<rel> [(<vars>)] <formula>) in dagger", item)
        if len(item) == 3:
            vars_ = tuple(_var_name(v, base) for v in item[1])
            body = formula_from_sexpr(item[2], base)
        else:
            body = formula_from_sexpr(item[1], base)
            vars_ = free_vars(body)
        dagger.append(DaggerAxiom(str(item[0]), vars_, body))
    return Signature(name, base.functions, base.constants, base.relations, tuple(dagger))


def parse_signature(text) -> Signature:
    return signature_from_sexpr(_read(text))


def signature_to_sexpr(sig: Signature):
    out: list = ["signature", sig.name]
    out.append(["functions", *([s, str(k)] for s, k in sig.functions)])
    out.append(["constants", *sig.constants])
    out.append(["relations", *([s, str(k)] for s, k in sig.relations)])
    if sig.dagger:
        out.append(
            ["dagger", *([ax.relation, list(ax.vars), formula_to_sexpr(ax.formula)] for ax in sig.dagger)]
        )
    return out


def print_signature(sig: Signature) -> str:
    return sexpr.dumps(signature_to_sexpr(sig))
