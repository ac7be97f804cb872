"""Axiom systems as labelled formula lists, with bounded schema instances,
and their evaluation on finite structures."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .semantics.evaluate import EvaluationError, check_dagger, eval_formula
from .semantics.structure import FiniteStructure, expand
from .syntax.ast import (
    And,
    App,
    Eq,
    Exists,
    Forall,
    Formula,
    Imp,
    Not,
    Or,
    Rel,
    Signature,
    Term,
    Var,
    check_formula,
    conj,
    disj,
    exists_many,
    forall_many,
    free_vars,
    iff,
    substitute,
)
from .syntax.signatures import (
    LATTICE_RING,
    ONE,
    RCVF_RING,
    RING,
    RING_DELTA,
    RING_P,
    VALUED_RING,
    VALUED_RING_DELTA,
    ZERO,
    add,
    dtilde_name,
    dtilde_signature,
    ell_name,
    ell_signature,
    lambda_name,
    linear_dependence,
    mul,
    neg,
    neq,
    numeral,
    pcf_signature,
    pn_name,
    polynomial_relation,
    power,
    prime_field_coset_reps,
    sub,
    total,
    v,
)
from .syntax.text import parse_formula, print_formula


class TheoryError(ValueError):
    pass


@dataclass(frozen=True)
class Axiom:
    label: str
    formula: Formula
    kind: str = "axiom"  # "axiom" (a sentence) or "definition" (free variables allowed)
    anchor: str = ""
    note: str = ""


@dataclass(frozen=True)
class AxiomCorpusEntry:
    theory: str
    signature: Signature
    axioms: tuple[Axiom, ...]
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        labels = [a.label for a in self.axioms]
        if len(set(labels)) != len(labels):
            raise TheoryError(f"{self.theory}: duplicate labels")
        for a in self.axioms:
            check_formula(a.formula, self.signature)
            if a.kind == "axiom" and free_vars(a.formula):
                raise TheoryError(f"{self.theory}/{a.label} is not a sentence")

    def manifest(self) -> dict:
        return {
            "theory": self.theory,
            "signature": self.signature.name,
            "params": dict(self.params),
            "axioms": [
                {
                    "label": a.label,
                    "file": f"{a.label}.fml",
                    "kind": a.kind,
                    "anchor": a.anchor,
                    **({"note": a.note} if a.note else {}),
                }
                for a in self.axioms
            ],
        }


# ------------------------------------------------------------------ pieces


def _p(text: str, sig: Signature) -> Formula:
    return parse_formula(text, sig)


RING_AXIOMS = (
    ("add_assoc", "(forall x (forall y (forall z (= (+ (+ x y) z) (+ x (+ y z))))))"),
    ("add_comm", "(forall x (forall y (= (+ x y) (+ y x))))"),
    ("add_zero", "(forall x (= (+ x 0) x))"),
    ("add_inverse", "(forall x (= (+ x (neg x)) 0))"),
    ("sub_def", "(forall x (forall y (= (- x y) (+ x (neg y)))))"),
    ("mul_assoc", "(forall x (forall y (forall z (= (* (* x y) z) (* x (* y z))))))"),
    ("mul_comm", "(forall x (forall y (= (* x y) (* y x))))"),
    ("mul_one", "(forall x (= (* x 1) x))"),
    ("distrib", "(forall x (forall y (forall z (= (* x (+ y z)) (+ (* x y) (* x z))))))"),
)

VNR_TEXT = "(forall x (exists y (= (* (* x y) x) x)))"

NO_MINIMAL_IDEMPOTENT_TEXT = (
    "(forall e (imp (and (= (* e e) e) (not (= e 0)))"
    " (exists f (and (= (* f f) f) (not (= f 0)) (not (= f e)) (= (* f e) f)))))"
)


def ring_axioms(sig: Signature) -> list[Axiom]:
    return [Axiom(f"ring_{k}", _p(t, sig), anchor="commutative ring with 1") for k, t in RING_AXIOMS]


def vnr_axiom(sig: Signature) -> Axiom:
    return Axiom("vnr", _p(VNR_TEXT, sig), anchor="von Neumann regularity")


def no_minimal_idempotent(sig: Signature) -> Axiom:
    return Axiom("no_minimal_idempotent", _p(NO_MINIMAL_IDEMPOTENT_TEXT, sig), anchor="atomless idempotents")


def _poly(x: Term, coeffs: list[Term], monic_degree: int) -> Term:
    """``x^d + c_{d-1} x^{d-1} + ... + c_0``."""
    terms = [power(x, monic_degree)]
    for i in range(monic_degree - 1, -1, -1):
        terms.append(coeffs[i] if i == 0 else mul(coeffs[i], power(x, i)))
    return total(terms)


def monic_root_axiom(degree: int, label: str) -> Axiom:
    us = [f"u{i}" for i in range(degree)]
    body = Exists("x", Eq(_poly(v("x"), [v(u) for u in us], degree), ZERO))
    return Axiom(label, forall_many(us, body), anchor="monic polynomial has a root")


def char_zero(n: int) -> Axiom:
    """``n e != 0`` for non-zero idempotents ``e``."""
    e = v("e")
    body = Imp(And((Eq(mul(e, e), e), neq(e, ZERO))), neq(mul(numeral(n), e), ZERO))
    return Axiom(
        f"char0_{n}",
        Forall("e", body),
        anchor="characteristic zero at every maximal ideal",
        note="guarded by e != 0; the unguarded form fails at e = 0",
    )


def O(t: Term) -> Formula:
    return Rel("div", (ONE, t))


def M(t: Term) -> Formula:
    return Rel("Div", (ONE, t))


def valuation_axioms() -> list[Axiom]:
    x, y, z = v("x"), v("y"), v("z")
    anchor = "divisibility relation"
    return [
        Axiom("Tv_1", O(ONE), anchor=anchor),
        Axiom(
            "Tv_2",
            forall_many("xy", Imp(And((O(x), O(y))), And((O(add(x, y)), O(sub(x, y)), O(mul(x, y)))))),
            anchor=anchor,
        ),
        Axiom(
            "Tv_3",
            forall_many(
                "xy",
                Imp(
                    And((O(x), O(y))),
                    Exists("z", And((O(z), Eq(mul(sub(mul(y, z), x), sub(mul(z, x), y)), ZERO)))),
                ),
            ),
            anchor=anchor,
            note="the hypothesis on z is moved inside the existential",
        ),
        Axiom(
            "Tv_4",
            Forall("x", exists_many("yz", And((O(y), O(z), Eq(mul(sub(y, x), sub(ONE, mul(x, z))), ZERO))))),
            anchor=anchor,
        ),
        Axiom(
            "Tv_M_ideal",
            forall_many("xy", Imp(And((O(x), M(y))), M(mul(x, y)))),
            anchor="maximal ideal of the valuation ring",
        ),
        Axiom(
            "Tv_M_units",
            Forall("x", Imp(And((O(x), Not(M(x)))), Exists("y", And((O(y), M(sub(ONE, mul(x, y)))))))),
            anchor="maximal ideal of the valuation ring",
            note="the hypothesis on y is moved inside the existential",
        ),
    ]


def dagger_axioms(sig: Signature) -> list[Axiom]:
    """``forall x (not r(x) <-> phi_r(x))`` for every complemented relation."""
    out = []
    for ax in sig.dagger:
        body = iff(Not(Rel(ax.relation, tuple(Var(x) for x in ax.vars))), ax.formula)
        out.append(Axiom(f"dagger_{ax.relation}", forall_many(ax.vars, body), anchor="positive complement"))
    return out


# ------------------------------------------------------------------ theories


def _ring(params) -> AxiomCorpusEntry:
    return AxiomCorpusEntry("ring", RING, tuple(ring_axioms(RING)))


def _vnr(params) -> AxiomCorpusEntry:
    return AxiomCorpusEntry("vnr", RING, tuple(ring_axioms(RING) + [vnr_axiom(RING)]))


def _no_min(params) -> AxiomCorpusEntry:
    return AxiomCorpusEntry("no_minimal_idempotent", RING, (no_minimal_idempotent(RING),))


def _A(params) -> AxiomCorpusEntry:
    sig = RING_DELTA
    axs = ring_axioms(sig) + [vnr_axiom(sig), no_minimal_idempotent(sig)]
    axs += [
        Axiom("d_additive", _p("(forall x (forall y (= (d (+ x y)) (+ (d x) (d y)))))", sig), anchor="derivation"),
        Axiom(
            "d_leibniz",
            _p("(forall x (forall y (= (d (* x y)) (+ (* (d x) y) (* x (d y))))))", sig),
            anchor="Leibniz rule",
        ),
    ]
    return AxiomCorpusEntry("A", sig, tuple(axs))


PROJECTOR_DEF_TEXT = (
    "(forall a (forall b (exists d (and (= (* (* b d) b) b)"
    " (= (* (- (p a b) a) (- 1 (* b d))) 0) (= (* (p a b) b) 0)))))"
)


def _projector_def(params) -> AxiomCorpusEntry:
    return AxiomCorpusEntry(
        "projector_def", RING_P, (Axiom("B", _p(PROJECTOR_DEF_TEXT, RING_P), anchor="defining axiom of the projector"),)
    )


def _lattice_axioms(sig: Signature) -> list[Axiom]:
    a = "lattice-ordered ring"
    texts = [
        ("inf_comm", "(forall x (forall y (= (inf x y) (inf y x))))"),
        ("inf_assoc", "(forall x (forall y (forall z (= (inf (inf x y) z) (inf x (inf y z))))))"),
        ("inf_idem", "(forall x (= (inf x x) x))"),
        ("inf_translate", "(forall x (forall y (forall z (= (+ (inf x y) z) (inf (+ x z) (+ y z))))))"),
        (
            "positive_mul",
            "(forall x (forall y (imp (and (= (inf x 0) 0) (= (inf y 0) 0)) (= (inf (* x y) 0) 0))))",
        ),
        ("reduced", "(forall x (imp (= (* x x) 0) (= x 0)))"),
        ("f_ring", "(forall a (forall b (imp (= (inf a b) 0) (= (* a b) 0))))"),
    ]
    return [Axiom(k, _p(t, sig), anchor=a if k != "f_ring" else "f-ring") for k, t in texts]


def _T_f(params) -> AxiomCorpusEntry:
    sig = LATTICE_RING
    return AxiomCorpusEntry("T_f", sig, tuple(ring_axioms(sig) + _lattice_axioms(sig)))


def _bound(params, key: str, default: int) -> int:
    n = int(params.get(key, default))
    if n <= 0:
        raise TheoryError(f"bound {key} must be positive")
    return n


def _T_reg(params) -> AxiomCorpusEntry:
    sig = LATTICE_RING
    n = _bound(params, "n", 5)
    axs = ring_axioms(sig) + _lattice_axioms(sig) + [vnr_axiom(sig), no_minimal_idempotent(sig)]
    axs += [monic_root_axiom(d, f"odd_root_{d}") for d in range(1, n + 1, 2)]
    axs.append(Axiom("positive_square", _p("(forall x (imp (= (inf x 0) 0) (exists y (= (* y y) x))))", sig),
                     anchor="positives are squares"))
    return AxiomCorpusEntry("T_reg", sig, tuple(axs), {"n": n})


def _T_v(params) -> AxiomCorpusEntry:
    sig = VALUED_RING
    axs = ring_axioms(sig) + [vnr_axiom(sig)] + valuation_axioms() + dagger_axioms(sig)
    return AxiomCorpusEntry("T_v", sig, tuple(axs))


def _char0(params) -> AxiomCorpusEntry:
    n = _bound(params, "n", 5)
    return AxiomCorpusEntry("char0", RING, tuple(char_zero(k) for k in range(1, n + 1)), {"n": n})


def _T_reg_v_0(params) -> AxiomCorpusEntry:
    sig = VALUED_RING
    n = _bound(params, "n", 3)
    axs = ring_axioms(sig) + [vnr_axiom(sig), no_minimal_idempotent(sig)] + valuation_axioms() + dagger_axioms(sig)
    axs += [char_zero(k) for k in range(1, n + 1)]
    axs += [monic_root_axiom(d, f"root_{d}") for d in range(1, n + 1)]
    return AxiomCorpusEntry("T_reg_v_0", sig, tuple(axs), {"n": n})


def _T_reg_v_p(params) -> AxiomCorpusEntry:
    sig = VALUED_RING
    p = int(params.get("p", 2))
    if p < 2:
        raise TheoryError("p must be a prime")
    n = _bound(params, "n", 3)
    axs = ring_axioms(sig) + [vnr_axiom(sig), no_minimal_idempotent(sig)] + valuation_axioms() + dagger_axioms(sig)
    axs += [char_zero(k) for k in range(1, n + 1)]
    x, y, a, b, e, e2 = v("x"), v("y"), v("a"), v("b"), v("e"), v("e'")
    for deg in range(2, n + 1):
        us = [f"u{i}" for i in range(deg - 1)]
        poly = total([power(x, deg), power(x, deg - 1)] + [mul(v(u), power(x, i)) if i else v(u) for i, u in enumerate(us)][::-1])
        body = Imp(conj(M(v(u)) for u in us), Exists("x", Eq(poly, ZERO)))
        axs.append(Axiom(f"henselian_{deg}", forall_many(us, body), anchor="henselian property",
                         note="coefficient hypotheses read as M(u_i)"))
    axs.append(Axiom("discrete", forall_many("xy", Imp(Rel("Div", (x, y)), Rel("div", (mul(numeral(p), x), y)))),
                     anchor="discrete value group"))
    for m in range(2, n + 1):
        cases = disj(Eq(mul(mul(a, e), power(numeral(p), l)) if l else mul(a, e), power(b, m)) for l in range(m))
        body = Imp(neq(a, ZERO), And((O(e), O(e2), Eq(mul(e, e2), ONE), cases)))
        axs.append(Axiom(f"z_group_{m}", Forall("a", exists_many(["b", "e", "e'"], body)), anchor="Z-group value group"))
    falling = x
    for k in range(1, p):
        falling = mul(falling, sub(x, numeral(k)))
    axs.append(Axiom("residue_field", Forall("x", Imp(O(x), M(falling))), anchor="residue field F_p"))
    return AxiomCorpusEntry("T_reg_v_p", sig, tuple(axs), {"p": p, "n": n})


def _ell_n(params) -> AxiomCorpusEntry:
    n = _bound(params, "n", 3)
    if n < 2:
        raise TheoryError("ell_n needs n >= 2")
    sig = ell_signature(n)
    axs = []
    for k in range(2, n + 1):
        xs = [f"x{i}" for i in range(1, k + 1)]
        zs = [f"z{i}" for i in range(1, k + 1)]
        independent = forall_many(
            zs,
            Imp(
                And((conj(Rel("P", (v(z),)) for z in zs), Eq(total([mul(v(z), v(x)) for z, x in zip(zs, xs)]), ZERO))),
                conj(Eq(v(z), ZERO) for z in zs),
            ),
        )
        rel = Rel(ell_name(k), tuple(v(x) for x in xs))
        axs.append(Axiom(f"ell{k}_def", forall_many(xs, iff(rel, independent)), anchor="linear independence over P"))
        axs.append(
            Axiom(
                f"ell{k}_complement",
                forall_many(xs, iff(Not(rel), linear_dependence([v(x) for x in xs], zs))),
                anchor="positive complement of linear independence",
            )
        )
    axs.append(Axiom("P_complement", Forall("x", iff(Not(Rel("P", (v("x"),))), Rel(ell_name(2), (ONE, v("x"))))),
                     anchor="complement of P"))
    return AxiomCorpusEntry("ell_n", sig, tuple(axs), {"n": n})


def _lambda(params) -> AxiomCorpusEntry:
    n = _bound(params, "n", 2)
    if n < 2:
        raise TheoryError("lambda needs n >= 2")
    sig = ell_signature(n + 1, with_lambda=True)
    axs = []
    for k in range(2, n + 1):
        xs = [v(f"x{j}") for j in range(1, k + 1)]
        zs = [f"z{j}" for j in range(1, k + 1)]
        y, z = v("y"), v("z")
        ell_k = Rel(ell_name(k), tuple(xs))
        ell_k1 = Rel(ell_name(k + 1), tuple(xs) + (y,))
        for i in range(1, k + 1):
            coords = exists_many(
                zs,
                And((conj(Rel("P", (v(w),)) for w in zs), Eq(y, total([mul(x, v(w)) for x, w in zip(xs, zs)])),
                     Eq(v(zs[i - 1]), z))),
            )
            rhs = Or((And((ell_k, Not(ell_k1), coords)), And((ell_k1, Eq(z, ZERO)))))
            lhs = Eq(z, App(lambda_name(k, i), (y,) + tuple(xs)))
            names = ["y"] + [f"x{j}" for j in range(1, k + 1)] + ["z"]
            axs.append(Axiom(f"lambda{k}_{i}", forall_many(names, iff(lhs, rhs)), anchor="component functions",
                             note="second case uses ell of the extended tuple"))
    return AxiomCorpusEntry("lambda", sig, tuple(axs), {"n": n})


def _dtilde(params) -> AxiomCorpusEntry:
    n = _bound(params, "n", 2)
    k = _bound(params, "k", 2)
    sig = dtilde_signature(n, k)
    axs = []
    for a in range(1, n + 1):
        for b in range(1, k + 1):
            xs = [v(f"x{i}") for i in range(1, a + 1)]
            rel = Rel(dtilde_name(a, b), tuple(xs))
            axs.append(
                Axiom(
                    f"Dt{a}_{b}_complement",
                    forall_many([x.name for x in xs], iff(Not(rel), polynomial_relation(xs, b))),
                    anchor="non-trivial polynomial relation over P",
                )
            )
    axs.append(Axiom("P_complement", Forall("x", iff(Not(Rel("P", (v("x"),))), Rel(dtilde_name(1, 1), (v("x"),)))),
                     anchor="complement of P", note="unary form of the degree-one relation"))
    return AxiomCorpusEntry("Dtilde", sig, tuple(axs), {"n": n, "k": k})


def _pcf_pairs(params) -> AxiomCorpusEntry:
    p = int(params.get("p", 3))
    n = _bound(params, "n", 3)
    reps = params.get("coset_reps") or {m: prime_field_coset_reps(p, m) for m in range(2, n + 1)}
    reps = {int(m): list(r) for m, r in dict(reps).items()}
    sig = pcf_signature(p, n, reps)
    axs = []
    for m in range(2, n + 1):
        x, y = v("x"), v("y")
        axs.append(Axiom(f"P{m}_def", Forall("x", iff(Rel(pn_name(m), (x,)), Exists("y", Eq(x, power(y, m))))),
                         anchor="n-th powers"))
    axs += dagger_axioms(sig)
    return AxiomCorpusEntry("pcf_pairs", sig, tuple(axs), {"p": p, "n": n, "coset_reps": {str(m): r for m, r in reps.items()}})


def chi_order() -> Formula:
    """``|x| <= |y|`` and ``y`` invertible, with ``|t| = -inf(-t, t)``."""
    absx = neg(App("inf", (neg(v("x")), v("x"))))
    absy = neg(App("inf", (neg(v("y")), v("y"))))
    return And((Eq(App("inf", (absx, absy)), absx), Exists("w", Eq(mul(v("y"), v("w")), ONE))))


def chi_valuation() -> Formula:
    """``v(x) >= v(y)`` and ``y`` invertible."""
    return And((Rel("div", (v("y"), v("x"))), Exists("w", Eq(mul(v("y"), v("w")), ONE))))


def _chi(params) -> AxiomCorpusEntry:
    return AxiomCorpusEntry(
        "chi",
        RCVF_RING,
        (
            Axiom("chi_order", chi_order(), kind="definition", anchor="order neighbourhoods of 0"),
            Axiom("chi_valuation", chi_valuation(), kind="definition", anchor="valuation neighbourhoods of 0",
                  note="ball {x : v(x) >= v(y)}; invertibility is asked of the radius y"),
        ),
    )


DEFAULT_SIGMA = "(= x1 (* x0 x0))"


def scheme_G(sigma: Formula, n: int, sig: Signature = VALUED_RING_DELTA, label: str = "") -> Axiom:
    """Instance of the density scheme for ``sigma(x0, ..., xn)``: if the
    projection to the first ``n`` coordinates contains a chi-ball then some
    ``a`` has ``(a, d a, ..., d^n a)`` in the set."""
    xs = [f"x{i}" for i in range(n + 1)]
    extra = set(free_vars(sigma)) - set(xs)
    if extra:
        raise TheoryError(f"sigma has unexpected free variables {sorted(extra)}")
    cs = [f"c{i}" for i in range(n)]

    def chi(t: Term, radius: Term) -> Formula:
        return And((Rel("div", (radius, t)), Exists("w", Eq(mul(radius, v("w")), ONE))))

    contains_ball = exists_many(
        cs + ["r"],
        And((chi(ZERO, v("r")),
             forall_many(xs[:n], Imp(conj(chi(sub(v(x), v(c)), v("r")) for x, c in zip(xs, cs)) if n else And(()),
                                     Exists(xs[n], sigma))))),
    )
    jets = {}
    t: Term = v("a")
    for i in range(n + 1):
        jets[xs[i]] = t
        t = App("d", (t,))
    conclusion = Exists("a", substitute(sigma, jets))
    return Axiom(label or f"G_{n}", Imp(contains_ball, conclusion), anchor="density of differential points",
                 note="open set read as containing a chi-ball")


def _G(params) -> AxiomCorpusEntry:
    n = _bound(params, "n", 1)
    sig = VALUED_RING_DELTA
    sigma = params.get("sigma", DEFAULT_SIGMA)
    sigma = sigma if not isinstance(sigma, str) else parse_formula(sigma, sig)
    return AxiomCorpusEntry("G", sig, (scheme_G(sigma, n, sig),), {"n": n, "sigma": print_formula(sigma)})


THEORIES: dict[str, Callable[[Mapping], AxiomCorpusEntry]] = {
    "ring": _ring,
    "vnr": _vnr,
    "no_minimal_idempotent": _no_min,
    "A": _A,
    "projector_def": _projector_def,
    "T_f": _T_f,
    "T_reg": _T_reg,
    "T_v": _T_v,
    "char0": _char0,
    "T_reg_v_0": _T_reg_v_0,
    "T_reg_v_p": _T_reg_v_p,
    "ell_n": _ell_n,
    "lambda": _lambda,
    "Dtilde": _dtilde,
    "pcf_pairs": _pcf_pairs,
    "chi": _chi,
    "G": _G,
}


def emit_theory(name: str, **params) -> AxiomCorpusEntry:
    if name not in THEORIES:
        raise TheoryError(f"unknown theory {name!r}; known: {', '.join(THEORIES)}")
    return THEORIES[name](params)


def all_theories() -> list[AxiomCorpusEntry]:
    return [emit_theory(name) for name in THEORIES]


def evaluate_theory(entry: AxiomCorpusEntry, A: FiniteStructure) -> dict:
    """Verdict per axiom on ``A``; definitions are listed as skipped.  The
    positive complements of ``A``'s relations are cross-checked too."""
    if not A.sig.contains(entry.signature):
        raise EvaluationError(f"{A.sig.name} does not interpret {entry.signature.name}")
    verdicts = []
    for ax in entry.axioms:
        if ax.kind != "axiom":
            verdicts.append({"label": ax.label, "verdict": "skipped"})
            continue
        ok = eval_formula(A, ax.formula)
        verdicts.append({"label": ax.label, "verdict": "pass" if ok else "fail"})
    return {
        "theory": entry.theory,
        "structure": A.name,
        "verdicts": verdicts,
        "dagger_violations": check_dagger(A),
    }


def trivial_valuation(K: FiniteStructure) -> FiniteStructure:
    """Field expanded by the trivial valuation: ``div(x, y)`` iff
    ``v(x) <= v(y)``, ``Div(x, y)`` iff ``v(x) < v(y)``, with ``v(0)``
    infinite and ``v`` zero elsewhere."""
    z = K.const("0")
    pairs = list(itertools.product(K.universe, repeat=2))
    return expand(
        K,
        VALUED_RING,
        relations={
            "div": [(x, y) for x, y in pairs if y == z or x != z],
            "Div": [(x, y) for x, y in pairs if x != z and y == z],
        },
        name=f"{K.name} (trivial valuation)",
    )
