"""Command-line driver.

Exit codes: 0 success, 1 an assertive check failed, 2 an input file is
missing, 3 any other input error (parse, arity, configuration).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .axioms import THEORIES, TheoryError, emit_theory, evaluate_theory, trivial_valuation
from .corpus import KINDS, CorpusError, CorpusSpec, corpus_text, sample_ranks
from .fv import CompileError, fv_compile, fv_eval, fv_verify
from .io import LoadError, Loader, MissingFileError, derivation_to_text, structure_to_text
from .pairs import PairError, dense_pair_check, p_part, relativization_check
from .product import (
    BooleanProduct,
    ProductError,
    check_gamma_properties,
    discriminator_check,
    projector_definability_check,
    projector_identity_check,
)
from .semantics.evaluate import EvaluationError, eval_formula, truth_table
from .semantics.structure import StructureError
from .sexpr import SexprError, parse_one
from .suites import ConfigError, Overrides, dumps_report, exit_status, report_digest, run_suite
from .syntax.ast import FormulaError, free_vars
from .syntax.signatures import RING
from .syntax.text import print_formula, print_signature
from .vnr import (
    RingError,
    check_derivation,
    check_differential_ideals,
    crt_cross_check,
    decompose_stalks,
    enumerate_derivations,
    idempotent_algebra,
    idempotents,
    is_vnr,
    FiniteRing,
)

EXIT_OK, EXIT_FAIL, EXIT_MISSING, EXIT_INPUT = 0, 1, 2, 3
INPUT_ERRORS = (
    LoadError,
    SexprError,
    FormulaError,
    StructureError,
    EvaluationError,
    ProductError,
    CompileError,
    RingError,
    PairError,
    TheoryError,
    CorpusError,
    ConfigError,
)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code, keeping 2 for missing files."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ helpers


def _emit(args, payload) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _loader() -> Loader:
    return Loader(Path.cwd())


def _structure(L: Loader, ref: str):
    if ref.lstrip().startswith("("):
        return L.structure(parse_one(ref))
    return L.structure(ref)


def _formulas(L: Loader, path: str, sig_ref: str | None, default_sig):
    sig = L.signature(sig_ref) if sig_ref else default_sig
    return L.formulas(path, sig)[1]


def _element_assignment(items: Sequence[str]) -> dict[str, int]:
    out = {}
    for item in items or ():
        name, _, value = item.partition("=")
        if not value:
            raise UsageError(f"expected name=value, got {item!r}")
        out[name.strip()] = int(value)
    return out


def _tuple_assignment(items: Sequence[str]) -> dict[str, tuple[int, ...]]:
    out = {}
    for item in items or ():
        name, _, value = item.partition("=")
        if not value:
            raise UsageError(f"expected name=c1,c2,..., got {item!r}")
        out[name.strip()] = tuple(int(c) for c in value.split(","))
    return out


# ------------------------------------------------------------------ commands


def cmd_parse(args) -> int:
    L = _loader()
    path = Path(args.file)
    kind = args.kind or path.suffix.lstrip(".")
    if kind == "sig":
        _emit(args, print_signature(L.signature(str(path))) + "\n")
    elif kind == "str":
        _emit(args, structure_to_text(L.structure(str(path))))
    elif kind == "prod":
        A = L.product(str(path))
        _emit(args, {"factors": [F.name for F in A.factors], "elements": len(A.elements), "full": A.is_full})
    elif kind == "fml":
        fs = _formulas(L, str(path), args.sig, None if args.sig else RING)
        _emit(args, "".join(print_formula(f) + "\n" for f in fs))
    else:
        raise UsageError(f"cannot tell the file kind of {path}; pass --kind")
    return EXIT_OK


def cmd_eval(args) -> int:
    L = _loader()
    A = _structure(L, args.structure)
    env = _element_assignment(args.assign)
    out = []
    for f in _formulas(L, args.file, args.sig, A.sig):
        names = free_vars(f)
        open_vars = [v for v in names if v not in env]
        if not open_vars:
            out.append({"formula": print_formula(f), "value": eval_formula(A, f, {v: env[v] for v in names})})
            continue
        fixed = {v: env[v] for v in names if v in env}
        table = truth_table(A, f, open_vars + list(fixed))
        idx = tuple(slice(None) for _ in open_vars) + tuple(fixed.values())
        sat = [[int(c) for c in t] for t in zip(*table[idx].nonzero())]
        out.append({"formula": print_formula(f), "free": open_vars, "satisfying": sat, "count": len(sat)})
    _emit(args, {"structure": A.name, "results": out})
    return EXIT_OK


def cmd_product(args) -> int:
    L = _loader()
    A = L.product(args.file)
    corpus = _formulas(L, args.formulas, None, A.sig) if args.formulas else []
    checks = args.check or ["gamma"]
    reports = {}
    for c in checks:
        if c == "gamma":
            reports[c] = check_gamma_properties(A, corpus)
        elif c == "identities":
            reports[c] = projector_identity_check(A)
        elif c == "discriminator":
            reports[c] = discriminator_check(A)
        elif c == "definability":
            reports[c] = projector_definability_check(A)
    _emit(args, {"product": [F.name for F in A.factors], "reports": reports})
    return EXIT_OK if all(r["status"] == "pass" for r in reports.values()) else EXIT_FAIL


def cmd_fv(args) -> int:
    L = _loader()
    if args.fv_command == "compile":
        fs = _formulas(L, args.file, args.sig, RING)
        _emit(args, [{"formula": print_formula(f), **fv_compile(f, cap=args.cap).to_json()} for f in fs])
        return EXIT_OK
    A = L.product(args.product)
    fs = _formulas(L, args.file, None, A.sig)
    if args.fv_command == "eval":
        env = _tuple_assignment(args.assign)
        out = []
        for f in fs:
            ds = fv_compile(f, cap=args.cap)
            values = {v: env[v] for v in ds.variables if v in env}
            missing = [v for v in ds.variables if v not in env]
            if missing:
                raise UsageError(f"no value for {missing}")
            direct = eval_formula(A.structure, f, {v: A.position(e) for v, e in values.items()})
            out.append({"formula": print_formula(f), "transfer": fv_eval(A, ds, values), "direct": direct})
        _emit(args, out)
        return EXIT_OK
    reports = [
        {"formula": print_formula(f), **fv_verify(A, f, cap=args.cap, max_assignments=args.max_assignments, record=args.record)}
        for f in fs
    ]
    _emit(args, reports)
    return EXIT_OK if all(r["status"] == "pass" for r in reports) else EXIT_FAIL


def cmd_ring(args) -> int:
    L = _loader()
    R = FiniteRing(_structure(L, args.structure))
    if args.ring_command == "decompose":
        dec = decompose_stalks(R)
        problems = dec.check()
        _emit(
            args,
            {
                "ring": R.name,
                "atoms": list(dec.atoms),
                "ideals": [sorted(I) for I in dec.ideals],
                "stalk_sizes": [S.size for S in dec.stalks],
                "isomorphism": list(dec.isomorphism),
                "status": "pass" if not problems else "fail",
                "witnesses": problems,
            },
        )
        return EXIT_OK if not problems else EXIT_FAIL
    if args.ring_command == "derivations":
        tables = enumerate_derivations(R)
        if args.derivation_dir:
            d = Path(args.derivation_dir)
            d.mkdir(parents=True, exist_ok=True)
            for i, t in enumerate(tables):
                (d / f"derivation_{i}.der").write_text(derivation_to_text(t))
        _emit(args, {"ring": R.name, "count": len(tables), "derivations": [list(t) for t in tables]})
        return EXIT_OK
    ok, bad = is_vnr(R)
    out = {
        "ring": R.name,
        "vnr": ok,
        "vnr_witnesses": bad[:10],
        "idempotents": list(idempotents(R)),
        "crt": crt_cross_check(R),
    }
    if ok:
        out["stone"] = idempotent_algebra(R).stone_check()
    status = EXIT_OK
    if args.derivation:
        d = L.derivation(args.derivation, R.size)
        out["derivation"] = check_derivation(R, d)
        out["differential_ideals"] = check_differential_ideals(R, d)
        if out["derivation"]["status"] != "pass" or (ok and out["differential_ideals"]["status"] != "pass"):
            status = EXIT_FAIL
    _emit(args, out)
    return status


def cmd_pair(args) -> int:
    L = _loader()
    if args.product:
        A = L.product(args.product)
    elif args.structure:
        A = BooleanProduct((_structure(L, args.structure),))
    else:
        raise UsageError("pass --structure or --product")
    formulas = _formulas(L, args.formulas, None, RING) if args.formulas else []
    part = p_part(A, corpus=formulas)
    out = dense_pair_check(A, d_max=args.d_max)
    out["p_part"] = {k: part.gamma["properties"][k] for k in ("P1", "P2")}
    if formulas:
        out["relativization"] = relativization_check(A, formulas)
    _emit(args, out)
    assertive = [out["p_part"]["P1"], out["p_part"]["P2"]] + ([out["relativization"]] if formulas else [])
    return EXIT_OK if all(r["status"] == "pass" for r in assertive) else EXIT_FAIL


def _theory_params(args) -> dict:
    params = {}
    for key in ("n", "k", "p"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    if getattr(args, "sigma", None):
        params["sigma"] = args.sigma
    return params


def cmd_axioms(args) -> int:
    entry = emit_theory(args.theory, **_theory_params(args))
    if args.axioms_command == "emit":
        if not args.out:
            raise UsageError("axioms emit needs --out <dir>")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for a in entry.axioms:
            (out / f"{a.label}.fml").write_text(f"(sig {entry.signature.name})\n{print_formula(a.formula)}\n")
        (out / f"{entry.signature.name}.sig").write_text(print_signature(entry.signature) + "\n")
        manifest = entry.manifest() | {"signature_file": f"{entry.signature.name}.sig"}
        (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        return EXIT_OK
    L = _loader()
    A = _structure(L, args.structure)
    if args.trivial_valuation:
        A = trivial_valuation(A)
    result = evaluate_theory(entry, A)
    _emit(args, result)
    return EXIT_OK


def cmd_run(args) -> int:
    ov = Overrides(seed=args.seed, max_depth=args.max_depth, max_factors=args.max_factors)
    report = run_suite(args.config, ov, jobs=args.jobs)
    if args.no_timing:
        report.pop("timing")
    report["digest"] = report_digest(report)
    _emit(args, dumps_report(report))
    summary = f"{report['suite']}: {report['status']}"
    if report["report_only"]:
        summary += f" ({len(report['report_only'])} report-only failures)"
    print(summary, file=sys.stderr)
    return exit_status(report)


def cmd_corpus(args) -> int:
    spec = CorpusSpec(
        max_depth=args.max_depth if args.max_depth is not None else 2,
        variables=tuple(args.vars.split(",")),
        term_depth=args.term_depth,
        kinds=tuple(args.kinds.split(",")),
    )
    ranks = sample_ranks(spec, args.sample, args.seed or 0)
    formulas = (spec.formula_at(r) for r in ranks)
    meta = {
        "spec": spec.to_json(),
        "size": spec.size,
        "sample": args.sample,
        "seed": args.seed or 0,
        "count": len(ranks),
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "corpus.fml", "w") as fh:
            fh.write("(sig ring)\n")
            for f in formulas:
                fh.write(print_formula(f) + "\n")
        (out / "corpus.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(corpus_text(list(formulas)))
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for sampled corpora")
    common.add_argument("--max-depth", type=int, default=None, help="quantifier depth bound for generated corpora")
    common.add_argument("--max-factors", type=int, default=None, help="largest number of factors in generated products")
    common.add_argument("--out", default=None, help="output file or directory")

    parser = _Parser(prog="fvkit", description="Boolean products, transfer and finite algebra checks.")
    parser.add_argument("--version", action="version", version=f"fvkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse a .sig/.str/.fml/.prod file and print it canonically")
    p.add_argument("file")
    p.add_argument("--kind", choices=["sig", "str", "fml", "prod"])
    p.add_argument("--sig", help="signature for formula files without a (sig ...) header")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", parents=[common], help="evaluate formulas on a structure")
    p.add_argument("file", help=".fml file")
    p.add_argument("--structure", required=True, help=".str file or inline (builtin kind n)")
    p.add_argument("--sig")
    p.add_argument("--assign", nargs="*", default=[], metavar="VAR=ELEMENT")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("product", parents=[common], help="check a boolean product")
    p.add_argument("file", help=".prod file")
    p.add_argument("--formulas", help=".fml corpus for the truth-set properties")
    p.add_argument("--check", nargs="*", choices=["gamma", "identities", "discriminator", "definability"])
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("fv", help="determining sequences")
    fv = p.add_subparsers(dest="fv_command", required=True)
    q = fv.add_parser("compile", parents=[common])
    q.add_argument("file")
    q.add_argument("--sig")
    q.add_argument("--cap", type=int, default=12)
    q = fv.add_parser("eval", parents=[common])
    q.add_argument("file")
    q.add_argument("--product", required=True)
    q.add_argument("--assign", nargs="*", default=[], metavar="VAR=C1,C2,...")
    q.add_argument("--cap", type=int, default=12)
    q = fv.add_parser("verify", parents=[common])
    q.add_argument("file")
    q.add_argument("--product", required=True)
    q.add_argument("--cap", type=int, default=12)
    q.add_argument("--max-assignments", type=int, default=None)
    q.add_argument("--record", action="store_true", help="include every verdict pair")
    p.set_defaults(func=cmd_fv)

    p = sub.add_parser("ring", help="finite commutative rings")
    ring = p.add_subparsers(dest="ring_command", required=True)
    for name in ("decompose", "derivations", "check"):
        q = ring.add_parser(name, parents=[common])
        q.add_argument("--structure", required=True)
        if name == "derivations":
            q.add_argument("--derivation-dir", help="also write one .der file per derivation")
        if name == "check":
            q.add_argument("--derivation", help=".der file to check")
    p.set_defaults(func=cmd_ring)

    p = sub.add_parser("pair", help="pair structures")
    pair = p.add_subparsers(dest="pair_command", required=True)
    q = pair.add_parser("check", parents=[common])
    q.add_argument("--structure")
    q.add_argument("--product")
    q.add_argument("--d-max", type=int, default=2)
    q.add_argument("--formulas", help=".fml corpus for the relativization check")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("axioms", help="axiom corpora")
    ax = p.add_subparsers(dest="axioms_command", required=True)
    for name in ("emit", "eval"):
        q = ax.add_parser(name, parents=[common])
        q.add_argument("--theory", required=True, choices=sorted(THEORIES))
        q.add_argument("--n", type=int)
        q.add_argument("--k", type=int)
        q.add_argument("--p", type=int)
        q.add_argument("--sigma", help="defining formula for a density instance")
        if name == "eval":
            q.add_argument("--structure", required=True)
            q.add_argument("--trivial-valuation", action="store_true")
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("run", parents=[common], help="run the suites of a TOML configuration")
    p.add_argument("config")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="omit the timing field")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("corpus", parents=[common], help="generate a formula corpus")
    p.add_argument("--vars", default="x,y,z")
    p.add_argument("--term-depth", type=int, default=2)
    p.add_argument("--kinds", default=",".join(KINDS))
    p.add_argument("--sample", type=int, default=None)
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MissingFileError as exc:
        print(f"fvkit: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (UsageError, *INPUT_ERRORS) as exc:
        print(f"fvkit: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
