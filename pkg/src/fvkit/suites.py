"""Batch verification suites driven by a TOML configuration.

A configuration lists suites; each suite expands into independent tasks
(plain dictionaries, so they can be shipped to worker processes) whose
check records are gathered into one JSON report in task order.

Assertive checks decide the exit status; report-only checks (converses
and density conditions that need infinite models) are listed under
``report_only`` and never fail a run.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import __version__, sexpr
from .axioms import all_theories, emit_theory, evaluate_theory, trivial_valuation
from .corpus import CorpusSpec, generate_corpus
from .fv import burris_check, burris_decompose, fv_compile, fv_verify, pair_claim_check, pair_decompose
from .io import LoadError, Loader, MissingFileError
from .pairs import dense_pair_check, p_part, pair_corpus, relativization_check, splice_check
from .product import (
    BooleanProduct,
    discriminator_check,
    projector_definability_check,
    projector_identity_check,
)
from .semantics.builtins import with_projector
from .semantics.evaluate import truth_table
from .syntax.ast import free_vars
from .syntax.signatures import RING, RING_PAIR
from .syntax.text import parse_formula, print_formula
from .syntax.transforms import projector_translate, to_prenex
from .vnr import (
    FiniteRing,
    check_derivation,
    check_differential_ideals,
    crt_cross_check,
    decompose_stalks,
    derivation_corpus,
    enumerate_derivations,
    idempotent_algebra,
    is_vnr,
    vnr_corpus,
)

SUITE_KINDS = ("fv-verify", "projector", "vnr", "pairs", "burris", "axioms")
MAX_WITNESSES = 20


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Overrides:
    seed: int | None = None
    max_depth: int | None = None
    max_factors: int | None = None
    max_witnesses: int = MAX_WITNESSES


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def record(check: str, inputs: dict, result: dict, assertive: bool = True, max_witnesses: int = MAX_WITNESSES) -> dict:
    """Uniform check record; witness lists are truncated but counted."""
    witnesses = result.get("witnesses", [])
    extra = {k: v for k, v in result.items() if k not in ("check", "status", "witnesses")}
    return {
        "check": check,
        "inputs": inputs,
        "inputs_digest": digest(inputs),
        "assertive": assertive,
        "status": result.get("status", "pass" if not witnesses else "fail"),
        "witness_count": len(witnesses),
        "witnesses": witnesses[:max_witnesses],
        **extra,
    }


# ------------------------------------------------------------------ loading


class _Context:
    """Per-process loader bound to the configuration directory."""

    _loaders: dict[str, Loader] = {}
    _formulas: dict[str, list] = {}
    _products: dict[str, list] = {}

    @classmethod
    def loader(cls, base: str) -> Loader:
        if base not in cls._loaders:
            cls._loaders[base] = Loader(Path(base))
        return cls._loaders[base]


def _structure(L: Loader, ref: str):
    ref = ref.strip()
    if ref.startswith("("):
        try:
            return L.structure(sexpr.parse_one(ref))
        except sexpr.SexprError as exc:
            raise LoadError(f"bad inline structure {ref!r}: {exc}") from exc
    return L.structure(ref)


def _formulas(L: Loader, suite: dict, sig, overrides: Overrides, default_depth: int = 2) -> list:
    key = digest([str(L.base), suite, sig.name, overrides.__dict__, default_depth])
    if key not in _Context._formulas:
        _Context._formulas[key] = _build_formulas(L, suite, sig, overrides, default_depth)
    return _Context._formulas[key]


def _build_formulas(L: Loader, suite: dict, sig, overrides: Overrides, default_depth: int) -> list:
    out = []
    for ref in suite.get("formulas", []):
        _, fs = L.formulas(ref, sig)
        out.extend(fs)
    for text in suite.get("formula_texts", []):
        out.append(parse_formula(text, sig))
    spec = suite.get("corpus")
    if spec is not None:
        depth = overrides.max_depth if overrides.max_depth is not None else spec.get("max_depth", default_depth)
        cs = CorpusSpec(
            max_depth=depth,
            variables=tuple(spec.get("variables", ("x", "y", "z"))),
            term_depth=spec.get("term_depth", 2),
            kinds=tuple(spec.get("kinds", ("atom", "not", "and", "or"))),
        )
        seed = overrides.seed if overrides.seed is not None else spec.get("seed", 0)
        out.extend(generate_corpus(cs, spec.get("sample"), seed))
    return out


def _products(L: Loader, suite: dict, overrides: Overrides) -> list[BooleanProduct]:
    key = digest([str(L.base), suite.get("products", []), suite.get("fields", []), suite.get("max_factors"), overrides.max_factors])
    if key not in _Context._products:
        _Context._products[key] = _build_products(L, suite, overrides)
    return _Context._products[key]


def _build_products(L: Loader, suite: dict, overrides: Overrides) -> list[BooleanProduct]:
    out = [L.product(ref) for ref in suite.get("products", [])]
    fields = [_structure(L, r) for r in suite.get("fields", [])]
    if fields:
        k = overrides.max_factors if overrides.max_factors is not None else suite.get("max_factors", 2)
        for n in range(1, k + 1):
            for combo in itertools.combinations_with_replacement(fields, n):
                out.append(BooleanProduct(combo))
    return out


def _name(A: BooleanProduct) -> str:
    return " x ".join(F.name for F in A.factors)


# ------------------------------------------------------------------ planning


def plan(config: dict, base: Path, overrides: Overrides) -> list[dict]:
    """Tasks for every suite, in configuration order."""
    suites = config.get("suite", [])
    if not suites:
        raise ConfigError("configuration has no [[suite]] entries")
    tasks = []
    for i, suite in enumerate(suites):
        kind = suite.get("kind")
        if kind not in SUITE_KINDS:
            raise ConfigError(f"suite {i}: unknown kind {kind!r}; expected one of {SUITE_KINDS}")
        name = suite.get("name", f"{kind}-{i}")
        common = {"suite": name, "kind": kind, "base": str(base), "config": suite, "overrides": overrides.__dict__}
        if kind == "fv-verify":
            L = _Context.loader(str(base))
            n = len(_formulas(L, suite, RING, overrides))
            tasks.extend({**common, "item": j} for j in range(n))
        else:
            tasks.append({**common, "item": None})
    return tasks


def _validate_inputs(tasks: list[dict]) -> None:
    """Load every referenced file up front so missing inputs fail early."""
    seen = set()
    for t in tasks:
        key = (t["suite"], t["base"])
        if key in seen:
            continue
        seen.add(key)
        L = _Context.loader(t["base"])
        suite = t["config"]
        for ref in suite.get("structures", []) + suite.get("fields", []):
            _structure(L, ref)
        for ref in suite.get("products", []):
            L.product(ref)
        for ref in suite.get("formulas", []):
            L.formulas(ref, RING)
        for ref in suite.get("claim_formulas", []):
            L.formulas(ref, RING_PAIR)
        for item in suite.get("derivations", []) if isinstance(suite.get("derivations"), list) else []:
            A = _structure(L, item["structure"])
            L.derivation(item["table"], A.size)


# ------------------------------------------------------------------ execution


def execute(task: dict) -> list[dict]:
    L = _Context.loader(task["base"])
    ov = Overrides(**task["overrides"])
    runner = _RUNNERS[task["kind"]]
    return runner(L, task["config"], task["item"], ov)


def _run_fv(L: Loader, suite: dict, item: int, ov: Overrides) -> list[dict]:
    f = _formulas(L, suite, RING, ov)[item]
    cap = suite.get("cap", 16)
    ds = fv_compile(f, cap=cap)
    witnesses, assignments = [], 0
    for A in _products(L, suite, ov):
        r = fv_verify(A, f, ds=ds)
        assignments += r["assignments_checked"]
        witnesses.extend({"product": _name(A), **w} for w in r["witnesses"])
    result = {"witnesses": witnesses, "assignments_checked": assignments, "psis": ds.length}
    return [record("fv_verify", {"formula": print_formula(f)}, result, True, ov.max_witnesses)]


def _run_projector(L: Loader, suite: dict, item, ov: Overrides) -> list[dict]:
    out = []
    fields = [_structure(L, r) for r in suite.get("fields", [])]
    formulas = _formulas(L, suite, RING, ov)
    if formulas:
        witnesses = []
        for F in fields:
            P = with_projector(F)
            for f in formulas:
                g = projector_translate(to_prenex(f))
                vs = tuple(sorted(set(free_vars(f)) | set(free_vars(g))))
                a, b = truth_table(F, f, vs), truth_table(P, g, vs)
                if (a != b).any():
                    witnesses.append({"field": F.name, "formula": print_formula(f), "translation": print_formula(g)})
        out.append(
            record(
                "projector_translation",
                {"fields": [F.name for F in fields], "formulas": len(formulas)},
                {"witnesses": witnesses},
                True,
                ov.max_witnesses,
            )
        )
    max_def = suite.get("definability_max_size", 4)
    disc_max = suite.get("discriminator_max_elements", 36)
    for A in _products(L, suite, ov):
        name = _name(A)
        out.append(record("projector_identities", {"product": name}, projector_identity_check(A), True, ov.max_witnesses))
        if all(F.size <= max_def for F in A.factors):
            out.append(
                record("projector_definability", {"product": name}, projector_definability_check(A), True, ov.max_witnesses)
            )
        if len(A.elements) <= disc_max:
            out.append(record("discriminator", {"product": name}, discriminator_check(A), True, ov.max_witnesses))
    return out


def _rings(L: Loader, suite: dict, builtin) -> list[FiniteRing]:
    rings = [FiniteRing(_structure(L, r)) for r in suite.get("structures", [])]
    if suite.get("builtin_corpus", False):
        rings += builtin()
    return rings


def _run_vnr(L: Loader, suite: dict, item, ov: Overrides) -> list[dict]:
    out = []
    mw = ov.max_witnesses
    for R in _rings(L, suite, vnr_corpus):
        ok, bad = is_vnr(R)
        crt = crt_cross_check(R)
        agree = [] if crt["criterion"] == ok else [{"crt": crt["criterion"], "vnr": ok}]
        out.append(record("crt_cross_check", {"ring": R.name}, {"witnesses": agree, "vnr": ok}, True, mw))
        if not ok:
            out.append(record("vnr", {"ring": R.name}, {"witnesses": [{"x": bad[0]}]}, False, mw))
            continue
        dec = decompose_stalks(R)
        out.append(
            record(
                "stalk_decomposition",
                {"ring": R.name},
                {"witnesses": dec.check(), "stalk_sizes": [S.size for S in dec.stalks]},
                True,
                mw,
            )
        )
        out.append(record("stone", {"ring": R.name}, {"witnesses": idempotent_algebra(R).stone_check()}, True, mw))
    if suite.get("derivations"):
        out.extend(_run_derivations(L, suite, ov))
    return out


def _run_derivations(L: Loader, suite: dict, ov: Overrides) -> list[dict]:
    out = []
    mw = ov.max_witnesses
    pairs: list[tuple[FiniteRing, list]] = []
    if isinstance(suite["derivations"], list):
        for item in suite["derivations"]:
            R = FiniteRing(_structure(L, item["structure"]))
            pairs.append((R, [L.derivation(item["table"], R.size)]))
    else:
        rings = [FiniteRing(_structure(L, r)) for r in suite.get("derivation_structures", [])]
        if suite.get("builtin_corpus", False):
            rings += derivation_corpus()
        pairs = [(R, enumerate_derivations(R)) for R in rings]
    for R, tables in pairs:
        vnr = is_vnr(R)[0]
        law, ideals = [], []
        for d in tables:
            r = check_derivation(R, d)
            law.extend({"derivation": list(d), **w} for w in r["witnesses"])
            di = check_differential_ideals(R, d)
            ideals.extend({"derivation": list(d), **w} for w in di["witnesses"])
        inputs = {"ring": R.name}
        out.append(record("derivation_laws", inputs, {"witnesses": law, "derivations": len(tables)}, True, mw))
        out.append(
            record(
                "differential_maximal_ideals",
                inputs,
                {"witnesses": ideals, "vnr": vnr},
                assertive=vnr,
                max_witnesses=mw,
            )
        )
    return out


def _pair_products(L: Loader, suite: dict) -> list[BooleanProduct]:
    out = [L.product(r) for r in suite.get("products", [])]
    if suite.get("builtin_corpus", False):
        out += pair_corpus()
    return out


def _run_pairs(L: Loader, suite: dict, item, ov: Overrides) -> list[dict]:
    out = []
    mw = ov.max_witnesses
    formulas = _formulas(L, suite, RING, ov, default_depth=2)
    claims = []
    for ref in suite.get("claim_formulas", []):
        claims.extend(L.formulas(ref, RING_PAIR)[1])
    for text in suite.get("claim_texts", []):
        claims.append(parse_formula(text, RING_PAIR))
    d_max = suite.get("d_max", 2)
    for A in _pair_products(L, suite):
        name = _name(A)
        part = p_part(A, corpus=formulas)
        for key in ("P1", "P2"):
            out.append(record(f"p_part_{key}", {"product": name}, part.gamma["properties"][key], True, mw))
        out.append(record("p_part_splice", {"product": name}, {"witnesses": splice_check(A)}, True, mw))
        if formulas:
            out.append(record("relativization", {"product": name, "formulas": len(formulas)}, relativization_check(A, formulas), True, mw))
        dense = dense_pair_check(A, d_max=d_max)
        for key in ("D1", "D2", "D3", "D4"):
            out.append(record(f"dense_{key}", {"product": name, "d_max": d_max}, dense[key], False, mw))
        for f in claims:
            r = pair_claim_check(pair_decompose(f), A)
            inputs = {"product": name, "formula": print_formula(f)}
            out.append(record("pair_claim_forward", inputs, {k: v for k, v in r.items() if k != "converse"}, True, mw))
            out.append(record("pair_claim_converse", inputs, r["converse"] | {"status": _holds(r["converse"])}, False, mw))
    return out


def _holds(r: dict) -> str:
    return "pass" if r["status"] == "holds" else "fail"


def _run_burris(L: Loader, suite: dict, item, ov: Overrides) -> list[dict]:
    out = []
    mw = ov.max_witnesses
    structures = [_structure(L, r) for r in suite.get("structures", [])]
    for f in _formulas(L, suite, RING, ov):
        dec = burris_decompose(f)
        r = burris_check(dec, structures)
        inputs = {"formula": print_formula(f), "structures": [A.name for A in structures]}
        out.append(record("burris_forward", inputs, {"witnesses": r["witnesses"]}, True, mw))
        out.append(record("burris_converse", inputs, r["converse"] | {"status": _holds(r["converse"])}, False, mw))
    return out


def _theories(suite: dict) -> list:
    spec = suite.get("theories", "all")
    if spec == "all":
        return all_theories()
    return [emit_theory(t["name"], **{k: v for k, v in t.items() if k != "name"}) for t in spec]


def _run_axioms(L: Loader, suite: dict, item, ov: Overrides) -> list[dict]:
    out = []
    mw = ov.max_witnesses
    entries = _theories(suite)
    bad = []
    for e in entries:
        for a in e.axioms:
            text = print_formula(a.formula)
            again = parse_formula(text, e.signature)
            if again != a.formula or print_formula(again) != text:
                bad.append({"theory": e.theory, "label": a.label})
    out.append(record("axiom_roundtrip", {"theories": [e.theory for e in entries]}, {"witnesses": bad, "axioms": sum(len(e.axioms) for e in entries)}, True, mw))
    for ev in suite.get("evaluate", []):
        entry = emit_theory(ev["theory"], **ev.get("params", {}))
        A = _structure(L, ev["structure"])
        if ev.get("valuation") == "trivial":
            A = trivial_valuation(A)
        r = evaluate_theory(entry, A)
        fails = [v for v in r["verdicts"] if v["verdict"] == "fail"]
        fails += [{"dagger": w} for w in r["dagger_violations"]]
        expect = ev.get("expect", "report")
        out.append(
            record(
                "theory_evaluation",
                {"theory": entry.theory, "structure": A.name},
                {"witnesses": fails, "verdicts": r["verdicts"]},
                assertive=expect == "pass",
                max_witnesses=mw,
            )
        )
    return out


_RUNNERS = {
    "fv-verify": _run_fv,
    "projector": _run_projector,
    "vnr": _run_vnr,
    "pairs": _run_pairs,
    "burris": _run_burris,
    "axioms": _run_axioms,
}


# ------------------------------------------------------------------ reports


def load_config(path: Path) -> dict:
    if not path.is_file():
        raise MissingFileError(path)
    try:
        return tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise LoadError(f"bad configuration: {exc}", path) from exc


def run_suite(path: Path | str, overrides: Overrides = Overrides(), jobs: int = 1) -> dict:
    """Execute every suite of a configuration file and assemble the report."""
    path = Path(path).resolve()
    config = load_config(path)
    start = time.perf_counter()
    tasks = plan(config, path.parent, overrides)
    _validate_inputs(tasks)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(execute, tasks))
    else:
        results = [execute(t) for t in tasks]
    elapsed = time.perf_counter() - start
    suites: dict[str, dict] = {}
    for task, records in zip(tasks, results):
        s = suites.setdefault(task["suite"], {"name": task["suite"], "kind": task["kind"], "checks": []})
        s["checks"].extend(records)
    report_only = []
    status = "pass"
    for s in suites.values():
        failed = [c for c in s["checks"] if c["status"] != "pass"]
        s["status"] = "pass" if not any(c["assertive"] for c in failed) else "fail"
        if s["status"] == "fail":
            status = "fail"
        report_only.extend(
            {"suite": s["name"], "check": c["check"], "inputs": c["inputs"], "witness_count": c["witness_count"]}
            for c in failed
            if not c["assertive"]
        )
    L = _Context.loader(str(path.parent))
    inputs = {str(Path(p).relative_to(path.parent)) if Path(p).is_relative_to(path.parent) else p: h for p, h in sorted(L.loaded.items())}
    return {
        "suite": config.get("name", path.stem),
        "toolkit": {"name": "fvkit", "version": __version__},
        "config_sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
        "inputs": inputs,
        "overrides": {k: v for k, v in overrides.__dict__.items() if v is not None},
        "suites": list(suites.values()),
        "report_only": report_only,
        "status": status,
        "timing": {"seconds": round(elapsed, 3), "tasks": len(tasks), "jobs": jobs},
    }


def report_digest(report: dict) -> str:
    """Hash of the report with the timing field removed."""
    return hashlib.sha256(dumps_report({k: v for k, v in report.items() if k != "timing"}).encode()).hexdigest()


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def exit_status(report: dict) -> int:
    return 0 if report["status"] == "pass" else 1


def iter_failures(report: dict) -> Iterable[dict]:
    for s in report["suites"]:
        for c in s["checks"]:
            if c["status"] != "pass" and c["assertive"]:
                yield {"suite": s["name"], **c}
