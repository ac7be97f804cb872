"""Reading and writing signature, structure, formula, product and
derivation files.

References to other files resolve relative to the referencing file; a
reference that names no existing file falls back to the built-in
signatures and structures.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import sexpr
from .product import BooleanProduct
from .semantics.builtins import builtin_structure
from .semantics.structure import FiniteStructure, StructureError
from .sexpr import SexprError
from .syntax.ast import Formula, FormulaError, Signature
from .syntax.signatures import BUILTIN_SIGNATURES
from .syntax.text import formula_from_sexpr, print_formula, signature_from_sexpr


class LoadError(ValueError):
    def __init__(self, message, path: Path | str | None = None, node=None):
        line, col = sexpr.position(node) if node is not None else (0, 0)
        if isinstance(message, Exception):
            # prefer the position the wrapped error already knows
            if getattr(message, "line", 0):
                line, col = message.line, message.col
            message = getattr(message, "message", str(message))
        where = ""
        if path is not None:
            where = str(path)
            if line:
                where += f":{line}:{col}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line, self.col = line, col


class MissingFileError(LoadError):
    def __init__(self, path: Path | str):
        super().__init__(f"file not found: {path}")
        self.path = path


def file_digest(path: Path | str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _int(node, path, what: str) -> int:
    if isinstance(node, list):
        raise LoadError(f"expected an integer {what}", path, node)
    try:
        return int(node)
    except ValueError:
        raise LoadError(f"expected an integer {what}, got {node!r}", path, node) from None


@dataclass
class Loader:
    """Caching loader; ``loaded`` records the digest of every file read."""

    base: Path = field(default_factory=Path.cwd)
    loaded: dict[str, str] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict)

    # -- plumbing ----------------------------------------------------------

    def resolve(self, ref: str, relative_to: Path | None = None) -> Path:
        p = Path(ref)
        if not p.is_absolute():
            p = (relative_to.parent if relative_to else self.base) / p
        return p

    def _read(self, path: Path) -> list:
        if not path.is_file():
            raise MissingFileError(path)
        text = path.read_text()
        self.loaded[str(path)] = hashlib.sha256(text.encode()).hexdigest()
        try:
            return sexpr.parse_all(text)
        except SexprError as exc:
            raise LoadError(exc, path) from exc

    def _form(self, path: Path, head: str) -> list:
        forms = self._read(path)
        if len(forms) != 1 or not isinstance(forms[0], list) or not forms[0] or forms[0][0] != head:
            raise LoadError(f"expected a single ({head} ...) form", path)
        return forms[0]

    # -- signatures --------------------------------------------------------

    def signature(self, ref: str, relative_to: Path | None = None) -> Signature:
        path = self.resolve(ref, relative_to)
        if not path.is_file() and not ref.endswith(".sig") and ref in BUILTIN_SIGNATURES:
            return BUILTIN_SIGNATURES[ref]
        key = ("sig", path)
        if key not in self._cache:
            node = self._form(path, "signature")
            try:
                self._cache[key] = signature_from_sexpr(node)
            except FormulaError as exc:
                raise LoadError(exc, path) from exc
        return self._cache[key]

    # -- structures --------------------------------------------------------

    def structure(self, ref, relative_to: Path | None = None) -> FiniteStructure:
        """``ref`` is a path or an inline ``(builtin kind n)`` form."""
        if isinstance(ref, list):
            return self._builtin(ref, relative_to)
        path = self.resolve(ref, relative_to)
        key = ("str", path)
        if key not in self._cache:
            forms = self._read(path)
            if len(forms) != 1 or not isinstance(forms[0], list) or not forms[0]:
                raise LoadError("expected a single structure form", path)
            node = forms[0]
            if node[0] == "builtin":
                self._cache[key] = self._builtin(node, path)
            elif node[0] == "structure":
                self._cache[key] = self._structure(node, path)
            else:
                raise LoadError(f"expected (structure ...) or (builtin ...), got ({node[0]} ...)", path, node)
        return self._cache[key]

    def _builtin(self, node: list, path) -> FiniteStructure:
        if len(node) != 3 or node[0] != "builtin":
            raise LoadError("expected (builtin <kind> <n>)", path, node)
        try:
            return builtin_structure(str(node[1]), _int(node[2], path, "builtin argument"))
        except StructureError as exc:
            raise LoadError(exc, path, node) from exc

    def _structure(self, node: list, path: Path) -> FiniteStructure:
        if len(node) < 2 or isinstance(node[1], list):
            raise LoadError("expected (structure <name> ...)", path, node)
        name = str(node[1])
        sig, size = None, None
        funs: dict[str, dict[tuple, int]] = {}
        consts: dict[str, int] = {}
        rels: dict[str, set] = {}
        labels = None
        for clause in node[2:]:
            if not isinstance(clause, list) or not clause:
                raise LoadError("malformed structure clause", path, clause)
            kind = clause[0]
            if kind == "signature":
                if len(clause) == 2 and not isinstance(clause[1], list):
                    sig = self.signature(str(clause[1]), path)
                else:
                    try:
                        sig = signature_from_sexpr(clause)
                    except FormulaError as exc:
                        raise LoadError(exc, path, clause) from exc
            elif kind == "size":
                size = _int(clause[1] if len(clause) == 2 else clause, path, "size")
            elif kind == "fun":
                table = funs.setdefault(str(clause[1]), {})
                for row in clause[2:]:
                    if not isinstance(row, list) or not row:
                        raise LoadError("expected (<args...> <value>)", path, row)
                    vals = [_int(x, path, "element") for x in row]
                    table[tuple(vals[:-1])] = vals[-1]
            elif kind == "const":
                if len(clause) != 3:
                    raise LoadError("expected (const <symbol> <value>)", path, clause)
                consts[str(clause[1])] = _int(clause[2], path, "element")
            elif kind == "rel":
                tuples = rels.setdefault(str(clause[1]), set())
                for row in clause[2:]:
                    row = row if isinstance(row, list) else [row]
                    tuples.add(tuple(_int(x, path, "element") for x in row))
            elif kind == "labels":
                labels = tuple(str(x) for x in clause[1:])
            else:
                raise LoadError(f"unknown structure clause {kind!r}", path, clause)
        if sig is None or size is None:
            raise LoadError("structure needs (signature ...) and (size ...)", path, node)
        tables = {}
        for f, k in sig.functions:
            if f not in funs:
                raise LoadError(f"missing table for function {f!r}", path, node)
            table = funs.pop(f)
            rows = []
            for args in itertools.product(range(size), repeat=k):
                if args not in table:
                    raise LoadError(f"table for {f!r} has no entry for {args}", path, node)
                rows.append(table[args])
            if len(table) != size**k:
                raise LoadError(f"table for {f!r} has entries outside the universe", path, node)
            tables[f] = tuple(rows)
        if funs:
            raise LoadError(f"unknown function symbols {sorted(funs)}", path, node)
        try:
            return FiniteStructure(sig, size, tables, consts, rels, name, labels)
        except StructureError as exc:
            raise LoadError(exc, path, node) from exc

    # -- formulas ----------------------------------------------------------

    def formulas(self, ref: str, sig: Signature | None = None, relative_to: Path | None = None) -> tuple[Signature, list[Formula]]:
        """A ``.fml`` file: optional ``(sig <ref>)`` header then formulas."""
        path = self.resolve(ref, relative_to)
        forms = self._read(path)
        if forms and isinstance(forms[0], list) and forms[0] and forms[0][0] == "sig":
            if len(forms[0]) != 2:
                raise LoadError("expected (sig <ref>)", path, forms[0])
            sig = self.signature(str(forms[0][1]), path)
            forms = forms[1:]
        if sig is None:
            raise LoadError("no signature given for formula file", path)
        out = []
        for node in forms:
            try:
                out.append(formula_from_sexpr(node, sig))
            except FormulaError as exc:
                raise LoadError(exc, path, node) from exc
        return sig, out

    # -- products ----------------------------------------------------------

    def product(self, ref: str, relative_to: Path | None = None) -> BooleanProduct:
        path = self.resolve(ref, relative_to)
        node = self._form(path, "product")
        factors, carrier = None, None
        for clause in node[1:]:
            if not isinstance(clause, list) or not clause:
                raise LoadError("malformed product clause", path, clause)
            if clause[0] == "factors":
                factors = [self.structure(x if isinstance(x, list) else str(x), path) for x in clause[1:]]
            elif clause[0] == "carrier":
                if len(clause) != 2:
                    raise LoadError("expected (carrier full) or (carrier (elements ...))", path, clause)
                body = clause[1]
                if body == "full":
                    carrier = None
                elif isinstance(body, list) and body and body[0] == "elements":
                    carrier = [tuple(_int(x, path, "coordinate") for x in e) for e in body[1:]]
                else:
                    raise LoadError("expected full or (elements ...)", path, body)
            else:
                raise LoadError(f"unknown product clause {clause[0]!r}", path, clause)
        if not factors:
            raise LoadError("product needs (factors ...)", path, node)
        try:
            return BooleanProduct(tuple(factors), carrier=None if carrier is None else frozenset(carrier))
        except ValueError as exc:
            raise LoadError(exc, path, node) from exc

    # -- derivations -------------------------------------------------------

    def derivation(self, ref: str, size: int, relative_to: Path | None = None) -> tuple[int, ...]:
        path = self.resolve(ref, relative_to)
        node = self._form(path, "derivation")
        table: dict[int, int] = {}
        for row in node[1:]:
            if not isinstance(row, list) or len(row) != 2:
                raise LoadError("expected (<element> <image>)", path, row)
            a, b = (_int(x, path, "element") for x in row)
            if not (0 <= a < size and 0 <= b < size):
                raise LoadError(f"({a} {b}) leaves the universe of size {size}", path, row)
            table[a] = b
        missing = [a for a in range(size) if a not in table]
        if missing:
            raise LoadError(f"derivation has no image for {missing}", path, node)
        return tuple(table[a] for a in range(size))


# ------------------------------------------------------------------ writers


def _atom(name: str) -> str:
    """``name`` made into a single s-expression atom."""
    return "".join(ch for ch in name.translate(str.maketrans("()", "[]")) if not ch.isspace() and ch != ";") or "A"


def structure_to_text(A: FiniteStructure, sig_ref: str | None = None) -> str:
    """``.str`` text for ``A``, one clause per line."""
    n = A.size
    lines = [f"(structure {_atom(A.name)}"]
    ref = sig_ref or A.sig.name
    lines.append(f"  (signature {ref})")
    lines.append(f"  (size {n})")
    for c in A.sig.constants:
        lines.append(f"  (const {c} {A.constants[c]})")
    for f, k in A.sig.functions:
        rows = [
            "(" + " ".join(map(str, args + (A.apply(f, *args),))) + ")"
            for args in itertools.product(range(n), repeat=k)
        ]
        lines.append(f"  (fun {f} {' '.join(rows)})")
    for r, _ in A.sig.relations:
        tuples = sorted(A.relations[r])
        lines.append(f"  (rel {r}" + "".join(" (" + " ".join(map(str, t)) + ")" for t in tuples) + ")")
    if A.labels and not any(set(lab) & set("(); \t\n") for lab in A.labels):
        lines.append("  (labels " + " ".join(A.labels) + ")")
    return "\n".join(lines) + ")\n"


def formulas_to_text(formulas: Sequence[Formula], sig_ref: str | None = None) -> str:
    head = [f"(sig {sig_ref})"] if sig_ref else []
    return "\n".join(head + [print_formula(f) for f in formulas]) + "\n"


def derivation_to_text(table: Sequence[int]) -> str:
    return "(derivation " + " ".join(f"({a} {b})" for a, b in enumerate(table)) + ")\n"
