from __future__ import annotations

import pytest

from fvkit.io import (
    LoadError,
    Loader,
    MissingFileError,
    derivation_to_text,
    file_digest,
    formulas_to_text,
    structure_to_text,
)
from fvkit.semantics.builtins import dual_numbers, gf, zmod
from fvkit.semantics.structure import expand
from fvkit.syntax.signatures import RING, RING_PAIR
from fvkit.syntax.text import parse_formula, print_signature


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def same_structure(A, B) -> bool:
    return (A.sig, A.size, dict(A.functions), dict(A.constants), {k: set(v) for k, v in A.relations.items()}) == (
        B.sig, B.size, dict(B.functions), dict(B.constants), {k: set(v) for k, v in B.relations.items()})


@pytest.mark.parametrize("A", [gf(4), zmod(6), dual_numbers(3), expand(gf(4), RING_PAIR, relations={"P": [(0,), (1,)]})],
                         ids=lambda A: A.name)
def test_structure_text_roundtrip(tmp_path, A):
    write(tmp_path, "a.str", structure_to_text(A))
    B = Loader(tmp_path).structure("a.str")
    assert same_structure(A, B)


def test_loader_records_digests_and_caches(tmp_path):
    p = write(tmp_path, "a.str", "(builtin gf 4)\n")
    L = Loader(tmp_path)
    A = L.structure("a.str")
    assert A.size == 4 and L.structure("a.str") is A
    assert L.loaded == {str(p): file_digest(p)}
    assert L.structure(["builtin", "zmod", "5"]).size == 5


def test_signature_files_and_builtin_names(tmp_path):
    write(tmp_path, "r.sig", print_signature(RING_PAIR) + "\n")
    L = Loader(tmp_path)
    assert L.signature("r.sig") == RING_PAIR
    assert L.signature("ring") == RING
    with pytest.raises(MissingFileError):
        L.signature("nope.sig")


def test_formula_files(tmp_path):
    write(tmp_path, "f.fml", formulas_to_text([parse_formula("(= x 0)", RING), parse_formula("(P x)", RING_PAIR)],
                                              "ring_pair"))
    sig, fs = Loader(tmp_path).formulas("f.fml")
    assert sig == RING_PAIR and len(fs) == 2
    write(tmp_path, "g.fml", "(= x 0)\n")
    with pytest.raises(LoadError, match="no signature"):
        Loader(tmp_path).formulas("g.fml")
    assert Loader(tmp_path).formulas("g.fml", RING)[1] == [parse_formula("(= x 0)", RING)]


def test_formula_error_positions(tmp_path):
    write(tmp_path, "bad.fml", "(sig ring)\n(= x 0)\n(and (= x 0)\n  (Q x))\n")
    with pytest.raises(LoadError) as info:
        Loader(tmp_path).formulas("bad.fml")
    assert str(info.value) == f"{tmp_path / 'bad.fml'}:4:4: unknown relation symbol 'Q'"
    assert (info.value.line, info.value.col) == (4, 4)


def test_product_files(tmp_path):
    write(tmp_path, "f2.str", "(builtin gf 2)")
    write(tmp_path, "full.prod", "(product (factors f2.str (builtin gf 3)) (carrier full))")
    write(tmp_path, "diag.prod", "(product (factors f2.str f2.str) (carrier (elements (0 0) (1 1))))")
    write(tmp_path, "bad.prod", "(product (factors f2.str f2.str) (carrier (elements (0 0) (1 0))))")
    L = Loader(tmp_path)
    A = L.product("full.prod")
    assert A.is_full and [F.size for F in A.factors] == [2, 3]
    D = L.product("diag.prod")
    assert not D.is_full and set(D.elements) == {(0, 0), (1, 1)}
    with pytest.raises(LoadError):
        L.product("bad.prod")


def test_derivation_files(tmp_path):
    write(tmp_path, "d.der", derivation_to_text((0, 0, 1, 1)))
    assert Loader(tmp_path).derivation("d.der", 4) == (0, 0, 1, 1)
    write(tmp_path, "short.der", "(derivation (0 0) (1 0))")
    with pytest.raises(LoadError, match="no image"):
        Loader(tmp_path).derivation("short.der", 4)
    write(tmp_path, "out.der", "(derivation (0 0) (1 7))")
    with pytest.raises(LoadError, match="leaves the universe"):
        Loader(tmp_path).derivation("out.der", 2)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("(structure s (signature ring))", "needs (signature"),
        ("(structure s (signature ring) (size 2) (const 0 0) (const 1 1))", "missing table"),
        ("(structure s (signature ring) (size 2) (colour red))", "unknown structure clause"),
        ("(shape s)", "expected (structure"),
        ("(builtin gf 6)", ""),
        ("(builtin gf x)", ""),
        ("(structure s", ""),
    ],
)
def test_structure_errors(tmp_path, text, fragment):
    write(tmp_path, "s.str", text)
    with pytest.raises(LoadError) as info:
        Loader(tmp_path).structure("s.str")
    assert fragment in str(info.value)


def test_incomplete_table_is_reported(tmp_path):
    text = structure_to_text(zmod(2)).replace("(1 1 0)", "")
    write(tmp_path, "s.str", text)
    with pytest.raises(LoadError, match="no entry"):
        Loader(tmp_path).structure("s.str")


def test_missing_file_is_a_load_error(tmp_path):
    with pytest.raises(MissingFileError) as info:
        Loader(tmp_path).structure("absent.str")
    assert isinstance(info.value, LoadError)
    assert "absent.str" in str(info.value)
