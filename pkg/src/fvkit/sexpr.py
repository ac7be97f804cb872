"""Minimal s-expression reader and writer.

Atoms are returned as :class:`Atom` (a ``str`` subclass carrying its source
position) and lists as Python lists.  Comments run from ``;`` to end of line.
"""
from __future__ import annotations

from typing import Iterator, List, Union

SExpr = Union["Atom", List["SExpr"]]

_DELIMS = set("();")


class SexprError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


class Atom(str):
    line: int
    col: int

    def __new__(cls, text: str, line: int = 0, col: int = 0) -> "Atom":
        obj = super().__new__(cls, text)
        obj.line = line
        obj.col = col
        return obj


def _tokens(text: str) -> Iterator[tuple[str, int, int]]:
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
        elif ch.isspace():
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, line, col
            i += 1
            col += 1
        else:
            start, scol = i, col
            while i < n and not text[i].isspace() and text[i] not in _DELIMS:
                i += 1
                col += 1
            yield text[start:i], line, scol


def parse_all(text: str) -> list[SExpr]:
    """Parse every top-level form in ``text``."""
    stack: list[list] = [[]]
    opened: list[tuple[int, int]] = []
    for tok, line, col in _tokens(text):
        if tok == "(":
            stack.append([])
            opened.append((line, col))
        elif tok == ")":
            if len(stack) == 1:
                raise SexprError("unbalanced ')'", line, col)
            done = stack.pop()
            opened.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(Atom(tok, line, col))
    if len(stack) != 1:
        line, col = opened[-1]
        raise SexprError("unclosed '('", line, col)
    return stack[0]


def parse_one(text: str) -> SExpr:
    forms = parse_all(text)
    if len(forms) != 1:
        raise SexprError(f"expected exactly one top-level form, found {len(forms)}")
    return forms[0]


def dumps(expr) -> str:
    """Single-line canonical rendering: one space between items."""
    if isinstance(expr, list):
        return "(" + " ".join(dumps(e) for e in expr) + ")"
    return str(expr)


def position(expr) -> tuple[int, int]:
    """Best-effort source position of ``expr`` (0, 0 when unknown)."""
    if isinstance(expr, Atom):
        return expr.line, expr.col
    if isinstance(expr, list) and expr:
        return position(expr[0])
    return 0, 0
