"""Canonical SXQL pretty-printer.

Printing then reparsing yields a structurally identical tree; parentheses are emitted
only where the operator tiers require them.
"""

from __future__ import annotations

from .ast import (
    Binary,
    ClassSource,
    Exist,
    Expr,
    FuncCall,
    Literal,
    MacroCall,
    MemberPath,
    Prox,
    QueryTree,
    SelectItem,
    Unary,
)

_TIER = {
    "||": 1,
    "&&": 2,
    "<": 4, "<=": 4, ">": 4, ">=": 4, "==": 4, "!=": 4,
    "|": 5,
    "&": 6,
    "+": 7, "-": 7,
    "*": 8, "/": 8,
}
_UNARY_TIER = {"!": 3, "-": 9}
_ATOM_TIER = 10


def _tier(e: Expr) -> int:
    if isinstance(e, Binary):
        return _TIER[e.op]
    if isinstance(e, Unary):
        return _UNARY_TIER[e.op]
    return _ATOM_TIER


def print_expr(e: Expr) -> str:
    if isinstance(e, Literal):
        if isinstance(e.value, str):
            return f"'{e.value}'"
        if e.hex and isinstance(e.value, int):
            return f"0x{e.value:08x}"
        return repr(e.value)
    if isinstance(e, MemberPath):
        return e.dotted()
    if isinstance(e, MacroCall):
        return f"{e.name}()"
    if isinstance(e, FuncCall):
        return f"{e.name}(" + ", ".join(print_expr(a) for a in e.args) + ")"
    if isinstance(e, Exist):
        return f"EXIST({e.link.dotted()})"
    if isinstance(e, Prox):
        return f"PROX({e.frame}, {e.ra:g}, {e.dec:g}, {e.radius_arcmin:g})"
    if isinstance(e, Unary):
        inner = print_expr(e.operand)
        if _tier(e.operand) < _UNARY_TIER[e.op]:
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, Binary):
        mine = _TIER[e.op]
        left = print_expr(e.left)
        right = print_expr(e.right)
        if _tier(e.left) < mine:
            left = f"({left})"
        # left-associative chains: right child at the same tier needs parens
        if _tier(e.right) <= mine:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"unprintable expr {e!r}")


def print_query(tree: QueryTree) -> str:
    items = ", ".join(print_expr(s.expr) for s in tree.select)
    if isinstance(tree.source, ClassSource):
        src = tree.source.name
    else:
        src = f"({print_query(tree.source)})"
    out = f"SELECT {items} FROM {src}"
    if tree.predicate is not None:
        out += f" WHERE {print_expr(tree.predicate)}"
    return out


def derive_name(item: SelectItem) -> str:
    """Stable output-column name for a select item."""
    e = item.expr
    if isinstance(e, MemberPath):
        return e.dotted()
    if isinstance(e, MacroCall):
        return e.name
    return print_expr(e).replace(" ", "")
