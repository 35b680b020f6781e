"""SXQL abstract syntax: expression nodes, query trees, JSON (de)serialization.

Nodes compare structurally (dataclass equality over the syntactic fields); binding
annotations added by validation live on a parallel attribute that is excluded from
equality so round-trip tests compare pure syntax.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

COMPARISONS = ("<", "<=", ">", ">=", "==", "!=")
ARITH = ("+", "-", "*", "/")
BITWISE = ("&", "|")
LOGICAL = ("&&", "||")
FUNCTIONS = {"sqrt": 1, "abs": 1, "log": 1, "log10": 1, "power": 2}


class Expr:
    pass


@dataclass(eq=True)
class Literal(Expr):
    value: Union[int, float, str]
    hex: bool = False     # remember 0x spelling for the printer


@dataclass(eq=True)
class PathSeg:
    name: str
    index: Optional[int] = None
    quantified: bool = False


@dataclass(eq=True)
class MemberPath(Expr):
    segs: list[PathSeg]
    binding: object = field(default=None, compare=False, repr=False)

    @property
    def quantified(self) -> bool:
        return any(s.quantified for s in self.segs)

    def dotted(self) -> str:
        out = []
        for s in self.segs:
            t = s.name
            if s.index is not None:
                t += f"[{s.index}]"
            if s.quantified:
                t += "{?}"
            out.append(t)
        return ".".join(out)


@dataclass(eq=True)
class MacroCall(Expr):
    name: str


@dataclass(eq=True)
class FuncCall(Expr):
    name: str
    args: list[Expr]


@dataclass(eq=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(eq=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(eq=True)
class Exist(Expr):
    link: MemberPath


@dataclass(eq=True)
class Prox(Expr):
    frame: str
    ra: float
    dec: float
    radius_arcmin: float


@dataclass(eq=True)
class SelectItem:
    expr: Expr
    name: Optional[str] = field(default=None, compare=False)


@dataclass(eq=True)
class ClassSource:
    name: str


@dataclass(eq=True)
class QueryTree:
    select: list[SelectItem]
    source: Union[ClassSource, "QueryTree"]
    predicate: Optional[Expr] = None


def conjuncts(expr: Optional[Expr]) -> list[Expr]:
    """Flatten a chain of && into its top-level conjuncts."""
    if expr is None:
        return []
    if isinstance(expr, Binary) and expr.op == "&&":
        return conjuncts(expr.left) + conjuncts(expr.right)
    return [expr]


def conjoin(parts: list[Expr]) -> Optional[Expr]:
    out: Optional[Expr] = None
    for p in parts:
        out = p if out is None else Binary("&&", out, p)
    return out


# -- wire encoding (used for slave leaf fragments) ------------------------------

def expr_to_json(e: Optional[Expr]):
    if e is None:
        return None
    if isinstance(e, Literal):
        return {"t": "lit", "v": e.value, "hex": e.hex}
    if isinstance(e, MemberPath):
        return {
            "t": "path",
            "segs": [[s.name, s.index, s.quantified] for s in e.segs],
        }
    if isinstance(e, MacroCall):
        return {"t": "macro", "name": e.name}
    if isinstance(e, FuncCall):
        return {"t": "func", "name": e.name, "args": [expr_to_json(a) for a in e.args]}
    if isinstance(e, Unary):
        return {"t": "un", "op": e.op, "x": expr_to_json(e.operand)}
    if isinstance(e, Binary):
        return {"t": "bin", "op": e.op, "l": expr_to_json(e.left), "r": expr_to_json(e.right)}
    if isinstance(e, Exist):
        return {"t": "exist", "link": expr_to_json(e.link)}
    if isinstance(e, Prox):
        return {"t": "prox", "frame": e.frame, "ra": e.ra, "dec": e.dec, "radius": e.radius_arcmin}
    raise TypeError(f"unserializable expr {e!r}")


def expr_from_json(d) -> Optional[Expr]:
    if d is None:
        return None
    t = d["t"]
    if t == "lit":
        return Literal(d["v"], d.get("hex", False))
    if t == "path":
        return MemberPath([PathSeg(n, i, q) for n, i, q in d["segs"]])
    if t == "macro":
        return MacroCall(d["name"])
    if t == "func":
        return FuncCall(d["name"], [expr_from_json(a) for a in d["args"]])
    if t == "un":
        return Unary(d["op"], expr_from_json(d["x"]))
    if t == "bin":
        return Binary(d["op"], expr_from_json(d["l"]), expr_from_json(d["r"]))
    if t == "exist":
        return Exist(expr_from_json(d["link"]))
    if t == "prox":
        return Prox(d["frame"], d["ra"], d["dec"], d["radius"])
    raise TypeError(f"unknown expr tag {t}")
