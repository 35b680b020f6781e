"""Validation and binding: resolve every member path, type every operator, and produce
the BoundQuery chain (one node per SELECT level) that the planner lowers.

Semantics pinned here (and documented in docs/grammar.md):
  * a sub-select projecting a single association link makes the outer level range over
    the linked objects; any other sub-select is a filter over its own objects;
  * conjuncts of a projecting sub-select's WHERE whose member paths all start with the
    projected link constrain the projected objects (the Q30 `obj.colc` pattern);
  * `{?}` marks an existential hop over a to-many link and is only legal in predicates;
  * bare `u`/`q` with a subscript refer to the Stokes arrays per the schema remap table.
"""

from __future__ import annotations

from copy import deepcopy
from dataclasses import dataclass, field

from ..errors import (
    BadQuantifier,
    IndexOutOfRange,
    NotALink,
    TypeError_,
    UnknownMember,
)
from ..schema import (
    FLOAT_TYPES,
    INT_TYPES,
    AssociationDescriptor,
    MemberDescriptor,
    Schema,
    SchemaClass,
)
from .ast import (
    FUNCTIONS,
    Binary,
    Exist,
    Expr,
    FuncCall,
    Literal,
    MacroCall,
    MemberPath,
    Prox,
    QueryTree,
    Unary,
    conjoin,
    conjuncts,
)
from .macros import _expand_expr, source_class
from .parser import _Parser
from .lexer import tokenize
from .printer import derive_name


def parse_expr(text: str) -> Expr:
    """Parse a bare SXQL expression (schema view filters use this)."""
    p = _Parser(tokenize(text))
    e = p.expr()
    if p.peek().kind != "EOF":
        p.fail("unexpected trailing input", ("end of input",))
    return e


@dataclass
class PathBinding:
    steps: list           # AssociationDescriptor per link hop, MemberDescriptor last
    value_type: str
    whole_array: bool = False
    array_length: int | None = None


@dataclass
class BoundSelectItem:
    expr: Expr
    name: str
    etype: str
    array_length: int | None = None   # whole-array member selections expand
    io_format: str = "%s"


@dataclass
class BoundQuery:
    cls: SchemaClass
    child: "BoundQuery | None"
    via_link: AssociationDescriptor | None
    predicate: Expr | None
    assoc_filter: Expr | None
    select: list[BoundSelectItem] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return self.child is None

    def leaf(self) -> "BoundQuery":
        return self if self.child is None else self.child.leaf()


_NUMERIC = INT_TYPES | FLOAT_TYPES


def _is_int(t: str) -> bool:
    return t in INT_TYPES


def _is_numeric(t: str) -> bool:
    return t in _NUMERIC


class _Binder:
    def __init__(self, schema: Schema):
        self.schema = schema

    def bind_path(self, path: MemberPath, cls: SchemaClass, in_predicate: bool,
                  allow_whole_array: bool = False) -> str:
        steps = []
        cur = cls
        quantified = 0
        members = assocs = None
        for i, seg in enumerate(path.segs):
            terminal = i == len(path.segs) - 1
            members = cur.member_map()
            assocs = cur.association_map()
            name = seg.name
            if not terminal:
                if name in assocs:
                    ad = assocs[name]
                    if seg.index is not None:
                        raise TypeError_(f"link {cur.name}.{name} cannot be indexed")
                    if seg.quantified:
                        if not ad.to_many:
                            raise BadQuantifier(f"{cur.name}.{name} is to-one")
                        if not in_predicate:
                            raise BadQuantifier("{?} is only allowed in predicates")
                        quantified += 1
                    elif ad.to_many:
                        raise BadQuantifier(
                            f"to-many link {cur.name}.{name} needs {{?}}"
                        )
                    steps.append(ad)
                    cur = self.schema.classes[ad.target_class]
                    continue
                if name in members:
                    raise NotALink(f"{cur.name}.{name} is not an association link")
                raise UnknownMember(f"{cur.name}.{name}")
            # terminal segment
            if seg.quantified:
                raise BadQuantifier("{?} belongs on a link, not a member")
            if name in members:
                md = members[name]
                if md.kind == "array":
                    if seg.index is None:
                        if not allow_whole_array:
                            raise TypeError_(
                                f"array member {cur.name}.{name} needs an index here"
                            )
                        steps.append(md)
                        path.binding = PathBinding(steps, md.value_type, True, md.array_length)
                        return f"array:{md.value_type}"
                    if not 0 <= seg.index < (md.array_length or 0):
                        raise IndexOutOfRange(f"{cur.name}.{name}[{seg.index}]")
                elif seg.index is not None:
                    raise IndexOutOfRange(f"{cur.name}.{name} is not an array")
                steps.append(md)
                path.binding = PathBinding(steps, md.value_type)
                if quantified > 1:
                    raise BadQuantifier("at most one {?} per path")
                return md.value_type
            if name in assocs:
                raise TypeError_(f"association link {cur.name}.{name} used as a value")
            raise UnknownMember(f"{cur.name}.{name}")
        raise UnknownMember(path.dotted())

    def bind_expr(self, e: Expr, cls: SchemaClass, in_predicate: bool,
                  allow_whole_array: bool = False) -> str:
        if isinstance(e, Literal):
            if isinstance(e.value, bool):
                t = "bool"
            elif isinstance(e.value, int):
                t = "int64"
            elif isinstance(e.value, float):
                t = "float64"
            else:
                t = "string"
        elif isinstance(e, MemberPath):
            t = self.bind_path(e, cls, in_predicate, allow_whole_array)
        elif isinstance(e, MacroCall):
            raise TypeError_(f"unexpanded macro {e.name}() reached validation")
        elif isinstance(e, FuncCall):
            arity = FUNCTIONS[e.name]
            if len(e.args) != arity:
                raise TypeError_(f"{e.name}() takes {arity} argument(s)")
            for a in e.args:
                at = self.bind_expr(a, cls, in_predicate)
                if not _is_numeric(at):
                    raise TypeError_(f"{e.name}() needs numeric arguments")
            t = "float64"
        elif isinstance(e, Exist):
            cur = cls
            for i, seg in enumerate(e.link.segs):
                assocs = cur.association_map()
                if seg.name not in assocs:
                    raise UnknownMember(f"{cur.name}.{seg.name} is not a link")
                if seg.index is not None or seg.quantified:
                    raise BadQuantifier("EXIST takes a plain link path")
                cur = self.schema.classes[assocs[seg.name].target_class]
            if not in_predicate:
                raise TypeError_("EXIST is only allowed in predicates")
            t = "bool"
        elif isinstance(e, Prox):
            if not in_predicate:
                raise TypeError_("PROX is only allowed in predicates")
            t = "bool"
        elif isinstance(e, Binary):
            lt = self.bind_expr(e.left, cls, in_predicate)
            rt = self.bind_expr(e.right, cls, in_predicate)
            if e.op in ("&&", "||"):
                if lt != "bool" or rt != "bool":
                    raise TypeError_(f"{e.op} needs boolean operands")
                t = "bool"
            elif e.op in ("&", "|"):
                if not (_is_int(lt) and _is_int(rt)):
                    raise TypeError_(f"bitwise {e.op} needs integer operands")
                t = "int64"
            elif e.op in ("+", "-", "*", "/"):
                if not (_is_numeric(lt) and _is_numeric(rt)):
                    raise TypeError_(f"arithmetic {e.op} needs numeric operands")
                t = "int64" if _is_int(lt) and _is_int(rt) else "float64"
            else:  # comparison
                if _is_numeric(lt) and _is_numeric(rt):
                    t = "bool"
                elif lt == "string" and rt == "string" and e.op in ("==", "!="):
                    t = "bool"
                else:
                    raise TypeError_(f"cannot compare {lt} with {rt}")
        elif isinstance(e, Unary):
            ot = self.bind_expr(e.operand, cls, in_predicate)
            if e.op == "!":
                if ot != "bool":
                    raise TypeError_("! needs a boolean operand")
                t = "bool"
            else:
                if not _is_numeric(ot):
                    raise TypeError_("unary - needs a numeric operand")
                t = "int64" if _is_int(ot) else "float64"
        else:
            raise TypeError_(f"unexpected expression node {e!r}")
        e._etype = t
        return t


def _path_head(e: Expr) -> set[str]:
    """First segment names of every member path in an expression."""
    out: set[str] = set()
    if isinstance(e, MemberPath):
        out.add(e.segs[0].name)
    elif isinstance(e, Binary):
        out |= _path_head(e.left) | _path_head(e.right)
    elif isinstance(e, Unary):
        out |= _path_head(e.operand)
    elif isinstance(e, FuncCall):
        for a in e.args:
            out |= _path_head(a)
    elif isinstance(e, Exist):
        out.add(e.link.segs[0].name)
    return out


def _strip_prefix(e: Expr, link: str) -> Expr:
    if isinstance(e, MemberPath):
        assert e.segs[0].name == link
        return MemberPath(e.segs[1:])
    if isinstance(e, Binary):
        return Binary(e.op, _strip_prefix(e.left, link), _strip_prefix(e.right, link))
    if isinstance(e, Unary):
        return Unary(e.op, _strip_prefix(e.operand, link))
    if isinstance(e, FuncCall):
        return FuncCall(e.name, [_strip_prefix(a, link) for a in e.args])
    return e


def validate(tree: QueryTree, schema: Schema) -> BoundQuery:
    """Bind and type-check an expanded tree.  Returns the BoundQuery level chain."""
    tree = deepcopy(tree)
    binder = _Binder(schema)

    def build(level: QueryTree, outermost: bool) -> BoundQuery:
        cls = source_class(level, schema)
        child = None
        via = None
        assoc_filter = None
        if isinstance(level.source, QueryTree):
            inner = level.source
            inner_cls = source_class(inner, schema)
            if _is_projection(inner, inner_cls):
                proj = inner.select[0].expr.segs[0].name
                via = inner_cls.association_map()[proj]
                kept, hoisted = [], []
                for c in conjuncts(inner.predicate):
                    heads = _path_head(c)
                    if heads and heads <= {proj} and not _contains_quantified_head(c, proj):
                        hoisted.append(_strip_prefix(c, proj))
                    else:
                        kept.append(c)
                inner.predicate = conjoin(kept)
                child = build(inner, False)
                assoc_filter = conjoin(hoisted)
                if assoc_filter is not None:
                    binder.bind_expr(assoc_filter, cls, in_predicate=True)
            else:
                child = build(inner, False)

        predicate = level.predicate
        if cls.view_filter:
            vf = _expand_expr(parse_expr(cls.view_filter), cls, schema)
            predicate = vf if predicate is None else conjoin([vf, predicate])
        if predicate is not None:
            binder.bind_expr(predicate, cls, in_predicate=True)

        select: list[BoundSelectItem] = []
        if outermost:
            names: dict[str, int] = {}
            for item in level.select:
                t = binder.bind_expr(item.expr, cls, in_predicate=False,
                                     allow_whole_array=True)
                base = derive_name(item)
                names[base] = names.get(base, 0) + 1
                name = base if names[base] == 1 else f"{base}_{names[base]}"
                arr = None
                fmt = "%s"
                if isinstance(item.expr, MemberPath) and item.expr.binding is not None:
                    b = item.expr.binding
                    if b.whole_array:
                        arr = b.array_length
                    last = b.steps[-1]
                    if isinstance(last, MemberDescriptor):
                        fmt = last.io_format
                select.append(BoundSelectItem(item.expr, name, t, arr, fmt))
        return BoundQuery(cls, child, via, predicate, assoc_filter, select)

    def _is_projection(inner: QueryTree, inner_cls: SchemaClass) -> bool:
        if len(inner.select) != 1 or not isinstance(inner.select[0].expr, MemberPath):
            return False
        p = inner.select[0].expr
        return (
            len(p.segs) == 1
            and p.segs[0].index is None
            and not p.segs[0].quantified
            and p.segs[0].name in inner_cls.association_map()
        )

    def _contains_quantified_head(e: Expr, link: str) -> bool:
        if isinstance(e, MemberPath):
            return e.segs[0].name == link and e.segs[0].quantified
        if isinstance(e, Binary):
            return _contains_quantified_head(e.left, link) or _contains_quantified_head(e.right, link)
        if isinstance(e, Unary):
            return _contains_quantified_head(e.operand, link)
        if isinstance(e, FuncCall):
            return any(_contains_quantified_head(a, link) for a in e.args)
        return False

    return build(tree, True)
