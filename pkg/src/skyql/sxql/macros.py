"""Macro and flag-constant expansion.

RA(), RUN() and friends rewrite to member paths on the query level's source class per
the schema's macro table; bare identifiers naming schema constants rewrite to integer
literals.  PROX survives as a predicate atom for the planner.
"""

from __future__ import annotations

from copy import deepcopy

from ..errors import UnknownClass, UnknownFlagConstant, UnknownMacro
from ..schema import Schema, SchemaClass
from .ast import (
    Binary,
    ClassSource,
    Exist,
    Expr,
    FuncCall,
    Literal,
    MacroCall,
    MemberPath,
    PathSeg,
    QueryTree,
    Unary,
)


def source_class(tree: QueryTree, schema: Schema) -> SchemaClass:
    """The class a query level ranges over.

    A sub-select that projects a single association link yields the link's target
    class; any other sub-select acts as a filter and keeps its own class.
    """
    if isinstance(tree.source, ClassSource):
        return schema.resolve_class(tree.source.name)
    inner_cls = source_class(tree.source, schema)
    inner = tree.source
    if len(inner.select) == 1 and isinstance(inner.select[0].expr, MemberPath):
        path = inner.select[0].expr
        if len(path.segs) == 1 and path.segs[0].index is None and not path.segs[0].quantified:
            assoc = inner_cls.association_map().get(path.segs[0].name)
            if assoc is not None:
                return schema.resolve_class(assoc.target_class)
    return inner_cls


def _apply_indexed_remap(path: MemberPath, cls: SchemaClass, schema: Schema):
    """Bare q[k]/u[k] name the Stokes arrays; rewrite per the schema remap table."""
    cur = cls
    for seg in path.segs:
        if cur is None:
            return
        members = cur.member_map()
        assocs = cur.association_map()
        if seg.index is not None and seg.name in schema.indexed_remap:
            target = schema.indexed_remap[seg.name]
            if target in members and (
                seg.name not in members or members[seg.name].kind != "array"
            ):
                seg.name = target
        ad = assocs.get(seg.name)
        cur = schema.classes[ad.target_class] if ad is not None else None


def _expand_expr(e: Expr, cls: SchemaClass, schema: Schema) -> Expr:
    if isinstance(e, MacroCall):
        mapping = schema.macros.get(e.name.upper())
        if mapping is None:
            raise UnknownMacro(e.name)
        segs = [PathSeg(part) for part in mapping.split(".")]
        return MemberPath(segs)
    if isinstance(e, MemberPath):
        if len(e.segs) == 1 and e.segs[0].index is None and not e.segs[0].quantified:
            name = e.segs[0].name
            members = cls.member_map()
            assocs = cls.association_map()
            if name not in members and name not in assocs:
                if name in schema.constants:
                    return Literal(schema.constants[name])
                if name.isupper() and "_" in name:
                    raise UnknownFlagConstant(name)
        _apply_indexed_remap(e, cls, schema)
        return e
    if isinstance(e, Binary):
        return Binary(e.op, _expand_expr(e.left, cls, schema), _expand_expr(e.right, cls, schema))
    if isinstance(e, Unary):
        return Unary(e.op, _expand_expr(e.operand, cls, schema))
    if isinstance(e, FuncCall):
        return FuncCall(e.name, [_expand_expr(a, cls, schema) for a in e.args])
    if isinstance(e, Exist):
        return e
    return e


def expand_macros(tree: QueryTree, schema: Schema) -> QueryTree:
    """Return a new tree with macros and flag constants rewritten at every level."""
    tree = deepcopy(tree)

    def walk(level: QueryTree):
        if isinstance(level.source, QueryTree):
            walk(level.source)
        try:
            cls = source_class(level, schema)
        except UnknownClass:
            raise
        for item in level.select:
            item.expr = _expand_expr(item.expr, cls, schema)
        if level.predicate is not None:
            level.predicate = _expand_expr(level.predicate, cls, schema)

    walk(tree)
    return tree
