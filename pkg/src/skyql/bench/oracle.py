"""Brute-force reference evaluation of SXQL over the raw CSV files.

This is the correctness oracle: an exhaustive row-at-a-time interpreter with no
indexes, no planner and no engine code.  It shares only the parser/AST and the schema
with the rest of the package; every semantic rule (numeric promotion, truncating
integer division, short-circuit logicals, null links, existential {?} atoms, the
dot-product proximity test) is implemented again here from the grammar document.

Values of float32 members are rounded through float32 when the CSV text is parsed,
matching what any store that keeps them in 4 bytes would return.
"""

from __future__ import annotations

import csv
import math
import struct
from pathlib import Path

from ..errors import EvalError, UnknownMember
from ..schema import Schema
from ..sxql import expand_macros, parse
from ..sxql.ast import (
    Binary,
    ClassSource,
    Exist,
    Expr,
    FuncCall,
    Literal,
    MemberPath,
    Prox,
    QueryTree,
    Unary,
    conjuncts,
)
from ..sxql.typecheck import parse_expr

_F32 = struct.Struct("<f")


def _round_f32(v: float) -> float:
    return _F32.unpack(_F32.pack(v))[0]


class _Null:
    pass


NULL = _Null()

_FILES = {
    "PhotoObj": "photoobj.csv",
    "Field": "field.csv",
    "SpecObj": "specobj.csv",
    "SpecLine": "specline.csv",
    "XCRedshift": "xcredshift.csv",
}
_LINK_COLS = {
    "PhotoObj": {"parentID": None, "fieldID": None},
    "SpecObj": {"objID": None},
    "SpecLine": {"specObjID": None},
    "XCRedshift": {"specObjID": None},
    "Field": {},
}


class OracleCatalog:
    """Row storage and link resolution for the oracle, parsed once per CSV dir."""

    def __init__(self, csv_dir: str | Path, schema: Schema | None = None):
        self.schema = schema or Schema.default()
        self.dir = Path(csv_dir)
        self.cols: dict[str, dict[str, list]] = {}
        self.counts: dict[str, int] = {}
        self._load()
        self._index_links()
        self._fn_cache: dict[tuple[str, str], Expr] = {}
        self._view_cache: dict[str, Expr] = {}

    # -- parsing -------------------------------------------------------------------

    def _wanted_columns(self, class_name: str) -> dict[str, tuple[str, str]]:
        """column -> (member, value_type); only members any query could touch."""
        cls = self.schema.classes[class_name]
        out = {}
        for m in self.schema.stored_members(cls):
            if m.kind == "array":
                for k in range(m.array_length):
                    out[f"{m.name}_{k}"] = (m.name, m.value_type)
            else:
                out[m.name] = (m.name, m.value_type)
        return out

    def _load(self):
        for class_name, fname in _FILES.items():
            wanted = self._wanted_columns(class_name)
            links = _LINK_COLS[class_name]
            store: dict[str, list] = {c: [] for c in wanted}
            for c in links:
                store[c] = []
            with open(self.dir / fname, newline="", encoding="utf-8") as f:
                reader = csv.reader(f)
                header = next(reader)
                pos = {c: i for i, c in enumerate(header)}
                conv = []
                for cname in store:
                    i = pos[cname]
                    if cname in links:
                        conv.append((cname, i, "link"))
                    else:
                        conv.append((cname, i, wanted[cname][1]))
                count = 0
                for row in reader:
                    count += 1
                    for cname, i, kind in conv:
                        text = row[i]
                        if kind == "link":
                            store[cname].append(int(text) if text else None)
                        elif kind in ("int32", "int64", "bitfield64"):
                            store[cname].append(int(text))
                        elif kind == "float32":
                            store[cname].append(_round_f32(float(text)))
                        else:
                            store[cname].append(float(text))
            self.cols[class_name] = store
            self.counts[class_name] = count

    def _index_links(self):
        photo = self.cols["PhotoObj"]
        self.row_by_objid = {v: i for i, v in enumerate(photo["objID"])}
        self.row_by_fieldid = {v: i for i, v in enumerate(self.cols["Field"]["fieldID"])}
        self.row_by_specid = {v: i for i, v in enumerate(self.cols["SpecObj"]["spec_ID"])}
        self.children_of: dict[int, list[int]] = {}
        for i, pid in enumerate(photo["parentID"]):
            if pid is not None:
                self.children_of.setdefault(pid, []).append(i)
        self.objs_of_field: dict[int, list[int]] = {}
        for i, fid in enumerate(photo["fieldID"]):
            self.objs_of_field.setdefault(fid, []).append(i)
        self.lines_of_spec: dict[int, list[int]] = {}
        for i, sid in enumerate(self.cols["SpecLine"]["specObjID"]):
            self.lines_of_spec.setdefault(sid, []).append(i)
        self.xcs_of_spec: dict[int, list[int]] = {}
        for i, sid in enumerate(self.cols["XCRedshift"]["specObjID"]):
            self.xcs_of_spec.setdefault(sid, []).append(i)

    # -- object model ----------------------------------------------------------------
    # an oracle object is (class_name, row_index); tag classes view photoobj rows

    def class_rows(self, class_name: str):
        """All (class, row) pairs a FROM over `class_name` ranges over."""
        cls = self.schema.resolve_class(class_name)
        schema = self.schema
        if cls.view_of or cls.is_subclass_of(schema.classes[schema.tag_class]):
            base = cls.storage_class()
            rows = range(self.counts["PhotoObj"])
            if cls.object_type is not None:
                rows = [i for i in rows
                        if self.cols["PhotoObj"]["objType"][i] == cls.object_type]
            else:
                rows = list(rows)
            objs = [("Tag", i) for i in rows]
            if cls.view_filter:
                flt = self._view_filter(cls.name, cls.view_filter)
                objs = [o for o in objs if _true(self.eval(flt, o))]
            return objs
        return [(cls.name, i) for i in range(self.counts[cls.name])]

    def _view_filter(self, name: str, text: str) -> Expr:
        if name not in self._view_cache:
            e = parse_expr(text)
            from ..sxql.macros import _expand_expr
            self._view_cache[name] = _expand_expr(e, self.schema.classes[name], self.schema)
        return self._view_cache[name]

    def _data_class(self, class_name: str) -> str:
        cls = self.schema.resolve_class(class_name)
        if cls.view_of or cls.is_subclass_of(self.schema.classes[self.schema.tag_class]):
            return "PhotoObj"
        return cls.name

    def member(self, obj, name: str, index: int | None):
        class_name, row = obj
        cls = self.schema.classes[self.schema.tag_class if class_name == "Tag" else class_name]
        md = cls.member_map().get(name)
        if md is None:
            raise UnknownMember(f"{class_name}.{name}")
        if md.kind == "function":
            key = (cls.name, name)
            if key not in self._fn_cache:
                self._fn_cache[key] = parse_expr(md.expr)
            return self.eval(self._fn_cache[key], obj)
        col = f"{name}_{index}" if md.kind == "array" else name
        store = self.cols["PhotoObj" if class_name == "Tag" else class_name]
        return store[col][row]

    def follow_one(self, obj, link: str):
        """(class, row) of a to-one link target, or None."""
        class_name, row = obj
        if class_name == "Tag":
            if link == "obj":
                return ("PhotoObj", row)
            if link == "field":
                fid = self.cols["PhotoObj"]["fieldID"][row]
                return ("Field", self.row_by_fieldid[fid])
            if link == "parent":
                pid = self.cols["PhotoObj"]["parentID"][row]
                return None if pid is None else ("Tag", self.row_by_objid[pid])
        elif class_name == "PhotoObj":
            if link == "field":
                fid = self.cols["PhotoObj"]["fieldID"][row]
                return ("Field", self.row_by_fieldid[fid])
            if link == "tag":
                return ("Tag", row)
        elif class_name == "SpecObj":
            if link == "obj":
                oid = self.cols["SpecObj"]["objID"][row]
                return ("PhotoObj", self.row_by_objid[oid])
        elif class_name in ("SpecLine", "XCRedshift"):
            if link == "spec":
                sid = self.cols[class_name]["specObjID"][row]
                return ("SpecObj", self.row_by_specid[sid])
        raise UnknownMember(f"to-one link {class_name}.{link}")

    def follow_many(self, obj, link: str) -> list:
        class_name, row = obj
        if class_name == "Tag" and link == "child":
            oid = self.cols["PhotoObj"]["objID"][row]
            return [("Tag", r) for r in self.children_of.get(oid, [])]
        if class_name == "Field" and link == "obj":
            fid = self.cols["Field"]["fieldID"][row]
            return [("PhotoObj", r) for r in self.objs_of_field.get(fid, [])]
        if class_name == "SpecObj":
            sid = self.cols["SpecObj"]["spec_ID"][row]
            if link == "measured":
                return [("SpecLine", r) for r in self.lines_of_spec.get(sid, [])]
            if link == "found":
                return [("SpecLine", r) for r in self.lines_of_spec.get(sid, [])
                        if self.cols["SpecLine"]["isFound"][r]]
            if link == "xcorrz":
                return [("XCRedshift", r) for r in self.xcs_of_spec.get(sid, [])]
        raise UnknownMember(f"to-many link {class_name}.{link}")

    def link_arity(self, class_name: str, link: str) -> str:
        cls = self.schema.classes[self.schema.tag_class if class_name == "Tag" else class_name]
        return cls.association_map()[link].arity

    # -- expression evaluation ---------------------------------------------------------

    def eval(self, e: Expr, obj, env: dict | None = None):
        if isinstance(e, Literal):
            return e.value
        if isinstance(e, MemberPath):
            if env is not None and id(e) in env:
                return env[id(e)]
            return self._path(e.segs, obj)
        if isinstance(e, FuncCall):
            args = []
            for a in e.args:
                v = self.eval(a, obj, env)
                if v is NULL:
                    return NULL
                args.append(float(v))
            return _func(e.name, args)
        if isinstance(e, Unary):
            v = self.eval(e.operand, obj, env)
            if v is NULL:
                return NULL
            return (not v) if e.op == "!" else -v
        if isinstance(e, Exist):
            cur = obj
            for seg in e.link.segs:
                if self.link_arity(cur[0], seg.name) == "to-one":
                    cur = self.follow_one(cur, seg.name)
                    if cur is None:
                        return False
                else:
                    targets = self.follow_many(cur, seg.name)
                    if not targets:
                        return False
                    cur = targets[0]
            return True
        if isinstance(e, Prox):
            ra = math.radians(e.ra)
            dec = math.radians(e.dec)
            c = (math.cos(dec) * math.cos(ra), math.cos(dec) * math.sin(ra), math.sin(dec))
            x = self.member(obj, "cx", None)
            y = self.member(obj, "cy", None)
            z = self.member(obj, "cz", None)
            dot = c[0] * x + c[1] * y + c[2] * z
            return dot >= math.cos(math.radians(e.radius_arcmin / 60.0))
        if isinstance(e, Binary):
            if e.op == "&&":
                left = self.eval(e.left, obj, env)
                if left is NULL or not left:
                    return False
                return self.eval(e.right, obj, env)
            if e.op == "||":
                left = self.eval(e.left, obj, env)
                if left is not NULL and left:
                    return True
                return self.eval(e.right, obj, env)
            if e.op in ("<", "<=", ">", ">=", "==", "!=") and _quantified(e) \
                    and (env is None or not _resolved(e, env)):
                return self._exists_atom(e, obj, env)
            lv = self.eval(e.left, obj, env)
            rv = self.eval(e.right, obj, env)
            if lv is NULL or rv is NULL:
                return False if e.op in ("<", "<=", ">", ">=", "==", "!=") else NULL
            return _binop(e.op, lv, rv)
        raise EvalError(EvalError.DOMAIN_ERROR, f"unexpected node {e!r}")

    def _path(self, segs, obj):
        cur = obj
        for i, seg in enumerate(segs):
            terminal = i == len(segs) - 1
            cls = self.schema.classes[self.schema.tag_class if cur[0] == "Tag" else cur[0]]
            if not terminal or seg.name in cls.association_map():
                if seg.name in cls.association_map():
                    if self.link_arity(cur[0], seg.name) != "to-one":
                        raise EvalError(EvalError.DOMAIN_ERROR,
                                        f"to-many link {seg.name} needs {{?}}")
                    cur = self.follow_one(cur, seg.name)
                    if cur is None:
                        return NULL
                    continue
            return self.member(cur, seg.name, seg.index)
        raise UnknownMember(".".join(s.name for s in segs))

    def _exists_atom(self, e: Binary, obj, env) -> bool:
        paths: list[MemberPath] = []
        _collect_quantified(e, paths)
        env = dict(env or {})

        def candidates(path: MemberPath):
            qi = next(i for i, s in enumerate(path.segs) if s.quantified)
            cur = obj
            for seg in path.segs[:qi]:
                cur = self.follow_one(cur, seg.name)
                if cur is None:
                    return []
            vals = []
            for target in self.follow_many(cur, path.segs[qi].name):
                v = self._path(path.segs[qi + 1:], target)
                if v is not NULL:
                    vals.append(v)
            return vals

        def rec(k: int) -> bool:
            if k == len(paths):
                v = self.eval(e, obj, env)
                return v is not NULL and bool(v)
            for val in candidates(paths[k]):
                env[id(paths[k])] = val
                if rec(k + 1):
                    return True
            env.pop(id(paths[k]), None)
            return False

        return rec(0)


def _true(v) -> bool:
    return v is not NULL and bool(v)


def _quantified(e: Expr) -> bool:
    if isinstance(e, MemberPath):
        return e.quantified
    if isinstance(e, Binary):
        return _quantified(e.left) or _quantified(e.right)
    if isinstance(e, Unary):
        return _quantified(e.operand)
    if isinstance(e, FuncCall):
        return any(_quantified(a) for a in e.args)
    return False


def _collect_quantified(e: Expr, out: list):
    if isinstance(e, MemberPath) and e.quantified:
        out.append(e)
    elif isinstance(e, Binary):
        _collect_quantified(e.left, out)
        _collect_quantified(e.right, out)
    elif isinstance(e, Unary):
        _collect_quantified(e.operand, out)
    elif isinstance(e, FuncCall):
        for a in e.args:
            _collect_quantified(a, out)


def _resolved(e: Expr, env: dict) -> bool:
    paths: list[MemberPath] = []
    _collect_quantified(e, paths)
    return all(id(p) in env for p in paths)


def _func(name: str, args: list[float]) -> float:
    x = args[0]
    if name == "sqrt":
        if x < 0:
            raise EvalError(EvalError.DOMAIN_ERROR, "sqrt of a negative")
        return math.sqrt(x)
    if name in ("log", "log10"):
        if x <= 0:
            raise EvalError(EvalError.DOMAIN_ERROR, "log of a non-positive")
        return math.log10(x)
    if name == "abs":
        return abs(x)
    if name == "power":
        y = args[1]
        if x < 0 and y != int(y):
            raise EvalError(EvalError.DOMAIN_ERROR, "fractional power of a negative")
        if x == 0 and y < 0:
            raise EvalError(EvalError.DIVIDE_BY_ZERO, "zero to a negative power")
        try:
            v = math.pow(x, y)
        except OverflowError as exc:
            raise EvalError(EvalError.OVERFLOW, "power overflow") from exc
        if not math.isfinite(v):
            raise EvalError(EvalError.OVERFLOW, "power overflow")
        return v
    raise EvalError(EvalError.DOMAIN_ERROR, f"unknown function {name}")


def _binop(op: str, lv, rv):
    if op in ("+", "-", "*", "/"):
        both_int = isinstance(lv, int) and isinstance(rv, int)
        if op == "/":
            if both_int:
                if rv == 0:
                    raise EvalError(EvalError.DIVIDE_BY_ZERO, "integer division by zero")
                q, r = divmod(lv, rv)
                if r != 0 and (lv < 0) != (rv < 0):
                    q += 1
                return q
            if float(rv) == 0.0:
                raise EvalError(EvalError.DIVIDE_BY_ZERO, "division by zero")
            v = float(lv) / float(rv)
        elif both_int:
            v = {"+": lv + rv, "-": lv - rv, "*": lv * rv}[op]
            if not -(2 ** 63) <= v <= 2 ** 63 - 1:
                raise EvalError(EvalError.OVERFLOW, "int64 overflow")
            return v
        else:
            a, b = float(lv), float(rv)
            v = {"+": a + b, "-": a - b, "*": a * b}[op]
        if not math.isfinite(v):
            raise EvalError(EvalError.OVERFLOW, "non-finite result")
        return v
    if op == "&":
        return int(lv) & int(rv)
    if op == "|":
        return int(lv) | int(rv)
    return {"<": lv < rv, "<=": lv <= rv, ">": lv > rv,
            ">=": lv >= rv, "==": lv == rv, "!=": lv != rv}[op]


# -- query interpretation --------------------------------------------------------------

def _projected_link(inner: QueryTree, catalog: OracleCatalog) -> str | None:
    if len(inner.select) != 1 or not isinstance(inner.select[0].expr, MemberPath):
        return None
    p = inner.select[0].expr
    if len(p.segs) != 1 or p.segs[0].index is not None or p.segs[0].quantified:
        return None
    from ..sxql.macros import source_class
    cls = source_class(inner, catalog.schema)
    name = p.segs[0].name
    return name if name in cls.association_map() else None


def _level_objects(level: QueryTree, catalog: OracleCatalog) -> list:
    """Objects a query level ranges over, after its own WHERE (minus hoisted terms)."""
    if isinstance(level.source, ClassSource):
        objs = catalog.class_rows(level.source.name)
        pred = level.predicate
        if pred is not None:
            objs = [o for o in objs if _true(catalog.eval(pred, o))]
        return objs
    inner = level.source
    link = _projected_link(inner, catalog)
    if link is None:
        # filter sub-select: same objects, both predicates apply
        objs = _level_objects(inner, catalog)
        if level.predicate is not None:
            objs = [o for o in objs if _true(catalog.eval(level.predicate, o))]
        return objs
    # projection: split the inner WHERE into source terms and projected-link terms
    own, hoisted = [], []
    for c in conjuncts(inner.predicate):
        heads = _path_heads(c)
        if heads and heads <= {link} and not _head_quantified(c, link):
            hoisted.append(_strip(c, link))
        else:
            own.append(c)
    inner_pred = _conjoin(own)
    arity = None
    from ..sxql.macros import source_class
    inner_cls = source_class(inner, catalog.schema)
    arity = inner_cls.association_map()[link].arity

    sources = []
    if isinstance(inner.source, ClassSource):
        sources = catalog.class_rows(inner.source.name)
    else:
        shadow = QueryTree(inner.select, inner.source, None)
        sources = _level_objects(shadow, catalog)
    if inner_pred is not None:
        sources = [o for o in sources if _true(catalog.eval(inner_pred, o))]

    projected = []
    for o in sources:
        if arity == "to-one":
            t = catalog.follow_one(o, link)
            targets = [] if t is None else [t]
        else:
            targets = catalog.follow_many(o, link)
        for t in targets:
            ok = True
            for h in hoisted:
                if not _true(catalog.eval(h, t)):
                    ok = False
                    break
            if ok:
                projected.append(t)
    if level.predicate is not None:
        projected = [o for o in projected if _true(catalog.eval(level.predicate, o))]
    return projected


def _path_heads(e: Expr) -> set:
    out = set()
    if isinstance(e, MemberPath):
        out.add(e.segs[0].name)
    elif isinstance(e, Binary):
        out |= _path_heads(e.left) | _path_heads(e.right)
    elif isinstance(e, Unary):
        out |= _path_heads(e.operand)
    elif isinstance(e, FuncCall):
        for a in e.args:
            out |= _path_heads(a)
    elif isinstance(e, Exist):
        out.add(e.link.segs[0].name)
    return out


def _head_quantified(e: Expr, link: str) -> bool:
    if isinstance(e, MemberPath):
        return e.segs[0].name == link and e.segs[0].quantified
    if isinstance(e, Binary):
        return _head_quantified(e.left, link) or _head_quantified(e.right, link)
    if isinstance(e, Unary):
        return _head_quantified(e.operand, link)
    if isinstance(e, FuncCall):
        return any(_head_quantified(a, link) for a in e.args)
    return False


def _strip(e: Expr, link: str) -> Expr:
    if isinstance(e, MemberPath):
        return MemberPath(e.segs[1:])
    if isinstance(e, Binary):
        return Binary(e.op, _strip(e.left, link), _strip(e.right, link))
    if isinstance(e, Unary):
        return Unary(e.op, _strip(e.operand, link))
    if isinstance(e, FuncCall):
        return FuncCall(e.name, [_strip(a, link) for a in e.args])
    return e


def _conjoin(parts):
    out = None
    for p in parts:
        out = p if out is None else Binary("&&", out, p)
    return out


def oracle_execute(sxql: str, catalog: OracleCatalog):
    """Row multiset for a query: (column names, rows, identity values)."""
    schema = catalog.schema
    tree = expand_macros(parse(sxql), schema)
    objs = _level_objects(tree, catalog)

    from ..sxql.macros import source_class
    out_cls = source_class(tree, schema)
    ident = schema.identity_member(out_cls)

    names: list[str] = []
    exprs = []
    from ..sxql.printer import derive_name
    from ..sxql.ast import SelectItem, PathSeg
    base_counts: dict[str, int] = {}
    for item in tree.select:
        base = derive_name(SelectItem(item.expr))
        base_counts[base] = base_counts.get(base, 0) + 1
        name = base if base_counts[base] == 1 else f"{base}_{base_counts[base]}"
        md = None
        if isinstance(item.expr, MemberPath) and len(item.expr.segs) >= 1:
            seg = item.expr.segs[-1]
            holder = out_cls
            for s in item.expr.segs[:-1]:
                holder = schema.classes[holder.association_map()[s.name].target_class]
            m = holder.member_map().get(seg.name)
            if m is not None and m.kind == "array" and seg.index is None:
                md = m
        if md is not None:
            for k in range(md.array_length):
                names.append(f"{name}_{k}")
                exprs.append(MemberPath(item.expr.segs[:-1] +
                                        [PathSeg(item.expr.segs[-1].name, k, False)]))
        else:
            names.append(name)
            exprs.append(item.expr)

    rows = []
    ids = []
    for o in objs:
        vals = []
        for e in exprs:
            v = catalog.eval(e, o)
            vals.append(None if v is NULL else v)
        rows.append(tuple(vals))
        ids.append(catalog.member(o, ident, None))
    return names, rows, ids
