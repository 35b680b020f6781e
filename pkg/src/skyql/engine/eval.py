"""Predicate and extraction evaluation.

Two routes over the same expression trees:

* a scalar route (one object at a time) used by the public predicate API, by
  existential `{?}` atoms, and by function-member reads;
* a masked vector route over container/bag frames used by scans and extraction.
  Logical operators propagate the active-row mask, so `&&`/`||` short-circuit
  per row exactly like the scalar route and errors are only raised for rows that
  are actually evaluated.

Numeric semantics (docs/grammar.md): int64 for integer arithmetic with division
truncating toward zero; everything touching a float runs in float64 (float32 members
widen on read); division by zero, log of a non-positive, sqrt of a negative and
non-finite results raise EvalError scoped to the query.  Comparisons whose member
path crosses an absent to-one link are false.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EvalError, UnknownMember
from ..htm import unit_vector
from ..oids import NULL_OID
from ..schema import Schema, SchemaClass
from ..storage import Federation
from ..sxql.ast import (
    Binary,
    Exist,
    Expr,
    FuncCall,
    Literal,
    MemberPath,
    PathSeg,
    Prox,
    Unary,
)
from ..sxql.typecheck import parse_expr

_INT_NP = {"int32", "int64", "bitfield64"}


def _is_quantified(e: Expr) -> bool:
    if isinstance(e, MemberPath):
        return e.quantified
    if isinstance(e, Binary):
        return _is_quantified(e.left) or _is_quantified(e.right)
    if isinstance(e, Unary):
        return _is_quantified(e.operand)
    if isinstance(e, FuncCall):
        return any(_is_quantified(a) for a in e.args)
    return False


class _FnCache:
    """Parsed expression trees for schema function members."""

    def __init__(self):
        self._cache: dict[tuple[str, str], Expr] = {}

    def get(self, owner: str, md) -> Expr:
        key = (owner, md.name)
        if key not in self._cache:
            self._cache[key] = parse_expr(md.expr)
        return self._cache[key]


_FNS = _FnCache()


# ---------------------------------------------------------------------------------
# scalar route
# ---------------------------------------------------------------------------------

class _Null:
    """Sentinel for a value reached through an absent to-one link."""


NULL = _Null()


def _scalar_member(fed: Federation, schema: Schema, oid: int, seg: PathSeg, cls: SchemaClass):
    members = cls.member_map()
    md = members[seg.name]
    if md.kind == "function":
        expr = _FNS.get(cls.name, md)
        return eval_scalar(expr, fed, schema, oid, cls)
    db, cid, slot = oid >> 48, (oid >> 32) & 0xFFFF, oid & 0xFFFFFFFF
    col = fed.column(db, cid, md.name)
    v = col[slot, seg.index] if md.kind == "array" else col[slot]
    out = v.item()
    if md.value_type in _INT_NP:
        return int(out)
    return float(out)


def _walk_path(fed: Federation, schema: Schema, oid: int, segs, cls: SchemaClass,
               env: dict | None):
    """Value of a non-quantified path for one object (NULL if a link is absent)."""
    cur_oid = oid
    cur_cls = cls
    for i, seg in enumerate(segs):
        terminal = i == len(segs) - 1
        if not terminal or seg.name in cur_cls.association_map():
            assoc = cur_cls.association_map().get(seg.name)
            if assoc is None:
                raise UnknownMember(f"{cur_cls.name}.{seg.name}")
            db, cid, slot = cur_oid >> 48, (cur_oid >> 32) & 0xFFFF, cur_oid & 0xFFFFFFFF
            kind, *parts = fed.link(db, cid, seg.name)
            if kind != "one":
                raise EvalError(EvalError.DOMAIN_ERROR,
                                f"unquantified to-many link {seg.name}")
            t = int(parts[0][slot])
            if t == NULL_OID:
                return NULL
            cur_oid = t
            cur_cls = schema.classes[assoc.target_class]
            continue
        return _scalar_member(fed, schema, cur_oid, seg, cur_cls)
    raise UnknownMember(".".join(s.name for s in segs))


def scalar_read_function(fed: Federation, oid: int, md) -> float:
    cls = fed.schema.classes[fed.class_of_oid(oid)]
    return eval_scalar(_FNS.get(cls.name, md), fed, fed.schema, oid, cls)


def _trunc_div_int(a: int, b: int) -> int:
    if b == 0:
        raise EvalError(EvalError.DIVIDE_BY_ZERO, "integer division by zero")
    q, r = divmod(a, b)
    if r != 0 and (a < 0) != (b < 0):
        q += 1
    return q


def _check_finite(v: float) -> float:
    if not math.isfinite(v):
        raise EvalError(EvalError.OVERFLOW, "non-finite result")
    return v


def _apply_func(name: str, args: list[float]) -> float:
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
            return _check_finite(math.pow(x, y))
        except OverflowError as exc:
            raise EvalError(EvalError.OVERFLOW, "power overflow") from exc
    raise EvalError(EvalError.DOMAIN_ERROR, f"unknown function {name}")


_I64_MIN, _I64_MAX = -(2 ** 63), 2 ** 63 - 1


def eval_scalar(expr: Expr, fed: Federation, schema: Schema, oid: int,
                cls: SchemaClass, env: dict | None = None):
    """Evaluate one expression for one object.  Returns bool/int/float or NULL."""
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, MemberPath):
        if env is not None and id(expr) in env:
            return env[id(expr)]
        return _walk_path(fed, schema, oid, expr.segs, cls, env)
    if isinstance(expr, FuncCall):
        args = []
        for a in expr.args:
            v = eval_scalar(a, fed, schema, oid, cls, env)
            if v is NULL:
                return NULL
            args.append(float(v))
        return _apply_func(expr.name, args)
    if isinstance(expr, Unary):
        v = eval_scalar(expr.operand, fed, schema, oid, cls, env)
        if v is NULL:
            return NULL
        if expr.op == "!":
            return not v
        return -v
    if isinstance(expr, Exist):
        cur_oid, cur_cls = oid, cls
        for seg in expr.link.segs:
            db, cid, slot = cur_oid >> 48, (cur_oid >> 32) & 0xFFFF, cur_oid & 0xFFFFFFFF
            kind, *parts = fed.link(db, cid, seg.name)
            if kind == "one":
                t = int(parts[0][slot])
                if t == NULL_OID:
                    return False
                cur_oid = t
            else:
                offs, targets = parts
                if offs[slot + 1] - offs[slot] == 0:
                    return False
                cur_oid = int(targets[offs[slot]])
            cur_cls = schema.classes[cur_cls.association_map()[seg.name].target_class]
        return True
    if isinstance(expr, Prox):
        c = unit_vector(expr.ra, expr.dec)
        x = _walk_path(fed, schema, oid, [PathSeg("cx")], cls, env)
        y = _walk_path(fed, schema, oid, [PathSeg("cy")], cls, env)
        z = _walk_path(fed, schema, oid, [PathSeg("cz")], cls, env)
        dot = c[0] * x + c[1] * y + c[2] * z
        return dot >= math.cos(math.radians(expr.radius_arcmin / 60.0))
    if isinstance(expr, Binary):
        if expr.op == "&&":
            left = eval_scalar(expr.left, fed, schema, oid, cls, env)
            if left is NULL or not left:
                return False
            return eval_scalar(expr.right, fed, schema, oid, cls, env)
        if expr.op == "||":
            left = eval_scalar(expr.left, fed, schema, oid, cls, env)
            if left is not NULL and left:
                return True
            return eval_scalar(expr.right, fed, schema, oid, cls, env)
        if expr.op in ("<", "<=", ">", ">=", "==", "!=") and _is_quantified(expr) \
                and (env is None or not _paths_resolved(expr, env)):
            return _eval_quantified_atom(expr, fed, schema, oid, cls, env)
        lv = eval_scalar(expr.left, fed, schema, oid, cls, env)
        rv = eval_scalar(expr.right, fed, schema, oid, cls, env)
        if lv is NULL or rv is NULL:
            if expr.op in ("<", "<=", ">", ">=", "==", "!="):
                return False
            return NULL
        if expr.op in ("+", "-", "*", "/"):
            both_int = isinstance(lv, int) and isinstance(rv, int)
            if expr.op == "/":
                if both_int:
                    return _trunc_div_int(lv, rv)
                if float(rv) == 0.0:
                    raise EvalError(EvalError.DIVIDE_BY_ZERO, "division by zero")
                return _check_finite(float(lv) / float(rv))
            if both_int:
                v = {"+": lv + rv, "-": lv - rv, "*": lv * rv}[expr.op]
                if not _I64_MIN <= v <= _I64_MAX:
                    raise EvalError(EvalError.OVERFLOW, "int64 overflow")
                return v
            a, b = float(lv), float(rv)
            v = {"+": a + b, "-": a - b, "*": a * b}[expr.op]
            return _check_finite(v)
        if expr.op == "&":
            return int(lv) & int(rv)
        if expr.op == "|":
            return int(lv) | int(rv)
        if expr.op == "<":
            return lv < rv
        if expr.op == "<=":
            return lv <= rv
        if expr.op == ">":
            return lv > rv
        if expr.op == ">=":
            return lv >= rv
        if expr.op == "==":
            return lv == rv
        if expr.op == "!=":
            return lv != rv
    raise EvalError(EvalError.DOMAIN_ERROR, f"unexpected node {expr!r}")


def _paths_resolved(e: Expr, env: dict) -> bool:
    """True when every quantified path in e already has a value bound in env."""
    paths: list[MemberPath] = []
    _quantified_paths(e, paths)
    return all(id(p) in env for p in paths)


def _quantified_paths(e: Expr, out: list):
    if isinstance(e, MemberPath) and e.quantified:
        out.append(e)
    elif isinstance(e, Binary):
        _quantified_paths(e.left, out)
        _quantified_paths(e.right, out)
    elif isinstance(e, Unary):
        _quantified_paths(e.operand, out)
    elif isinstance(e, FuncCall):
        for a in e.args:
            _quantified_paths(a, out)


def _expand_quantified(fed: Federation, schema: Schema, oid: int, cls: SchemaClass,
                       path: MemberPath) -> list:
    """All candidate values of a path with one {?} link, for one object."""
    qi = next(i for i, s in enumerate(path.segs) if s.quantified)
    cur_oid, cur_cls = oid, cls
    for seg in path.segs[:qi]:
        db, cid, slot = cur_oid >> 48, (cur_oid >> 32) & 0xFFFF, cur_oid & 0xFFFFFFFF
        kind, *parts = fed.link(db, cid, seg.name)
        t = int(parts[0][slot])
        if t == NULL_OID:
            return []
        cur_oid = t
        cur_cls = schema.classes[cur_cls.association_map()[seg.name].target_class]
    qseg = path.segs[qi]
    db, cid, slot = cur_oid >> 48, (cur_oid >> 32) & 0xFFFF, cur_oid & 0xFFFFFFFF
    kind, offs, targets = fed.link(db, cid, qseg.name)
    target_cls = schema.classes[cur_cls.association_map()[qseg.name].target_class]
    rest = path.segs[qi + 1:]
    vals = []
    for t in targets[offs[slot]:offs[slot + 1]]:
        v = _walk_path(fed, schema, int(t), rest, target_cls, None)
        if v is not NULL:
            vals.append(v)
    return vals


def _eval_quantified_atom(expr: Binary, fed, schema, oid, cls, env) -> bool:
    """Existential semantics: true iff some assignment of linked objects to the
    quantified paths makes the comparison true."""
    paths: list[MemberPath] = []
    _quantified_paths(expr, paths)
    env = dict(env or {})

    def rec(k: int) -> bool:
        if k == len(paths):
            v = eval_scalar(expr, fed, schema, oid, cls, env)
            return bool(v) and v is not NULL
        for val in _expand_quantified(fed, schema, oid, cls, paths[k]):
            env[id(paths[k])] = val
            if rec(k + 1):
                return True
        env.pop(id(paths[k]), None)
        return False

    return rec(0)


def eval_predicate(fed: Federation, oid: int, expr: Expr) -> bool:
    """Public single-object predicate evaluation (EvalError on failure)."""
    cls = fed.schema.classes[fed.class_of_oid(oid)]
    v = eval_scalar(expr, fed, fed.schema, oid, cls, None)
    return bool(v) and v is not NULL


# ---------------------------------------------------------------------------------
# vector route
# ---------------------------------------------------------------------------------

class ContainerFrame:
    """All rows of one container, in slot order.

    A scoped scan ingests the whole record block (the unit the planner's cost model
    charges for); member access then reads the in-memory copy.
    """

    def __init__(self, fed: Federation, database: int, container: int):
        self.fed = fed
        self.schema = fed.schema
        ci = fed.container(database, container)
        self.class_name = ci.class_name
        self.database = database
        self.container = container
        self.n = ci.count
        self._block = fed.read_records(database, container)

    def oids(self) -> np.ndarray:
        return self.fed.scan_container(self.database, self.container)

    def member(self, name: str) -> np.ndarray:
        return self._block[name]

    def link(self, name: str):
        link_field = f"link_{name}"
        if link_field in (self._block.dtype.names or ()):
            return ("one", self._block[link_field])
        return self.fed.link(self.database, self.container, name)


class BagFrame:
    """An arbitrary oid array; column access gathers per source container."""

    def __init__(self, fed: Federation, oids: np.ndarray, class_name: str):
        self.fed = fed
        self.schema = fed.schema
        self.class_name = class_name
        self._oids = oids.astype(np.uint64, copy=False)
        self.n = len(oids)

    def oids(self) -> np.ndarray:
        return self._oids

    def member(self, name: str) -> np.ndarray:
        return gather_member(self.fed, self._oids, None, name)

    def link(self, name: str):
        cls = self.schema.classes[self.class_name]
        assoc = cls.association_map()[name]
        if not assoc.to_many:
            return ("one", _gather_link_one(self.fed, self._oids, None, name))
        offsets = np.zeros(self.n + 1, dtype=np.uint32)
        parts: list[np.ndarray] = [np.zeros(0, np.uint64)] * self.n
        for (db, cid), rows, slots in _groups(self._oids):
            kind, offs, targets = self.fed.link(db, cid, name)
            for r, s in zip(rows, slots):
                parts[r] = targets[offs[s]:offs[s + 1]]
        counts = np.array([len(p) for p in parts], dtype=np.uint32)
        np.cumsum(counts, out=offsets[1:])
        flat = np.concatenate(parts) if parts else np.zeros(0, np.uint64)
        return ("many", offsets, flat.astype(np.uint64))


def _groups(oids: np.ndarray):
    """Yield (container key, row indices, slots) per distinct source container."""
    if len(oids) == 0:
        return
    keys = (oids >> np.uint64(32)).astype(np.uint64)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    cut = np.flatnonzero(np.diff(sorted_keys)) + 1
    starts = np.concatenate(([0], cut))
    ends = np.concatenate((cut, [len(oids)]))
    for s, e in zip(starts, ends):
        rows = order[s:e]
        key = int(sorted_keys[s])
        slots = (oids[rows] & np.uint64(0xFFFFFFFF)).astype(np.int64)
        yield (key >> 16, key & 0xFFFF), rows, slots


def gather_member(fed: Federation, oids: np.ndarray, valid: np.ndarray | None,
                  name: str, index: int | None = None) -> np.ndarray:
    """Member values for a bag of oids (float64/int64 output, rows without a valid
    oid left as zero).  Function members evaluate their expression per container."""
    out = None
    for (db, cid), rows, slots in _groups(oids if valid is None else oids[valid]):
        cls = fed.schema.classes[fed.container(db, cid).class_name]
        md = cls.member_map()[name]
        if md.kind == "function":
            expr = _FNS.get(cls.name, md)
            sub = BagFrame(fed, (oids if valid is None else oids[valid])[rows], cls.name)
            vals, _ = eval_vector(expr, sub, np.ones(len(rows), bool))
        else:
            col = fed.column(db, cid, name)
            if md.kind == "array" and index is not None:
                raw = col[slots, index]
            else:
                raw = col[slots]
            if md.value_type in _INT_NP:
                vals = raw.astype(np.int64)
            else:
                vals = raw.astype(np.float64)
        if out is None:
            kind = np.int64 if vals.dtype.kind in "iu" else np.float64
            shape = (len(oids),) if vals.ndim == 1 else (len(oids), vals.shape[1])
            out = np.zeros(shape, dtype=kind)
        if valid is None:
            out[rows] = vals
        else:
            tgt = np.flatnonzero(valid)[rows]
            out[tgt] = vals
    if out is None:
        out = np.zeros(len(oids), dtype=np.float64)
    return out


def _gather_link_one(fed: Federation, oids: np.ndarray, valid: np.ndarray | None,
                     name: str) -> np.ndarray:
    out = np.full(len(oids), NULL_OID, dtype=np.uint64)
    src = oids if valid is None else oids[valid]
    for (db, cid), rows, slots in _groups(src):
        kind, *parts = fed.link(db, cid, name)
        if kind != "one":
            raise EvalError(EvalError.DOMAIN_ERROR, f"to-many link {name} needs {{?}}")
        vals = parts[0][slots]
        if valid is None:
            out[rows] = vals
        else:
            out[np.flatnonzero(valid)[rows]] = vals
    return out


def _vec_path(frame, segs, mask: np.ndarray):
    """(values, valid) of a non-quantified member path over a frame."""
    fed = frame.fed
    schema = frame.schema
    cls = schema.classes[frame.class_name] if frame.class_name in schema.classes \
        else schema.resolve_class(frame.class_name)
    # walk link prefix
    cur_oids = None
    valid = None
    cur_cls = cls
    for i, seg in enumerate(segs):
        terminal = i == len(segs) - 1
        assoc = cur_cls.association_map().get(seg.name)
        if not terminal and assoc is None:
            raise UnknownMember(f"{cur_cls.name}.{seg.name}")
        if assoc is not None and not terminal:
            if cur_oids is None:
                kind, *parts = frame.link(seg.name)
                if kind != "one":
                    raise EvalError(EvalError.DOMAIN_ERROR, f"to-many link {seg.name} needs {{?}}")
                targets = parts[0].copy()
            else:
                targets = _gather_link_one(fed, cur_oids, valid, seg.name)
            new_valid = targets != np.uint64(NULL_OID)
            valid = new_valid if valid is None else (valid & new_valid)
            cur_oids = np.where(valid, targets, 0).astype(np.uint64)
            # rows that went null: point at any real oid to keep gathers in range
            cur_cls = schema.classes[assoc.target_class]
            continue
        # terminal segment: a member read
        if cur_oids is None:
            md = cur_cls.member_map()[seg.name]
            if md.kind == "function":
                expr = _FNS.get(cur_cls.name, md)
                vals, v2 = eval_vector(expr, frame, mask)
                return vals, _and_valid(valid, v2)
            col = frame.member(seg.name)
            raw = col[:, seg.index] if md.kind == "array" else col
            vals = raw.astype(np.int64 if md.value_type in _INT_NP else np.float64)
            return vals, valid
        safe = cur_oids.copy()
        if valid is not None and not valid.all():
            if not valid.any():
                return np.zeros(len(safe)), np.zeros(len(safe), bool)
            safe[~valid] = safe[valid][0]
        vals = gather_member(fed, safe, None, seg.name, seg.index)
        return vals, valid
    raise UnknownMember(".".join(s.name for s in segs))


def _and_valid(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a & b


def _active(mask, valid):
    return mask if valid is None else (mask & valid)


def _as_bool_array(v, n):
    if isinstance(v, np.ndarray):
        return v
    return np.full(n, bool(v))


def _is_int_val(v) -> bool:
    if isinstance(v, np.ndarray):
        return v.dtype.kind in "iu"
    return isinstance(v, int) and not isinstance(v, bool)


def eval_vector(expr: Expr, frame, mask: np.ndarray):
    """(values, valid) for every frame row; only rows in `mask` are trusted/checked."""
    n = frame.n
    if isinstance(expr, Literal):
        return expr.value, None
    if isinstance(expr, MemberPath):
        return _vec_path(frame, expr.segs, mask)
    if isinstance(expr, Unary):
        v, valid = eval_vector(expr.operand, frame, mask)
        if expr.op == "!":
            return ~_as_bool_array(v, n), valid
        if isinstance(v, np.ndarray):
            return -v, valid
        return -v, valid
    if isinstance(expr, FuncCall):
        vals = []
        valid = None
        for a in expr.args:
            v, av = eval_vector(a, frame, mask)
            vals.append(v)
            valid = _and_valid(valid, av)
        act = _active(mask, valid)
        x = vals[0] if isinstance(vals[0], np.ndarray) else np.full(n, float(vals[0]))
        x = x.astype(np.float64, copy=False)
        with np.errstate(all="ignore"):
            if expr.name == "sqrt":
                if bool((act & (x < 0)).any()):
                    raise EvalError(EvalError.DOMAIN_ERROR, "sqrt of a negative")
                return np.sqrt(np.where(x < 0, 0.0, x)), valid
            if expr.name in ("log", "log10"):
                if bool((act & (x <= 0)).any()):
                    raise EvalError(EvalError.DOMAIN_ERROR, "log of a non-positive")
                return np.log10(np.where(x <= 0, 1.0, x)), valid
            if expr.name == "abs":
                return np.abs(x), valid
            if expr.name == "power":
                y = vals[1] if isinstance(vals[1], np.ndarray) else np.full(n, float(vals[1]))
                y = y.astype(np.float64, copy=False)
                frac = y != np.trunc(y)
                if bool((act & (x < 0) & frac).any()):
                    raise EvalError(EvalError.DOMAIN_ERROR, "fractional power of a negative")
                if bool((act & (x == 0) & (y < 0)).any()):
                    raise EvalError(EvalError.DIVIDE_BY_ZERO, "zero to a negative power")
                res = np.power(np.abs(x) * np.where(x < 0, -1.0, 1.0), y)
                if bool((act & ~np.isfinite(res)).any()):
                    raise EvalError(EvalError.OVERFLOW, "power overflow")
                return res, valid
        raise EvalError(EvalError.DOMAIN_ERROR, f"unknown function {expr.name}")
    if isinstance(expr, Exist):
        return _vec_exist(expr, frame, mask)
    if isinstance(expr, Prox):
        c = unit_vector(expr.ra, expr.dec)
        x, vx = _vec_path(frame, [PathSeg("cx")], mask)
        y, vy = _vec_path(frame, [PathSeg("cy")], mask)
        z, vz = _vec_path(frame, [PathSeg("cz")], mask)
        dot = c[0] * x + c[1] * y + c[2] * z
        res = dot >= math.cos(math.radians(expr.radius_arcmin / 60.0))
        return res, _and_valid(vx, _and_valid(vy, vz))
    if isinstance(expr, Binary):
        if expr.op == "&&":
            l, lv = eval_vector(expr.left, frame, mask)
            l = _as_bool_array(l, n) & (lv if lv is not None else True)
            r, rv = eval_vector(expr.right, frame, mask & l)
            r = _as_bool_array(r, n) & (rv if rv is not None else True)
            return l & r, None
        if expr.op == "||":
            l, lv = eval_vector(expr.left, frame, mask)
            l = _as_bool_array(l, n) & (lv if lv is not None else True)
            r, rv = eval_vector(expr.right, frame, mask & ~l)
            r = _as_bool_array(r, n) & (rv if rv is not None else True)
            return l | r, None
        if expr.op in ("<", "<=", ">", ">=", "==", "!="):
            if _is_quantified(expr):
                oids = frame.oids()
                res = np.zeros(n, dtype=bool)
                fed = frame.fed
                cls = fed.schema.classes[frame.class_name]
                for i in np.flatnonzero(mask):
                    res[i] = _eval_quantified_atom(expr, fed, fed.schema,
                                                   int(oids[i]), cls, None)
                return res, None
            l, lv = eval_vector(expr.left, frame, mask)
            r, rv = eval_vector(expr.right, frame, mask)
            valid = _and_valid(lv, rv)
            with np.errstate(invalid="ignore"):
                res = {"<": np.less, "<=": np.less_equal, ">": np.greater,
                       ">=": np.greater_equal, "==": np.equal, "!=": np.not_equal}[expr.op](l, r)
            res = _as_bool_array(res, n)
            if valid is not None:
                res = res & valid
            return res, None
        # arithmetic and bitwise
        l, lv = eval_vector(expr.left, frame, mask)
        r, rv = eval_vector(expr.right, frame, mask)
        valid = _and_valid(lv, rv)
        act = _active(mask, valid)
        both_int = _is_int_val(l) and _is_int_val(r)
        if expr.op in ("&", "|"):
            la = l if isinstance(l, np.ndarray) else np.int64(l)
            ra = r if isinstance(r, np.ndarray) else np.int64(r)
            return (la & ra) if expr.op == "&" else (la | ra), valid
        if expr.op == "/":
            if both_int:
                la = l if isinstance(l, np.ndarray) else np.full(n, l, dtype=np.int64)
                ra = r if isinstance(r, np.ndarray) else np.full(n, r, dtype=np.int64)
                if bool((act & (ra == 0)).any()):
                    raise EvalError(EvalError.DIVIDE_BY_ZERO, "integer division by zero")
                with np.errstate(all="ignore"):
                    q = np.trunc(la / np.where(ra == 0, 1, ra)).astype(np.int64)
                return q, valid
            la = l if isinstance(l, np.ndarray) else np.full(n, float(l))
            ra = r if isinstance(r, np.ndarray) else np.full(n, float(r))
            la = la.astype(np.float64, copy=False)
            ra = ra.astype(np.float64, copy=False)
            if bool((act & (ra == 0.0)).any()):
                raise EvalError(EvalError.DIVIDE_BY_ZERO, "division by zero")
            with np.errstate(all="ignore"):
                res = la / np.where(ra == 0.0, 1.0, ra)
            if bool((act & ~np.isfinite(res)).any()):
                raise EvalError(EvalError.OVERFLOW, "non-finite result")
            return res, valid
        op = {"+": np.add, "-": np.subtract, "*": np.multiply}[expr.op]
        if both_int:
            la = l if isinstance(l, np.ndarray) else np.int64(l)
            ra = r if isinstance(r, np.ndarray) else np.int64(r)
            return op(la, ra), valid
        la = l if isinstance(l, np.ndarray) else float(l)
        ra = r if isinstance(r, np.ndarray) else float(r)
        if isinstance(la, np.ndarray):
            la = la.astype(np.float64, copy=False)
        if isinstance(ra, np.ndarray):
            ra = ra.astype(np.float64, copy=False)
        with np.errstate(all="ignore"):
            res = op(la, ra)
        if isinstance(res, np.ndarray) and bool((act & ~np.isfinite(res)).any()):
            raise EvalError(EvalError.OVERFLOW, "non-finite result")
        return res, valid
    raise EvalError(EvalError.DOMAIN_ERROR, f"unexpected node {expr!r}")


def _vec_exist(expr: Exist, frame, mask: np.ndarray):
    fed = frame.fed
    schema = frame.schema
    cls = schema.classes[frame.class_name]
    segs = expr.link.segs
    cur_oids = None
    alive = np.ones(frame.n, dtype=bool)
    for i, seg in enumerate(segs):
        assoc = cls.association_map()[seg.name]
        last = i == len(segs) - 1
        if assoc.to_many:
            if not last:
                # rare shape; fall back to the scalar walk per row
                oids = frame.oids()
                res = np.zeros(frame.n, bool)
                root = schema.classes[frame.class_name]
                for j in np.flatnonzero(mask):
                    res[j] = bool(eval_scalar(expr, fed, schema, int(oids[j]), root))
                return res, None
            degrees = np.zeros(frame.n, dtype=np.int64)
            src = frame.oids() if cur_oids is None else cur_oids
            for (db, cid), rows, slots in _groups(src[alive]):
                kind, offs, _targets = fed.link(db, cid, seg.name)
                d = (offs[1:][slots] - offs[:-1][slots]).astype(np.int64)
                degrees[np.flatnonzero(alive)[rows]] = d
            return (degrees > 0) & alive, None
        if cur_oids is None:
            kind, *parts = frame.link(seg.name)
            targets = parts[0].copy()
        else:
            targets = _gather_link_one(fed, cur_oids, alive, seg.name)
        alive = alive & (targets != np.uint64(NULL_OID))
        cur_oids = np.where(alive, targets, 0).astype(np.uint64)
        cls = schema.classes[assoc.target_class]
    return alive, None


def expand_association(fed: Federation, oids: np.ndarray, link: str):
    """All linked targets of a bag, multiplicity preserved, in storage order."""
    chunks = []
    for (db, cid), rows, slots in _groups(oids):
        kind, *parts = fed.link(db, cid, link)
        # keep the bag's input order: process rows in their original positions
        order = np.argsort(rows, kind="stable")
        if kind == "one":
            t = parts[0][slots[order]]
            chunks.append(np.asarray(t[t != np.uint64(NULL_OID)], dtype=np.uint64))
        else:
            offs, targets = parts
            s = slots[order]
            parts_list = [targets[offs[i]:offs[i + 1]] for i in s]
            if parts_list:
                chunks.append(np.concatenate(parts_list).astype(np.uint64))
    if not chunks:
        return np.zeros(0, dtype=np.uint64)
    return np.concatenate(chunks)
