"""Query planning: index intersection, QET lowering, cost estimation, partition mapping.

The scope of a query is the set of (database, container) pairs its leaf scan must
touch: containers of the FROM class's subtree, intersected with the HTM cover of any
proximity cones and with the flux bit-list prune of any band-interval conjuncts.
The planner never tightens beyond what is provably sound; everything it cannot
analyze is conservatively ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import htm
from .errors import UnmappedDatabase, UnsupportedShape
from .flux import FluxIndex
from .schema import Schema
from .sxql.ast import Binary, Expr, Literal, MemberPath, Prox, conjoin, conjuncts
from .sxql.typecheck import BoundQuery
from .storage import Federation

FULL, PARTIAL = "full", "partial"


@dataclass(frozen=True)
class ScopeEntry:
    database: int
    container: int
    coverage: str  # full | partial


@dataclass
class ScopeSpec:
    class_name: str
    entries: list[ScopeEntry] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            key = (e.database, e.container)
            if key in seen:
                raise ValueError(f"container {key} listed twice in scope")
            seen.add(key)

    @property
    def databases(self) -> set[int]:
        return {e.database for e in self.entries}

    def restricted_to(self, databases: set[int]) -> "ScopeSpec":
        return ScopeSpec(self.class_name,
                         [e for e in self.entries if e.database in databases])

    def to_json(self):
        return {"class": self.class_name,
                "entries": [[e.database, e.container, e.coverage] for e in self.entries]}

    @classmethod
    def from_json(cls, d):
        return cls(d["class"], [ScopeEntry(*e) for e in d["entries"]])


# -- query execution tree ---------------------------------------------------------

@dataclass
class ScopedQuery:
    class_name: str             # storage class whose containers the scope lists
    scope: ScopeSpec
    predicate: Expr | None

    def to_json(self):
        from .sxql.ast import expr_to_json
        return {"t": "scoped", "class": self.class_name, "scope": self.scope.to_json(),
                "predicate": expr_to_json(self.predicate)}

    @classmethod
    def from_json(cls, d):
        from .sxql.ast import expr_from_json
        return cls(d["class"], ScopeSpec.from_json(d["scope"]), expr_from_json(d["predicate"]))


@dataclass
class BagQuery:
    child: object
    predicate: Expr
    class_name: str


@dataclass
class AssociationQuery:
    child: object
    link: str
    source_class: str
    target_class: str
    predicate: Expr | None


@dataclass
class ProximityQuery:
    child: object
    cone: htm.ConeRegion
    class_name: str


@dataclass
class BagLiteral:
    """A fixed bag of oids; a leaf used to drive set-operation nodes directly."""
    oids: object
    class_name: str


@dataclass
class Union:
    children: list


@dataclass
class Intersection:
    left: object
    right: object


@dataclass
class Difference:
    left: object
    right: object


@dataclass
class Distinct:
    child: object


@dataclass
class CostEstimate:
    databases_touched: int
    containers_touched: int
    estimated_seconds: float
    bytes_to_scan: int


@dataclass
class Partition:
    id: int
    databases: set[int]
    locality: str          # "local" or "remote"
    endpoint: str | None = None


@dataclass
class PartitionMap:
    partitions: list[Partition]

    @classmethod
    def from_file(cls, path: str | Path) -> "PartitionMap":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_json(doc)

    @classmethod
    def from_json(cls, doc) -> "PartitionMap":
        parts = []
        for p in doc["partitions"]:
            loc = p.get("locality", "local")
            if isinstance(loc, dict):
                parts.append(Partition(p["id"], set(p["databases"]), "remote", loc["remote"]))
            else:
                parts.append(Partition(p["id"], set(p["databases"]), loc, p.get("endpoint")))
        return cls(parts)

    @classmethod
    def single_local(cls, databases: set[int]) -> "PartitionMap":
        return cls([Partition(0, set(databases), "local")])

    def partition_of(self, database: int) -> Partition:
        for p in self.partitions:
            if database in p.databases:
                return p
        raise UnmappedDatabase(str(database))


# -- the Intersector -----------------------------------------------------------------

def _prox_atoms(predicate: Expr | None) -> list[Prox]:
    out = [c for c in conjuncts(predicate) if isinstance(c, Prox)]
    # PROX anywhere deeper cannot be lowered to a mandatory proximity filter
    def check(e, top):
        if isinstance(e, Prox) and not top:
            raise UnsupportedShape("PROX must be a top-level WHERE conjunct")
        if isinstance(e, Binary):
            nxt = top and e.op == "&&"
            check(e.left, nxt)
            check(e.right, nxt)
    if predicate is not None:
        check(predicate, True)
    return out


def _band_intervals(predicate: Expr | None, schema: Schema, class_name: str):
    """(band, lo, hi) intervals from top-level `band OP literal` conjuncts."""
    cls = schema.classes[class_name]
    bands = {m.name for m in cls.member_map().values() if m.flux_band is not None}
    out = []
    for c in conjuncts(predicate):
        if not (isinstance(c, Binary) and c.op in ("<", "<=", ">", ">=", "==")):
            continue
        path, lit, op = None, None, c.op
        if isinstance(c.left, MemberPath) and isinstance(c.right, Literal):
            path, lit = c.left, c.right
        elif isinstance(c.right, MemberPath) and isinstance(c.left, Literal):
            path, lit = c.right, c.left
            op = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "=="}[op]
        if path is None or len(path.segs) != 1 or path.segs[0].index is not None:
            continue
        name = path.segs[0].name
        if name not in bands or not isinstance(lit.value, (int, float)):
            continue
        v = float(lit.value)
        if op in ("<", "<="):
            out.append((name, None, v))
        elif op in (">", ">="):
            out.append((name, v, None))
        else:
            out.append((name, v, v))
    return out


def _cone_cover_ranges(cone: htm.ConeRegion, depth: int):
    """([(lo,hi)] full leaf ranges, [(lo,hi)] any-coverage leaf ranges)."""
    full, partial = htm.cone_intersect(cone, depth)
    full_ranges = [htm.leaf_range(t, depth) for t in full]
    all_ranges = full_ranges + [htm.leaf_range(t, depth) for t in partial]
    return full_ranges, all_ranges


def _overlaps(lo, hi, ranges):
    return any(not (hi < rlo or lo > rhi) for rlo, rhi in ranges)


def _inside(lo, hi, ranges):
    return any(rlo <= lo and hi <= rhi for rlo, rhi in ranges)


def intersect_indices(bound: BoundQuery, fed: Federation,
                      flux: FluxIndex | None = None) -> ScopeSpec:
    """Scope of the leaf scan: class containers x cone cover x flux prune."""
    leaf = bound.leaf()
    storage = leaf.cls.storage_class()
    leaf_names = {c.name for c in leaf.cls.leaf_classes()}
    containers = fed.containers_of(leaf_names)

    cones = [htm.ConeRegion(p.ra, p.dec, p.radius_arcmin) for p in _prox_atoms(leaf.predicate)]
    covers = [_cone_cover_ranges(c, fed.htm_depth) for c in cones]

    flux_keep = None
    if flux is not None and storage.name == fed.schema.tag_class:
        intervals = _band_intervals(leaf.predicate, fed.schema, leaf.cls.name)
        if intervals:
            flux_keep = flux.prune(intervals)

    entries = []
    for ci in containers:
        keep = True
        coverage = PARTIAL if cones else FULL
        for full_ranges, all_ranges in covers:
            if not _overlaps(ci.trixel_lo, ci.trixel_hi, all_ranges):
                keep = False
                break
        if keep and cones and all(_inside(ci.trixel_lo, ci.trixel_hi, fr) for fr, _ in covers):
            coverage = FULL
        if keep and flux_keep is not None and (ci.database, ci.id) not in flux_keep:
            keep = False
        if keep:
            entries.append(ScopeEntry(ci.database, ci.id, coverage))
    entries.sort(key=lambda e: (e.database, e.container))
    return ScopeSpec(storage.name, entries)


# -- QET lowering -----------------------------------------------------------------

def build_qet(bound: BoundQuery, scope: ScopeSpec):
    """Lower the bound level chain onto query-primitive nodes."""
    levels = []
    cur = bound
    while cur is not None:
        levels.append(cur)
        cur = cur.child
    levels.reverse()  # leaf first

    leaf = levels[0]
    prox = _prox_atoms(leaf.predicate)
    rest = [c for c in conjuncts(leaf.predicate) if not isinstance(c, Prox)]
    node = ScopedQuery(scope.class_name, scope, conjoin(rest))
    for p in prox:
        node = ProximityQuery(node, htm.ConeRegion(p.ra, p.dec, p.radius_arcmin),
                              leaf.cls.name)

    for level in levels[1:]:
        if level.via_link is not None:
            node = AssociationQuery(
                node,
                link=level.via_link.name,
                source_class=level.via_link.owner,
                target_class=level.via_link.target_class,
                predicate=level.assoc_filter,
            )
            own_prox = _prox_atoms(level.predicate)
            own_rest = [c for c in conjuncts(level.predicate) if not isinstance(c, Prox)]
            if own_rest:
                node = BagQuery(node, conjoin(own_rest), level.cls.name)
            for p in own_prox:
                node = ProximityQuery(node, htm.ConeRegion(p.ra, p.dec, p.radius_arcmin),
                                      level.cls.name)
        else:
            if level.predicate is not None:
                own_prox = _prox_atoms(level.predicate)
                own_rest = [c for c in conjuncts(level.predicate) if not isinstance(c, Prox)]
                if own_rest:
                    node = BagQuery(node, conjoin(own_rest), level.cls.name)
                for p in own_prox:
                    node = ProximityQuery(node, htm.ConeRegion(p.ra, p.dec, p.radius_arcmin),
                                          level.cls.name)
    return node


def leaf_scopes(qet) -> list[ScopeSpec]:
    if isinstance(qet, BagLiteral):
        return []
    if isinstance(qet, ScopedQuery):
        return [qet.scope]
    if isinstance(qet, (BagQuery, ProximityQuery, Distinct)):
        return leaf_scopes(qet.child)
    if isinstance(qet, AssociationQuery):
        return leaf_scopes(qet.child)
    if isinstance(qet, Union):
        return [s for c in qet.children for s in leaf_scopes(c)]
    if isinstance(qet, (Intersection, Difference)):
        return leaf_scopes(qet.left) + leaf_scopes(qet.right)
    raise UnsupportedShape(f"unknown node {qet!r}")


_DISPATCH_OVERHEAD_S = 0.002


def container_bytes(fed: Federation, database: int, container: int) -> int:
    ci = fed.container(database, container)
    total = ci.count * ci.record_itemsize
    for ld in ci.many_links.values():
        total += (ci.count + 1) * 4 + ld["targets_count"] * 8
    return total


def estimate_cost(qet, fed: Federation) -> CostEstimate:
    scopes = leaf_scopes(qet)
    dbs = set()
    containers = 0
    total_bytes = 0
    for scope in scopes:
        for e in scope.entries:
            dbs.add(e.database)
            containers += 1
            total_bytes += container_bytes(fed, e.database, e.container)
    rate = fed.manifest.get("scan_rate_bytes_per_s") or 1e8
    seconds = total_bytes / rate + (_DISPATCH_OVERHEAD_S if containers else 0.0)
    return CostEstimate(len(dbs), containers, seconds, total_bytes)


def map_partitions(scope: ScopeSpec, pmap: PartitionMap) -> list[tuple[int, ScopeSpec]]:
    """Disjoint sub-scopes per partition; empty sub-scopes omitted."""
    for e in scope.entries:
        pmap.partition_of(e.database)
    out = []
    for p in pmap.partitions:
        sub = scope.restricted_to(p.databases)
        if sub.entries:
            out.append((p.id, sub))
    return out
