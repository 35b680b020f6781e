"""CSV ingestion into a partitioned federation.

Placement: every object gets a depth-`htm_depth` trixel; databases are contiguous
trixel stripes with roughly equal object counts; inside a database each stored class
gets one container (split when it would exceed 65,535 slots).  Tag twins are derived
from the photoobj rows.  Link columns resolve natural keys to oids in a second pass.
The manifest (with the calibrated scan rate) is written last, atomically.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import polars as pl

from .. import htm
from ..errors import MalformedRow, SchemaMismatch
from ..flux import FluxIndex
from ..oids import NULL_OID, encode
from ..schema import Schema
from ..storage import Federation, FederationWriter

MAX_CONTAINER = 65535

CSV_FILES = {
    "PhotoObj": ("photoobj.csv", ["parentID", "fieldID"]),
    "Field": ("field.csv", []),
    "SpecObj": ("specobj.csv", ["objID"]),
    "SpecLine": ("specline.csv", ["specObjID"]),
    "XCRedshift": ("xcredshift.csv", ["specObjID"]),
}

_PL_DTYPES = {"int32": pl.Int64, "int64": pl.Int64, "bitfield64": pl.Int64,
              "float32": pl.Float32, "float64": pl.Float64}
_NP_DTYPES = {"int32": np.int32, "int64": np.int64, "bitfield64": np.int64,
              "float32": np.float32, "float64": np.float64}


@dataclass
class LoadManifest:
    schema_hash: str
    class_counts: dict[str, int]
    databases: list[int]
    partitions: int
    scan_rate_bytes_per_s: float
    htm_depth: int
    generator_seed: int | None


def _expected_columns(schema: Schema, class_name: str, links: list[str]) -> list[str]:
    cols = []
    for m in schema.stored_members(schema.classes[class_name]):
        if m.kind == "array":
            cols.extend(f"{m.name}_{k}" for k in range(m.array_length))
        else:
            cols.append(m.name)
    return cols + links


def _read_csv(path: Path, schema: Schema, class_name: str, links: list[str]) -> pl.DataFrame:
    expected = _expected_columns(schema, class_name, links)
    try:
        header = pl.read_csv(path, n_rows=0).columns
    except Exception as exc:
        raise MalformedRow(f"{path.name}: {exc}") from exc
    if list(header) != expected:
        missing = set(expected) - set(header)
        extra = set(header) - set(expected)
        raise SchemaMismatch(
            f"{path.name}: columns do not match the schema"
            + (f"; missing {sorted(missing)}" if missing else "")
            + (f"; unexpected {sorted(extra)}" if extra else "")
        )
    dtypes: dict[str, pl.DataType] = {}
    for m in schema.stored_members(schema.classes[class_name]):
        t = _PL_DTYPES[m.value_type]
        if m.kind == "array":
            for k in range(m.array_length):
                dtypes[f"{m.name}_{k}"] = t
        else:
            dtypes[m.name] = t
    for name in links:
        dtypes[name] = pl.Int64
    try:
        df = pl.read_csv(path, schema_overrides=dtypes, infer_schema_length=0)
    except Exception as exc:
        line = _find_bad_line(path, len(expected))
        raise MalformedRow(f"{path.name}: {exc}", line=line) from exc
    member_cols = [c for c in expected if c not in links]
    null_counts = df.select(pl.col(member_cols).null_count()).row(0)
    for col, nulls in zip(member_cols, null_counts):
        if nulls:
            line = _find_bad_line(path, len(expected))
            raise MalformedRow(f"{path.name}: {nulls} empty value(s) in column {col}",
                               line=line)
    return df


def _find_bad_line(path: Path, n_cols: int) -> int | None:
    import csv
    with open(path, newline="", encoding="utf-8") as f:
        for i, row in enumerate(csv.reader(f), start=1):
            if i == 1:
                continue
            if len(row) != n_cols:
                return i
    return None


def _member_arrays(schema: Schema, class_name: str, df: pl.DataFrame) -> dict[str, np.ndarray]:
    """{member: ndarray (n,) or (n, L)} in the member's storage dtype."""
    out = {}
    for m in schema.stored_members(schema.classes[class_name]):
        npt = _NP_DTYPES[m.value_type]
        if m.kind == "array":
            cols = [df[f"{m.name}_{k}"].to_numpy().astype(npt) for k in range(m.array_length)]
            out[m.name] = np.stack(cols, axis=1)
        else:
            out[m.name] = df[m.name].to_numpy().astype(npt)
    return out


class _KeyMap:
    """Natural key -> packed oid, vectorized through searchsorted."""

    def __init__(self):
        self._keys: np.ndarray | None = None
        self._oids: np.ndarray | None = None

    def build(self, keys: np.ndarray, oids: np.ndarray):
        order = np.argsort(keys)
        self._keys = keys[order]
        self._oids = oids[order]

    def lookup(self, keys: np.ndarray, allow_null: bool = False) -> np.ndarray:
        out = np.full(keys.shape, NULL_OID, dtype=np.uint64)
        valid = keys >= 0 if allow_null else np.ones(keys.shape, bool)
        k = keys[valid]
        if len(self._keys) == 0:
            if len(k) and not allow_null:
                raise MalformedRow(f"unresolved link keys {k[:3].tolist()}")
            return out
        pos = np.searchsorted(self._keys, k)
        pos = np.clip(pos, 0, len(self._keys) - 1)
        found = self._keys[pos] == k
        if not allow_null and not found.all():
            bad = k[~found][:3]
            raise MalformedRow(f"unresolved link keys {bad.tolist()}")
        res = np.where(found, self._oids[pos], NULL_OID)
        out[valid] = res
        return out


def load(csv_dir: str | Path, partitions: int, htm_depth: int,
         out_federation: str | Path, databases: int = 6,
         schema: Schema | None = None, generator_seed: int | None = None) -> LoadManifest:
    csv_dir = Path(csv_dir)
    schema = schema or Schema.default()
    frames: dict[str, pl.DataFrame] = {}
    for class_name, (fname, links) in CSV_FILES.items():
        frames[class_name] = _read_csv(csv_dir / fname, schema, class_name, links)

    photo = frames["PhotoObj"]
    n = photo.height

    # -- trixels -----------------------------------------------------------------
    trix = {}
    trix["PhotoObj"] = htm.trixel_of_array(photo["ra"].to_numpy(), photo["dec"].to_numpy(),
                                           htm_depth)
    trix["Field"] = htm.trixel_of_array(frames["Field"]["ra"].to_numpy(),
                                        frames["Field"]["dec"].to_numpy(), htm_depth)
    spec = frames["SpecObj"]
    trix["SpecObj"] = htm.trixel_of_array(spec["ra"].to_numpy(), spec["dec"].to_numpy(),
                                          htm_depth)
    spec_trix_by_id = _KeyMap()
    spec_trix_by_id.build(spec["spec_ID"].to_numpy().astype(np.int64),
                          trix["SpecObj"].astype(np.uint64))
    trix["SpecLine"] = spec_trix_by_id.lookup(
        frames["SpecLine"]["specObjID"].to_numpy().astype(np.int64))
    trix["XCRedshift"] = spec_trix_by_id.lookup(
        frames["XCRedshift"]["specObjID"].to_numpy().astype(np.int64))

    # -- database stripes over the tag/photo trixel distribution -------------------
    uniq, counts = np.unique(trix["PhotoObj"], return_counts=True)
    n_db = max(1, min(databases, len(uniq)))
    cum = np.cumsum(counts)
    bounds = []  # database trixel ranges [lo, hi], contiguous stripes
    lo = 0
    for i in range(n_db):
        hi = int(np.searchsorted(cum, (i + 1) * n / n_db, side="left"))
        hi = min(max(hi, lo), len(uniq) - 1 - (n_db - i - 1))
        bounds.append((int(uniq[lo]), int(uniq[hi])))
        lo = hi + 1
        if lo >= len(uniq):
            break
    leaf_lo = htm.leaf_range(8, htm_depth)[0]
    leaf_hi = htm.leaf_range(15, htm_depth)[1]
    bounds[0] = (leaf_lo, bounds[0][1])
    bounds[-1] = (bounds[-1][0], leaf_hi)

    def db_of(tr: np.ndarray) -> np.ndarray:
        his = np.array([b[1] for b in bounds], dtype=np.uint64)
        return np.minimum(np.searchsorted(his, tr), len(bounds) - 1)

    # -- per-class placement --------------------------------------------------------
    # (class, db) -> list of (container rows as original indices, trixel range)
    placements: dict[str, dict] = {}

    def place(class_name: str, tr: np.ndarray, class_of_row: np.ndarray | None = None):
        """Assign rows to (db, container chunks).  Returns per-row (db, chunk_id, slot)."""
        dbs = db_of(tr)
        rows = np.arange(len(tr))
        result = {}
        for db in range(len(bounds)):
            mask = dbs == db
            if not mask.any():
                continue
            r = rows[mask]
            t = tr[mask]
            cls_ids = class_of_row[mask] if class_of_row is not None else np.zeros(len(r))
            for cval in np.unique(cls_ids):
                cmask = cls_ids == cval
                rr = r[cmask]
                tt = t[cmask]
                order = np.lexsort((rr, tt))
                rr, tt = rr[order], tt[order]
                n_chunks = max(1, -(-len(rr) // MAX_CONTAINER))
                for chunk_rows, chunk_trix in zip(np.array_split(rr, n_chunks),
                                                  np.array_split(tt, n_chunks)):
                    key = (db, int(cval))
                    result.setdefault(key, []).append(
                        (chunk_rows, int(chunk_trix[0]), int(chunk_trix[-1])))
        return result

    tag_placement = place("Tag", trix["PhotoObj"], photo["objType"].to_numpy())
    photo_placement = place("PhotoObj", trix["PhotoObj"])
    field_placement = place("Field", trix["Field"])
    spec_placement = place("SpecObj", trix["SpecObj"])
    line_placement = place("SpecLine", trix["SpecLine"])
    xc_placement = place("XCRedshift", trix["XCRedshift"])

    # -- assign container ids and oids ---------------------------------------------
    # container list per db: (class_name, rows, trixel_lo, trixel_hi)
    db_containers: dict[int, list] = {db: [] for db in range(len(bounds))}

    def enroll(placement: dict, name_of: "callable"):
        for (db, cval), chunks in sorted(placement.items()):
            for rows_, tlo, thi in chunks:
                db_containers[db].append((name_of(cval), rows_, tlo, thi))

    enroll(tag_placement, lambda v: schema.container_class_for_object_type(int(v)).name)
    enroll(photo_placement, lambda v: "PhotoObj")
    enroll(field_placement, lambda v: "Field")
    enroll(spec_placement, lambda v: "SpecObj")
    enroll(line_placement, lambda v: "SpecLine")
    enroll(xc_placement, lambda v: "XCRedshift")

    # row -> packed oid per storage group
    oid_arrays = {
        "Tag": np.zeros(n, np.uint64),
        "PhotoObj": np.zeros(n, np.uint64),
        "Field": np.zeros(frames["Field"].height, np.uint64),
        "SpecObj": np.zeros(frames["SpecObj"].height, np.uint64),
        "SpecLine": np.zeros(frames["SpecLine"].height, np.uint64),
        "XCRedshift": np.zeros(frames["XCRedshift"].height, np.uint64),
    }
    tag_leaves = {c.name for c in schema.classes["Tag"].leaf_classes()}
    container_ids: dict[tuple[int, int], tuple[str, np.ndarray, int, int]] = {}
    for db, conts in db_containers.items():
        for cid, (cls_name, rows_, tlo, thi) in enumerate(conts):
            group = "Tag" if cls_name in tag_leaves else cls_name
            base = encode(db, cid, 0)
            oid_arrays[group][rows_] = np.arange(len(rows_), dtype=np.uint64) + np.uint64(base)
            container_ids[(db, cid)] = (cls_name, rows_, tlo, thi)

    # -- natural key maps ------------------------------------------------------------
    key_photo = _KeyMap()
    key_photo.build(photo["objID"].to_numpy().astype(np.int64), oid_arrays["PhotoObj"])
    key_tag = _KeyMap()
    key_tag.build(photo["objID"].to_numpy().astype(np.int64), oid_arrays["Tag"])
    key_field = _KeyMap()
    key_field.build(frames["Field"]["fieldID"].to_numpy().astype(np.int64), oid_arrays["Field"])
    key_spec = _KeyMap()
    key_spec.build(spec["spec_ID"].to_numpy().astype(np.int64), oid_arrays["SpecObj"])

    parent_raw = photo["parentID"].fill_null(-1).to_numpy().astype(np.int64)
    links_all: dict[str, dict[str, tuple]] = {
        "Tag": {
            "obj": ("one", oid_arrays["PhotoObj"]),
            "field": ("one", key_field.lookup(photo["fieldID"].to_numpy().astype(np.int64))),
            "parent": ("one", key_tag.lookup(parent_raw, allow_null=True)),
            "child": _invert(key_tag.lookup(parent_raw, allow_null=True), oid_arrays["Tag"],
                             domain=oid_arrays["Tag"]),
        },
        "PhotoObj": {
            "field": ("one", key_field.lookup(photo["fieldID"].to_numpy().astype(np.int64))),
            "tag": ("one", oid_arrays["Tag"]),
        },
        "Field": {
            "obj": _invert(key_field.lookup(photo["fieldID"].to_numpy().astype(np.int64)),
                           oid_arrays["PhotoObj"], domain=oid_arrays["Field"]),
        },
        "SpecObj": {
            "obj": ("one", key_photo.lookup(spec["objID"].to_numpy().astype(np.int64))),
            "measured": _invert(
                key_spec.lookup(frames["SpecLine"]["specObjID"].to_numpy().astype(np.int64)),
                oid_arrays["SpecLine"], domain=oid_arrays["SpecObj"]),
            "found": _invert(
                key_spec.lookup(frames["SpecLine"]["specObjID"].to_numpy().astype(np.int64)),
                oid_arrays["SpecLine"], domain=oid_arrays["SpecObj"],
                keep=frames["SpecLine"]["isFound"].to_numpy().astype(bool)),
            "xcorrz": _invert(
                key_spec.lookup(frames["XCRedshift"]["specObjID"].to_numpy().astype(np.int64)),
                oid_arrays["XCRedshift"], domain=oid_arrays["SpecObj"]),
        },
        "SpecLine": {
            "spec": ("one", key_spec.lookup(
                frames["SpecLine"]["specObjID"].to_numpy().astype(np.int64))),
        },
        "XCRedshift": {
            "spec": ("one", key_spec.lookup(
                frames["XCRedshift"]["specObjID"].to_numpy().astype(np.int64))),
        },
    }

    member_data = {cls: _member_arrays(schema, cls, frames[cls]) for cls in CSV_FILES}
    member_data["Tag"] = {
        m.name: member_data["PhotoObj"][m.name]
        for m in schema.stored_members(schema.classes["Tag"])
    }

    # -- write database files ---------------------------------------------------------
    out = Path(out_federation)
    writer = FederationWriter(out, schema, htm_depth)
    class_counts: dict[str, int] = {}
    for db in range(len(bounds)):
        containers = []
        for cid, (cls_name, rows_, tlo, thi) in enumerate(db_containers[db]):
            group = "Tag" if cls_name in tag_leaves else cls_name
            data = member_data[group]
            columns = {name: arr[rows_] for name, arr in data.items()}
            links = {}
            for lname, spec_ in links_all[group].items():
                if spec_[0] == "one":
                    links[lname] = ("one", spec_[1][rows_])
                else:
                    _, offs, targets = spec_
                    counts_ = offs[1:][rows_] - offs[:-1][rows_]
                    new_offs = np.zeros(len(rows_) + 1, np.uint32)
                    np.cumsum(counts_, out=new_offs[1:])
                    gathered = np.concatenate(
                        [targets[offs[r]:offs[r + 1]] for r in rows_]
                    ) if len(rows_) else np.zeros(0, np.uint64)
                    links[lname] = ("many", new_offs, gathered)
            containers.append({
                "id": cid, "class": cls_name, "trixel_lo": tlo, "trixel_hi": thi,
                "count": len(rows_), "columns": columns, "links": links,
            })
            class_counts[cls_name] = class_counts.get(cls_name, 0) + len(rows_)
        writer.write_database(db, bounds[db][0], bounds[db][1], containers)

    writer.write_manifest(class_counts, scan_rate=1.0, generator_seed=generator_seed)

    # -- indexes and calibration -------------------------------------------------------
    fed = Federation(out)
    FluxIndex.build(fed, schema).save(out / "flux.idx")
    scan_rate = _calibrate(fed)
    _write_partition_map(out / "partitions.json", sorted(range(len(bounds))), partitions)
    writer.write_manifest(class_counts, scan_rate=scan_rate, generator_seed=generator_seed,
                          extra={"partitions_hint": partitions})
    return LoadManifest(
        schema_hash=schema.schema_hash(),
        class_counts=class_counts,
        databases=sorted(d["id"] for d in writer.databases),
        partitions=partitions,
        scan_rate_bytes_per_s=scan_rate,
        htm_depth=htm_depth,
        generator_seed=generator_seed,
    )


def _invert(parent_oid_per_row: np.ndarray, row_oids: np.ndarray,
            domain: np.ndarray | None = None, keep: np.ndarray | None = None):
    """Build a to-many CSR (offsets, targets) mapping each domain object to the rows
    that point at it.  `parent_oid_per_row[i]` is the owning object's oid for row i
    (NULL_OID = unowned); `domain` defaults to the owner oid array itself."""
    owners = parent_oid_per_row
    rows = row_oids
    if keep is not None:
        owners = owners[keep]
        rows = rows[keep]
    valid = owners != NULL_OID
    owners = owners[valid]
    rows = rows[valid]
    dom = domain if domain is not None else parent_oid_per_row
    dom_sorted = np.sort(dom.astype(np.uint64))
    # sort rows by (owner, row oid) for deterministic storage order
    order = np.lexsort((rows, owners))
    owners = owners[order]
    rows = rows[order]
    idx = np.searchsorted(dom_sorted, owners)
    if len(owners) and (idx >= len(dom_sorted)).any():
        raise MalformedRow("link target outside its class")
    counts = np.bincount(idx, minlength=len(dom_sorted))
    offs_sorted = np.zeros(len(dom_sorted) + 1, np.uint32)
    np.cumsum(counts, out=offs_sorted[1:])
    # map back to the domain's original order
    dom_order = np.argsort(dom.astype(np.uint64))
    inv = np.empty_like(dom_order)
    inv[dom_order] = np.arange(len(dom_order))
    # offsets/targets must follow the domain's storage order; rebuild per object
    starts = offs_sorted[:-1][inv]
    ends = offs_sorted[1:][inv]
    counts_dom = ends - starts
    offs = np.zeros(len(dom) + 1, np.uint32)
    np.cumsum(counts_dom, out=offs[1:])
    targets = np.concatenate([rows[s:e] for s, e in zip(starts, ends)]) \
        if len(dom) else np.zeros(0, np.uint64)
    return ("many", offs, targets.astype(np.uint64))


def _write_partition_map(path: Path, db_ids: list[int], partitions: int):
    """Round-robin databases (which are trixel-ordered stripes) onto partitions."""
    import json
    parts = [{"id": p, "databases": [], "locality": "local"} for p in range(partitions)]
    for db in db_ids:
        parts[db % partitions]["databases"].append(db)
    path.write_text(json.dumps({"partitions": parts}, indent=1), encoding="utf-8")


def _calibrate(fed: Federation) -> float:
    """Bytes/second for a full sequential scan, recorded for the planner's cost model."""
    total = 0
    t0 = time.perf_counter()
    for ci in fed.containers():
        rec = fed.read_records(ci.database, ci.id)
        total += rec.nbytes
    dt = max(time.perf_counter() - t0, 1e-6)
    return total / dt
