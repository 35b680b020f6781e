"""CSV export from a loaded federation.

Writes the same five files the loader consumes, with canonical schema column order, so
load(export_csv(F)) reproduces F's query results exactly.  Stored float32 columns are
written through polars (shortest round-trip formatting), so values survive the trip.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import polars as pl

from ..oids import NULL_OID
from ..schema import Schema
from ..storage import Federation

# class -> (file, [(link column, link name, target identity member)])
EXPORTS = {
    "PhotoObj": ("photoobj.csv", [("parentID", None, None), ("fieldID", "field", "fieldID")]),
    "Field": ("field.csv", []),
    "SpecObj": ("specobj.csv", [("objID", "obj", "objID")]),
    "SpecLine": ("specline.csv", [("specObjID", "spec", "spec_ID")]),
    "XCRedshift": ("xcredshift.csv", [("specObjID", "spec", "spec_ID")]),
}


def export_csv(federation: Federation | str | Path, out_dir: str | Path,
               classes: list[str] | None = None) -> dict[str, int]:
    fed = federation if isinstance(federation, Federation) else Federation(federation)
    schema = fed.schema
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    counts = {}
    for class_name, (fname, link_cols) in EXPORTS.items():
        if classes is not None and class_name not in classes:
            continue
        counts[class_name] = _export_class(fed, schema, class_name, link_cols, out / fname)
    return counts


def _identity_by_oid(fed: Federation, class_names: set[str], member: str):
    """Sorted (oids, ids) arrays for resolving link targets back to natural keys."""
    oids = []
    ids = []
    for ci in fed.containers_of(class_names):
        oids.append(fed.scan_container(ci.database, ci.id))
        ids.append(fed.column(ci.database, ci.id, member).astype(np.int64))
    if not oids:
        return np.zeros(0, np.uint64), np.zeros(0, np.int64)
    o = np.concatenate(oids)
    i = np.concatenate(ids)
    order = np.argsort(o)
    return o[order], i[order]


def _export_class(fed: Federation, schema: Schema, class_name: str,
                  link_cols, path: Path) -> int:
    cls = schema.classes[class_name]
    members = schema.stored_members(cls)
    leafset = {class_name}
    containers = fed.containers_of(leafset)
    containers.sort(key=lambda ci: (ci.database, ci.id))

    # photoobj rows also carry the tag's parent link (stored on the tag mirror)
    tag_parent_by_photo: dict[int, int] | None = None
    if class_name == "PhotoObj":
        tag_leaves = {c.name for c in schema.classes["Tag"].leaf_classes()}
        t_oids, t_ids = _identity_by_oid(fed, tag_leaves, "objID")
        parent_ids = np.full(len(t_oids), -1, np.int64)
        pos_of = {int(o): k for k, o in enumerate(t_oids)}
        for ci in fed.containers_of(tag_leaves):
            _, targets = fed.link(ci.database, ci.id, "parent")
            own = fed.scan_container(ci.database, ci.id)
            ids = fed.column(ci.database, ci.id, "objID").astype(np.int64)
            valid = targets != NULL_OID
            pos = np.searchsorted(t_oids, targets[valid])
            for o, pid in zip(own[valid], t_ids[pos]):
                parent_ids[pos_of[int(o)]] = pid
        tag_parent_by_photo = {int(i): int(p) for i, p in zip(t_ids, parent_ids)}

    resolvers = {}
    for col, link, ident in link_cols:
        if link is None:
            continue
        target = cls.association_map()[link].target_class
        target_cls = schema.classes[target]
        names = ({c.name for c in target_cls.leaf_classes()}
                 if target_cls.leaf_classes() else {target})
        resolvers[col] = (link, _identity_by_oid(fed, names, ident))

    frames = []
    total = 0
    for ci in containers:
        data: dict[str, pl.Series] = {}
        for m in members:
            col = fed.column(ci.database, ci.id, m.name)
            if m.kind == "array":
                for k in range(m.array_length):
                    data[f"{m.name}_{k}"] = _series(f"{m.name}_{k}", col[:, k], m.value_type)
            else:
                data[m.name] = _series(m.name, col, m.value_type)
        for col_name, link, ident in link_cols:
            if link is None:
                ids = fed.column(ci.database, ci.id, "objID").astype(np.int64)
                vals = np.array([tag_parent_by_photo.get(int(i), -1) for i in ids],
                                dtype=np.int64)
                s = pl.Series(col_name, vals)
                data[col_name] = s.set(s == -1, None)
            else:
                lname, (t_oids, t_ids) = resolvers[col_name]
                kind, *parts = fed.link(ci.database, ci.id, lname)
                targets = parts[0]
                pos = np.searchsorted(t_oids, targets)
                pos = np.clip(pos, 0, max(len(t_oids) - 1, 0))
                vals = np.where(targets != NULL_OID, t_ids[pos], -1)
                s = pl.Series(col_name, vals.astype(np.int64))
                data[col_name] = s.set(s == -1, None)
        frames.append(pl.DataFrame(data))
        total += ci.count
    df = pl.concat(frames) if frames else pl.DataFrame()
    if class_name in ("PhotoObj",):
        df = df.sort("objID")
    elif class_name == "Field":
        df = df.sort("fieldID")
    elif class_name == "SpecObj":
        df = df.sort("spec_ID")
    elif class_name == "SpecLine":
        df = df.sort("specLineID")
    elif class_name == "XCRedshift":
        df = df.sort("xcID")
    df.write_csv(path)
    return total


def _series(name: str, arr: np.ndarray, value_type: str) -> pl.Series:
    if value_type in ("int32", "int64", "bitfield64"):
        return pl.Series(name, arr.astype(np.int64))
    if value_type == "float64":
        return pl.Series(name, arr.astype(np.float64))
    return pl.Series(name, arr.astype(np.float32))
