"""Partitioned federation storage: one binary file per database, record-oriented
containers.

Each container is one contiguous block of fixed-size records (a packed structured
dtype: members plus to-one link oids), so an exhaustive scan touches bytes in
proportion to the record width -- the mechanics behind the tag-class speedup.
Column access is a zero-copy strided view into the mmapped block.  to-many links are
CSR side blocks (u32 offsets[count+1] + u64 targets).

Layout per file:  b"SKYQLDB1" | u32 header length | header JSON | payload.
"""

from __future__ import annotations

import json
import mmap
import os
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IndexOutOfRange, IoError, UnknownMember, WrongKind
from .oids import NULL_OID, ObjectId, encode
from .schema import MemberDescriptor, Schema

MAGIC = b"SKYQLDB1"

_DTYPES = {"int32": "<i4", "int64": "<i8", "bitfield64": "<i8",
           "float32": "<f4", "float64": "<f8"}


def _record_dtype(fields: list) -> np.dtype:
    """Packed structured dtype for a container's record block."""
    spec = []
    for name, dt, sublen, _kind in fields:
        if sublen:
            spec.append((name, dt, (sublen,)))
        else:
            spec.append((name, dt))
    return np.dtype(spec)


@dataclass
class ContainerInfo:
    database: int
    id: int
    class_name: str
    trixel_lo: int
    trixel_hi: int
    count: int
    record_offset: int
    fields: list          # [name, dtype, sublen, kind] with kind member|link
    many_links: dict
    record_itemsize: int = 0


@dataclass
class DatabaseInfo:
    id: int
    file: str
    trixel_lo: int
    trixel_hi: int
    containers: list[ContainerInfo] = field(default_factory=list)


class Federation:
    """Read-only view of a loaded federation."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        try:
            with open(self.path / "manifest.json", "r", encoding="utf-8") as f:
                self.manifest = json.load(f)
        except OSError as exc:
            raise IoError(f"cannot open federation manifest: {exc}") from exc
        self.schema = Schema(self.manifest["schema"])
        self.htm_depth: int = self.manifest["htm_depth"]
        self.databases: dict[int, DatabaseInfo] = {}
        self._maps: dict[int, memoryview] = {}
        self._containers: dict[tuple[int, int], ContainerInfo] = {}
        self._record_cache: dict[tuple[int, int], np.ndarray] = {}
        self._scratch = threading.local()
        for dbdoc in self.manifest["databases"]:
            info = DatabaseInfo(dbdoc["id"], dbdoc["file"], dbdoc["trixel_lo"], dbdoc["trixel_hi"])
            self._open_db(info)
            self.databases[info.id] = info

    def _open_db(self, info: DatabaseInfo):
        fp = self.path / info.file
        try:
            with open(fp, "rb") as f:
                mapped = mmap.mmap(f.fileno(), 0, access=mmap.ACCESS_READ)
        except (OSError, ValueError) as exc:
            raise IoError(f"cannot open database file {fp}: {exc}") from exc
        view = memoryview(mapped)
        if bytes(view[:8]) != MAGIC:
            raise IoError(f"bad magic in {fp}")
        (hlen,) = struct.unpack("<I", view[8:12])
        header = json.loads(bytes(view[12:12 + hlen]).decode("utf-8"))
        if header["database"] != info.id:
            raise IoError(f"database id mismatch in {fp}")
        self._maps[info.id] = view
        for cdoc in header["containers"]:
            ci = ContainerInfo(
                database=info.id,
                id=cdoc["id"],
                class_name=cdoc["class"],
                trixel_lo=cdoc["trixel_lo"],
                trixel_hi=cdoc["trixel_hi"],
                count=cdoc["count"],
                record_offset=cdoc["record_offset"],
                fields=cdoc["fields"],
                many_links=cdoc["many_links"],
            )
            ci.record_itemsize = _record_dtype(ci.fields).itemsize
            info.containers.append(ci)
            self._containers[(info.id, ci.id)] = ci

    # -- container access --------------------------------------------------------

    def containers(self) -> list[ContainerInfo]:
        out = []
        for db in sorted(self.databases):
            out.extend(self.databases[db].containers)
        return out

    def container(self, database: int, container: int) -> ContainerInfo:
        return self._containers[(database, container)]

    def containers_of(self, class_names: set[str]) -> list[ContainerInfo]:
        return [ci for ci in self.containers() if ci.class_name in class_names]

    def _records(self, database: int, container: int) -> np.ndarray:
        key = (database, container)
        rec = self._record_cache.get(key)
        if rec is None:
            ci = self._containers[key]
            dtype = _record_dtype(ci.fields)
            rec = np.frombuffer(self._maps[database], dtype=dtype, count=ci.count,
                                offset=ci.record_offset)
            self._record_cache[key] = rec
        return rec

    def read_records(self, database: int, container: int) -> np.ndarray:
        """Materialized copy of the container's record block (a full sequential read).

        The copy lands in a per-thread scratch buffer to avoid large alloc/free churn
        on every scan; the returned view is only valid until the same thread's next
        read_records call (scans consume one container at a time).
        """
        ci = self._containers[(database, container)]
        need = ci.count * ci.record_itemsize
        if need == 0:
            return self._records(database, container)
        buf = getattr(self._scratch, "buf", None)
        if buf is None or buf.nbytes < need:
            self._scratch.buf = buf = np.empty(need, dtype=np.uint8)
        src = np.frombuffer(self._maps[database], dtype=np.uint8, count=need,
                            offset=ci.record_offset)
        dst = buf[:need]
        np.copyto(dst, src)
        return dst.view(_record_dtype(ci.fields))[:ci.count]

    def column(self, database: int, container: int, member: str) -> np.ndarray:
        ci = self._containers[(database, container)]
        names = {f[0] for f in ci.fields}
        if member not in names:
            raise UnknownMember(f"{ci.class_name}.{member} (container {database}/{container})")
        return self._records(database, container)[member]

    def link(self, database: int, container: int, name: str):
        """to-one -> ('one', targets); to-many -> ('many', offsets, targets)."""
        ci = self._containers[(database, container)]
        link_field = f"link_{name}"
        if any(f[0] == link_field for f in ci.fields):
            return ("one", self._records(database, container)[link_field])
        ld = ci.many_links.get(name)
        if ld is None:
            raise UnknownMember(f"link {ci.class_name}.{name}")
        view = self._maps[database]
        offs = np.frombuffer(view, dtype="<u4", count=ci.count + 1, offset=ld["offsets_offset"])
        targets = np.frombuffer(view, dtype="<u8", count=ld["targets_count"],
                                offset=ld["targets_offset"])
        return ("many", offs, targets)

    def scan_container(self, database: int, container: int) -> np.ndarray:
        """Packed oids of every slot, in slot order."""
        ci = self._containers[(database, container)]
        base = encode(database, container, 0)
        return (np.arange(ci.count, dtype=np.uint64) + np.uint64(base))

    def class_of_oid(self, oid: int) -> str:
        return self._containers[(oid >> 48, (oid >> 32) & 0xFFFF)].class_name

    # -- scalar object access (the Abstract's read path) --------------------------

    def read_value(self, oid: ObjectId | int, member: MemberDescriptor, index: int | None = None):
        packed = oid.encode() if isinstance(oid, ObjectId) else oid
        db, cid, slot = packed >> 48, (packed >> 32) & 0xFFFF, packed & 0xFFFFFFFF
        if member.kind == "function":
            from .engine.eval import scalar_read_function  # local: avoids import cycle
            return scalar_read_function(self, packed, member)
        if member.kind == "association-link":
            raise WrongKind(f"{member.name} is a link, not a value")
        col = self.column(db, cid, member.name)
        if member.kind == "array":
            if index is None:
                raise WrongKind(f"{member.name} is an array; an index is required")
            if not 0 <= index < (member.array_length or 0):
                raise IndexOutOfRange(f"{member.name}[{index}]")
            return col[slot, index].item()
        if index is not None:
            raise WrongKind(f"{member.name} is not an array")
        return col[slot].item()

    def follow_link(self, oid: ObjectId | int, assoc_name: str) -> list[ObjectId]:
        packed = oid.encode() if isinstance(oid, ObjectId) else oid
        db, cid, slot = packed >> 48, (packed >> 32) & 0xFFFF, packed & 0xFFFFFFFF
        kind, *parts = self.link(db, cid, assoc_name)
        from .oids import decode
        if kind == "one":
            t = int(parts[0][slot])
            return [] if t == NULL_OID else [decode(t)]
        offs, targets = parts
        return [decode(int(t)) for t in targets[offs[slot]:offs[slot + 1]]]


class FederationWriter:
    """Single-writer builder for federation files.  The manifest is written last."""

    def __init__(self, path: str | Path, schema: Schema, htm_depth: int):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.schema = schema
        self.htm_depth = htm_depth
        self.databases: list[dict] = []
        self.extra: dict = {}

    def write_database(self, db_id: int, trixel_lo: int, trixel_hi: int, containers: list[dict]):
        """containers: [{id, class, trixel_lo, trixel_hi, count,
                         columns: {name: ndarray}, links: {name: spec}}]
        link spec: ('one', targets u64[n]) or ('many', offsets u32[n+1], targets u64[m]).
        Members and to-one links pack into one record block per container."""
        fname = f"db_{db_id:04d}.skydb"
        blobs: list[bytes] = []
        offset = 0
        header_containers = []
        for c in containers:
            n = c["count"]
            fields = []
            for name, arr in c["columns"].items():
                raw = np.ascontiguousarray(arr)
                dt = raw.dtype.str.replace(">", "<")
                sublen = int(raw.shape[1]) if raw.ndim == 2 else 0
                fields.append([name, dt, sublen, "member"])
            one_links = {}
            many = {}
            for name, spec in c["links"].items():
                if spec[0] == "one":
                    fields.append([f"link_{name}", "<u8", 0, "link"])
                    one_links[name] = np.ascontiguousarray(spec[1], dtype="<u8")
                else:
                    many[name] = spec
            dtype = _record_dtype(fields)
            record = np.zeros(n, dtype=dtype)
            for name, arr in c["columns"].items():
                record[name] = arr
            for name, arr in one_links.items():
                record[f"link_{name}"] = arr
            record_offset = offset
            blobs.append(record.tobytes())
            offset += record.nbytes
            many_links = {}
            for name, spec in many.items():
                offs = np.ascontiguousarray(spec[1], dtype="<u4")
                targets = np.ascontiguousarray(spec[2], dtype="<u8")
                many_links[name] = {
                    "offsets_offset": offset,
                    "targets_offset": offset + offs.nbytes,
                    "targets_count": int(targets.size),
                }
                blobs.append(offs.tobytes())
                blobs.append(targets.tobytes())
                offset += offs.nbytes + targets.nbytes
            header_containers.append({
                "id": c["id"],
                "class": c["class"],
                "trixel_lo": c["trixel_lo"],
                "trixel_hi": c["trixel_hi"],
                "count": n,
                "record_offset": record_offset,
                "fields": fields,
                "many_links": many_links,
            })
        def rendered(base: int) -> bytes:
            adjusted = json.loads(json.dumps({"database": db_id, "containers": header_containers}))
            for hc in adjusted["containers"]:
                hc["record_offset"] += base
                for ld in hc["many_links"].values():
                    ld["offsets_offset"] += base
                    ld["targets_offset"] += base
            return json.dumps(adjusted, sort_keys=True, separators=(",", ":")).encode("utf-8")

        # offset fields appear inside the header, so its length is a fixpoint
        base = 12
        while True:
            hjson = rendered(base)
            if 12 + len(hjson) == base:
                break
            base = 12 + len(hjson)
        with open(self.path / fname, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<I", len(hjson)))
            f.write(hjson)
            for b in blobs:
                f.write(b)
        self.databases.append({
            "id": db_id, "file": fname, "trixel_lo": trixel_lo, "trixel_hi": trixel_hi,
        })

    def write_manifest(self, class_counts: dict[str, int], scan_rate: float,
                       generator_seed: int | None = None, extra: dict | None = None):
        manifest = {
            "version": 1,
            "schema": self.schema.doc,
            "schema_hash": self.schema.schema_hash(),
            "htm_depth": self.htm_depth,
            "scan_rate_bytes_per_s": scan_rate,
            "generator_seed": generator_seed,
            "class_counts": class_counts,
            "databases": self.databases,
        }
        if extra:
            manifest.update(extra)
        tmp = self.path / "manifest.json.tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=1, sort_keys=True)
        os.replace(tmp, self.path / "manifest.json")
