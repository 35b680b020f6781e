"""Flux bit-list index: per-container occupancy masks over binned band magnitudes.

64 equal-width bins per band span the loaded data's min/max; a container's mask has
bit b set iff some object's band magnitude falls in bin b.  Pruning only ever drops
containers that provably hold no satisfying object (superset guarantee), and the
result depends only on the set of intervals, not their order.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import UnindexedBand

BINS = 64


class FluxIndex:
    def __init__(self, bands: list[str], ranges: dict[str, tuple[float, float]],
                 masks: dict[tuple[int, int], dict[str, int]]):
        self.bands = bands
        self.ranges = ranges
        self.masks = masks

    # -- construction ------------------------------------------------------------

    @classmethod
    def build(cls, federation, schema) -> "FluxIndex":
        """Index every container of the tag subtree on the schema's band members."""
        tag = schema.classes[schema.tag_class]
        band_members = {}
        for m in tag.member_map().values():
            if m.flux_band is not None:
                band_members[m.name] = m
        bands = sorted(band_members, key=lambda b: band_members[b].flux_band)
        leaf_names = {c.name for c in tag.leaf_classes()}
        containers = federation.containers_of(leaf_names)

        values: dict[str, list[np.ndarray]] = {b: [] for b in bands}
        per_container: list[tuple[tuple[int, int], dict[str, np.ndarray]]] = []
        for ci in containers:
            cols = {}
            for b in bands:
                md = band_members[b]
                if md.kind == "function":
                    base, idx = _parse_element_expr(md.expr)
                    col = federation.column(ci.database, ci.id, base)[:, idx]
                else:
                    col = federation.column(ci.database, ci.id, md.name)
                col = col.astype(np.float64)
                cols[b] = col
                values[b].append(col)
            per_container.append(((ci.database, ci.id), cols))

        ranges = {}
        for b in bands:
            allv = np.concatenate(values[b]) if values[b] else np.zeros(0)
            if allv.size:
                ranges[b] = (float(allv.min()), float(allv.max()))
            else:
                ranges[b] = (0.0, 1.0)

        masks: dict[tuple[int, int], dict[str, int]] = {}
        for key, cols in per_container:
            m = {}
            for b in bands:
                lo, hi = ranges[b]
                bins = _binify(cols[b], lo, hi)
                mask = 0
                for bit in np.unique(bins):
                    mask |= 1 << int(bit)
                m[b] = mask
            masks[key] = m
        return cls(bands, ranges, masks)

    # -- persistence ---------------------------------------------------------------

    def save(self, path: str | Path):
        doc = {
            "version": 1,
            "bands": self.bands,
            "ranges": {b: list(r) for b, r in self.ranges.items()},
            "containers": [
                {"db": db, "cid": cid, "masks": {b: str(v) for b, v in bm.items()}}
                for (db, cid), bm in sorted(self.masks.items())
            ],
        }
        Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FluxIndex":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        masks = {
            (c["db"], c["cid"]): {b: int(v) for b, v in c["masks"].items()}
            for c in doc["containers"]
        }
        ranges = {b: (r[0], r[1]) for b, r in doc["ranges"].items()}
        return cls(doc["bands"], ranges, masks)

    # -- pruning -------------------------------------------------------------------

    def prune(self, intervals: list[tuple[str, float | None, float | None]]) -> set[tuple[int, int]]:
        """Containers that may hold an object satisfying every band interval."""
        merged: dict[str, tuple[float, float]] = {}
        for band, lo, hi in intervals:
            if band not in self.ranges:
                raise UnindexedBand(band)
            plo = -math.inf if lo is None else lo
            phi = math.inf if hi is None else hi
            if band in merged:
                merged[band] = (max(merged[band][0], plo), min(merged[band][1], phi))
            else:
                merged[band] = (plo, phi)

        out = set()
        for key, bandmasks in self.masks.items():
            keep = True
            for band, (lo, hi) in merged.items():
                if lo > hi:
                    keep = False
                    break
                dlo, dhi = self.ranges[band]
                width = (dhi - dlo) / BINS or 1.0
                b0 = 0 if lo == -math.inf else int(math.floor((lo - dlo) / width))
                b1 = BINS - 1 if hi == math.inf else int(math.floor((hi - dlo) / width))
                b0 = max(b0, 0)
                b1 = min(b1, BINS - 1)
                if b1 < b0:
                    keep = False
                    break
                sel = ((1 << (b1 - b0 + 1)) - 1) << b0
                if not (bandmasks[band] & sel):
                    keep = False
                    break
            if keep:
                out.add(key)
        return out


def _parse_element_expr(expr: str) -> tuple[str, int]:
    """'modelMag[2]' -> ('modelMag', 2); the only function-member shape the index uses."""
    base, rest = expr.split("[", 1)
    return base.strip(), int(rest.rstrip("] "))


def _binify(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    width = (hi - lo) / BINS or 1.0
    bins = np.floor((values - lo) / width).astype(np.int64)
    return np.clip(bins, 0, BINS - 1)
