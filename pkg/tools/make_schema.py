#!/usr/bin/env python3
"""Regenerate src/skyql/data/schema.json.

Run from the repository root after editing the tables below.  The schema is data, not
code; this script exists so the wide member lists stay reviewable.
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "skyql" / "data" / "schema.json"

F32, F64, I32, I64, B64 = "float32", "float64", "int32", "int64", "bitfield64"


def m(name, type_, length=None, fmt=None, expr=None, flux_band=None):
    d = {"name": name, "type": type_}
    if length is not None:
        d["kind"] = "array"
        d["length"] = length
    elif expr is not None:
        d["kind"] = "function"
        d["expr"] = expr
    else:
        d["kind"] = "basic"
    if fmt:
        d["format"] = fmt
    elif type_ in ("int32", "int64", "bitfield64"):
        d["format"] = "%d"
    else:
        d["format"] = "%.6g"
    if flux_band is not None:
        d["flux_band"] = flux_band
    return d


def a(name, target, arity):
    return {"name": name, "target": target, "arity": arity}


# Attributes shared by the tag mirror and the full photo object.  The tag must carry
# everything the benchmark corpus queries on tag classes.
TAG_MEMBERS = (
    [
        m("objID", I64),
        m("objType", I32),
        m("objFlags", B64),
        m("status", B64),
        m("ra", F64, fmt="%.8f"),
        m("dec", F64, fmt="%.8f"),
        m("cx", F64, fmt="%.9f"),
        m("cy", F64, fmt="%.9f"),
        m("cz", F64, fmt="%.9f"),
    ]
    + [m(n, F32, 5) for n in (
        "modelMag", "psfMag", "psfMagErr", "petroMag", "petroRad",
        "reddening", "isoA", "stokesQ", "stokesU",
    )]
    + [m(n, F32) for n in (
        "rowc", "colc", "rowv", "colv", "rowvErr", "colvErr",
        "rho", "petroR50_r", "lDev_r", "lExp_r",
    )]
    + [m(band, F32, expr=f"modelMag[{k}]", flux_band=k)
       for k, band in enumerate("ugriz")]
)

# Full-object extras: the remaining measured quantities plus the radial profiles.
PHOTO_EXTRA_ARRAYS = [
    "modelMagErr", "petroMagErr", "petroRadErr", "petroR50", "petroR50Err",
    "petroR90", "petroR90Err", "fiberMag", "fiberMagErr", "expMag", "expMagErr",
    "deVMag", "deVMagErr", "expRad", "expRadErr", "expAB", "expABErr",
    "expPhi", "expPhiErr", "deVRad", "deVRadErr", "deVAB", "deVABErr",
    "deVPhi", "deVPhiErr", "fracDeV", "lnLStar", "lnLExp", "lnLDeV",
    "isoAErr", "isoB", "isoBErr", "isoPhi", "isoPhiErr", "isoRowc", "isoColc",
    "stokesQErr", "stokesUErr", "texture", "starLike", "skyFlux", "skyFluxErr",
    "col", "colErr", "row", "rowErr", "aperFlux7", "aperFlux7Err",
]
PROF_BINS = 32

PHOTO_MEMBERS = (
    TAG_MEMBERS[:9]
    + [m("object", I32), m("nChild", I32), m("l", F64, fmt="%.8f"), m("b", F64, fmt="%.8f")]
    + [x for x in TAG_MEMBERS[9:] if x.get("kind") != "function"]
    + [m(n, F32, 5) for n in PHOTO_EXTRA_ARRAYS]
    + [m(f"profMean_{band}", F32, PROF_BINS) for band in "ugriz"]
    + [m(f"profErr_{band}", F32, PROF_BINS) for band in "ugriz"]
    + [m("rowcErr", F32), m("colcErr", F32)]
)

SCHEMA = {
    "version": 1,
    "band_order": ["u", "g", "r", "i", "z"],
    "tag_class": "Tag",
    "macros": {
        "RA": "ra",
        "DEC": "dec",
        "OBJID": "objID",
        "RUN": "field.run",
        "RERUN": "field.rerun",
        "CAMCOL": "field.camCol",
        "FIELDID": "field.fieldID",
    },
    "indexed_remap": {"u": "stokesU", "q": "stokesQ"},
    "constants": {
        # photo object flags (objFlags); 64-bit field, upper half mirrors flags2
        "OBJECT_CANONICAL_CENTER": 0x1,
        "OBJECT_BRIGHT": 0x2,
        "OBJECT_EDGE": 0x4,
        "OBJECT_BLENDED": 0x8,
        "OBJECT_CHILD": 0x10,
        "OBJECT_PEAKCENTER": 0x20,
        "OBJECT_NODEBLEND": 0x40,
        "OBJECT_NOPROFILE": 0x80,
        "OBJECT_NOPETRO": 0x100,
        "OBJECT_MANYPETRO": 0x200,
        "OBJECT_CR": 0x1000,
        "OBJECT_INTERP": 0x20000,
        "OBJECT_SATUR": 0x40000,
        "OBJECT_NOTCHECKED": 0x80000,
        "OBJECT_SUBTRACTED": 0x100000,
        "OBJECT_NOSTOKES": 0x200000,
        "OBJECT_BADSKY": 0x400000,
        "OBJECT_PETROFAINT": 0x800000,
        "OBJECT_TOO_LARGE": 0x1000000,
        "OBJECT_BINNED1": 0x10000000,
        "OBJECT_BINNED2": 0x20000000,
        "OBJECT_BINNED4": 0x40000000,
        "OBJECT_MOVED": 0x80000000,
        "OBJECT_DEBLENDED_AS_MOVING": 0x100000000,
        "OBJECT_BAD_MOVING_FIT": 0x200000000,
        # object classification codes (objType)
        "OBJECT_UNKNOWN": 0,
        "OBJECT_GALAXY": 3,
        "OBJECT_STAR": 6,
        "OBJECT_SKY": 8,
        # spectrum classification codes (specClass)
        "SPEC_UNKNOWN": 0,
        "SPEC_STAR": 1,
        "SPEC_GALAXY": 2,
        "SPEC_QSO": 3,
        "SPEC_HIZ_QSO": 4,
        # resolve status bits; PRIMARY deliberately matches Q30's 0x00002000 literal
        "AR_OBJECT_STATUS_SET": 0x1,
        "AR_OBJECT_STATUS_GOOD": 0x2,
        "AR_OBJECT_STATUS_DUPLICATE": 0x4,
        "AR_OBJECT_STATUS_OK_RUN": 0x10,
        "AR_OBJECT_STATUS_RESOLVED": 0x100,
        "AR_OBJECT_STATUS_PRIMARY": 0x2000,
        "AR_OBJECT_STATUS_SECONDARY": 0x4000,
    },
    "classes": {
        "Tag": {
            "aliases": ["PhotoTag"],
            "identity": "objID",
            "members": TAG_MEMBERS,
            "associations": [
                a("obj", "PhotoObj", "to-one"),
                a("field", "Field", "to-one"),
                a("parent", "Tag", "to-one"),
                a("child", "Tag", "to-many"),
            ],
        },
        "Galaxy": {"parent": "Tag", "containers": True, "object_type": 3},
        "Star": {"parent": "Tag", "containers": True, "object_type": 6},
        "Sky": {"parent": "Tag", "containers": True, "object_type": 8},
        "Unknown": {"parent": "Tag", "containers": True, "object_type": 0},
        "PhotoPrimary": {
            "view_of": "Tag",
            "filter": "(status & AR_OBJECT_STATUS_PRIMARY) != 0",
            "aliases": ["Primary"],
        },
        "PhotoObj": {
            "containers": True,
            "identity": "objID",
            "members": PHOTO_MEMBERS,
            "associations": [
                a("field", "Field", "to-one"),
                a("tag", "Tag", "to-one"),
            ],
        },
        "SpecObj": {
            "containers": True,
            "identity": "spec_ID",
            "members": [
                m("spec_ID", I64),
                m("specClass", I32),
                m("z", F32),
                m("zConf", F32),
                m("velDisp", F32),
                m("ra", F64, fmt="%.8f"),
                m("dec", F64, fmt="%.8f"),
            ],
            "associations": [
                a("obj", "PhotoObj", "to-one"),
                a("measured", "SpecLine", "to-many"),
                a("found", "SpecLine", "to-many"),
                a("xcorrz", "XCRedshift", "to-many"),
            ],
        },
        "SpecLine": {
            "containers": True,
            "identity": "specLineID",
            "members": [
                m("specLineID", I64),
                m("lineID", I32),
                m("wave", F32),
                m("restWave", F32),
                m("ew", F32),
                m("ewErr", F32),
                m("height", F32),
                m("sigma", F32),
                m("isFound", I32),
            ],
            "associations": [a("spec", "SpecObj", "to-one")],
        },
        "XCRedshift": {
            "containers": True,
            "identity": "xcID",
            "members": [
                m("xcID", I64),
                m("tempNo", I32),
                m("peakNo", I32),
                m("z", F32),
                m("r", F32),
            ],
            "associations": [a("spec", "SpecObj", "to-one")],
        },
        "Field": {
            "containers": True,
            "aliases": ["field"],
            "identity": "fieldID",
            "members": [
                m("fieldID", I64),
                m("run", I32),
                m("rerun", I32),
                m("camCol", I32),
                m("field", I32),
                m("pspStatus", I32),
                m("nObjects", I32),
                m("mjd", F64),
                m("ra", F64, fmt="%.8f"),
                m("dec", F64, fmt="%.8f"),
                m("psfWidth", F32, 5),
                m("skyLevel", F32, 5),
                m("airmass", F32, 5),
            ],
            "associations": [a("obj", "PhotoObj", "to-many")],
        },
    },
}

SIZES = {"int32": 4, "int64": 8, "bitfield64": 8, "float32": 4, "float64": 8}


def record_bytes(class_doc) -> int:
    total = 0
    for mem in class_doc.get("members", []):
        if mem.get("kind") == "function":
            continue
        total += SIZES[mem["type"]] * mem.get("length", 1)
    for assoc in class_doc.get("associations", []):
        total += 8 if assoc["arity"] == "to-one" else 4
    return total


def main():
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(SCHEMA, indent=1) + "\n", encoding="utf-8")
    tag = record_bytes(SCHEMA["classes"]["Tag"])
    photo = record_bytes(SCHEMA["classes"]["PhotoObj"])
    print(f"wrote {OUT}")
    print(f"tag record ~{tag} B, photo record ~{photo} B, ratio {photo / tag:.2f}")


if __name__ == "__main__":
    main()
