"""Synthetic catalog generation.

Produces photoobj.csv, specobj.csv, specline.csv, xcredshift.csv and field.csv for a
seeded pseudo-survey.  The sky footprint is an equatorial stripe (ra 40..340 deg,
|dec| < 1.25 deg) so cone searches cross root-triangle boundaries; a dense cluster is
planted at (ra=200, dec=-0.5) and a handful of ultra-bright objects are planted so
magnitude-prune exercises have non-empty answers.  Distributions are documented in
docs/generator.md; every draw comes from one seeded generator in a fixed order, so a
given (n, seed) yields byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import polars as pl

from ..errors import IoError
from ..schema import Schema

RA_LO, RA_HI = 40.0, 340.0
DEC_LO, DEC_HI = -1.25, 1.25
CLUSTER_RA, CLUSTER_DEC, CLUSTER_RADIUS_ARCMIN = 200.0, -0.5, 0.8

RUNS = [94, 125, 752, 756, 1033, 1045, 1140, 1231, 1302, 1331, 1350, 1402]
REDDEN_COEF = np.array([5.155, 3.793, 2.751, 2.086, 1.479])

OBJ_GALAXY, OBJ_STAR, OBJ_SKY, OBJ_UNKNOWN = 3, 6, 8, 0

F = {  # objFlags bit values, mirrored from the schema constants
    "BRIGHT": 0x2, "EDGE": 0x4, "BLENDED": 0x8, "CHILD": 0x10, "PEAKCENTER": 0x20,
    "NODEBLEND": 0x40, "NOPROFILE": 0x80, "NOPETRO": 0x100, "MANYPETRO": 0x200,
    "CR": 0x1000, "INTERP": 0x20000, "SATUR": 0x40000, "NOTCHECKED": 0x80000,
    "SUBTRACTED": 0x100000, "NOSTOKES": 0x200000, "BADSKY": 0x400000,
    "PETROFAINT": 0x800000, "TOO_LARGE": 0x1000000, "BINNED1": 0x10000000,
    "BINNED2": 0x20000000, "BINNED4": 0x40000000, "MOVED": 0x80000000,
    "DEBLENDED_AS_MOVING": 0x100000000, "BAD_MOVING_FIT": 0x200000000,
    "CANONICAL_CENTER": 0x1,
}
S = {"SET": 0x1, "GOOD": 0x2, "DUPLICATE": 0x4, "OK_RUN": 0x10, "PRIMARY": 0x2000,
     "SECONDARY": 0x4000, "RESOLVED": 0x100}

FLAG_RATES = {
    "CANONICAL_CENTER": 0.5, "BRIGHT": 0.02, "EDGE": 0.05, "BLENDED": 0.06,
    "CHILD": 0.03, "PEAKCENTER": 0.1, "NODEBLEND": 0.04, "NOPROFILE": 0.05,
    "NOPETRO": 0.07, "MANYPETRO": 0.02, "CR": 0.03, "INTERP": 0.08, "SATUR": 0.05,
    "NOTCHECKED": 0.02, "SUBTRACTED": 0.01, "NOSTOKES": 0.03, "BADSKY": 0.01,
    "PETROFAINT": 0.04, "TOO_LARGE": 0.03, "BINNED1": 0.92, "BINNED2": 0.30,
    "BINNED4": 0.10, "DEBLENDED_AS_MOVING": 0.01, "BAD_MOVING_FIT": 0.015,
}


def generate_synthetic(n_objects: int, seed: int, out_dir: str | Path) -> dict[str, int]:
    """Write the five CSV files; returns per-file row counts."""
    if n_objects < 1:
        raise IoError("n_objects must be >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    n = n_objects

    n_cluster = min(150, max(min(30, n), n // 500))
    n_bright = min(20, max(0, n - n_cluster) // 100)

    # -- positions ---------------------------------------------------------------
    ra = rng.uniform(RA_LO, RA_HI, n)
    dec = rng.uniform(DEC_LO, DEC_HI, n)
    rr = CLUSTER_RADIUS_ARCMIN / 60.0 * np.sqrt(rng.uniform(0, 1, n_cluster))
    ang = rng.uniform(0, 2 * np.pi, n_cluster)
    dec[:n_cluster] = CLUSTER_DEC + rr * np.cos(ang)
    ra[:n_cluster] = CLUSTER_RA + rr * np.sin(ang) / np.cos(np.radians(CLUSTER_DEC))

    # -- fields --------------------------------------------------------------------
    n_fields = max(4, n // 150)
    field_idx = np.minimum(((ra - RA_LO) / (RA_HI - RA_LO) * n_fields).astype(np.int64),
                           n_fields - 1)
    f_arange = np.arange(n_fields)
    field_id = 10000 + f_arange
    field_run = np.array(RUNS, dtype=np.int64)[(f_arange // 120) % len(RUNS)]
    field_camcol = (f_arange % 6) + 1
    field_num = 11 + (f_arange // 6) % 20
    field_rerun = np.full(n_fields, 7)
    field_psf = 1.5 + rng.normal(0, 0.25, (n_fields, 5)) + np.array([0.2, 0.1, 0.0, 0.05, 0.15])
    field_psp = rng.choice([0, 1, 2, 3], n_fields, p=[0.1, 0.25, 0.4, 0.25])
    field_ra = RA_LO + (f_arange + 0.5) * (RA_HI - RA_LO) / n_fields
    field_dec = np.zeros(n_fields)
    field_mjd = 51000.0 + f_arange * 0.01
    field_sky = np.abs(rng.normal(21, 0.5, (n_fields, 5)))
    field_air = 1.0 + np.abs(rng.normal(0.2, 0.1, (n_fields, 5)))

    # short id within the field, in generation order
    order = np.argsort(field_idx, kind="stable")
    obj_short = np.empty(n, dtype=np.int64)
    counts = np.bincount(field_idx, minlength=n_fields)
    starts = np.zeros(n_fields, dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    obj_short[order] = np.arange(n, dtype=np.int64) - np.repeat(starts, counts)

    # -- classification and blend families -----------------------------------------
    obj_type = rng.choice([OBJ_GALAXY, OBJ_STAR, OBJ_SKY, OBJ_UNKNOWN], n,
                          p=[0.44, 0.40, 0.08, 0.08])
    obj_type[:n_cluster] = rng.choice([OBJ_GALAXY, OBJ_STAR], n_cluster, p=[0.7, 0.3])

    parent_of = np.full(n, -1, dtype=np.int64)     # index of parent object, -1 none
    n_child = np.zeros(n, dtype=np.int64)
    n_families = max(0, n // 80)
    if n_families and n >= 8:
        fam = rng.choice(n, size=min(n_families * 4, n // 2), replace=False)
        pos = 0
        for _ in range(n_families):
            k = int(rng.integers(2, 4))
            if pos + 1 + k > len(fam):
                break
            parent = fam[pos]
            kids = fam[pos + 1: pos + 1 + k]
            pos += 1 + k
            parent_of[kids] = parent
            n_child[parent] = k
            obj_type[kids[0]] = OBJ_GALAXY
            if k > 1:
                obj_type[kids[1]] = OBJ_STAR

    galaxy = obj_type == OBJ_GALAXY
    star = obj_type == OBJ_STAR

    # -- photometry ------------------------------------------------------------------
    def per_type(gal_mu, gal_sd, star_mu, star_sd, other_mu, other_sd):
        v = rng.normal(other_mu, other_sd, n)
        v[galaxy] = rng.normal(gal_mu, gal_sd, int(galaxy.sum()))
        v[star] = rng.normal(star_mu, star_sd, int(star.sum()))
        return v

    r_mag = per_type(19.8, 1.6, 19.2, 1.8, 21.5, 1.6)
    ug = per_type(1.4, 0.5, 1.6, 0.9, 1.5, 1.0)
    gr = per_type(0.8, 0.35, 1.1, 0.6, 0.7, 0.8)
    ri = per_type(0.4, 0.25, 0.45, 0.35, 0.3, 0.5)
    iz = per_type(0.25, 0.28, 0.2, 0.3, 0.2, 0.4)

    model = np.empty((n, 5))
    model[:, 2] = r_mag
    model[:, 1] = r_mag + gr
    model[:, 0] = model[:, 1] + ug
    model[:, 3] = r_mag - ri
    model[:, 4] = model[:, 3] - iz
    if n_bright:
        lo = n_cluster
        r0 = rng.uniform(9.5, 12.1, n_bright)
        model[lo:lo + n_bright, 0] = r0 + 1.5
        model[lo:lo + n_bright, 1] = r0 + 0.7
        model[lo:lo + n_bright, 2] = r0
        model[lo:lo + n_bright, 3] = r0 - 1.2
        model[lo:lo + n_bright, 4] = r0 - 3.3

    psf = model + rng.normal(0.08, 0.25, (n, 5))
    petro = model + rng.normal(0.10, 0.30, (n, 5))
    ebv = np.abs(rng.normal(0.04, 0.025, n))
    reddening = ebv[:, None] * REDDEN_COEF[None, :]
    petro_r50 = rng.lognormal(np.log(2.0), 0.5, n)
    petro_rad = rng.lognormal(np.log(3.0), 0.8, (n, 5))
    iso_a = rng.uniform(5, 80, (n, 5))
    stokes_q = rng.normal(0, 0.35, (n, 5))
    stokes_u = rng.normal(0, 0.35, (n, 5))
    rho = rng.normal(2.5, 1.2, n)
    l_exp = rng.uniform(0.001, 1.0, n)
    l_dev = l_exp * rng.uniform(0.5, 1.6, n)

    rowc = rng.uniform(0, 1489, n)
    colc = rng.uniform(0, 2048, n)
    mover = rng.uniform(0, 1, n) < 0.05
    rowv = rng.normal(0, 1.2, n)
    colv = rng.normal(0, 1.2, n)
    rowv[mover] = rng.normal(0, 12, int(mover.sum()))
    colv[mover] = rng.normal(0, 12, int(mover.sum()))
    rowv_err = rng.uniform(1.5, 3.0, n)
    colv_err = rng.uniform(1.5, 3.0, n)

    # -- flags and status ---------------------------------------------------------
    obj_flags = np.zeros(n, dtype=np.int64)
    for name, rate in FLAG_RATES.items():
        obj_flags |= np.where(rng.uniform(0, 1, n) < rate, F[name], 0)
    obj_flags |= np.where(mover, F["MOVED"], 0)
    obj_flags = np.where(parent_of >= 0, obj_flags | F["CHILD"], obj_flags)
    obj_flags = np.where(n_child > 0, obj_flags | F["BLENDED"], obj_flags)

    primary = rng.uniform(0, 1, n) < 0.7
    status = np.zeros(n, dtype=np.int64)
    status |= np.where(rng.uniform(0, 1, n) < 0.95, S["SET"], 0)
    status |= np.where(rng.uniform(0, 1, n) < 0.8, S["GOOD"], 0)
    status |= np.where(rng.uniform(0, 1, n) < 0.9, S["OK_RUN"], 0)
    status |= np.where(rng.uniform(0, 1, n) < 0.5, S["RESOLVED"], 0)
    status |= np.where(rng.uniform(0, 1, n) < 0.05, S["DUPLICATE"], 0)
    status |= np.where(primary, S["PRIMARY"], S["SECONDARY"])

    # -- assemble photoobj ----------------------------------------------------------
    obj_id = 1000000 + np.arange(n, dtype=np.int64)
    rad = np.radians
    cx = np.cos(rad(dec)) * np.cos(rad(ra))
    cy = np.cos(rad(dec)) * np.sin(rad(ra))
    cz = np.sin(rad(dec))

    cols: dict[str, np.ndarray] = {
        "objID": obj_id,
        "objType": obj_type,
        "objFlags": obj_flags,
        "status": status,
        "ra": ra, "dec": dec, "cx": cx, "cy": cy, "cz": cz,
        "object": obj_short,
        "nChild": n_child,
        "l": ra - 90.0, "b": dec * 2.0,
    }

    def put_array(name, arr):
        for k in range(arr.shape[1]):
            cols[f"{name}_{k}"] = arr[:, k]

    put_array("modelMag", model)
    put_array("psfMag", psf)
    put_array("psfMagErr", np.abs(rng.normal(0.05, 0.05, (n, 5))) + 0.01)
    put_array("petroMag", petro)
    put_array("petroRad", petro_rad)
    put_array("reddening", reddening)
    put_array("isoA", iso_a)
    put_array("stokesQ", stokes_q)
    put_array("stokesU", stokes_u)
    for name, val in (("rowc", rowc), ("colc", colc), ("rowv", rowv), ("colv", colv),
                      ("rowvErr", rowv_err), ("colvErr", colv_err), ("rho", rho),
                      ("petroR50_r", petro_r50), ("lDev_r", l_dev), ("lExp_r", l_exp)):
        cols[name] = val

    put_array("modelMagErr", np.abs(rng.normal(0.05, 0.05, (n, 5))) + 0.01)
    put_array("petroMagErr", np.abs(rng.normal(0.08, 0.06, (n, 5))) + 0.01)
    put_array("petroRadErr", np.abs(rng.normal(0.3, 0.2, (n, 5))) + 0.01)
    put_array("petroR50", petro_r50[:, None] * rng.uniform(0.9, 1.1, (n, 5)))
    put_array("petroR50Err", np.abs(rng.normal(0.2, 0.1, (n, 5))) + 0.01)
    put_array("petroR90", petro_r50[:, None] * 2.2 * rng.uniform(0.9, 1.1, (n, 5)))
    put_array("petroR90Err", np.abs(rng.normal(0.3, 0.15, (n, 5))) + 0.01)
    put_array("fiberMag", model + rng.normal(0.6, 0.2, (n, 5)))
    put_array("fiberMagErr", np.abs(rng.normal(0.05, 0.04, (n, 5))) + 0.01)
    put_array("expMag", model + rng.normal(0.05, 0.2, (n, 5)))
    put_array("expMagErr", np.abs(rng.normal(0.05, 0.04, (n, 5))) + 0.01)
    put_array("deVMag", model + rng.normal(0.03, 0.2, (n, 5)))
    put_array("deVMagErr", np.abs(rng.normal(0.05, 0.04, (n, 5))) + 0.01)
    put_array("expRad", rng.lognormal(np.log(2.2), 0.6, (n, 5)))
    put_array("expRadErr", np.abs(rng.normal(0.2, 0.1, (n, 5))) + 0.01)
    put_array("expAB", rng.uniform(0.2, 1.0, (n, 5)))
    put_array("expABErr", np.abs(rng.normal(0.05, 0.03, (n, 5))) + 0.005)
    put_array("expPhi", rng.uniform(0, 180, (n, 5)))
    put_array("expPhiErr", np.abs(rng.normal(5, 3, (n, 5))) + 0.1)
    put_array("deVRad", rng.lognormal(np.log(1.8), 0.6, (n, 5)))
    put_array("deVRadErr", np.abs(rng.normal(0.2, 0.1, (n, 5))) + 0.01)
    put_array("deVAB", rng.uniform(0.2, 1.0, (n, 5)))
    put_array("deVABErr", np.abs(rng.normal(0.05, 0.03, (n, 5))) + 0.005)
    put_array("deVPhi", rng.uniform(0, 180, (n, 5)))
    put_array("deVPhiErr", np.abs(rng.normal(5, 3, (n, 5))) + 0.1)
    put_array("fracDeV", rng.uniform(0, 1, (n, 5)))
    put_array("lnLStar", -np.abs(rng.normal(2, 2, (n, 5))))
    put_array("lnLExp", -np.abs(rng.normal(1.5, 1.5, (n, 5))))
    put_array("lnLDeV", -np.abs(rng.normal(1.5, 1.5, (n, 5))))
    put_array("isoAErr", np.abs(rng.normal(1, 0.5, (n, 5))) + 0.05)
    put_array("isoB", iso_a * rng.uniform(0.3, 1.0, (n, 5)))
    put_array("isoBErr", np.abs(rng.normal(1, 0.5, (n, 5))) + 0.05)
    put_array("isoPhi", rng.uniform(0, 180, (n, 5)))
    put_array("isoPhiErr", np.abs(rng.normal(5, 3, (n, 5))) + 0.1)
    put_array("isoRowc", rowc[:, None] + rng.normal(0, 1, (n, 5)))
    put_array("isoColc", colc[:, None] + rng.normal(0, 1, (n, 5)))
    put_array("stokesQErr", np.abs(rng.normal(0.03, 0.02, (n, 5))) + 0.005)
    put_array("stokesUErr", np.abs(rng.normal(0.03, 0.02, (n, 5))) + 0.005)
    put_array("texture", rng.uniform(0, 1, (n, 5)))
    put_array("starLike", rng.uniform(0, 1, (n, 5)))
    put_array("skyFlux", np.abs(rng.normal(21, 0.6, (n, 5))))
    put_array("skyFluxErr", np.abs(rng.normal(0.1, 0.05, (n, 5))) + 0.01)
    put_array("col", model + rng.normal(0, 0.2, (n, 5)))
    put_array("colErr", np.abs(rng.normal(0.05, 0.03, (n, 5))) + 0.005)
    put_array("row", model + rng.normal(0, 0.2, (n, 5)))
    put_array("rowErr", np.abs(rng.normal(0.05, 0.03, (n, 5))) + 0.005)
    put_array("aperFlux7", model - rng.uniform(0.0, 0.8, (n, 5)))
    put_array("aperFlux7Err", np.abs(rng.normal(0.05, 0.03, (n, 5))) + 0.005)
    for band in "ugriz":
        put_array(f"profMean_{band}", rng.normal(18, 3, (n, 32)))
    for band in "ugriz":
        put_array(f"profErr_{band}", np.abs(rng.normal(0.3, 0.2, (n, 32))) + 0.01)
    cols["rowcErr"] = np.abs(rng.normal(0.1, 0.05, n)) + 0.005
    cols["colcErr"] = np.abs(rng.normal(0.1, 0.05, n)) + 0.005

    parent_id = np.where(parent_of >= 0, 1000000 + parent_of, -1)
    cols["parentID"] = parent_id
    cols["fieldID"] = field_id[field_idx]

    # -- spectroscopy ----------------------------------------------------------------
    n_spec = min(n, max(min(10, n), n // 50))
    weights = np.where(galaxy, 3.0, np.where(star, 1.0, 0.2))
    weights /= weights.sum()
    spec_obj_idx = rng.choice(n, size=n_spec, replace=False, p=weights)
    spec_obj_idx.sort()
    spec_id = 300000 + np.arange(n_spec, dtype=np.int64)
    spec_class = rng.choice([0, 1, 2, 3, 4], n_spec, p=[0.10, 0.15, 0.55, 0.15, 0.05])
    spec_z = np.empty(n_spec)
    spec_z[spec_class == 0] = rng.uniform(0, 1, int((spec_class == 0).sum()))
    spec_z[spec_class == 1] = np.abs(rng.normal(0, 0.001, int((spec_class == 1).sum())))
    spec_z[spec_class == 2] = rng.uniform(0.02, 0.45, int((spec_class == 2).sum()))
    spec_z[spec_class == 3] = rng.uniform(1.5, 3.5, int((spec_class == 3).sum()))
    spec_z[spec_class == 4] = rng.uniform(3.5, 5.2, int((spec_class == 4).sum()))
    spec_zconf = np.clip(1.0 - np.abs(rng.normal(0, 0.08, n_spec)), 0.3, 1.0)

    # -- spectral lines ----------------------------------------------------------------
    line_ids = np.array([6565, 4861, 5007, 3727, 6583, 2800, 1216, 4340, 6717])
    line_p = np.array([0.30, 0.15, 0.12, 0.12, 0.08, 0.08, 0.07, 0.05, 0.03])
    lines_per = rng.integers(3, 9, n_spec)
    n_lines = int(lines_per.sum())
    line_spec = np.repeat(np.arange(n_spec), lines_per)
    line_id = rng.choice(line_ids, n_lines, p=line_p)
    rest_wave = line_id + rng.normal(0, 0.25, n_lines)
    wave = rest_wave * (1.0 + spec_z[line_spec])
    ew = rng.lognormal(np.log(12.0), 0.9, n_lines)
    is_found = (rng.uniform(0, 1, n_lines) < 0.6).astype(np.int64)

    # -- cross-correlation redshifts -----------------------------------------------------
    xc_per = rng.integers(2, 6, n_spec)
    n_xc = int(xc_per.sum())
    xc_spec = np.repeat(np.arange(n_spec), xc_per)
    xc_temp = rng.integers(0, 12, n_xc)
    xc_z = spec_z[xc_spec] + rng.normal(0, 0.01, n_xc)
    xc_r = rng.uniform(0, 1, n_xc)

    # -- write -----------------------------------------------------------------------
    schema = Schema.default()
    _write_csv(out / "photoobj.csv", _ordered(schema, "PhotoObj", cols,
                                               link_cols=["parentID", "fieldID"]),
               nullable={"parentID"})
    _write_csv(out / "field.csv", {
        "fieldID": field_id, "run": field_run, "rerun": field_rerun,
        "camCol": field_camcol, "field": field_num, "pspStatus": field_psp,
        "nObjects": counts, "mjd": field_mjd, "ra": field_ra, "dec": field_dec,
        **{f"psfWidth_{k}": field_psf[:, k] for k in range(5)},
        **{f"skyLevel_{k}": field_sky[:, k] for k in range(5)},
        **{f"airmass_{k}": field_air[:, k] for k in range(5)},
    })
    _write_csv(out / "specobj.csv", {
        "spec_ID": spec_id, "specClass": spec_class, "z": spec_z, "zConf": spec_zconf,
        "velDisp": np.abs(rng.normal(150, 60, n_spec)),
        "ra": ra[spec_obj_idx], "dec": dec[spec_obj_idx],
        "objID": obj_id[spec_obj_idx],
    })
    _write_csv(out / "specline.csv", {
        "specLineID": 500000 + np.arange(n_lines, dtype=np.int64),
        "lineID": line_id, "wave": wave, "restWave": rest_wave,
        "ew": ew, "ewErr": np.abs(rng.normal(1.5, 1.0, n_lines)) + 0.05,
        "height": np.abs(rng.normal(8, 5, n_lines)),
        "sigma": np.abs(rng.normal(2.5, 1.0, n_lines)) + 0.1,
        "isFound": is_found,
        "specObjID": spec_id[line_spec],
    })
    _write_csv(out / "xcredshift.csv", {
        "xcID": 700000 + np.arange(n_xc, dtype=np.int64),
        "tempNo": xc_temp,
        "peakNo": np.arange(n_xc, dtype=np.int64) % 5,
        "z": xc_z, "r": xc_r,
        "specObjID": spec_id[xc_spec],
    })
    return {
        "photoobj": n, "field": n_fields, "specobj": n_spec,
        "specline": n_lines, "xcredshift": n_xc,
    }


def _ordered(schema: Schema, class_name: str, cols: dict, link_cols: list[str]) -> dict:
    """Columns in canonical schema order (arrays expanded), then link columns."""
    out: dict[str, np.ndarray] = {}
    cls = schema.classes[class_name]
    for m in schema.stored_members(cls):
        if m.kind == "array":
            for k in range(m.array_length):
                out[f"{m.name}_{k}"] = cols[f"{m.name}_{k}"]
        else:
            out[m.name] = cols[m.name]
    for name in link_cols:
        out[name] = cols[name]
    return out


_INT_COLS = {"objID", "objType", "objFlags", "status", "object", "nChild", "parentID",
             "fieldID", "run", "rerun", "camCol", "field", "pspStatus", "nObjects",
             "spec_ID", "specClass", "specLineID", "lineID", "isFound", "specObjID",
             "xcID", "tempNo", "peakNo"}
_F64_COLS = {"ra", "dec", "cx", "cy", "cz", "l", "b", "mjd"}


def _write_csv(path: Path, cols: dict[str, np.ndarray], nullable: set[str] = frozenset()):
    series = []
    for name, arr in cols.items():
        if name in _INT_COLS:
            s = pl.Series(name, arr.astype(np.int64))
            if name in nullable:
                s = s.set(s == -1, None)
        elif name in _F64_COLS:
            s = pl.Series(name, arr.astype(np.float64))
        else:
            s = pl.Series(name, arr.astype(np.float32))
        series.append(s)
    pl.DataFrame(series).write_csv(path, float_precision=None)
