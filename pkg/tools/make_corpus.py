#!/usr/bin/env python3
"""Regenerate src/skyql/data/corpus.json (the benchmark query corpus).

Each entry stores the SQL twin (provenance), the canonical SXQL text, and
annotations describing every restoration applied to the SXQL as printed in its
source (typesetting there lost ||/| tokens and mangled some identifiers).
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "skyql" / "data" / "corpus.json"

Q = []


def q(qid, desc, sql, sxql, notes=()):
    Q.append({
        "id": qid,
        "description": desc,
        "sql": " ".join(sql.split()),
        "sxql": sxql.strip(),
        "annotations": list(notes),
    })


q("Q1", "Galaxies without saturated pixels within 1 arcmin of a point",
  """SELECT G.objID, G.ra, G.dec, GN.distance FROM Galaxy as G JOIN
     dbo.fGetNearbyObjEq(200,-0.5,1) as GN ON G.objID = GN.objID
     WHERE (G.flags & dbo.fPhotoFlags('saturated')) = 0 ORDER BY distance""",
  """
SELECT objID, RA(), DEC() FROM Galaxy
WHERE PROX(J2000, 200, -0.5, 1.0) && (objFlags & OBJECT_SATUR) = 0
""")

q("Q2", "Galaxies with blue surface brightness in a band of sky",
  """SELECT objID FROM Galaxy WHERE ra BETWEEN 160 AND 180 AND dec < 0
     AND (g+rho) BETWEEN 23 AND 25""",
  """
SELECT objID FROM Galaxy
WHERE RA() BETWEEN 160 AND 180 && DEC() < 0.0 && (g + rho) BETWEEN 23 AND 25
""")

q("Q3", "Galaxies brighter than magnitude 22 with local extinction above 0.175",
  """SELECT objID FROM Galaxy WHERE r + reddening_r < 22 AND reddening_r > 0.175""",
  """
SELECT objID FROM Galaxy WHERE r < 22 AND reddening[2] > 0.175
""")

q("Q4", "Galaxies with red isophotal surface brightness and high ellipticity",
  """SELECT ObjID FROM Galaxy WHERE modelMag_r + rho < 24 AND isoA_r BETWEEN 30 AND 60
     AND (power(q_r,2) + power(u_r,2)) > 0.25""",
  """
SELECT objID FROM PhotoPrimary
WHERE objType == OBJECT_GALAXY && modelMag[2] + rho < 24
  AND isoA[2] BETWEEN 30 AND 60
  AND (q[2]*q[2]) + (u[2]*u[2]) > 0.25
""")

q("Q5", "Galaxies with a deVaucouleurs profile and elliptical colors",
  """SELECT ObjID FROM Galaxy as G WHERE lDev_r > 1.1 * lExp_r AND lExp_r > 0
     AND (G.flags & @binned) > 0 AND (G.flags & (@blended + @noDeBlend + @child)) != @blended
     AND (G.flags & (@edge + @saturated)) = 0 AND G.petroMag_i > 17.5
     AND (G.petroMag_r > 15.5 OR G.petroR50_r > 2)
     AND (G.petroMag_r > 0 AND G.g > 0 AND G.r > 0 AND G.i > 0)
     AND (((G.petroMag_r - G.reddening_r) < 19.2
       AND (G.petroMag_r - G.reddening_r < (13.1 + (7/3)*(G.g - G.r) + 4*(G.r - G.i) - 4*0.18))
       AND ((G.r - G.i - (G.g - G.r)/4 - 0.18) < 0.2)
       AND ((G.r - G.i - (G.g - G.r)/4 - 0.18) > -0.2))
      OR ((G.petroMag_r - G.reddening_r < 19.5)
       AND ((G.r - G.i - (G.g - G.r)/4 - 0.18) > (0.45 - 4*(G.g - G.r)))
       AND ((G.g - G.r) > (1.35 + 0.25 * (G.r - G.i)))))""",
  """
SELECT objID FROM Galaxy WHERE lDev_r > 1.1 * lExp_r && lExp_r > 0
// Color cut for an elipical galaxy courtesy
// of James Annis of Fermilab
&& (objFlags & (OBJECT_BINNED1 | OBJECT_BINNED2 | OBJECT_BINNED4)) > 0
&& (objFlags & (OBJECT_BLENDED | OBJECT_NODEBLEND | OBJECT_CHILD)) != OBJECT_BLENDED
&& (objFlags & (OBJECT_EDGE | OBJECT_SATUR)) == 0
&& petroMag[3] > 17.5
&& (petroMag[2] > 15.5 || petroR50_r > 2)
&& (petroMag[2] > 0 && g > 0 && r > 0 && i > 0)
&& (((petroMag[2] - reddening[2]) < 19.2
  && (petroMag[2] - reddening[2] < (13.1 + (7/3)*(g - reddening[1] - r + reddening[2])
      + 4*(r - reddening[2] - i + reddening[3]) - 4*0.18))
  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18) < 0.2)
  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18) > -0.2))
 || ((petroMag[2] - reddening[2] < 19.5)
  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18)
      > (0.45 - 4*(g - reddening[1] - r + reddening[2])))
  && ((g - reddening[1] - r + reddening[2]) > (1.35 + 0.25*(r - reddening[2] - i + reddening[3])))))
""",
  ["restored | between flag constants in the three masked lists (SQL twin sums the flag values)",
   "restored || in (petroMag[2] > 15.5 || petroR50_r > 2) (SQL twin: OR)",
   "restored || between the two color-cut disjuncts and rebalanced the parens against the SQL twin"])

q("Q8", "Galaxies blended with a star, deblended magnitudes",
  """SELECT G.ObjID, G.u, G.g, G.r, G.i, G.z FROM Galaxy G, Star S
     WHERE G.parentID > 0 AND G.parentID = S.parentID""",
  """
SELECT objID, u, g, r, i, z FROM Galaxy
WHERE EXIST(parent) && parent.child{?}.objType == OBJECT_STAR
""")

q("Q9", "Quasars with wide lines and redshift between 2.5 and 2.7",
  """SELECT specObjID, z, zConf, SpecClass FROM SpecObj
     WHERE (SpecClass = @qso OR SpecClass = @hiZ_qso) AND z BETWEEN 2.5 AND 2.7 AND zConf > 0.90""",
  """
SELECT spec_ID, z, zConf, specClass FROM SpecObj
WHERE (specClass == SPEC_QSO || specClass == SPEC_HIZ_QSO)
  AND z BETWEEN 2.5 AND 2.7 AND zConf > 0.90
""",
  ["restored || between the two specClass terms (SQL twin: OR)"])

q("Q10", "Galaxies with an H-alpha equivalent width above 40 A",
  """SELECT G.ObjID FROM Galaxy as G, SpecObj as S, SpecLine as L
     WHERE G.ObjID = S.ObjID AND S.SpecObjID = L.SpecObjID AND L.LineID = 6565 AND L.ew > 40""",
  """
SELECT objID FROM (SELECT obj FROM (SELECT spec FROM SpecLine
WHERE lineID == 6565 && ew > 40)) WHERE objType == OBJECT_GALAXY
""",
  ["normalized name.lineID to the direct SpecLine member lineID (SQL twin uses the column; the schema has no line-name class)"])

q("Q11", "Elliptical galaxies with an anomalous emission line",
  """SELECT DISTINCT G.ObjID FROM Galaxy as G, SpecObj as S, SpecLine as L, XCRedshift as XC
     WHERE G.ObjID = S.ObjID AND S.SpecObjID = L.SpecObjID AND S.SpecObjID = XC.SpecObjID
     AND XC.tempNo = 8 AND L.lineID = 0 AND L.ew > 10 AND S.SpecObjID NOT IN
     (SELECT S.SpecObjID FROM SpecLine as L1 WHERE S.SpecObjID = L1.SpecObjID
      AND abs(L.wave - L1.wave) < .01 AND L1.LineID != 0)""",
  """
SELECT objID FROM (SELECT obj FROM (SELECT spec FROM
(SELECT found FROM SpecObj WHERE xcorrz{?}.tempNo == 8)
WHERE ew > 10 && ((restWave - spec.measured{?}.restWave) > -0.01)
&& ((restWave - spec.measured{?}.restWave) < 0.01)))
WHERE objType == OBJECT_GALAXY
""")

q("Q15", "Moving objects consistent with an asteroid",
  """SELECT objID, sqrt(power(rowv,2) + power(colv,2)) FROM PhotoObj
     WHERE (power(rowv,2) + power(colv,2)) > 50 AND rowv >= 0 AND colv >= 0""",
  """
SELECT objID, sqrt(rowv*rowv + colv*colv) FROM PhotoObj
WHERE (rowv*rowv + colv*colv) > 50 AND rowv >= 0 AND colv >= 0
""")

q("Q16", "Cataclysmic variable candidates by color",
  """SELECT run, camCol, rerun, field, objID, u, g, r, i, z, ra, dec FROM PhotoPrimary
     WHERE u - g < 0.4 AND g - r < 0.7 AND r - i > 0.4 AND i - z > 0.4""",
  """
SELECT RUN(), CAMCOL(), RERUN(), FIELDID(), OBJID(), u, g, r, i, z, RA(), DEC() FROM Primary
WHERE u - g < 0.4 && g - r < 0.7 && r - i > 0.4 && i - z > 0.4
""",
  ["restored the u lost next to the doubled comma in the printed select list (SQL twin selects u,g,r,i,z)"])

q("Q17", "Objects with velocities and errors in a given range (non-indexed)",
  """SELECT run, camCol, field, objID, rowC, colC, rowV, colV, rowVErr, colVErr, flags,
     psfMag_u, psfMag_g, psfMag_r, psfMag_i, psfMag_z,
     psfMagErr_u, psfMagErr_g, psfMagErr_r, psfMagErr_i, psfMagErr_z FROM PhotoPrimary
     WHERE ((rowv*rowv)/(rowvErr*rowvErr) + (colv*colv)/(colvErr*colvErr) > 4)""",
  """
SELECT RUN(), CAMCOL(), RERUN(), FIELDID(), OBJID(), rowc, colc, rowv, colv,
rowvErr, colvErr, objFlags, psfMag, psfMagErr FROM PhotoPrimary
WHERE ((rowv * rowv) / (rowvErr * rowvErr) + (colv * colv) / (colvErr * colvErr) > 4)
""",
  ["normalized member casing rowC/colC/rowV/colV/rowVErr/colVErr to the schema spellings (the print mixes rowV and rowv in one listing)"])

q("Q18", "Objects within a coordinate cut on great-circle half planes",
  """SELECT colc_g, colc_r FROM PhotoObj
     WHERE (-0.642788 * cx + 0.766044 * cy >= 0) AND (-0.984808 * cx - 0.173648 * cy < 0)""",
  """
SELECT obj.col[1], obj.col[2] FROM PhotoTag
WHERE (-0.642788 * cx + 0.766044 * cy >= 0) AND (-0.984808 * cx - 0.173648 * cy < 0)
""")

q("Q19", "Objects and fields by their non-indexed short ids",
  """SELECT objID, field, ra, dec FROM PhotoObj WHERE obj = 14 AND field = 11""",
  """
SELECT objID, object, field.field, ra, dec FROM (SELECT obj FROM field WHERE field == 11)
WHERE object == 14
""")

q("Q20", "Galaxies with centers appreciably bluer than their outer parts",
  """SELECT colc_u, colc_g, objID FROM Galaxy WHERE (flags & @flags) = 0 AND petroRad_r < 18
     AND ((colc_u - colc_g) - (psfMag_u - psfMag_g)) < -0.4""",
  """
SELECT obj.col[0], obj.col[1], objID FROM Galaxy
WHERE (objFlags & (OBJECT_SATUR | OBJECT_BRIGHT | OBJECT_EDGE)) == 0
&& petroRad[2] < 18
&& ((obj.col[0] - obj.col[1]) - (psfMag[0] - psfMag[1])) < -0.4
""",
  ["the printed select list duplicates itself (col[0], col[1], objID obj.col[0], obj.col[1], objID); kept the obj.col form the WHERE clause uses, matching the SQL twin's three columns",
   "restored | between flag constants (SQL twin sums the flag values)"])

q("Q21", "PSF colors of bright stars in fields with pspStatus 2",
  """SELECT s.psfMag_g, s.run, s.camCol, s.rerun, s.field FROM Star s, Field f
     WHERE s.fieldid = f.fieldid AND s.psfMag_g < 20 AND f.pspStatus = 2""",
  """
SELECT psfMag[1], RUN(), CAMCOL(), RERUN(), FIELDID() FROM (SELECT obj FROM Field
WHERE pspStatus == 2) WHERE objType == OBJECT_STAR
&& ((status & AR_OBJECT_STATUS_PRIMARY) > 0) && psfMag[1] < 20
""")

q("Q22", "Cluster finding sample",
  """SELECT camCol, run, rerun, field, objID, ra, dec FROM Galaxy
     WHERE (flags & @binned) > 0 AND (flags & @deblendedChild) != @blended AND petroMag_i < 23""",
  """
SELECT CAMCOL(), RUN(), RERUN(), FIELDID(), OBJID(), RA(), DEC(), petroMag[3], objFlags FROM Galaxy
WHERE ((objFlags & (OBJECT_BINNED1 | OBJECT_BINNED2 | OBJECT_BINNED4)) > 0)
&& ((objFlags & (OBJECT_BLENDED | OBJECT_NODEBLEND | OBJECT_CHILD)) != OBJECT_BLENDED)
&& petroMag[3] < 23
""",
  ["restored | between flag constants in the two masked lists (SQL twin sums the flag values)"])

q("Q23", "Diameter-limited sample of galaxies",
  """SELECT run, camCol, rerun, field, objID, ra, dec FROM Galaxy
     WHERE (flags & @binned) > 0 AND (flags & @deblendedChild) != @blended
     AND (((flags & @noPetro = 0) AND petroRad_i > 15)
       OR ((flags & @noPetro > 0) AND petroRad_i > 7.5)
       OR ((flags & @tooLarge > 0) AND petroRad_i > 2.5)
       OR ((flags & @saturated = 0) AND petroRad_i > 17.5))""",
  """
SELECT RUN(), CAMCOL(), RERUN(), FIELDID(), OBJID(), RA(), DEC() FROM Galaxy
WHERE ((objFlags & (OBJECT_BINNED1 | OBJECT_BINNED2 | OBJECT_BINNED4)) > 0
&& (objFlags & (OBJECT_BLENDED | OBJECT_NODEBLEND | OBJECT_CHILD)) != OBJECT_BLENDED
&& (((objFlags & OBJECT_NOPETRO == 0) && petroRad[3] > 15)
 || ((objFlags & OBJECT_NOPETRO > 0) && petroRad[3] > 7.5)
 || ((objFlags & OBJECT_TOO_LARGE > 0) && petroRad[3] > 2.5)
 || ((objFlags & OBJECT_SATUR == 0) && petroRad[3] > 17.5)))
""",
  ["restored | between flag constants (SQL twin sums the flag values)",
   "restored || between the four adjacent parenthesized petroRad terms (SQL twin: OR) and rebalanced parens"])

q("Q24", "Extremely red galaxies",
  """SELECT g.run, g.camCol, g.rerun, g.field, g.objID, g.ra, g.dec FROM Field f, Galaxy g
     WHERE g.fieldid = f.fieldid AND (g.flags & @binned) > 0
     AND (g.flags & @deblendedChild) != @blended AND (g.flags & @crIntrp) = 0
     AND f.psfWidth_r < 1.5 AND (g.i - g.z > 1.0)""",
  """
SELECT RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID(), RA(), DEC() FROM Galaxy
WHERE ((objFlags & (OBJECT_BINNED1 | OBJECT_BINNED2 | OBJECT_BINNED4)) > 0)
&& ((objFlags & (OBJECT_BLENDED | OBJECT_NODEBLEND | OBJECT_CHILD)) != OBJECT_BLENDED)
&& ((objFlags & (OBJECT_CR | OBJECT_INTERP)) == 0)
&& field.psfWidth[2] < 1.5
&& (i - z - (reddening[3] - reddening[4]) > 1.0)
""",
  ["restored | between flag constants (SQL twin sums the flag values)",
   "normalized capital I to the member i and rebalanced the trailing paren"])

q("Q25", "Bright red galaxy sample",
  """SELECT run, camCol, rerun, field, objID, ra, dec FROM Galaxy
     WHERE ((flags & @binned) > 0 AND (flags & @deblendedChild) != @blended
     AND (flags & @edgedSaturated) = 0 AND petroMag_i > 17.5
     AND (petroMag_r > 15.5 OR petroR50_r > 2)
     AND (petroMag_r > 0 AND g > 0 AND r > 0 AND i > 0)
     AND (((petroMag_r - reddening_r) < 19.2
       AND (petroMag_r - reddening_r < (13.1 + (7/3)*(g-r) + 4*(r-i) - 4*0.18))
       AND ((r - i - (g - r)/4 - 0.18) < 0.2) AND ((r - i - (g - r)/4 - 0.18) > -0.2)
       AND ((petroMag_r - reddening_r + 2.5 * LOG10(2 * 3.1415 * petroR50_r * petroR50_r)) < 24.2))
      OR ((petroMag_r - reddening_r < 19.5)
       AND ((r - i - (g - r)/4 - 0.18) > (0.45 - 4*(g - r)))
       AND ((g - r) > (1.35 + 0.25 * (r - i)))
       AND ((petroMag_r - reddening_r + 2.5 * LOG10(2 * 3.1415 * petroR50_r * petroR50_r)) < 23.3))))""",
  """
SELECT RUN(), CAMCOL(), RERUN(), FIELDID(), OBJID(), RA(), DEC() FROM Galaxy
WHERE ((objFlags & (OBJECT_BINNED1 | OBJECT_BINNED2 | OBJECT_BINNED4)) > 0)
&& ((objFlags & (OBJECT_BLENDED | OBJECT_NODEBLEND | OBJECT_CHILD)) != OBJECT_BLENDED)
&& ((objFlags & (OBJECT_EDGE | OBJECT_SATUR)) == 0)
&& petroMag[3] > 17.65
&& (petroMag[2] > 15.5 || petroR50_r > 2)
&& (petroMag[2] > 0 && g > 0 && r > 0 && i > 0)
&& (((petroMag[2] - reddening[2] < 19.2)
  && (petroMag[2] - reddening[2] < 13.1 + (7/3)*(g - reddening[1] - r + reddening[2])
      + 4*(r - reddening[2] - i + reddening[3]) - 4*0.18)
  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18) < 0.2)
  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18) > -0.2)
  && ((petroMag[2] - reddening[2]) + 2.5*LOG(2*3.1415*petroR50_r*petroR50_r) < 24.2))
 || ((petroMag[2] - reddening[2] < 19.5)
  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18)
      > 0.45 - 4*(g - reddening[1] - r + reddening[2]))
  && (g - reddening[1] - r + reddening[2] > 1.35 + 0.25*(r - reddening[2] - i + reddening[3]))
  && ((petroMag[2] - reddening[2]) + 2.5*LOG(2*3.1415*petroR50_r*petroR50_r) < 23.3)))
""",
  ["restored | between flag constants and || between the two disjuncts; rebalanced parens against the SQL twin",
   "kept the printed 17.65 threshold although the SQL twin says 17.5",
   "kept LOG as printed; SXQL LOG is base 10 (the SQL twin uses LOG10 and the appendix calls the versions equivalent)"])

q("Q26", "Low redshift QSO candidates",
  """SELECT g, run, rerun, camcol, field, objID FROM Galaxy
     WHERE (modelMag_g <= 22) AND (modelMag_u - modelMag_g >= -0.27) AND (modelMag_u - modelMag_g < 0.71)
     AND (modelMag_g - modelMag_r >= -0.24) AND (modelMag_g - modelMag_r < 0.35)
     AND (modelMag_r - modelMag_i >= -0.27) AND (modelMag_r - modelMag_i < 0.57)
     AND (modelMag_i - modelMag_z >= -0.35) AND (modelMag_i - modelMag_z < 0.70)""",
  """
SELECT g, RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID() FROM Galaxy
WHERE ((g <= 22) && (u - g >= -0.27) && (u - g < 0.71)
&& (g - r >= -0.24) && (g - r < 0.35) && (r - i >= -0.27) && (r - i < 0.57)
&& (i - z >= -0.35) && (i - z < 0.70))
""")

q("Q27", "Moving-object velocity errors against the moving flags",
  """SELECT run, rerun, camcol, field, objID, ra, dec, rowv, colv, rowvErr, colvErr, i,
     (flags & @moved) as MOVED, (flags & @badMove) as BAD_MOVING_FIT FROM Galaxy
     WHERE (flags & (@moved + @badMove)) > 0
     AND (rowv*rowv + colv*colv) >= (rowvErr*rowvErr + colvErr*colvErr)""",
  """
SELECT RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID(), RA(), DEC(),
obj.rowv, obj.colv, obj.rowvErr, obj.colvErr, i,
objFlags & OBJECT_MOVED, objFlags & OBJECT_BAD_MOVING_FIT FROM Galaxy
WHERE (((objFlags & (OBJECT_MOVED | OBJECT_BAD_MOVING_FIT)) > 0)
&& (((obj.rowv * obj.rowv) + (obj.colv * obj.colv))
    >= ((obj.rowvErr * obj.rowvErr) + (obj.colvErr * obj.colvErr))))
""",
  ["restored | between OBJECT_MOVED and OBJECT_BAD_MOVING_FIT (SQL twin sums the flag values)",
   "normalized the bare BAD_MOVING_FIT in the select list to OBJECT_BAD_MOVING_FIT"])

q("Q28", "Random 1 percent sample of object colors",
  """SELECT u, g, r, i, z FROM Galaxy WHERE (obj % 100) = 1""",
  """
SELECT u, g, r, i, z FROM Galaxy WHERE (obj.object - (obj.object/100) * 100) == 1
""")

q("Q29", "Quasar candidates among stars",
  """SELECT run, camCol, rerun, field, objID, u, g, r, i, z, ra, dec FROM Star
     WHERE (modelMag_u - modelMag_g > 2.0 OR u > 22.3) AND (modelMag_i < 19) AND (modelMag_i > 0)
     AND (modelMag_g - modelMag_r > 1.0)
     AND (modelMag_r - modelMag_i < (0.08 + 0.42*(modelMag_g - modelMag_r - 0.96))
          OR modelMag_g - modelMag_r > 2.26)
     AND (modelMag_i - modelMag_z < 0.25)""",
  """
SELECT RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID(), u, g, r, i, z, RA(), DEC() FROM Star
WHERE (u - g > 2.0 OR u > 22.3) AND (i < 19) AND (i > 0) AND (g - r > 1.0)
AND (r - i < (0.08 + 0.42 * (g - r - 0.96)) OR g - r > 2.26) AND (i - z < 0.25)
""")

q("Q30", "Objects and fields by non-indexed quantities",
  """SELECT g.run, g.rerun, g.camCol, f.field, p.objID, p.u, p.modelMagErr_u,
     p.petroMag_r - p.reddening_r, p.petroMagErr_r, p.status & 0x00002000, f.psfWidth_r
     FROM photoobj p, field f, segment g
     WHERE f.fieldid = p.fieldid AND f.segmentid = g.segmentid AND f.psfWidth_r > 2
     AND p.colc > 1300.0""",
  """
SELECT RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID(),
modelMag[0] - reddening[0], modelMagErr[0],
petroMag[2] - reddening[2], petroMagErr[2],
status & 0x00002000, field.psfWidth[2]
FROM (SELECT obj FROM Field WHERE psfWidth[2] > 2 && obj.colc > 1300.0)
""")

q("Q31", "Q30 with a much wider non-indexed constraint",
  """SELECT g.run, g.rerun, g.camCol, f.field, p.objID, p.ra, p.dec, p.Rowc, p.Colc,
     p.u, p.modelMagErr_u, p.g, p.modelMagErr_g, p.r, p.modelMagErr_r,
     p.petroMag_r - p.reddening_r, p.petroMagErr_r, p.i, p.modelMagErr_i, p.z,
     p.status & 0x00002000, f.psfWidth_r FROM photoobj p, field f, segment g
     WHERE f.fieldid = p.fieldid AND f.segmentid = g.segmentid AND p.colc > 400.0""",
  """
SELECT RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID(), RA(), DEC(), rowc, colc,
u - reddening[0], obj.modelMagErr[0], g - reddening[1], obj.modelMagErr[1],
r - reddening[2], obj.modelMagErr[2], petroMag[2] - reddening[2], obj.petroMagErr[2],
i - reddening[3], obj.modelMagErr[3], z - reddening[4],
status & 0x00002000, field.psfWidth[2]
FROM PhotoTag WHERE colc > 400.0
""",
  ["normalized member casing Rowc/Colc/rowC/colC to the schema spellings rowc/colc"])


def main():
    OUT.write_text(json.dumps({"queries": Q}, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {OUT} with {len(Q)} queries")


if __name__ == "__main__":
    main()
