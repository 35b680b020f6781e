// Example queries (generated from src/skyql/data/corpus.json by
// tools/make_frontend_examples.py; do not edit by hand).

export interface Example { id: string; description: string; sxql: string; }

export const EXAMPLES: Example[] = [
  { id: "Q1", description: "Galaxies without saturated pixels within 1 arcmin of a point", sxql: "SELECT objID, RA(), DEC() FROM Galaxy\nWHERE PROX(J2000, 200, -0.5, 1.0) && (objFlags & OBJECT_SATUR) = 0" },
  { id: "Q2", description: "Galaxies with blue surface brightness in a band of sky", sxql: "SELECT objID FROM Galaxy\nWHERE RA() BETWEEN 160 AND 180 && DEC() < 0.0 && (g + rho) BETWEEN 23 AND 25" },
  { id: "Q3", description: "Galaxies brighter than magnitude 22 with local extinction above 0.175", sxql: "SELECT objID FROM Galaxy WHERE r < 22 AND reddening[2] > 0.175" },
  { id: "Q4", description: "Galaxies with red isophotal surface brightness and high ellipticity", sxql: "SELECT objID FROM PhotoPrimary\nWHERE objType == OBJECT_GALAXY && modelMag[2] + rho < 24\n  AND isoA[2] BETWEEN 30 AND 60\n  AND (q[2]*q[2]) + (u[2]*u[2]) > 0.25" },
  { id: "Q5", description: "Galaxies with a deVaucouleurs profile and elliptical colors", sxql: "SELECT objID FROM Galaxy WHERE lDev_r > 1.1 * lExp_r && lExp_r > 0\n// Color cut for an elipical galaxy courtesy\n// of James Annis of Fermilab\n&& (objFlags & (OBJECT_BINNED1 | OBJECT_BINNED2 | OBJECT_BINNED4)) > 0\n&& (objFlags & (OBJECT_BLENDED | OBJECT_NODEBLEND | OBJECT_CHILD)) != OBJECT_BLENDED\n&& (objFlags & (OBJECT_EDGE | OBJECT_SATUR)) == 0\n&& petroMag[3] > 17.5\n&& (petroMag[2] > 15.5 || petroR50_r > 2)\n&& (petroMag[2] > 0 && g > 0 && r > 0 && i > 0)\n&& (((petroMag[2] - reddening[2]) < 19.2\n  && (petroMag[2] - reddening[2] < (13.1 + (7/3)*(g - reddening[1] - r + reddening[2])\n      + 4*(r - reddening[2] - i + reddening[3]) - 4*0.18))\n  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18) < 0.2)\n  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18) > -0.2))\n || ((petroMag[2] - reddening[2] < 19.5)\n  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18)\n      > (0.45 - 4*(g - reddening[1] - r + reddening[2])))\n  && ((g - reddening[1] - r + reddening[2]) > (1.35 + 0.25*(r - reddening[2] - i + reddening[3])))))" },
  { id: "Q8", description: "Galaxies blended with a star, deblended magnitudes", sxql: "SELECT objID, u, g, r, i, z FROM Galaxy\nWHERE EXIST(parent) && parent.child{?}.objType == OBJECT_STAR" },
  { id: "Q9", description: "Quasars with wide lines and redshift between 2.5 and 2.7", sxql: "SELECT spec_ID, z, zConf, specClass FROM SpecObj\nWHERE (specClass == SPEC_QSO || specClass == SPEC_HIZ_QSO)\n  AND z BETWEEN 2.5 AND 2.7 AND zConf > 0.90" },
  { id: "Q10", description: "Galaxies with an H-alpha equivalent width above 40 A", sxql: "SELECT objID FROM (SELECT obj FROM (SELECT spec FROM SpecLine\nWHERE lineID == 6565 && ew > 40)) WHERE objType == OBJECT_GALAXY" },
  { id: "Q11", description: "Elliptical galaxies with an anomalous emission line", sxql: "SELECT objID FROM (SELECT obj FROM (SELECT spec FROM\n(SELECT found FROM SpecObj WHERE xcorrz{?}.tempNo == 8)\nWHERE ew > 10 && ((restWave - spec.measured{?}.restWave) > -0.01)\n&& ((restWave - spec.measured{?}.restWave) < 0.01)))\nWHERE objType == OBJECT_GALAXY" },
  { id: "Q15", description: "Moving objects consistent with an asteroid", sxql: "SELECT objID, sqrt(rowv*rowv + colv*colv) FROM PhotoObj\nWHERE (rowv*rowv + colv*colv) > 50 AND rowv >= 0 AND colv >= 0" },
  { id: "Q16", description: "Cataclysmic variable candidates by color", sxql: "SELECT RUN(), CAMCOL(), RERUN(), FIELDID(), OBJID(), u, g, r, i, z, RA(), DEC() FROM Primary\nWHERE u - g < 0.4 && g - r < 0.7 && r - i > 0.4 && i - z > 0.4" },
  { id: "Q17", description: "Objects with velocities and errors in a given range (non-indexed)", sxql: "SELECT RUN(), CAMCOL(), RERUN(), FIELDID(), OBJID(), rowc, colc, rowv, colv,\nrowvErr, colvErr, objFlags, psfMag, psfMagErr FROM PhotoPrimary\nWHERE ((rowv * rowv) / (rowvErr * rowvErr) + (colv * colv) / (colvErr * colvErr) > 4)" },
  { id: "Q18", description: "Objects within a coordinate cut on great-circle half planes", sxql: "SELECT obj.col[1], obj.col[2] FROM PhotoTag\nWHERE (-0.642788 * cx + 0.766044 * cy >= 0) AND (-0.984808 * cx - 0.173648 * cy < 0)" },
  { id: "Q19", description: "Objects and fields by their non-indexed short ids", sxql: "SELECT objID, object, field.field, ra, dec FROM (SELECT obj FROM field WHERE field == 11)\nWHERE object == 14" },
  { id: "Q20", description: "Galaxies with centers appreciably bluer than their outer parts", sxql: "SELECT obj.col[0], obj.col[1], objID FROM Galaxy\nWHERE (objFlags & (OBJECT_SATUR | OBJECT_BRIGHT | OBJECT_EDGE)) == 0\n&& petroRad[2] < 18\n&& ((obj.col[0] - obj.col[1]) - (psfMag[0] - psfMag[1])) < -0.4" },
  { id: "Q21", description: "PSF colors of bright stars in fields with pspStatus 2", sxql: "SELECT psfMag[1], RUN(), CAMCOL(), RERUN(), FIELDID() FROM (SELECT obj FROM Field\nWHERE pspStatus == 2) WHERE objType == OBJECT_STAR\n&& ((status & AR_OBJECT_STATUS_PRIMARY) > 0) && psfMag[1] < 20" },
  { id: "Q22", description: "Cluster finding sample", sxql: "SELECT CAMCOL(), RUN(), RERUN(), FIELDID(), OBJID(), RA(), DEC(), petroMag[3], objFlags FROM Galaxy\nWHERE ((objFlags & (OBJECT_BINNED1 | OBJECT_BINNED2 | OBJECT_BINNED4)) > 0)\n&& ((objFlags & (OBJECT_BLENDED | OBJECT_NODEBLEND | OBJECT_CHILD)) != OBJECT_BLENDED)\n&& petroMag[3] < 23" },
  { id: "Q23", description: "Diameter-limited sample of galaxies", sxql: "SELECT RUN(), CAMCOL(), RERUN(), FIELDID(), OBJID(), RA(), DEC() FROM Galaxy\nWHERE ((objFlags & (OBJECT_BINNED1 | OBJECT_BINNED2 | OBJECT_BINNED4)) > 0\n&& (objFlags & (OBJECT_BLENDED | OBJECT_NODEBLEND | OBJECT_CHILD)) != OBJECT_BLENDED\n&& (((objFlags & OBJECT_NOPETRO == 0) && petroRad[3] > 15)\n || ((objFlags & OBJECT_NOPETRO > 0) && petroRad[3] > 7.5)\n || ((objFlags & OBJECT_TOO_LARGE > 0) && petroRad[3] > 2.5)\n || ((objFlags & OBJECT_SATUR == 0) && petroRad[3] > 17.5)))" },
  { id: "Q24", description: "Extremely red galaxies", sxql: "SELECT RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID(), RA(), DEC() FROM Galaxy\nWHERE ((objFlags & (OBJECT_BINNED1 | OBJECT_BINNED2 | OBJECT_BINNED4)) > 0)\n&& ((objFlags & (OBJECT_BLENDED | OBJECT_NODEBLEND | OBJECT_CHILD)) != OBJECT_BLENDED)\n&& ((objFlags & (OBJECT_CR | OBJECT_INTERP)) == 0)\n&& field.psfWidth[2] < 1.5\n&& (i - z - (reddening[3] - reddening[4]) > 1.0)" },
  { id: "Q25", description: "Bright red galaxy sample", sxql: "SELECT RUN(), CAMCOL(), RERUN(), FIELDID(), OBJID(), RA(), DEC() FROM Galaxy\nWHERE ((objFlags & (OBJECT_BINNED1 | OBJECT_BINNED2 | OBJECT_BINNED4)) > 0)\n&& ((objFlags & (OBJECT_BLENDED | OBJECT_NODEBLEND | OBJECT_CHILD)) != OBJECT_BLENDED)\n&& ((objFlags & (OBJECT_EDGE | OBJECT_SATUR)) == 0)\n&& petroMag[3] > 17.65\n&& (petroMag[2] > 15.5 || petroR50_r > 2)\n&& (petroMag[2] > 0 && g > 0 && r > 0 && i > 0)\n&& (((petroMag[2] - reddening[2] < 19.2)\n  && (petroMag[2] - reddening[2] < 13.1 + (7/3)*(g - reddening[1] - r + reddening[2])\n      + 4*(r - reddening[2] - i + reddening[3]) - 4*0.18)\n  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18) < 0.2)\n  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18) > -0.2)\n  && ((petroMag[2] - reddening[2]) + 2.5*LOG(2*3.1415*petroR50_r*petroR50_r) < 24.2))\n || ((petroMag[2] - reddening[2] < 19.5)\n  && ((r - reddening[2] - i + reddening[3] - (g - reddening[1] - r + reddening[2])/4 - 0.18)\n      > 0.45 - 4*(g - reddening[1] - r + reddening[2]))\n  && (g - reddening[1] - r + reddening[2] > 1.35 + 0.25*(r - reddening[2] - i + reddening[3]))\n  && ((petroMag[2] - reddening[2]) + 2.5*LOG(2*3.1415*petroR50_r*petroR50_r) < 23.3)))" },
  { id: "Q26", description: "Low redshift QSO candidates", sxql: "SELECT g, RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID() FROM Galaxy\nWHERE ((g <= 22) && (u - g >= -0.27) && (u - g < 0.71)\n&& (g - r >= -0.24) && (g - r < 0.35) && (r - i >= -0.27) && (r - i < 0.57)\n&& (i - z >= -0.35) && (i - z < 0.70))" },
  { id: "Q27", description: "Moving-object velocity errors against the moving flags", sxql: "SELECT RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID(), RA(), DEC(),\nobj.rowv, obj.colv, obj.rowvErr, obj.colvErr, i,\nobjFlags & OBJECT_MOVED, objFlags & OBJECT_BAD_MOVING_FIT FROM Galaxy\nWHERE (((objFlags & (OBJECT_MOVED | OBJECT_BAD_MOVING_FIT)) > 0)\n&& (((obj.rowv * obj.rowv) + (obj.colv * obj.colv))\n    >= ((obj.rowvErr * obj.rowvErr) + (obj.colvErr * obj.colvErr))))" },
  { id: "Q28", description: "Random 1 percent sample of object colors", sxql: "SELECT u, g, r, i, z FROM Galaxy WHERE (obj.object - (obj.object/100) * 100) == 1" },
  { id: "Q29", description: "Quasar candidates among stars", sxql: "SELECT RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID(), u, g, r, i, z, RA(), DEC() FROM Star\nWHERE (u - g > 2.0 OR u > 22.3) AND (i < 19) AND (i > 0) AND (g - r > 1.0)\nAND (r - i < (0.08 + 0.42 * (g - r - 0.96)) OR g - r > 2.26) AND (i - z < 0.25)" },
  { id: "Q30", description: "Objects and fields by non-indexed quantities", sxql: "SELECT RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID(),\nmodelMag[0] - reddening[0], modelMagErr[0],\npetroMag[2] - reddening[2], petroMagErr[2],\nstatus & 0x00002000, field.psfWidth[2]\nFROM (SELECT obj FROM Field WHERE psfWidth[2] > 2 && obj.colc > 1300.0)" },
  { id: "Q31", description: "Q30 with a much wider non-indexed constraint", sxql: "SELECT RUN(), RERUN(), CAMCOL(), FIELDID(), OBJID(), RA(), DEC(), rowc, colc,\nu - reddening[0], obj.modelMagErr[0], g - reddening[1], obj.modelMagErr[1],\nr - reddening[2], obj.modelMagErr[2], petroMag[2] - reddening[2], obj.petroMagErr[2],\ni - reddening[3], obj.modelMagErr[3], z - reddening[4],\nstatus & 0x00002000, field.psfWidth[2]\nFROM PhotoTag WHERE colc > 400.0" },
];
