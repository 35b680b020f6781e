"""Hierarchical Triangular Mesh: point location and cone intersection on the unit sphere.

The mesh starts from the octahedron (8 root triangles N0-N3, S0-S3) and splits every
triangle into 4 children at the normalized edge midpoints.  A trixel id encodes the
root face and two bits per subdivision level: the roots are 8..15 and the children of
trixel t are 4t+0 .. 4t+3, so ids at depth d occupy [8 << 2d, 16 << 2d).

Containment uses closed edge-plane sign tests (cross-product normals, >= 0).  Points
that land exactly on a shared edge belong to the lowest-id trixel whose closed triangle
contains them, which makes point location total and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MAX_DEPTH = 20

_V = (
    (0.0, 0.0, 1.0),    # v0: north pole
    (1.0, 0.0, 0.0),    # v1
    (0.0, 1.0, 0.0),    # v2
    (-1.0, 0.0, 0.0),   # v3
    (0.0, -1.0, 0.0),   # v4
    (0.0, 0.0, -1.0),   # v5: south pole
)

# Root faces in id order 8..15 (S0..S3, N0..N3), standard HTM vertex ordering.
_ROOT_FACES = (
    (_V[1], _V[5], _V[2]),  # 8  S0
    (_V[2], _V[5], _V[3]),  # 9  S1
    (_V[3], _V[5], _V[4]),  # 10 S2
    (_V[4], _V[5], _V[1]),  # 11 S3
    (_V[1], _V[0], _V[4]),  # 12 N0
    (_V[4], _V[0], _V[3]),  # 13 N1
    (_V[3], _V[0], _V[2]),  # 14 N2
    (_V[2], _V[0], _V[1]),  # 15 N3
)

Vec = tuple[float, float, float]


def unit_vector(ra_deg: float, dec_deg: float) -> Vec:
    """Unit 3-vector for equatorial coordinates in degrees."""
    ra = math.radians(ra_deg)
    dec = math.radians(dec_deg)
    cd = math.cos(dec)
    return (cd * math.cos(ra), cd * math.sin(ra), math.sin(dec))


def _norm(v: Vec) -> Vec:
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    return (v[0] / n, v[1] / n, v[2] / n)


def _mid(a: Vec, b: Vec) -> Vec:
    return _norm((a[0] + b[0], a[1] + b[1], a[2] + b[2]))


def _cross(a: Vec, b: Vec) -> Vec:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _dot(a: Vec, b: Vec) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _contains(tri: tuple[Vec, Vec, Vec], p: Vec) -> bool:
    """Closed containment: p is on the inner side of (or on) all three edge planes."""
    v0, v1, v2 = tri
    return (
        _dot(_cross(v0, v1), p) >= 0.0
        and _dot(_cross(v1, v2), p) >= 0.0
        and _dot(_cross(v2, v0), p) >= 0.0
    )


def _children(tri: tuple[Vec, Vec, Vec]):
    v0, v1, v2 = tri
    w0 = _mid(v1, v2)
    w1 = _mid(v0, v2)
    w2 = _mid(v0, v1)
    # Child k keeps vertex k; child 3 is the center triangle.
    return ((v0, w2, w1), (v1, w0, w2), (v2, w1, w0), (w0, w1, w2))


def depth_of(trixel: int) -> int:
    if trixel < 8:
        raise ValueError(f"not a trixel id: {trixel}")
    return (trixel.bit_length() - 4) // 2


def trixel_vertices(trixel: int) -> tuple[Vec, Vec, Vec]:
    """Vertices of a trixel, recomputed by walking the child path from its root."""
    d = depth_of(trixel)
    path = [(trixel >> (2 * i)) & 0b11 for i in range(d - 1, -1, -1)] if d else []
    tri = _ROOT_FACES[(trixel >> (2 * d)) - 8]
    for k in path:
        tri = _children(tri)[k]
    return tri


def trixel_of_vector(p: Vec, depth: int) -> int:
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in 0..{MAX_DEPTH}")
    tid = -1
    tri = None
    for i, face in enumerate(_ROOT_FACES):
        if _contains(face, p):
            tid, tri = 8 + i, face
            break
    if tri is None:  # numerically unreachable; closed tests overlap on edges
        raise RuntimeError(f"point {p} not located on any root face")
    for _ in range(depth):
        for k, child in enumerate(_children(tri)):
            if _contains(child, p):
                tid, tri = 4 * tid + k, child
                break
        else:
            raise RuntimeError(f"point {p} escaped trixel {tid} during descent")
    return tid


def trixel_of(ra_deg: float, dec_deg: float, depth: int) -> int:
    """Locate the trixel containing a sky position (lowest-id tie-break on edges)."""
    return trixel_of_vector(unit_vector(ra_deg, dec_deg), depth)


def trixel_centroid(trixel: int) -> Vec:
    v0, v1, v2 = trixel_vertices(trixel)
    return _norm((v0[0] + v1[0] + v2[0], v0[1] + v1[1] + v2[1], v0[2] + v1[2] + v2[2]))


def leaf_range(trixel: int, leaf_depth: int) -> tuple[int, int]:
    """Inclusive range of leaf-depth trixel ids covered by a (possibly shallower) trixel."""
    shift = 2 * (leaf_depth - depth_of(trixel))
    if shift < 0:
        raise ValueError("trixel deeper than leaf depth")
    return trixel << shift, ((trixel + 1) << shift) - 1


@dataclass(frozen=True)
class ConeRegion:
    """Spherical cap: center in degrees, radius in arcminutes."""

    center_ra: float
    center_dec: float
    radius_arcmin: float

    def __post_init__(self):
        if self.radius_arcmin <= 0:
            raise ValueError("cone radius must be positive")

    @property
    def center_vector(self) -> Vec:
        return unit_vector(self.center_ra, self.center_dec)

    @property
    def radius_rad(self) -> float:
        return math.radians(self.radius_arcmin / 60.0)


def angular_distance(a: Vec, b: Vec) -> float:
    """Angle between unit vectors, radians."""
    return math.acos(max(-1.0, min(1.0, _dot(a, b))))


def _dist_point_arc(p: Vec, a: Vec, b: Vec) -> float:
    """Angular distance from p to the minor geodesic arc a-b."""
    n = _cross(a, b)
    nn = math.sqrt(_dot(n, n))
    if nn == 0.0:
        return angular_distance(p, a)
    # Closest point of the great circle to p, if it lies within the arc.
    sin_d = _dot(n, p) / nn
    # Projection of p onto the circle plane:
    f = _dot(n, p) / (nn * nn)
    q = (p[0] - f * n[0], p[1] - f * n[1], p[2] - f * n[2])
    qn = math.sqrt(_dot(q, q))
    if qn > 0.0:
        q = (q[0] / qn, q[1] / qn, q[2] / qn)
        if _dot(_cross(a, q), n) >= 0.0 and _dot(_cross(q, b), n) >= 0.0:
            return abs(math.asin(max(-1.0, min(1.0, sin_d))))
    return min(angular_distance(p, a), angular_distance(p, b))


def _dist_to_triangle(p: Vec, tri: tuple[Vec, Vec, Vec]) -> float:
    if _contains(tri, p):
        return 0.0
    v0, v1, v2 = tri
    return min(
        _dist_point_arc(p, v0, v1),
        _dist_point_arc(p, v1, v2),
        _dist_point_arc(p, v2, v0),
    )


_FULL_EPS = 1e-12
_WHOLE_SKY = math.pi - 1e-12


def trixel_of_array(ra_deg, dec_deg, depth: int):
    """Vectorized trixel_of over coordinate arrays; identical tie-break and arithmetic.

    Returns a uint64 numpy array.  Agreement with the scalar walk is property-tested.
    """
    import numpy as np

    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in 0..{MAX_DEPTH}")
    ra = np.radians(np.asarray(ra_deg, dtype=np.float64))
    dec = np.radians(np.asarray(dec_deg, dtype=np.float64))
    cd = np.cos(dec)
    p = np.stack([cd * np.cos(ra), cd * np.sin(ra), np.sin(dec)], axis=1)
    n = p.shape[0]

    def contains(v0, v1, v2):
        return (
            (np.einsum("ij,ij->i", np.cross(v0, v1), p) >= 0.0)
            & (np.einsum("ij,ij->i", np.cross(v1, v2), p) >= 0.0)
            & (np.einsum("ij,ij->i", np.cross(v2, v0), p) >= 0.0)
        )

    v0 = np.zeros((n, 3))
    v1 = np.zeros((n, 3))
    v2 = np.zeros((n, 3))
    tid = np.zeros(n, dtype=np.uint64)
    undecided = np.ones(n, dtype=bool)
    for i, face in enumerate(_ROOT_FACES):
        f0 = np.broadcast_to(np.array(face[0]), (n, 3))
        f1 = np.broadcast_to(np.array(face[1]), (n, 3))
        f2 = np.broadcast_to(np.array(face[2]), (n, 3))
        hit = undecided & contains(f0, f1, f2)
        tid[hit] = 8 + i
        v0[hit], v1[hit], v2[hit] = f0[hit], f1[hit], f2[hit]
        undecided &= ~hit
    if undecided.any():
        raise RuntimeError("points not located on any root face")

    def mid(a, b):
        w = a + b
        norm = np.sqrt(np.einsum("ij,ij->i", w, w))
        return w / norm[:, None]

    for _ in range(depth):
        w0 = mid(v1, v2)
        w1 = mid(v0, v2)
        w2 = mid(v0, v1)
        kids = ((v0, w2, w1), (v1, w0, w2), (v2, w1, w0), (w0, w1, w2))
        undecided = np.ones(n, dtype=bool)
        child = np.zeros(n, dtype=np.uint64)
        nv0 = np.empty_like(v0)
        nv1 = np.empty_like(v1)
        nv2 = np.empty_like(v2)
        for k, (a, b, c) in enumerate(kids):
            hit = undecided & contains(a, b, c)
            child[hit] = k
            nv0[hit], nv1[hit], nv2[hit] = a[hit], b[hit], c[hit]
            undecided &= ~hit
        if undecided.any():
            raise RuntimeError("points escaped during vectorized descent")
        tid = tid * np.uint64(4) + child
        v0, v1, v2 = nv0, nv1, nv2
    return tid


def cone_intersect(cone: ConeRegion, depth: int) -> tuple[list[int], list[int]]:
    """Sound trixel cover of a cone.

    Returns (full, partial): full trixels lie entirely inside the cone (reported at
    the shallowest depth where that is certain), partial trixels are depth-`depth`
    trixels that may straddle the boundary.  Classification errs toward partial on
    numerical ties; nothing inside the cone is ever dropped.
    """
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in 0..{MAX_DEPTH}")
    theta = cone.radius_rad
    if theta >= _WHOLE_SKY:
        return [8 + i for i in range(8)], []
    c = cone.center_vector
    full: list[int] = []
    partial: list[int] = []

    def visit(tid: int, tri: tuple[Vec, Vec, Vec], level: int):
        centroid = _norm((tri[0][0] + tri[1][0] + tri[2][0],
                          tri[0][1] + tri[1][1] + tri[2][1],
                          tri[0][2] + tri[1][2] + tri[2][2]))
        bound = max(angular_distance(centroid, v) for v in tri)
        d = angular_distance(c, centroid)
        if d + bound < theta - _FULL_EPS:
            full.append(tid)
            return
        if d - bound > theta + _FULL_EPS:
            return  # bounding cap entirely outside the cone
        if _dist_to_triangle(c, tri) > theta + _FULL_EPS:
            return
        if level == depth:
            partial.append(tid)
            return
        for k, child in enumerate(_children(tri)):
            visit(4 * tid + k, child, level + 1)

    for i, face in enumerate(_ROOT_FACES):
        visit(8 + i, face, 0)
    return full, partial
