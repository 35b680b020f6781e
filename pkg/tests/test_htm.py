"""HTM point location and cone intersection against independent geometric oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest

from skyql import htm


def _oracle_contains(tri, p):
    """Independent containment check: signs of triple products against edge planes."""
    def cross(a, b):
        return (a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0])

    def dot(a, b):
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]

    v0, v1, v2 = tri
    return (dot(cross(v0, v1), p) >= 0 and dot(cross(v1, v2), p) >= 0
            and dot(cross(v2, v0), p) >= 0)


def _random_points(n, seed):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1, 1, n)
    phi = rng.uniform(0, 2 * np.pi, n)
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def test_centroid_locates_to_own_trixel():
    rng = np.random.default_rng(3)
    for depth in (0, 1, 4, 8):
        for _ in range(25):
            t = htm.trixel_of(rng.uniform(0, 360), rng.uniform(-90, 90), depth)
            c = htm.trixel_centroid(t)
            assert htm.trixel_of_vector(c, depth) == t


def test_point_location_oracle_10k():
    pts = _random_points(10_000, seed=11)
    for depth in (2, 8, 12):
        for p in pts[:2_000] if depth == 12 else pts:
            p3 = (float(p[0]), float(p[1]), float(p[2]))
            t = htm.trixel_of_vector(p3, depth)
            assert _oracle_contains(htm.trixel_vertices(t), p3)


def test_lowest_id_tie_break():
    # a point on the shared edge between root faces is assigned the lowest id
    # that contains it; sweep all depth-2 trixels containing each edge point
    pts = [(0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (0.5, 0.5, 0.0),
           (math.sqrt(0.5), 0.0, math.sqrt(0.5))]
    depth = 2
    lo, hi = 8 << (2 * depth), 16 << (2 * depth)
    for p in pts:
        p = tuple(c / math.sqrt(sum(x * x for x in p)) for c in p)
        containing = [t for t in range(lo, hi)
                      if _oracle_contains(htm.trixel_vertices(t), p)]
        assert containing, "closed triangles must cover the sphere"
        assert htm.trixel_of_vector(p, depth) == min(containing)


def test_monotone_refinement():
    rng = np.random.default_rng(5)
    for _ in range(300):
        ra, dec = rng.uniform(0, 360), rng.uniform(-90, 90)
        parent = htm.trixel_of(ra, dec, 6)
        child = htm.trixel_of(ra, dec, 7)
        assert child >> 2 == parent


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(6)
    ra = rng.uniform(0, 360, 10_000)
    dec = rng.uniform(-90, 90, 10_000)
    vec = htm.trixel_of_array(ra, dec, 8)
    for i in range(0, 10_000, 97):
        assert int(vec[i]) == htm.trixel_of(float(ra[i]), float(dec[i]), 8)


def test_depth_and_leaf_range():
    t = htm.trixel_of(123.0, 45.0, 5)
    assert htm.depth_of(t) == 5
    lo, hi = htm.leaf_range(t, 8)
    assert hi - lo + 1 == 4 ** 3
    assert htm.depth_of(lo) == 8


def test_cone_whole_sky_is_all_roots_full():
    full, partial = htm.cone_intersect(htm.ConeRegion(10.0, 10.0, 10_800.0), 8)
    assert sorted(full) == list(range(8, 16))
    assert partial == []


def test_cone_degenerate_radius_single_partial():
    for ra, dec in ((200.0, -0.5), (13.3, 47.2), (301.7, -78.1)):
        full, partial = htm.cone_intersect(htm.ConeRegion(ra, dec, 1e-7), 8)
        assert full == []
        assert partial == [htm.trixel_of(ra, dec, 8)]


@pytest.mark.parametrize("seed", [1, 2])
def test_cone_cover_is_sound(seed):
    rng = np.random.default_rng(seed)
    depth = 8
    for _ in range(40):
        ra = rng.uniform(0, 360)
        dec = rng.uniform(-89, 89)
        radius = rng.uniform(0.5, 240.0)  # arcmin
        cone = htm.ConeRegion(ra, dec, radius)
        full, partial = htm.cone_intersect(cone, depth)
        ranges = [htm.leaf_range(t, depth) for t in full + partial]
        c = cone.center_vector
        cos_r = math.cos(cone.radius_rad)
        # sample points inside the cone: mix of jittered center offsets
        for _ in range(60):
            theta = math.acos(1 - rng.uniform(0, 1) * (1 - cos_r))
            phi = rng.uniform(0, 2 * math.pi)
            p = _offset(c, theta, phi)
            assert sum(c[i] * p[i] for i in range(3)) >= cos_r - 1e-12
            t = htm.trixel_of_vector(p, depth)
            assert any(lo <= t <= hi for lo, hi in ranges), \
                f"point inside cone fell outside the cover ({ra=}, {dec=}, {radius=})"
        # full trixels must lie entirely inside: sample their corners and centroid
        for t in full:
            tri = htm.trixel_vertices(t)
            for q in tri + (htm.trixel_centroid(t),):
                assert sum(c[i] * q[i] for i in range(3)) >= cos_r - 1e-12


def _offset(c, theta, phi):
    # rotate the unit vector c by angle theta toward direction phi
    if abs(c[2]) < 0.9:
        up = (0.0, 0.0, 1.0)
    else:
        up = (1.0, 0.0, 0.0)
    e1 = _norm(_cross(up, c))
    e2 = _cross(c, e1)
    st, ct = math.sin(theta), math.cos(theta)
    return _norm(tuple(
        ct * c[i] + st * (math.cos(phi) * e1[i] + math.sin(phi) * e2[i])
        for i in range(3)
    ))


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def _norm(v):
    n = math.sqrt(sum(x * x for x in v))
    return tuple(x / n for x in v)
