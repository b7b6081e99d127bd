import itertools
import math

import numpy as np
import pytest

from riemtrace import geometry as geo
from riemtrace.geometry import EUCLIDEAN, HYPERBOLIC, SPHERICAL
from riemtrace.quotient import EPS_STEP
from riemtrace.scene import _segment_distance, compile_scene, load_scene
from riemtrace.tracer import _solve_cosh_sinh, intersect_sphere, occluded, trace_ray

from conftest import make_scene, random_hyperbolic_point, random_spherical_point, random_unit3

E, H, S = EUCLIDEAN, HYPERBOLIC, SPHERICAL
O_H = (0.0, 0.0, 0.0, 1.0)


def unit_tangent(tag, p, d):
    v = geo.project_tangent(tag, p, d)
    return v / math.sqrt(geo.inner(tag, v, v))


# -- closed-form solver -----------------------------------------------------

@pytest.mark.parametrize("a,b,k", [(2.0, 1.0, 3.0), (-1.0, 2.0, 0.5), (1.0, -3.0, 2.0),
                                   (1.0, 1.0, 2.0), (0.5, 0.0, 1.0)])
def test_cosh_sinh_roots_satisfy_equation(a, b, k):
    n, s1, s2 = _solve_cosh_sinh(a, b, k)
    for s in (s1, s2)[:n]:
        assert a * math.cosh(s) + b * math.sinh(s) == pytest.approx(k, abs=1e-12)
    # root count by dense sampling of sign changes
    xs = np.linspace(-20, 20, 400001)
    f = a * np.cosh(xs) + b * np.sinh(xs) - k
    assert n == int(np.count_nonzero(np.diff(np.sign(f)) != 0))


# -- sphere intersection ----------------------------------------------------

def test_euclidean_head_on():
    assert intersect_sphere(E, (0, 0, 0), (1, 0, 0), (3, 0, 0), 1.0) == pytest.approx(2.0)


def test_hyperbolic_centre_on_ray():
    c, _ = geo.geodesic(H, O_H, (1, 0, 0, 0), 2.0)
    t = intersect_sphere(H, O_H, (1, 0, 0, 0), c, 0.5)
    assert abs(t - 1.5) < 1e-9


def test_spherical_centre_on_ray():
    p = (1, 0, 0, 0)
    c, _ = geo.geodesic(S, p, (0, 1, 0, 0), 1.2)
    t = intersect_sphere(S, p, (0, 1, 0, 0), c, 0.3)
    assert abs(t - 0.9) < 1e-9


def test_miss_returns_none():
    assert intersect_sphere(E, (0, 0, 0), (0, 1, 0), (3, 0, 0), 1.0) is None
    c, _ = geo.geodesic(H, O_H, (1, 0, 0, 0), 2.0)
    assert intersect_sphere(H, O_H, (0, 1, 0, 0), c, 0.5) is None
    assert intersect_sphere(H, O_H, (-1, 0, 0, 0), c, 0.5) is None


def _bisect_exit(tag, p, v, c, r):
    f = lambda t: geo.distance(tag, c, geo.geodesic(tag, p, v, t)[0]) - r
    lo, hi = 0.0, 2 * r + 1e-3
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("tag", [E, H, S])
def test_ray_from_inside_sphere_exits_on_surface(tag, rng):
    for _ in range(200):
        if tag == H:
            c = random_hyperbolic_point(rng, 1.5)
        elif tag == S:
            c = random_spherical_point(rng)
        else:
            c = np.array([*rng.uniform(-1, 1, 3), 1])
        r = rng.uniform(0.1, 1.0)
        d = unit_tangent(tag, c, rng.normal(size=4) if tag != E else [*rng.normal(size=3), 0])
        p, _ = geo.geodesic(tag, c, d, rng.uniform(0, 0.9 * r))
        v = unit_tangent(tag, p, rng.normal(size=4) if tag != E else [*rng.normal(size=3), 0])
        t = intersect_sphere(tag, p, v, c, r)
        assert t is not None
        x, _ = geo.geodesic(tag, p, v, t)
        assert abs(geo.distance(tag, c, x) - r) < 1e-6
        assert t == pytest.approx(_bisect_exit(tag, p, v, c, r), abs=1e-9)


@pytest.mark.parametrize("tag", [E, H, S])
def test_outside_hit_is_the_nearer_root(tag, rng):
    hits = 0
    for _ in range(200):
        if tag == H:
            p = random_hyperbolic_point(rng, 1.0)
            c = random_hyperbolic_point(rng, 1.0)
        elif tag == S:
            p, c = random_spherical_point(rng), random_spherical_point(rng)
        else:
            p, c = np.array([*rng.uniform(-1, 1, 3), 1]), np.array([*rng.uniform(-1, 1, 3), 1])
        r = 0.3
        if geo.distance(tag, p, c) <= r:
            continue
        v = geo.direction_to(tag, p, c)
        noise = rng.normal(size=4) if tag != E else np.array([*rng.normal(size=3), 0])
        v = unit_tangent(tag, p, v + 0.2 * noise)
        t = intersect_sphere(tag, p, v, c, r)
        if t is None:
            continue
        hits += 1
        ts = np.linspace(0, t, 200)
        d = [geo.distance(tag, c, geo.geodesic(tag, p, v, s)[0]) for s in ts[:-1]]
        assert min(d) > r - 1e-9
    assert hits > 50


# -- trace_ray --------------------------------------------------------------

def test_empty_scene_with_no_crossings_misses():
    s = make_scene()
    assert trace_ray(s, (0.5, 0.5, 0.5), (1, 0, 0), maxlevel=0) is None


def test_torus_wraps_to_sphere_behind_the_eye():
    s = make_scene(objects=[{"type": "sphere", "id": "ball", "center": [0.25, 0.5, 0.5],
                             "radius": 0.1, "material": {"kd": [1, 1, 1]}}],
                   camera={"origin": [0.5, 0.5, 0.8], "look_at": [0.5, 0.5, 0.2], "vfov_deg": 60})
    hit = trace_ray(s, (0.5, 0.5, 0.5), (1, 0, 0), maxlevel=8)
    assert hit.object_id == "ball"
    assert hit.t_hit == pytest.approx(0.65, abs=1e-12)
    assert hit.transport_level == 1
    np.testing.assert_allclose(hit.point, [0.15, 0.5, 0.5, 1.0], atol=1e-12)
    np.testing.assert_allclose(hit.normal, [-1, 0, 0, 0], atol=1e-12)
    assert trace_ray(s, (0.5, 0.5, 0.5), (1, 0, 0), maxlevel=0) is None


def universal_cover_hit(p, v, center, radius, maxlevel):
    """Nearest sphere copy in E^3 whose cell is reachable within ``maxlevel`` crossings."""
    offsets = set(itertools.product((-1, 0, 1), repeat=3))
    offsets |= {tuple(2 * s * np.eye(3, dtype=int)[i]) for i in range(3) for s in (-1, 1)}
    best = None
    for k in offsets:
        c = np.asarray(center) + k
        t = intersect_sphere(E, p, v, c, radius)
        if t is None:
            continue
        crossings = int(np.sum(np.abs(np.floor(np.asarray(p) + t * np.asarray(v)))))
        if crossings <= maxlevel and (best is None or t < best[0]):
            best = (t, crossings)
    return best


def test_torus_matches_universal_cover(rng):
    mismatches = 0
    hits = 0
    for trial in range(500):
        c = rng.uniform(0.35, 0.65, 3)
        r = rng.uniform(0.1, 0.3)
        s = make_scene(objects=[{"type": "sphere", "id": "ball", "center": list(c), "radius": r,
                                 "material": {"kd": [1, 1, 1]}}], check=False)
        sc = compile_scene(s)
        for _ in range(4):
            p = rng.uniform(0, 1, 3)
            if np.linalg.norm(p - c) <= r:
                continue
            v = random_unit3(rng)
            maxlevel = int(rng.integers(0, 3))
            got = trace_ray(s, p, v, maxlevel=maxlevel, arrays=sc)
            want = universal_cover_hit(p, v, c, r, maxlevel)
            if want is None:
                mismatches += got is not None
                continue
            hits += 1
            assert got is not None
            assert abs(got.t_hit - want[0]) < 1e-9
            assert got.transport_level == want[1]
    assert mismatches == 0
    assert hits > 200


def test_hit_records_satisfy_surface_invariants(rng):
    s = load_scene("mirrored_dodecahedron")
    sc = compile_scene(s)
    spheres = {o.id: s.point(o.shape.center) for o in s.objects if hasattr(o.shape, "center")}
    radii = {o.id: o.shape.radius for o in s.objects if hasattr(o.shape, "center")}
    o = s.point(s.camera.origin)
    checked = 0
    for _ in range(1000):
        v = unit_tangent(H, o, [*random_unit3(rng), 0])
        hit = trace_ray(s, o, v, arrays=sc)
        if hit is None:
            continue
        assert geo.inner(H, hit.normal, hit.normal) == pytest.approx(1, abs=1e-9)
        assert abs(geo.inner(H, hit.normal, hit.point)) < 1e-9
        assert geo.inner(H, hit.tangent, hit.normal) < 0
        if hit.object_id in spheres:
            c = spheres[hit.object_id]
            if hit.transport_level == 0:
                assert abs(geo.distance(H, c, hit.point) - radii[hit.object_id]) < 1e-6
                assert geo.inner(H, hit.normal, geo.direction_to(H, c, hit.point)) > 0
            checked += 1
    assert checked > 100


def test_edge_tube_hits_lie_on_the_tube(rng):
    s = load_scene("mirrored_dodecahedron")
    q = s.manifold
    sc = compile_scene(s)
    radius = next(o.shape.radius for o in s.objects if o.id == "edges")
    n_tube = 0
    for _ in range(3000):
        v = unit_tangent(H, O_H, [*random_unit3(rng), 0])
        hit = trace_ray(s, O_H, v, maxlevel=0, arrays=sc)
        if hit is None or hit.object_id != "edges":
            continue
        d = min(_segment_distance(H, q.vertices[i], q.vertices[j], hit.point) for i, j in q.edges)
        assert abs(d - radius) < 1e-6
        # walking back along the normal by the radius lands on the axis
        foot, _ = geo.geodesic(H, hit.point, -hit.normal, radius)
        d = min(_segment_distance(H, q.vertices[i], q.vertices[j], foot) for i, j in q.edges)
        assert d < 1e-6
        n_tube += 1
    assert n_tube > 100


def test_cumulative_t_reintegrates_to_hit_point(rng):
    s = load_scene("torus_tessellation")
    sc = compile_scene(s)
    p0 = np.array(s.camera.origin)
    n = 0
    for _ in range(300):
        v = random_unit3(rng)
        hit = trace_ray(s, p0, v, arrays=sc)
        if hit is None:
            continue
        # unrolled straight line, folded back into the unit cube
        x = np.mod(p0 + hit.t_hit * v, 1.0)
        d = np.abs(x - hit.point[:3])
        d = np.minimum(d, 1 - d)
        assert d.max() < 1e-6
        n += 1
    assert n > 50


def test_trace_is_deterministic(rng):
    s = load_scene("mirrored_dodecahedron")
    o = s.point(s.camera.origin)
    for _ in range(20):
        v = unit_tangent(H, o, [*random_unit3(rng), 0])
        a, b = trace_ray(s, o, v), trace_ray(s, o, v)
        assert (a is None) == (b is None)
        if a is not None:
            assert a.t_hit == b.t_hit and a.transport_level == b.transport_level
            assert np.array_equal(a.point, b.point) and np.array_equal(a.normal, b.normal)


# -- shadows ----------------------------------------------------------------

def test_light_alone_is_visible():
    s = make_scene(lights=[((0.5, 0.9, 0.5), (1, 1, 1))])
    assert not occluded(s, (0.5, 0.1, 0.5), (0, 1, 0), 0)


def test_sphere_on_the_midpoint_blocks():
    s = make_scene(objects=[{"type": "sphere", "id": "blocker", "center": [0.5, 0.5, 0.5],
                             "radius": 0.1, "material": {"kd": [1, 1, 1]}}],
                   lights=[((0.5, 0.75, 0.5), (1, 1, 1))],
                   camera={"origin": [0.1, 0.5, 0.9], "look_at": [0.5, 0.5, 0.5], "vfov_deg": 60})
    p, n = (0.5, 0.3, 0.5), (0, 1, 0)
    # the blocker really is on the connecting segment to the nearest copy
    assert intersect_sphere(E, p, n, (0.5, 0.5, 0.5), 0.1) < 0.45
    assert occluded(s, p, n, 0)


def test_surface_does_not_shadow_itself():
    s = make_scene(objects=[{"type": "sphere", "id": "ball", "center": [0.5, 0.5, 0.5],
                             "radius": 0.2, "material": {"kd": [1, 1, 1]}}],
                   lights=[((0.5, 0.7 + 2 * EPS_STEP, 0.5), (1, 1, 1))],
                   camera={"origin": [0.1, 0.5, 0.9], "look_at": [0.5, 0.5, 0.5], "vfov_deg": 60})
    assert not occluded(s, (0.5, 0.7, 0.5), (0, 1, 0), 0)


def test_shadow_uses_nearest_light_copy():
    # light at y=0.9, point at y=0.05: the copy at y=-0.1 is nearer, so a
    # blocker between them in the same cell does not matter
    s = make_scene(objects=[{"type": "sphere", "id": "blocker", "center": [0.5, 0.5, 0.5],
                             "radius": 0.3, "material": {"kd": [1, 1, 1]}}],
                   lights=[((0.5, 0.9, 0.5), (1, 1, 1))],
                   camera={"origin": [0.1, 0.9, 0.9], "look_at": [0.5, 0.5, 0.5], "vfov_deg": 60})
    assert not occluded(s, (0.5, 0.05, 0.5), (0, -1, 0), 0)
