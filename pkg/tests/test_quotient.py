import math

import numpy as np
import pytest

from riemtrace import geometry as geo
from riemtrace import quotient as qt
from riemtrace.geometry import EUCLIDEAN, HYPERBOLIC

from conftest import random_unit3

H = HYPERBOLIC


@pytest.fixture(scope="module")
def torus():
    return qt.flat_torus()


@pytest.fixture(scope="module")
def dodeca():
    return qt.mirrored_dodecahedron()


def klein_dir(k, d):
    v = geo.project_tangent(H, geo.from_klein(k), geo.klein_pushforward(k, d))
    return v / math.sqrt(geo.inner(H, v, v))


# -- flat torus -------------------------------------------------------------

def test_torus_shape(torus):
    assert torus.tag == EUCLIDEAN
    assert len(torus.faces) == 6
    assert [f.id for f in torus.faces] == list(range(6))
    assert len(torus.neighbors) == 26


def test_torus_pairing_example(torus):
    plus_x = torus.faces[0]
    p, v = qt.transport(torus, (1, 0.3, 0.7), (0.6, 0.8, 0), plus_x)
    np.testing.assert_allclose(p, [0, 0.3, 0.7, 1])
    np.testing.assert_array_equal(v, [0.6, 0.8, 0, 0])


def test_opposite_torus_pairings_compose_to_identity(torus):
    for axis in range(3):
        a, b = torus.faces[2 * axis].pairing, torus.faces[2 * axis + 1].pairing
        np.testing.assert_array_equal((a @ b).matrix, np.eye(4))


def test_torus_pairings_map_each_face_onto_its_partner(torus, rng):
    for f in torus.faces:
        partner = torus.faces[f.id ^ 1]
        for _ in range(20):
            p = rng.uniform(0, 1, 3)
            axis = f.id // 2
            p[axis] = 1.0 if f.normal[axis] > 0 else 0.0
            q = geo.apply_isometry(f.pairing, p)
            assert abs(partner.value(EUCLIDEAN, q)) < 1e-12


def test_torus_exit_examples(torus):
    t, face = qt.domain_exit(torus, (0.5, 0.5, 0.5), (1, 0, 0))
    assert t == 0.5 and face.id == 0
    d = np.array([1, 1, 0]) / math.sqrt(2)
    t, face = qt.domain_exit(torus, (0.5, 0.5, 0.5), d)
    assert t == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert face.id == 0  # x=1 and y=1 tie; lower id wins


def test_torus_contains(torus):
    assert qt.contains(torus, (0.5, 0.5, 0.5))
    assert not qt.contains(torus, (1.5, 0.5, 0.5))
    assert qt.contains(torus, (1.0, 0.0, 0.5))


def test_torus_interior_point_is_strictly_inside(torus):
    for f in torus.faces:
        assert f.value(EUCLIDEAN, torus.interior_point) < 0


def test_torus_closure_along_axes(torus, rng):
    for axis in range(3):
        for sign in (1.0, -1.0):
            p0 = rng.uniform(0.01, 0.99, 3)
            v = np.zeros(3)
            v[axis] = sign
            p, w, t = p0, v, 0.0
            while True:
                dt, face = qt.domain_exit(torus, p, w)
                if t + dt >= 1.0:
                    p = p + (1.0 - t) * w[:3] if len(p) == 3 else p[:3] + (1.0 - t) * w[:3]
                    break
                x = np.asarray(p[:3]) + dt * np.asarray(w[:3])
                p, w = qt.transport(torus, x, w, face)
                p = p[:3]
                t += dt
            np.testing.assert_allclose(p, p0, atol=1e-9)


def test_no_exit_raises():
    with pytest.raises(qt.NoExit):
        qt.domain_exit(qt.euclidean_space(), (0, 0, 0), (1, 0, 0))


def test_exit_ignores_face_the_ray_moves_away_from(torus):
    # just transported onto x=0 and heading inwards: x=0 must not catch it
    t, face = qt.domain_exit(torus, (0.0, 0.5, 0.5), (1, 0, 0))
    assert face.id == 0 and t == 1.0


# -- mirrored dodecahedron --------------------------------------------------

def test_dodecahedron_combinatorics(dodeca):
    assert dodeca.tag == HYPERBOLIC
    assert len(dodeca.faces) == 12
    assert len(qt.adjacent_face_pairs()) == 30
    assert len(dodeca.vertices) == 20
    assert len(dodeca.edges) == 30
    n = dodeca.normals
    for v in dodeca.vertices:
        on = [f for f in range(12) if abs(geo.inner(H, n[f], v)) < 1e-9]
        assert len(on) == 3


def test_face_normals_are_unit_spacelike(dodeca):
    for n in dodeca.normals:
        assert geo.inner(H, n, n) == pytest.approx(1.0, abs=1e-12)


def test_right_angle_scale_matches_closed_form():
    # oracle: for the plane u.k = h the lifted normals N_i = (u_i, h)/sqrt(1-h^2)
    # give cos(theta) = -<N1,N2> = (h^2 - u1.u2)/(1 - h^2) with u1.u2 = 1/sqrt(5)
    # between adjacent faces, so a right angle needs h^2 = 1/sqrt(5)
    h = 5 ** -0.25
    s = qt.right_angle_scale()
    assert s * qt._unit_inradius() == pytest.approx(h, abs=1e-9)
    u = qt.dodecahedron_face_directions()
    i, j = qt.adjacent_face_pairs()[0]
    assert u[i] @ u[j] == pytest.approx(1 / math.sqrt(5), abs=1e-15)


def test_dihedral_angle_is_right(dodeca):
    n = dodeca.normals
    for i, j in qt.adjacent_face_pairs():
        ang = math.acos(-geo.inner(H, n[i], n[j]))
        assert abs(ang - math.pi / 2) < 1e-6


def test_dihedral_angle_decreases_with_scale():
    angles = [qt.dihedral_angle(s) for s in np.linspace(0.05, 0.99, 20)]
    assert all(a > b for a, b in zip(angles, angles[1:]))
    assert angles[0] == pytest.approx(math.acos(-1 / math.sqrt(5)), abs=1e-2)


def test_reflections_are_involutions_and_isometries(dodeca, rng):
    for f in dodeca.faces:
        m = f.pairing
        assert m.preserves_metric()
        np.testing.assert_allclose((m @ m).matrix, np.eye(4), atol=1e-9)
        for _ in range(50):
            a = geo.from_klein(random_unit3(rng) * rng.uniform(0, 0.8))
            b = geo.from_klein(random_unit3(rng) * rng.uniform(0, 0.8))
            d = geo.distance(H, a, b)
            ma, mb = geo.apply_isometry(m, a), geo.apply_isometry(m, b)
            assert abs(geo.distance(H, ma, mb) - d) < 1e-9


def test_reflection_fixes_its_face(dodeca, rng):
    for f in dodeca.faces:
        for _ in range(10):
            v = geo.project_tangent(H, dodeca.interior_point, [*random_unit3(rng), 0])
            v = v / math.sqrt(geo.inner(H, v, v))
            t, face = qt.domain_exit(dodeca, dodeca.interior_point, v)
            x, _ = geo.geodesic(H, dodeca.interior_point, v, t)
            np.testing.assert_allclose(geo.apply_isometry(face.pairing, x), x, atol=1e-9)


def test_dodecahedron_exit_point_lies_on_face(dodeca, rng):
    p0 = dodeca.interior_point
    for _ in range(500):
        v = klein_dir((0, 0, 0), random_unit3(rng))
        t, face = qt.domain_exit(dodeca, p0, v)
        assert t > 0
        x, _ = geo.geodesic(H, p0, v, t)
        assert abs(face.value(H, x)) < 1e-9
        assert qt.contains(dodeca, x)


def test_mirror_transport_twice_returns_original(dodeca, rng):
    for _ in range(50):
        v = klein_dir((0, 0, 0), random_unit3(rng))
        t, face = qt.domain_exit(dodeca, dodeca.interior_point, v)
        x, w = geo.geodesic(H, dodeca.interior_point, v, t)
        p1, v1 = qt.transport(dodeca, x, w, face)
        p2, v2 = qt.transport(dodeca, p1, v1, face)
        np.testing.assert_allclose(p2, x, atol=1e-9)
        np.testing.assert_allclose(v2, w, atol=1e-9)
        # mirrored direction points back inside
        assert geo.inner(H, face.normal, v1) < 0


def test_transport_keeps_point_in_domain_and_tangent_norm(dodeca, rng):
    for _ in range(200):
        k = random_unit3(rng) * rng.uniform(0, 0.5)
        p = geo.from_klein(k)
        v = 1.7 * klein_dir(k, random_unit3(rng))
        t, face = qt.domain_exit(dodeca, p, v / 1.7)
        x, _ = geo.geodesic(H, p, v / 1.7, t)
        p2, v2 = qt.transport(dodeca, x, v, face)
        assert qt.contains(dodeca, p2)
        assert geo.inner(H, v2, v2) == pytest.approx(geo.inner(H, v, v), abs=1e-9)


def test_dodecahedron_contains_origin_only_inside(dodeca):
    assert qt.contains(dodeca, dodeca.interior_point)
    assert not qt.contains(dodeca, geo.from_klein([0.0, 0.0, 0.8]))


def test_distance_to_boundary_matches_inradius(dodeca):
    r = dodeca.distance_to_boundary(dodeca.interior_point)
    h = 5 ** -0.25
    assert r == pytest.approx(math.atanh(h), abs=1e-9)


def test_manifold_lookup():
    assert qt.by_name("flat_torus").name == "flat_torus"
    with pytest.raises(KeyError):
        qt.by_name("klein_bottle")
