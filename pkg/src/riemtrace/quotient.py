"""Quotient manifolds M/Gamma described by a convex fundamental domain.

A domain is an intersection of half-spaces ``face_value(n, p) <= 0``.  Each
face carries the group element that maps the outside of that face back
into the domain (a translation on the torus, a mirror on the dodecahedron).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from ._jit import jit
from .geometry import EUCLIDEAN, HYPERBOLIC, SPHERICAL, GeometryTag, Isometry

EPS_STEP = 1e-7

# Right angle for the dodecahedron is bisected to this tolerance.
_ANGLE_TOL = 1e-10


class NoExit(RuntimeError):
    """A geodesic started inside the domain did not reach any face."""


@jit
def _face_value(tag, n, offset, p):
    return geo._inner(tag, n, p) - offset


@jit
def _face_exit_time(tag, n, offset, p, v):
    """First time the geodesic crosses the face outwards, or inf.

    Only crossings where the face value increases count, so a ray that was
    just transported onto a face and points into the domain is not caught
    by that face again.
    """
    a = _face_value(tag, n, offset, p)
    b = geo._inner(tag, n, v)
    if b <= 0.0:
        return math.inf
    if tag == EUCLIDEAN:
        t = -a / b
        return t if t > 0.0 else 0.0
    if tag == HYPERBOLIC:
        # a cosh t + b sinh t = 0  <=>  tanh t = -a / b
        if a >= 0.0:
            return 0.0
        r = -a / b
        if r >= 1.0:
            return math.inf
        return math.atanh(r)
    # spherical: a cos t + b sin t = 0, upward crossing
    if a >= 0.0:
        return 0.0
    t = math.atan2(-a, b)
    return t


@jit
def _domain_exit(tag, normals, offsets, p, v):
    best_t = math.inf
    best_f = -1
    for f in range(normals.shape[0]):
        n = (normals[f, 0], normals[f, 1], normals[f, 2], normals[f, 3])
        t = _face_exit_time(tag, n, offsets[f], p, v)
        if t < best_t:
            best_t = t
            best_f = f
    return best_t, best_f


@jit
def _contains(tag, normals, offsets, p, tol):
    for f in range(normals.shape[0]):
        n = (normals[f, 0], normals[f, 1], normals[f, 2], normals[f, 3])
        if _face_value(tag, n, offsets[f], p) > tol:
            return False
    return True


@jit
def _transport(tag, pairings, face, p, v):
    return geo._apply_isometry(tag, pairings[face], p, v)


@dataclass(frozen=True, eq=False)
class DomainFace:
    id: int
    normal: np.ndarray
    offset: float
    pairing: Isometry

    def value(self, tag, p) -> float:
        return float(_face_value(int(tag), geo._t4(self.normal), self.offset, geo._p4(int(tag), p)))


@dataclass(frozen=True, eq=False)
class QuotientManifold:
    """Fundamental domain plus face pairings.

    ``neighbors`` lists group elements used to pick the nearest copy of a
    light; ``vertices`` (model coordinates) and ``edges`` (vertex index
    pairs) are only filled for polyhedra whose edges can be drawn.
    """

    name: str
    tag: GeometryTag
    faces: tuple
    interior_point: np.ndarray
    neighbors: tuple = ()
    vertices: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    edges: tuple = ()

    @property
    def normals(self) -> np.ndarray:
        if not self.faces:
            return np.zeros((0, 4))
        return np.ascontiguousarray([f.normal for f in self.faces], dtype=float)

    @property
    def offsets(self) -> np.ndarray:
        return np.array([f.offset for f in self.faces], dtype=float)

    @property
    def pairings(self) -> np.ndarray:
        if not self.faces:
            return np.zeros((0, 4, 4))
        return np.ascontiguousarray([f.pairing.matrix for f in self.faces])

    @property
    def neighbor_matrices(self) -> np.ndarray:
        mats = [geo.identity(self.tag).matrix] + [g.matrix for g in self.neighbors]
        return np.ascontiguousarray(mats)

    def distance_to_boundary(self, p) -> float:
        """Geodesic distance from an interior point to the nearest face plane."""
        tag = int(self.tag)
        best = math.inf
        for f in self.faces:
            a = -f.value(tag, p)
            if tag == EUCLIDEAN:
                d = a / float(np.linalg.norm(f.normal[:3]))
            elif tag == HYPERBOLIC:
                d = math.asinh(a)
            else:
                d = math.asin(max(-1.0, min(1.0, a)))
            best = min(best, d)
        return best


def contains(q: QuotientManifold, p, tol: float = geo.EPS_MANIFOLD) -> bool:
    """True when ``p`` lies in every face half-space (boundary included)."""
    tag = int(q.tag)
    return bool(_contains(tag, q.normals, q.offsets, geo._p4(tag, p), tol))


def domain_exit(q: QuotientManifold, p, v):
    """Smallest exit time of the geodesic from ``(p, v)`` and the face crossed.

    Ties go to the lowest face id.  Raises :class:`NoExit` when no face is
    reached.
    """
    tag = int(q.tag)
    t, f = _domain_exit(tag, q.normals, q.offsets, geo._p4(tag, p), geo._t4(v))
    if f < 0:
        raise NoExit(f"geodesic from {list(p)} along {list(v)} never leaves {q.name}")
    return float(t), q.faces[f]


def transport(q: QuotientManifold, p_exit, v, face: DomainFace):
    """Carry ``(p_exit, v)`` through ``face`` by its pairing isometry."""
    tag = int(q.tag)
    p2, v2 = geo._apply_isometry(tag, face.pairing.matrix, geo._p4(tag, p_exit), geo._t4(v))
    return np.array(p2), np.array(v2)


# --------------------------------------------------------------------------
# manifolds
# --------------------------------------------------------------------------


def flat_torus() -> QuotientManifold:
    """The unit cube with opposite faces glued by unit translations."""
    faces = []
    fid = 0
    for axis in range(3):
        for sign in (1.0, -1.0):
            n = np.zeros(4)
            n[axis] = sign
            offset = 1.0 if sign > 0 else 0.0
            shift = np.zeros(3)
            shift[axis] = -sign
            faces.append(DomainFace(fid, n, offset, geo.translation(shift)))
            fid += 1
    neighbors = []
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            for k in (-1, 0, 1):
                if (i, j, k) != (0, 0, 0):
                    neighbors.append(geo.translation((i, j, k)))
    return QuotientManifold(
        name="flat_torus",
        tag=GeometryTag.EUCLIDEAN,
        faces=tuple(faces),
        interior_point=np.array([0.5, 0.5, 0.5, 1.0]),
        neighbors=tuple(neighbors),
    )


def euclidean_space() -> QuotientManifold:
    """Plain E^3 (trivial group): no faces, rays never wrap."""
    return QuotientManifold(
        name="euclidean_box",
        tag=GeometryTag.EUCLIDEAN,
        faces=(),
        interior_point=np.array([0.0, 0.0, 0.0, 1.0]),
    )


_PHI = (1.0 + math.sqrt(5.0)) / 2.0


def dodecahedron_face_directions() -> np.ndarray:
    """Outward unit face normals of a regular dodecahedron (icosahedron vertices)."""
    dirs = []
    for a in (_PHI, -_PHI):
        for b in (1.0, -1.0):
            dirs.append((0.0, a, b))
            dirs.append((a, b, 0.0))
            dirs.append((b, 0.0, a))
    d = np.array(dirs)
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def dodecahedron_vertices() -> np.ndarray:
    """Vertices of the regular dodecahedron with unit circumradius."""
    v = [(x, y, z) for x in (1, -1) for y in (1, -1) for z in (1, -1)]
    ip = 1.0 / _PHI
    for a in (1.0, -1.0):
        for b in (1.0, -1.0):
            v.append((0.0, a * ip, b * _PHI))
            v.append((a * ip, b * _PHI, 0.0))
            v.append((b * _PHI, 0.0, a * ip))
    v = np.array(v, dtype=float)
    return v / math.sqrt(3.0)


def _unit_inradius() -> float:
    n = dodecahedron_face_directions()
    return float(np.max(dodecahedron_vertices() @ n[0]))


def _lorentz_face_normals(scale: float) -> np.ndarray:
    """Unit spacelike normals of the face planes of the dodecahedron scaled by ``scale``.

    The Klein-ball plane ``u . k = h`` lifts to the Lorentz normal ``(u, h)``.
    """
    h = scale * _unit_inradius()
    u = dodecahedron_face_directions()
    n = np.hstack([u, np.full((len(u), 1), h)])
    return n / math.sqrt(1.0 - h * h)


def adjacent_face_pairs() -> list:
    u = dodecahedron_face_directions()
    g = u @ u.T
    top = np.max(g[~np.eye(len(u), dtype=bool)])
    return [(i, j) for i in range(len(u)) for j in range(i + 1, len(u))
            if abs(g[i, j] - top) < 1e-9]


def dihedral_angle(scale: float) -> float:
    """Interior dihedral angle of the hyperbolic dodecahedron at Klein scale ``scale``."""
    n = _lorentz_face_normals(scale)
    i, j = adjacent_face_pairs()[0]
    c = -float(geo.inner(HYPERBOLIC, n[i], n[j]))
    return math.acos(max(-1.0, min(1.0, c)))


def right_angle_scale(tol: float = _ANGLE_TOL) -> float:
    """Klein scale at which the dihedral angle is pi/2, by bisection.

    The angle decreases monotonically from the Euclidean value (s -> 0) to
    pi/3 at the ideal dodecahedron (s = 1).
    """
    lo, hi = 0.0, 1.0
    target = math.pi / 2
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        ang = dihedral_angle(mid)
        if abs(ang - target) < tol:
            return mid
        if ang > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mirrored_dodecahedron() -> QuotientManifold:
    """Right-angled regular dodecahedron in H^3 with every face a mirror."""
    s = right_angle_scale()
    normals = _lorentz_face_normals(s)
    faces = tuple(
        DomainFace(i, normals[i], 0.0, geo.hyperbolic_reflection(normals[i]))
        for i in range(len(normals))
    )
    verts = dodecahedron_vertices()
    d = np.linalg.norm(verts[:, None, :] - verts[None, :, :], axis=2)
    edge_len = np.min(d[d > 1e-9])
    edges = tuple((i, j) for i in range(len(verts)) for j in range(i + 1, len(verts))
                  if abs(d[i, j] - edge_len) < 1e-9)
    return QuotientManifold(
        name="mirrored_dodecahedron",
        tag=GeometryTag.HYPERBOLIC,
        faces=faces,
        interior_point=np.array([0.0, 0.0, 0.0, 1.0]),
        neighbors=tuple(f.pairing for f in faces),
        vertices=np.array([geo.from_klein(s * v) for v in verts]),
        edges=edges,
    )


MANIFOLDS = {
    "flat_torus": flat_torus,
    "mirrored_dodecahedron": mirrored_dodecahedron,
    "euclidean_box": euclidean_space,
}


def by_name(name: str) -> QuotientManifold:
    try:
        return MANIFOLDS[name]()
    except KeyError:
        raise KeyError(f"unknown manifold {name!r}; expected one of {sorted(MANIFOLDS)}") from None
