"""Model geometries E^3, H^3 and S^3 in ambient 4-coordinates.

Points and tangent vectors are 4-tuples of floats inside the kernels.
Euclidean points carry ``w = 1`` and Euclidean tangents ``w = 0`` so that a
single 4x4 matrix type acts on every geometry (homogeneous affine maps for
E^3, Lorentz transformations for H^3, orthogonal maps for S^3).

The underscore-prefixed functions are the jit kernels; the public wrappers
accept any sequence and return numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._jit import jit

EUCLIDEAN = 0
HYPERBOLIC = 1
SPHERICAL = 2

EPS_MANIFOLD = 1e-9


class GeometryTag(enum.IntEnum):
    EUCLIDEAN = EUCLIDEAN
    HYPERBOLIC = HYPERBOLIC
    SPHERICAL = SPHERICAL


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


@jit
def _inner(tag, u, v):
    s = u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
    if tag == HYPERBOLIC:
        return s - u[3] * v[3]
    if tag == SPHERICAL:
        return s + u[3] * v[3]
    return s


@jit
def _scale(a, u):
    return (a * u[0], a * u[1], a * u[2], a * u[3])


@jit
def _lincomb(a, u, b, v):
    return (a * u[0] + b * v[0], a * u[1] + b * v[1],
            a * u[2] + b * v[2], a * u[3] + b * v[3])


@jit
def _distance(tag, p, q):
    if tag == HYPERBOLIC:
        c = -_inner(tag, p, q)
        if c < 1.0:
            c = 1.0
        return math.acosh(c)
    if tag == SPHERICAL:
        c = _inner(tag, p, q)
        if c > 1.0:
            c = 1.0
        elif c < -1.0:
            c = -1.0
        return math.acos(c)
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    dz = p[2] - q[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


@jit
def _project_point(tag, p):
    if tag == HYPERBOLIC:
        # Recompute w from the spatial part rather than rescaling by
        # sqrt(-<p,p>): far from the origin <p,p> carries round-off of order
        # eps * w^2, and rescaling would push that error into every distance.
        return (p[0], p[1], p[2], math.sqrt(1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]))
    if tag == SPHERICAL:
        return _scale(1.0 / math.sqrt(_inner(tag, p, p)), p)
    return (p[0], p[1], p[2], 1.0)


@jit
def _project_tangent(tag, p, v):
    """Remove the component of ``v`` along ``p`` (tangent-space projection)."""
    if tag == EUCLIDEAN:
        return (v[0], v[1], v[2], 0.0)
    # <p,p> is -1 on H^3 and +1 on S^3
    pp = _inner(tag, p, p)
    return _lincomb(1.0, v, -_inner(tag, p, v) / pp, p)


@jit
def _norm(tag, v):
    n = _inner(tag, v, v)
    if n <= 0.0:
        return 0.0
    return math.sqrt(n)


@jit
def _normalize(tag, v):
    n = _norm(tag, v)
    if n == 0.0:
        return v
    return _scale(1.0 / n, v)


@jit
def _unit_tangent(tag, p, v):
    return _normalize(tag, _project_tangent(tag, p, v))


@jit
def _geodesic(tag, p, v, t):
    if tag == HYPERBOLIC:
        c = math.cosh(t)
        s = math.sinh(t)
        q = _project_point(tag, _lincomb(c, p, s, v))
        w = _lincomb(s, p, c, v)
        return q, _unit_tangent(tag, q, w)
    if tag == SPHERICAL:
        c = math.cos(t)
        s = math.sin(t)
        q = _project_point(tag, _lincomb(c, p, s, v))
        w = _lincomb(-s, p, c, v)
        return q, _unit_tangent(tag, q, w)
    q = (p[0] + t * v[0], p[1] + t * v[1], p[2] + t * v[2], 1.0)
    return q, (v[0], v[1], v[2], 0.0)


@jit
def _direction_to(tag, p, q):
    """Unit initial tangent at ``p`` of the minimizing geodesic towards ``q``."""
    if tag == HYPERBOLIC:
        # q = cosh(d) p + sinh(d) w  =>  q + <p,q> p = sinh(d) w
        return _normalize(tag, _lincomb(1.0, q, _inner(tag, p, q), p))
    if tag == SPHERICAL:
        return _normalize(tag, _lincomb(1.0, q, -_inner(tag, p, q), p))
    return _normalize(tag, (q[0] - p[0], q[1] - p[1], q[2] - p[2], 0.0))


@jit
def _reflect_tangent(tag, w, n):
    return _lincomb(-1.0, w, 2.0 * _inner(tag, w, n), n)


@jit
def _matvec(m, u):
    return (
        m[0, 0] * u[0] + m[0, 1] * u[1] + m[0, 2] * u[2] + m[0, 3] * u[3],
        m[1, 0] * u[0] + m[1, 1] * u[1] + m[1, 2] * u[2] + m[1, 3] * u[3],
        m[2, 0] * u[0] + m[2, 1] * u[1] + m[2, 2] * u[2] + m[2, 3] * u[3],
        m[3, 0] * u[0] + m[3, 1] * u[1] + m[3, 2] * u[2] + m[3, 3] * u[3],
    )


@jit
def _apply_isometry(tag, m, p, v):
    """Image of a point and a tangent at it; the tangent keeps its g-norm."""
    q = _project_point(tag, _matvec(m, p))
    w = _project_tangent(tag, q, _matvec(m, v))
    n_in = _norm(tag, v)
    n_out = _norm(tag, w)
    if n_out > 0.0:
        w = _scale(n_in / n_out, w)
    return q, w


@jit
def _tangent_frame(tag, p, n):
    """Two unit tangents at ``p`` completing ``n`` to a g-orthonormal frame."""
    dims = 3 if tag == EUCLIDEAN else 4
    best = (0.0, 0.0, 0.0, 0.0)
    best_norm = -1.0
    for k in range(dims):
        e = (1.0 if k == 0 else 0.0, 1.0 if k == 1 else 0.0,
             1.0 if k == 2 else 0.0, 1.0 if k == 3 else 0.0)
        t = _project_tangent(tag, p, e)
        t = _lincomb(1.0, t, -_inner(tag, t, n), n)
        tn = _norm(tag, t)
        if tn > best_norm + 1e-12:
            best = t
            best_norm = tn
    t1 = _scale(1.0 / best_norm, best)
    best_norm = -1.0
    for k in range(dims):
        e = (1.0 if k == 0 else 0.0, 1.0 if k == 1 else 0.0,
             1.0 if k == 2 else 0.0, 1.0 if k == 3 else 0.0)
        t = _project_tangent(tag, p, e)
        t = _lincomb(1.0, t, -_inner(tag, t, n), n)
        t = _lincomb(1.0, t, -_inner(tag, t, t1), t1)
        tn = _norm(tag, t)
        if tn > best_norm + 1e-12:
            best = t
            best_norm = tn
    t2 = _scale(1.0 / best_norm, best)
    return t1, t2


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


def _t4(u):
    a = [float(x) for x in u]
    if len(a) == 3:
        a.append(0.0)
    if len(a) != 4:
        raise ValueError(f"expected 3 or 4 components, got {len(a)}")
    return (a[0], a[1], a[2], a[3])


def _p4(tag, p):
    a = [float(x) for x in p]
    if len(a) == 3 and tag == EUCLIDEAN:
        a.append(1.0)
    if len(a) != 4:
        raise ValueError(f"expected 4 components, got {len(a)}")
    return (a[0], a[1], a[2], a[3])


def inner(tag, u, v) -> float:
    """Metric inner product: 3-component dot (E), Euclidean R^4 (S), Lorentzian (H)."""
    return float(_inner(int(tag), _t4(u), _t4(v)))


def distance(tag, p, q) -> float:
    tag = int(tag)
    return float(_distance(tag, _p4(tag, p), _p4(tag, q)))


def geodesic(tag, p, v, t):
    """Point and unit tangent of the unit-speed geodesic from ``(p, v)`` at time ``t``."""
    tag = int(tag)
    q, w = _geodesic(tag, _p4(tag, p), _t4(v), float(t))
    return np.array(q), np.array(w)


def direction_to(tag, p, q):
    tag = int(tag)
    return np.array(_direction_to(tag, _p4(tag, p), _p4(tag, q)))


def reflect_tangent(tag, w_i, n):
    """Mirror ``w_i`` about the normal: ``-w_i + 2 g(w_i, n) n``."""
    return np.array(_reflect_tangent(int(tag), _t4(w_i), _t4(n)))


def project_point(tag, p):
    """Nearest model point; hyperbolic input may be any future-timelike vector."""
    tag = int(tag)
    q = _p4(tag, p)
    if tag == HYPERBOLIC:
        q = _scale(1.0 / math.sqrt(-_inner(tag, q, q)), q)
    return np.array(_project_point(tag, q))


def project_tangent(tag, p, v):
    tag = int(tag)
    return np.array(_project_tangent(tag, _p4(tag, p), _t4(v)))


def tangent_frame(tag, p, n):
    tag = int(tag)
    t1, t2 = _tangent_frame(tag, _p4(tag, p), _t4(n))
    return np.array(t1), np.array(t2)


def to_klein(p):
    """Hyperboloid point to the Klein ball: ``(x, y, z) / w``."""
    p = np.asarray(p, dtype=float)
    return p[:3] / p[3]


def from_klein(k):
    """Lift a Klein-ball point to the hyperboloid: ``(k, 1) / sqrt(1 - |k|^2)``."""
    k = np.asarray(k, dtype=float)
    r2 = float(k @ k)
    if r2 >= 1.0:
        raise ValueError("Klein coordinates must lie in the open unit ball")
    return np.append(k, 1.0) / math.sqrt(1.0 - r2)


def klein_pushforward(k, d):
    """Tangent vector at ``from_klein(k)`` that is the image of chart direction ``d``."""
    k = np.asarray(k, dtype=float)
    d = np.asarray(d, dtype=float)
    s2 = 1.0 - float(k @ k)
    s = math.sqrt(s2)
    return np.append(d, 0.0) / s + np.append(k, 1.0) * float(k @ d) / (s * s2)


def model_point(tag, chart):
    """Ambient 4-coordinates of a point given in the geometry's authoring chart.

    Euclidean charts are plain 3-coordinates, hyperbolic charts are Klein
    coordinates, spherical points are given directly as unit 4-vectors.
    """
    tag = int(tag)
    if tag == HYPERBOLIC:
        return from_klein(chart)
    if tag == SPHERICAL:
        return project_point(tag, chart)
    c = [float(x) for x in chart]
    return np.array([c[0], c[1], c[2], 1.0])


_LORENTZ = np.diag([1.0, 1.0, 1.0, -1.0])


@dataclass(frozen=True, eq=False)
class Isometry:
    """A 4x4 matrix acting linearly on ambient coordinates of one geometry."""

    matrix: np.ndarray
    tag: GeometryTag

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("isometry matrix must be 4x4")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "tag", GeometryTag(self.tag))

    def __matmul__(self, other: "Isometry") -> "Isometry":
        if other.tag != self.tag:
            raise ValueError("cannot compose isometries of different geometries")
        return Isometry(self.matrix @ other.matrix, self.tag)

    def inverse(self) -> "Isometry":
        return Isometry(np.linalg.inv(self.matrix), self.tag)

    def preserves_metric(self, tol: float = EPS_MANIFOLD) -> bool:
        m = self.matrix
        if self.tag == GeometryTag.HYPERBOLIC:
            return bool(np.allclose(m.T @ _LORENTZ @ m, _LORENTZ, atol=tol, rtol=0))
        if self.tag == GeometryTag.SPHERICAL:
            return bool(np.allclose(m.T @ m, np.eye(4), atol=tol, rtol=0))
        lin = m[:3, :3]
        return bool(np.allclose(lin.T @ lin, np.eye(3), atol=tol, rtol=0)
                    and np.allclose(m[3], [0, 0, 0, 1], atol=tol, rtol=0))


def identity(tag) -> Isometry:
    return Isometry(np.eye(4), tag)


def translation(offset) -> Isometry:
    m = np.eye(4)
    m[:3, 3] = [float(x) for x in offset]
    return Isometry(m, GeometryTag.EUCLIDEAN)


def lorentz_boost(axis: int, rapidity: float) -> Isometry:
    """Hyperbolic translation along a coordinate axis through the origin."""
    m = np.eye(4)
    c, s = math.cosh(rapidity), math.sinh(rapidity)
    m[axis, axis] = c
    m[3, 3] = c
    m[axis, 3] = s
    m[3, axis] = s
    return Isometry(m, GeometryTag.HYPERBOLIC)


def hyperbolic_reflection(normal) -> Isometry:
    """Reflection in the plane with spacelike Lorentz normal ``n``.

    ``x -> x - 2 <x, n> / <n, n> n``
    """
    n = np.asarray(normal, dtype=float)
    nn = float(n @ _LORENTZ @ n)
    if nn <= 0.0:
        raise ValueError("plane normal must be spacelike")
    return Isometry(np.eye(4) - 2.0 * np.outer(n, _LORENTZ @ n) / nn,
                    GeometryTag.HYPERBOLIC)


def apply_isometry(m: Isometry, p, v=None):
    """Apply ``m`` to a point, or to a point and a tangent vector at it."""
    tag = int(m.tag)
    p4 = _p4(tag, p)
    if v is None:
        return np.array(_project_point(tag, _matvec(m.matrix, p4)))
    q, w = _apply_isometry(tag, m.matrix, p4, _t4(v))
    return np.array(q), np.array(w)
