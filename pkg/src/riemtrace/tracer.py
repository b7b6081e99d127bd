"""Geodesic ray casting through a quotient manifold.

A ray is intersected with the scene inside the fundamental domain up to the
domain exit time; if nothing is hit it is carried through the exit face by
the face pairing and the search repeats, at most ``maxlevel`` times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from ._jit import jit
from .geometry import EUCLIDEAN, HYPERBOLIC, SPHERICAL
from .quotient import EPS_STEP, _domain_exit
from .scene import Scene, compile_scene

DEFAULT_MAXLEVEL = 8

MISS = -1
EXHAUSTED = -2

SPHERE = 0
QUAD = 1
TUBE = 2

_ZERO4 = (0.0, 0.0, 0.0, 0.0)


@jit
def _solve_cosh_sinh(a, b, k):
    """Real roots s of ``a cosh s + b sinh s = k`` as (count, s1, s2), s1 <= s2.

    With u = e^s this is ``(a+b) u^2 - 2k u + (a-b) = 0``; only u > 0 counts.
    """
    qa = a + b
    qb = -2.0 * k
    qc = a - b
    u1 = -1.0
    u2 = -1.0
    scale = abs(a) + abs(b) + abs(k)
    if abs(qa) <= 1e-14 * scale:
        if qb != 0.0:
            u1 = -qc / qb
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0.0:
            return 0, math.nan, math.nan
        sq = math.sqrt(disc)
        q = -0.5 * (qb + sq) if qb >= 0.0 else -0.5 * (qb - sq)
        if q != 0.0:
            u1 = q / qa
            u2 = qc / q
        else:
            u1 = 0.0
    n = 0
    s1 = math.nan
    s2 = math.nan
    if u1 > 0.0:
        s1 = math.log(u1)
        n = 1
    if u2 > 0.0:
        if n == 0:
            s1 = math.log(u2)
            n = 1
        else:
            s2 = math.log(u2)
            n = 2
            if s2 < s1:
                s1, s2 = s2, s1
    return n, s1, s2


@jit
def _intersect_sphere(tag, p, v, c, radius, tmin, tmax):
    """Smallest t in (tmin, tmax] with distance(c, r(t)) = radius, else inf."""
    if tag == EUCLIDEAN:
        ox = p[0] - c[0]
        oy = p[1] - c[1]
        oz = p[2] - c[2]
        b = ox * v[0] + oy * v[1] + oz * v[2]
        cc = ox * ox + oy * oy + oz * oz - radius * radius
        disc = b * b - cc
        if disc < 0.0:
            return math.inf
        sq = math.sqrt(disc)
        t = -b - sq
        if t > tmin and t <= tmax:
            return t
        t = -b + sq
        if t > tmin and t <= tmax:
            return t
        return math.inf
    if tag == HYPERBOLIC:
        n, s1, s2 = _solve_cosh_sinh(geo._inner(tag, p, c), geo._inner(tag, v, c),
                                     -math.cosh(radius))
        if n >= 1 and s1 > tmin and s1 <= tmax:
            return s1
        if n == 2 and s2 > tmin and s2 <= tmax:
            return s2
        return math.inf
    # spherical: A cos t + B sin t = cos R, i.e. rho cos(t - phi) = cos R
    a = geo._inner(tag, p, c)
    b = geo._inner(tag, v, c)
    rho = math.sqrt(a * a + b * b)
    k = math.cos(radius)
    if rho == 0.0 or abs(k) > rho:
        return math.inf
    phi = math.atan2(b, a)
    delta = math.acos(k / rho)
    best = math.inf
    two_pi = 2.0 * math.pi
    for t0 in (phi - delta, phi + delta):
        t = t0 - two_pi * math.floor((t0 - tmin) / two_pi)
        if t <= tmin:
            t += two_pi
        if t <= tmax and t < best:
            best = t
    return best


@jit
def _intersect_quad(p, v, corner, eu, ev, n, tmin, tmax):
    denom = n[0] * v[0] + n[1] * v[1] + n[2] * v[2]
    if abs(denom) < 1e-14:
        return math.inf
    t = (n[0] * (corner[0] - p[0]) + n[1] * (corner[1] - p[1])
         + n[2] * (corner[2] - p[2])) / denom
    if not (t > tmin and t <= tmax):
        return math.inf
    wx = p[0] + t * v[0] - corner[0]
    wy = p[1] + t * v[1] - corner[1]
    wz = p[2] + t * v[2] - corner[2]
    # (eu x ev) . n
    cx = eu[1] * ev[2] - eu[2] * ev[1]
    cy = eu[2] * ev[0] - eu[0] * ev[2]
    cz = eu[0] * ev[1] - eu[1] * ev[0]
    area = cx * n[0] + cy * n[1] + cz * n[2]
    # (w x ev) . n and (eu x w) . n
    a = ((wy * ev[2] - wz * ev[1]) * n[0] + (wz * ev[0] - wx * ev[2]) * n[1]
         + (wx * ev[1] - wy * ev[0]) * n[2]) / area
    b = ((eu[1] * wz - eu[2] * wy) * n[0] + (eu[2] * wx - eu[0] * wz) * n[1]
         + (eu[0] * wy - eu[1] * wx) * n[2]) / area
    if a < 0.0 or a > 1.0 or b < 0.0 or b > 1.0:
        return math.inf
    return t


@jit
def _tube_coords(tag, x, a, t):
    """(alpha, beta) with x's projection on the line a,t at parameter atanh(beta/alpha)."""
    return -geo._inner(tag, x, a), geo._inner(tag, x, t)


@jit
def _intersect_tube(tag, p, v, a, t, length, radius, tmin, tmax):
    """Hyperbolic tube of radius ``radius`` around the geodesic segment a + s t, s in [0, length].

    cosh^2 d(x, line) = <x,a>^2 - <x,t>^2; along the ray this becomes
    ``P cosh 2s + Q sinh 2s = K`` which is solved in closed form.
    """
    a1 = geo._inner(tag, p, a)
    b1 = geo._inner(tag, v, a)
    a2 = geo._inner(tag, p, t)
    b2 = geo._inner(tag, v, t)
    al = a1 * a1 - a2 * a2
    be = b1 * b1 - b2 * b2
    ch = math.cosh(radius)
    n, s1, s2 = _solve_cosh_sinh(0.5 * (al + be), a1 * b1 - a2 * b2,
                                 ch * ch - 0.5 * (al - be))
    best = math.inf
    for k in range(n):
        s = s1 if k == 0 else s2
        tt = 0.5 * s
        if tt > tmin and tt <= tmax and tt < best:
            x, _ = geo._geodesic(tag, p, v, tt)
            alpha, beta = _tube_coords(tag, x, a, t)
            sig = math.atanh(beta / alpha)
            if sig >= 0.0 and sig <= length:
                best = tt
    return best


@jit
def _closest_hit(sc, p, v, tmin, tmax):
    tag = sc.tag
    best = tmax
    kind = -1
    idx = -1
    for i in range(sc.sph_radius.shape[0]):
        c = (sc.sph_center[i, 0], sc.sph_center[i, 1], sc.sph_center[i, 2], sc.sph_center[i, 3])
        t = _intersect_sphere(tag, p, v, c, sc.sph_radius[i], tmin, best)
        if t < math.inf:
            best = t
            kind = SPHERE
            idx = i
    for i in range(sc.quad_obj.shape[0]):
        t = _intersect_quad(
            p, v,
            (sc.quad_corner[i, 0], sc.quad_corner[i, 1], sc.quad_corner[i, 2], 1.0),
            (sc.quad_u[i, 0], sc.quad_u[i, 1], sc.quad_u[i, 2], 0.0),
            (sc.quad_v[i, 0], sc.quad_v[i, 1], sc.quad_v[i, 2], 0.0),
            (sc.quad_normal[i, 0], sc.quad_normal[i, 1], sc.quad_normal[i, 2], 0.0),
            tmin, best)
        if t < math.inf:
            best = t
            kind = QUAD
            idx = i
    for i in range(sc.tube_obj.shape[0]):
        t = _intersect_tube(
            tag, p, v,
            (sc.tube_a[i, 0], sc.tube_a[i, 1], sc.tube_a[i, 2], sc.tube_a[i, 3]),
            (sc.tube_t[i, 0], sc.tube_t[i, 1], sc.tube_t[i, 2], sc.tube_t[i, 3]),
            sc.tube_len[i], sc.tube_radius[i], tmin, best)
        if t < math.inf:
            best = t
            kind = TUBE
            idx = i
    return best, kind, idx


@jit
def _sphere_normal(tag, x, c):
    """Outward unit normal at ``x`` of the geodesic sphere centred at ``c``."""
    if tag == EUCLIDEAN:
        return geo._normalize(tag, (x[0] - c[0], x[1] - c[1], x[2] - c[2], 0.0))
    return geo._scale(-1.0, geo._direction_to(tag, x, c))


@jit
def _hit_normal(sc, kind, idx, x, w):
    tag = sc.tag
    if kind == SPHERE:
        c = (sc.sph_center[idx, 0], sc.sph_center[idx, 1], sc.sph_center[idx, 2], sc.sph_center[idx, 3])
        return _sphere_normal(tag, x, c)
    if kind == QUAD:
        n = (sc.quad_normal[idx, 0], sc.quad_normal[idx, 1], sc.quad_normal[idx, 2], 0.0)
        # two-sided: face the incoming ray
        if geo._inner(tag, n, w) > 0.0:
            n = geo._scale(-1.0, n)
        return n
    a = (sc.tube_a[idx, 0], sc.tube_a[idx, 1], sc.tube_a[idx, 2], sc.tube_a[idx, 3])
    t = (sc.tube_t[idx, 0], sc.tube_t[idx, 1], sc.tube_t[idx, 2], sc.tube_t[idx, 3])
    alpha, beta = _tube_coords(tag, x, a, t)
    # foot of the perpendicular; alpha a + beta t has norm -cosh^2 d
    ch = math.sqrt(alpha * alpha - beta * beta)
    y = geo._lincomb(alpha / ch, a, beta / ch, t)
    return geo._scale(-1.0, geo._direction_to(tag, x, y))


@jit
def _hit_object(sc, kind, idx):
    if kind == SPHERE:
        return sc.sph_obj[idx]
    if kind == QUAD:
        return sc.quad_obj[idx]
    return sc.tube_obj[idx]


@jit
def _trace(sc, p, v, tmin, tmax, maxlevel):
    """Closest hit along the geodesic within cumulative length ``tmax``.

    Returns (status, t, point, tangent, normal, level); status is the object
    index, MISS, or EXHAUSTED when ``maxlevel`` domain crossings ran out.
    """
    tag = sc.tag
    t_acc = 0.0
    level = 0
    nfaces = sc.face_normals.shape[0]
    while True:
        t_exit = math.inf
        face = -1
        if nfaces > 0:
            t_exit, face = _domain_exit(tag, sc.face_normals, sc.face_offsets, p, v)
        remaining = tmax - t_acc
        seg = t_exit if t_exit < remaining else remaining
        t, kind, idx = _closest_hit(sc, p, v, tmin, seg)
        if kind >= 0:
            x, w = geo._geodesic(tag, p, v, t)
            n = _hit_normal(sc, kind, idx, x, w)
            return _hit_object(sc, kind, idx), t_acc + t, x, w, n, level
        if face < 0 or t_exit >= remaining:
            return MISS, t_acc, p, v, _ZERO4, level
        if level >= maxlevel:
            return EXHAUSTED, t_acc, p, v, _ZERO4, level
        xe, ve = geo._geodesic(tag, p, v, t_exit)
        p, v = geo._apply_isometry(tag, sc.face_pairings[face], xe, ve)
        t_acc += t_exit
        level += 1


@jit
def _nearest_light_copy(sc, p, light):
    """The image of light ``light`` under the neighbor isometries closest to ``p``."""
    tag = sc.tag
    lp = (sc.light_pos[light, 0], sc.light_pos[light, 1], sc.light_pos[light, 2], sc.light_pos[light, 3])
    best_d = math.inf
    best = lp
    for k in range(sc.neighbors.shape[0]):
        q = geo._project_point(tag, geo._matvec(sc.neighbors[k], lp))
        d = geo._distance(tag, p, q)
        if d < best_d:
            best_d = d
            best = q
    return best, best_d


@jit
def _occluded(sc, p, n, target, maxlevel):
    """Shadow test from surface point ``p`` (normal ``n``) to the point ``target``.

    A connection that needs more than ``maxlevel`` domain crossings counts as
    blocked.
    """
    tag = sc.tag
    po, _ = geo._geodesic(tag, p, n, EPS_STEP)
    d = geo._distance(tag, po, target)
    w = geo._direction_to(tag, po, target)
    res = _trace(sc, po, w, EPS_STEP, d, maxlevel)
    return res[0] != MISS


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Ray:
    p: np.ndarray
    v: np.ndarray
    tag: int


@dataclass(frozen=True, eq=False)
class HitRecord:
    object_id: str
    object_index: int
    t_hit: float
    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    transport_level: int


def _arrays(scene):
    return scene if not isinstance(scene, Scene) else compile_scene(scene)


def intersect_sphere(tag, p, v, center, radius, tmin: float = EPS_STEP):
    """Smallest positive hit time of the geodesic ray with a geodesic sphere, or None."""
    tag = int(tag)
    t = _intersect_sphere(tag, geo._p4(tag, p), geo._t4(v), geo._p4(tag, center),
                          float(radius), float(tmin), math.inf)
    return None if math.isinf(t) else float(t)


def trace_ray(scene: Scene, p, v, maxlevel: int = DEFAULT_MAXLEVEL, *,
              tmax: float = math.inf, tmin: float = EPS_STEP, arrays=None):
    """Closest object hit from ``(p, v)`` through at most ``maxlevel`` domain crossings.

    Returns a :class:`HitRecord` or ``None``.
    """
    sc = arrays if arrays is not None else compile_scene(scene)
    tag = sc.tag
    status, t, x, w, n, level = _trace(sc, geo._p4(tag, p), geo._t4(v), float(tmin),
                                       float(tmax), int(maxlevel))
    if status < 0:
        return None
    return HitRecord(
        object_id=scene.objects[status].id,
        object_index=int(status),
        t_hit=float(t),
        point=np.array(x),
        tangent=np.array(w),
        normal=np.array(n),
        transport_level=int(level),
    )


def light_connection(scene: Scene, p, light_index: int, arrays=None):
    """Nearest copy of a light as seen from ``p`` and its distance."""
    sc = arrays if arrays is not None else compile_scene(scene)
    q, d = _nearest_light_copy(sc, geo._p4(sc.tag, p), int(light_index))
    return np.array(q), float(d)


def occluded(scene: Scene, p, normal, light_index: int,
             maxlevel: int = DEFAULT_MAXLEVEL, arrays=None) -> bool:
    """Whether the connection from surface point ``p`` to the nearest light copy is blocked."""
    sc = arrays if arrays is not None else compile_scene(scene)
    tag = sc.tag
    p4 = geo._p4(tag, p)
    target, _ = _nearest_light_copy(sc, p4, int(light_index))
    return bool(_occluded(sc, p4, geo._t4(normal), target, int(maxlevel)))
