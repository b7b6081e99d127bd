"""Direct lighting, hemisphere sampling and the Monte Carlo path estimator.

Every inner product goes through the metric of the scene's model geometry,
so the same code shades Euclidean, hyperbolic and spherical scenes.

Random numbers come from a counter-based generator: each draw is a hash of
(seed, pixel, sample, bounce, dimension), so a pixel's value never depends
on which worker rendered it or in what order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from ._jit import jit
from .quotient import EPS_STEP
from .scene import Scene, compile_scene
from .tracer import DEFAULT_MAXLEVEL, _nearest_light_copy, _occluded, _trace

INV_PI = 1.0 / math.pi

_M32 = 0xFFFFFFFF


@dataclass(frozen=True)
class RenderSettings:
    spp: int = 16
    depth: int = 5
    maxlevel: int = DEFAULT_MAXLEVEL
    seed: int = 0
    indirect_enabled: bool = True

    def __post_init__(self):
        if self.spp < 1:
            raise ValueError("spp must be >= 1")
        if self.maxlevel < 0:
            raise ValueError("maxlevel must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


# --------------------------------------------------------------------------
# counter-based random numbers
# --------------------------------------------------------------------------


@jit
def _hash_a(x):
    # lowbias32 (C. Wellons)
    x &= _M32
    x ^= x >> 16
    x = (x * 0x7FEB352D) & _M32
    x ^= x >> 15
    x = (x * 0x846CA68B) & _M32
    x ^= x >> 16
    return x


@jit
def _hash_b(x):
    # triple32 (C. Wellons)
    x &= _M32
    x ^= x >> 17
    x = (x * 0xED5AD4BB) & _M32
    x ^= x >> 11
    x = (x * 0xAC4C1B51) & _M32
    x ^= x >> 15
    x = (x * 0x31848BAB) & _M32
    x ^= x >> 14
    return x


@jit
def _path_key(seed_lo, seed_hi, pixel, sample):
    """Two independent 32-bit lanes identifying one camera path."""
    k1 = _hash_a(seed_lo ^ _hash_a(seed_hi ^ 0x9E3779B9))
    k2 = _hash_b(seed_hi ^ _hash_b(seed_lo ^ 0x85EBCA6B))
    k1 = _hash_a(k1 ^ (pixel & _M32))
    k2 = _hash_b(k2 ^ ((pixel >> 32) & _M32) ^ _hash_b(pixel & _M32))
    k1 = _hash_a(k1 ^ (sample & _M32))
    k2 = _hash_b(k2 ^ _hash_a(sample & _M32))
    return k1, k2


@jit
def _uniform(k1, k2, bounce, dim):
    """Float in [0, 1) with 53 random bits for draw ``dim`` at vertex ``bounce``."""
    c = (bounce * 16 + dim) & _M32
    a = _hash_a(k1 ^ _hash_b(c))
    b = _hash_b(k2 ^ _hash_a(c ^ 0x632BE5AB))
    return ((a >> 5) * 67108864.0 + (b >> 6)) / 9007199254740992.0


def split_seed(seed: int):
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return seed & _M32, seed >> 32


@dataclass(frozen=True)
class PathRNG:
    """The random stream of one (seed, pixel, sample) path."""

    seed: int
    pixel: int = 0
    sample: int = 0

    @property
    def key(self):
        lo, hi = split_seed(self.seed)
        return _path_key(lo, hi, int(self.pixel), int(self.sample))

    def uniform(self, bounce: int, dim: int) -> float:
        k1, k2 = self.key
        return float(_uniform(k1, k2, int(bounce), int(dim)))


# --------------------------------------------------------------------------
# shading kernels
# --------------------------------------------------------------------------


@jit
def _brdf(sc, obj, n, view, w):
    """Phong-style BRDF; each lobe integrates to at most its coefficient."""
    tag = sc.tag
    ke = sc.mat_ke[obj]
    cs = geo._inner(tag, geo._reflect_tangent(tag, w, n), view)
    lobe = 0.0
    if cs > 0.0:
        lobe = (ke + 2.0) * 0.5 * INV_PI * min(cs, 1.0) ** ke
    return (sc.mat_kd[obj, 0] * INV_PI + sc.mat_ks[obj, 0] * lobe,
            sc.mat_kd[obj, 1] * INV_PI + sc.mat_ks[obj, 1] * lobe,
            sc.mat_kd[obj, 2] * INV_PI + sc.mat_ks[obj, 2] * lobe)


@jit
def _direct(sc, obj, x, n, view, include_ambient, maxlevel):
    """Point-light shading with g in place of the dot product, shadows included."""
    tag = sc.tag
    r = 0.0
    g = 0.0
    b = 0.0
    if include_ambient:
        r = sc.mat_ka[obj, 0] * sc.ambient[0]
        g = sc.mat_ka[obj, 1] * sc.ambient[1]
        b = sc.mat_ka[obj, 2] * sc.ambient[2]
    ke = sc.mat_ke[obj]
    for j in range(sc.light_pos.shape[0]):
        target, _ = _nearest_light_copy(sc, x, j)
        wi = geo._direction_to(tag, x, target)
        cos_i = geo._inner(tag, wi, n)
        if cos_i <= 0.0:
            continue
        if _occluded(sc, x, n, target, maxlevel):
            continue
        if cos_i > 1.0:
            cos_i = 1.0
        cs = geo._inner(tag, geo._reflect_tangent(tag, wi, n), view)
        spec = 0.0
        if cs > 0.0:
            spec = min(cs, 1.0) ** ke
        r += sc.light_int[j, 0] * (sc.mat_kd[obj, 0] * cos_i + sc.mat_ks[obj, 0] * spec)
        g += sc.light_int[j, 1] * (sc.mat_kd[obj, 1] * cos_i + sc.mat_ks[obj, 1] * spec)
        b += sc.light_int[j, 2] * (sc.mat_kd[obj, 2] * cos_i + sc.mat_ks[obj, 2] * spec)
    return r, g, b


@jit
def _sample_cosine(tag, x, n, u1, u2):
    """Cosine-weighted direction around ``n`` in T_x M, with density g(w, n) / pi."""
    t1, t2 = geo._tangent_frame(tag, x, n)
    r = math.sqrt(u1)
    phi = 2.0 * math.pi * u2
    a = r * math.cos(phi)
    b = r * math.sin(phi)
    c = math.sqrt(max(0.0, 1.0 - u1))
    w = (a * t1[0] + b * t2[0] + c * n[0], a * t1[1] + b * t2[1] + c * n[1],
         a * t1[2] + b * t2[2] + c * n[2], a * t1[3] + b * t2[3] + c * n[3])
    return geo._unit_tangent(tag, x, w), c * INV_PI


@jit
def _path(sc, p, v, depth, maxlevel, k1, k2):
    """Radiance arriving at ``p`` from direction ``v`` with ``depth`` further bounces.

    Iterative form of the recursive indirect estimator with one sample per
    bounce; direct light is counted once at every path vertex.
    """
    tag = sc.tag
    lr = 0.0
    lg = 0.0
    lb = 0.0
    br = 1.0
    bg = 1.0
    bb = 1.0
    for k in range(depth + 1):
        status, _, x, w, n, _ = _trace(sc, p, v, EPS_STEP, math.inf, maxlevel)
        if status < 0:
            break
        view = geo._scale(-1.0, w)
        dr, dg, db = _direct(sc, status, x, n, view, False, maxlevel)
        lr += br * (sc.mat_em[status, 0] + dr)
        lg += bg * (sc.mat_em[status, 1] + dg)
        lb += bb * (sc.mat_em[status, 2] + db)
        if k == depth:
            break
        u1 = _uniform(k1, k2, k + 1, 0)
        u2 = _uniform(k1, k2, k + 1, 1)
        wi, pdf = _sample_cosine(tag, x, n, u1, u2)
        cos_i = geo._inner(tag, wi, n)
        if pdf <= 0.0 or cos_i <= 0.0:
            break
        fr, fg, fb = _brdf(sc, status, n, view, wi)
        s = cos_i / pdf
        br *= fr * s
        bg *= fg * s
        bb *= fb * s
        if br == 0.0 and bg == 0.0 and bb == 0.0:
            break
        p = x
        v = wi
    return lr, lg, lb


@jit
def _radiance(sc, p, v, depth, maxlevel, indirect, k1, k2):
    if indirect:
        return _path(sc, p, v, depth, maxlevel, k1, k2)
    status, _, x, w, n, _ = _trace(sc, p, v, EPS_STEP, math.inf, maxlevel)
    if status < 0:
        return 0.0, 0.0, 0.0
    dr, dg, db = _direct(sc, status, x, n, geo._scale(-1.0, w), True, maxlevel)
    return (sc.mat_em[status, 0] + dr, sc.mat_em[status, 1] + dg, sc.mat_em[status, 2] + db)


@jit
def _sample_many(tag, x, n, us):
    out = np.empty((us.shape[0], 4))
    pdf = np.empty(us.shape[0])
    for i in range(us.shape[0]):
        w, d = _sample_cosine(tag, x, n, us[i, 0], us[i, 1])
        out[i, 0] = w[0]
        out[i, 1] = w[1]
        out[i, 2] = w[2]
        out[i, 3] = w[3]
        pdf[i] = d
    return out, pdf


@jit
def _brdf_many(sc, obj, n, view, ws):
    out = np.empty((ws.shape[0], 3))
    for i in range(ws.shape[0]):
        f = _brdf(sc, obj, n, view, (ws[i, 0], ws[i, 1], ws[i, 2], ws[i, 3]))
        out[i, 0] = f[0]
        out[i, 1] = f[1]
        out[i, 2] = f[2]
    return out


@jit
def _path_many(sc, p, v, depth, maxlevel, seed_lo, seed_hi, pixel, n):
    out = np.empty((n, 3))
    for s in range(n):
        k1, k2 = _path_key(seed_lo, seed_hi, pixel, s)
        c = _path(sc, p, v, depth, maxlevel, k1, k2)
        out[s, 0] = c[0]
        out[s, 1] = c[1]
        out[s, 2] = c[2]
    return out


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HemisphereSample:
    w: np.ndarray
    pdf: float


def _sc(scene, arrays):
    return arrays if arrays is not None else compile_scene(scene)


def brdf(scene: Scene, object_index: int, normal, view, w, arrays=None) -> np.ndarray:
    sc = _sc(scene, arrays)
    return np.array(_brdf(sc, int(object_index), geo._t4(normal), geo._t4(view), geo._t4(w)))


def direct_illumination(scene: Scene, hit, view, *, include_ambient: bool = True,
                        maxlevel: int = DEFAULT_MAXLEVEL, arrays=None) -> np.ndarray:
    """Local illumination at a hit seen from unit direction ``view`` (towards the viewer)."""
    sc = _sc(scene, arrays)
    tag = sc.tag
    return np.array(_direct(sc, hit.object_index, geo._p4(tag, hit.point), geo._t4(hit.normal),
                            geo._t4(view), bool(include_ambient), int(maxlevel)))


def sample_hemisphere(tag, p, normal, rng) -> HemisphereSample:
    """One cosine-weighted direction around ``normal``.

    ``rng`` is a :class:`numpy.random.Generator` or a ``(u1, u2)`` pair.
    """
    tag = int(tag)
    if isinstance(rng, np.random.Generator):
        u1, u2 = rng.random(2)
    else:
        u1, u2 = rng
    w, pdf = _sample_cosine(tag, geo._p4(tag, p), geo._t4(normal), float(u1), float(u2))
    return HemisphereSample(np.array(w), float(pdf))


def sample_hemisphere_many(tag, p, normal, rng: np.random.Generator, n: int):
    """``n`` cosine-weighted directions as arrays ``(w[n, 4], pdf[n])``."""
    tag = int(tag)
    return _sample_many(tag, geo._p4(tag, p), geo._t4(normal), rng.random((n, 2)))


def indirect_illumination(scene: Scene, p, v, depth: int, rng: PathRNG, c=(0.0, 0.0, 0.0), *,
                          maxlevel: int = DEFAULT_MAXLEVEL, arrays=None) -> np.ndarray:
    """Path-traced radiance along the ray ``(p, v)`` with ``depth`` bounces, added to ``c``.

    ``depth < 0`` adds nothing.
    """
    sc = _sc(scene, arrays)
    k1, k2 = rng.key
    if depth < 0:
        return np.asarray(c, dtype=float)
    L = _path(sc, geo._p4(sc.tag, p), geo._t4(v), int(depth), int(maxlevel), k1, k2)
    return np.asarray(c, dtype=float) + np.array(L)


def indirect_samples(scene: Scene, p, v, depth: int, seed: int, n: int, *,
                     pixel: int = 0, maxlevel: int = DEFAULT_MAXLEVEL, arrays=None) -> np.ndarray:
    """``n`` independent estimates (sample indices 0..n-1) as an ``(n, 3)`` array."""
    sc = _sc(scene, arrays)
    lo, hi = split_seed(seed)
    return _path_many(sc, geo._p4(sc.tag, p), geo._t4(v), int(depth), int(maxlevel),
                      lo, hi, int(pixel), int(n))


def radiance(scene: Scene, p, v, settings: RenderSettings, rng: PathRNG, arrays=None) -> np.ndarray:
    """Emission + direct (+ indirect when enabled) radiance along ``(p, v)``; black on a miss."""
    sc = _sc(scene, arrays)
    k1, k2 = rng.key
    return np.array(_radiance(sc, geo._p4(sc.tag, p), geo._t4(v), int(settings.depth),
                              int(settings.maxlevel), bool(settings.indirect_enabled), k1, k2))


def hemispherical_reflectance(scene: Scene, object_index: int, p, normal, view,
                              rng: np.random.Generator, n: int = 100_000, arrays=None):
    """MC estimate of ``integral f_r(view, w) g(w, N) dw`` per channel, with its standard error.

    Uses cosine-weighted directions, so each sample contributes ``pi f_r``.
    """
    sc = _sc(scene, arrays)
    tag = sc.tag
    ws, _ = sample_hemisphere_many(tag, p, normal, rng, n)
    vals = math.pi * _brdf_many(sc, int(object_index), geo._t4(normal), geo._t4(view), ws)
    return vals.mean(axis=0), vals.std(axis=0, ddof=1) / math.sqrt(n)
