"""Camera rays, the per-pixel render loop, and PPM output."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from ._jit import jit
from .integrator import RenderSettings, _path_key, _radiance, _uniform, split_seed
from .quotient import EPS_STEP
from .scene import Camera, Scene, build_camera, compile_scene
from .tracer import Ray, _trace

TILE = 16


@dataclass(frozen=True, eq=False)
class Image:
    width: int
    height: int
    data: np.ndarray  # (height, width, 3) linear RGB

    def mean_luminance(self) -> float:
        d = self.data
        return float(np.mean(0.2126 * d[..., 0] + 0.7152 * d[..., 1] + 0.0722 * d[..., 2]))


@jit
def _camera_ray(tag, o, right, up, fwd, tan_half, aspect, width, height, fx, fy):
    """Pinhole ray through film position (fx, fy) in pixel units."""
    sx = (2.0 * fx / width - 1.0) * tan_half * aspect
    sy = (1.0 - 2.0 * fy / height) * tan_half
    d = (fwd[0] + sx * right[0] + sy * up[0], fwd[1] + sx * right[1] + sy * up[1],
         fwd[2] + sx * right[2] + sy * up[2], fwd[3] + sx * right[3] + sy * up[3])
    return geo._unit_tangent(tag, o, d)


@jit
def _render_tile(sc, o, right, up, fwd, tan_half, width, height, x0, y0, x1, y1,
                 spp, depth, maxlevel, indirect, seed_lo, seed_hi, out):
    tag = sc.tag
    aspect = width / height
    strata = int(math.sqrt(spp))
    while (strata + 1) * (strata + 1) <= spp:
        strata += 1
    full = strata * strata
    for j in range(y0, y1):
        for i in range(x0, x1):
            pixel = j * width + i
            r = 0.0
            g = 0.0
            b = 0.0
            for s in range(spp):
                k1, k2 = _path_key(seed_lo, seed_hi, pixel, s)
                u = _uniform(k1, k2, 0, 0)
                v = _uniform(k1, k2, 0, 1)
                if s < full:
                    u = (s % strata + u) / strata
                    v = (s // strata + v) / strata
                d = _camera_ray(tag, o, right, up, fwd, tan_half, aspect, width, height,
                                i + u, j + v)
                c = _radiance(sc, o, d, depth, maxlevel, indirect, k1, k2)
                r += c[0]
                g += c[1]
                b += c[2]
            out[j, i, 0] = r / spp
            out[j, i, 1] = g / spp
            out[j, i, 2] = b / spp


@jit
def _primary_tile(sc, o, right, up, fwd, tan_half, width, height, x0, y0, x1, y1,
                  maxlevel, obj_out, level_out):
    tag = sc.tag
    aspect = width / height
    for j in range(y0, y1):
        for i in range(x0, x1):
            d = _camera_ray(tag, o, right, up, fwd, tan_half, aspect, width, height,
                            i + 0.5, j + 0.5)
            res = _trace(sc, o, d, EPS_STEP, math.inf, maxlevel)
            obj_out[j, i] = res[0]
            level_out[j, i] = res[5] if res[0] >= 0 else -1


def tiles(width: int, height: int, size: int = TILE):
    """Row-major list of (x0, y0, x1, y1) tiles covering the image exactly once."""
    return [(x, y, min(x + size, width), min(y + size, height))
            for y in range(0, height, size) for x in range(0, width, size)]


def resolve_threads(threads) -> int:
    if threads in (None, "auto", 0):
        return os.cpu_count() or 1
    n = int(threads)
    if n < 1:
        raise ValueError("threads must be >= 1 or 'auto'")
    return n


def _camera_args(cam: Camera):
    return (geo._p4(cam.tag, cam.origin), geo._t4(cam.right), geo._t4(cam.up),
            geo._t4(cam.forward), math.tan(0.5 * cam.vfov))


def generate_camera_ray(camera: Camera, pixel, jitter, width: int, height: int) -> Ray:
    """Ray from the camera origin through pixel ``(i, j)`` offset by ``jitter`` in [0, 1)^2."""
    i, j = pixel
    u, v = jitter
    o, r, up, f, tan_half = _camera_args(camera)
    d = _camera_ray(camera.tag, o, r, up, f, tan_half, width / height, float(width),
                    float(height), i + float(u), j + float(v))
    return Ray(np.array(o), np.array(d), camera.tag)


def _run_tiles(fn, width, height, threads):
    jobs = tiles(width, height)
    n = resolve_threads(threads)
    if n == 1:
        for t in jobs:
            fn(t)
        return
    with ThreadPoolExecutor(max_workers=n) as pool:
        # tiles write disjoint pixel ranges, so no locking is needed
        list(pool.map(fn, jobs))


def render(scene: Scene, settings: RenderSettings, width: int, height: int,
           threads="auto") -> Image:
    """Average ``spp`` stratified radiance samples per pixel."""
    if width < 1 or height < 1:
        raise ValueError("image size must be positive")
    sc = compile_scene(scene)
    o, r, up, f, tan_half = _camera_args(build_camera(scene))
    lo, hi = split_seed(settings.seed)
    out = np.zeros((height, width, 3))

    def work(t):
        _render_tile(sc, o, r, up, f, tan_half, width, height, t[0], t[1], t[2], t[3],
                     settings.spp, settings.depth, settings.maxlevel,
                     settings.indirect_enabled, lo, hi, out)

    _run_tiles(work, width, height, threads)
    return Image(width, height, out)


def primary_hits(scene: Scene, width: int, height: int, maxlevel: int, threads="auto"):
    """Object index and domain-crossing count of the primary hit at every pixel centre.

    Misses are -1 in both arrays.
    """
    sc = compile_scene(scene)
    o, r, up, f, tan_half = _camera_args(build_camera(scene))
    obj = np.full((height, width), -1, dtype=np.int64)
    level = np.full((height, width), -1, dtype=np.int64)

    def work(t):
        _primary_tile(sc, o, r, up, f, tan_half, width, height, t[0], t[1], t[2], t[3],
                      int(maxlevel), obj, level)

    _run_tiles(work, width, height, threads)
    return obj, level


def encode_ppm(image: Image) -> bytes:
    """Binary P6 bytes: clamp to [0, 1], gamma 1/2.2, round half up to 8 bits."""
    c = np.clip(image.data, 0.0, 1.0) ** (1.0 / 2.2)
    payload = np.floor(255.0 * c + 0.5).astype(np.uint8)
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + payload.tobytes()


def write_ppm(image: Image, path) -> None:
    data = encode_ppm(image)
    with open(path, "wb") as fh:
        fh.write(data)
