"""Scene description, validation and the JSON scene format.

Positions are stored exactly as authored, in the chart of the manifold's
model geometry: plain coordinates for Euclidean manifolds, Klein-ball
coordinates for hyperbolic ones.  :func:`compile_scene` lifts everything to
ambient 4-coordinates and packs it into flat arrays for the kernels.
"""

from __future__ import annotations

import json
import math
from collections import namedtuple
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from . import geometry as geo
from . import quotient
from .geometry import EUCLIDEAN, HYPERBOLIC

ORTHO_TOL = 1e-9


class SceneError(Exception):
    pass


class ParseError(SceneError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ValidationError(SceneError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


RGB = tuple  # (r, g, b)


@dataclass(frozen=True)
class Material:
    ka: RGB
    kd: RGB
    ks: RGB
    ke: float = 1.0
    emission: RGB = (0.0, 0.0, 0.0)
    name: str = ""


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float


@dataclass(frozen=True)
class Quad:
    """Parallelogram ``corner + a*edge_u + b*edge_v`` for a, b in [0, 1]."""

    corner: tuple
    edge_u: tuple
    edge_v: tuple


@dataclass(frozen=True)
class EdgeTubes:
    """Tubes of geodesic radius ``radius`` around every edge of the domain polyhedron."""

    radius: float


@dataclass(frozen=True)
class SceneObject:
    id: str
    shape: object
    material: Material


@dataclass(frozen=True)
class PointLight:
    position: tuple
    intensity: RGB


@dataclass(frozen=True)
class CameraSpec:
    """Pinhole camera.  Either ``look_at`` (+ optional ``up``) or an explicit ``frame``."""

    origin: tuple
    vfov_deg: float
    look_at: tuple | None = None
    up: tuple | None = None
    frame: tuple | None = None  # (right, up, forward)

    @property
    def vfov(self) -> float:
        return math.radians(self.vfov_deg)


@dataclass(frozen=True)
class Scene:
    manifold_name: str
    ambient: RGB
    camera: CameraSpec
    lights: tuple = ()
    objects: tuple = ()

    @cached_property
    def manifold(self) -> quotient.QuotientManifold:
        return quotient.by_name(self.manifold_name)

    @property
    def tag(self) -> int:
        return int(self.manifold.tag)

    def point(self, chart) -> np.ndarray:
        return geo.model_point(self.tag, chart)

    def object_index(self, obj_id: str) -> int:
        for i, o in enumerate(self.objects):
            if o.id == obj_id:
                return i
        raise KeyError(obj_id)


# --------------------------------------------------------------------------
# camera frames
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Camera:
    origin: np.ndarray
    right: np.ndarray
    up: np.ndarray
    forward: np.ndarray
    vfov: float
    tag: int = EUCLIDEAN

    def frame_errors(self) -> float:
        e = (self.right, self.up, self.forward)
        worst = 0.0
        for i in range(3):
            for j in range(3):
                g = geo.inner(self.tag, e[i], e[j])
                worst = max(worst, abs(g - (1.0 if i == j else 0.0)))
        return worst


def _chart_vector(tag, origin_chart, d):
    if tag == HYPERBOLIC:
        return geo.klein_pushforward(origin_chart, d)
    return np.append(np.asarray(d, dtype=float), 0.0)


def _gram_schmidt(tag, p, vectors):
    out = []
    for v in vectors:
        w = geo.project_tangent(tag, p, v)
        for u in out:
            w = w - geo.inner(tag, w, u) * u
        n = math.sqrt(max(geo.inner(tag, w, w), 0.0))
        if n < 1e-12:
            raise ValueError("degenerate camera frame")
        out.append(w / n)
    return out


def build_camera(scene: Scene) -> Camera:
    spec = scene.camera
    tag = scene.tag
    o_chart = np.asarray(spec.origin, dtype=float)
    o = scene.point(o_chart)
    if spec.frame is not None:
        right, up, fwd = (_chart_vector(tag, o_chart, d) for d in spec.frame)
        if tag != EUCLIDEAN:
            right, up, fwd = (geo.project_tangent(tag, o, v) for v in (right, up, fwd))
        return Camera(o, right, up, fwd, spec.vfov, tag)
    f_chart = np.asarray(spec.look_at, dtype=float) - o_chart
    up_chart = np.asarray(spec.up if spec.up is not None else (0.0, 1.0, 0.0), dtype=float)
    r_chart = np.cross(f_chart, up_chart)
    fwd, up, right = _gram_schmidt(
        tag, o, [_chart_vector(tag, o_chart, d) for d in (f_chart, up_chart, r_chart)]
    )
    return Camera(o, right, up, fwd, spec.vfov, tag)


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def _validate_material(m: Material, who: str) -> list[str]:
    out = []
    label = m.name or f"{who}.material"
    for key in ("ka", "kd", "ks"):
        c = getattr(m, key)
        if any(not (0.0 <= x <= 1.0) for x in c):
            out.append(f"material {label}: {key} must lie in [0, 1]")
    if not m.ke >= 1.0:
        out.append(f"material {label}: ke must be >= 1")
    if any(x < 0.0 for x in m.emission):
        out.append(f"material {label}: emission must be non-negative")
    if any(d + s > 1.0 for d, s in zip(m.kd, m.ks)):
        out.append(f"material {label}: kd + ks exceeds 1 (energy conservation)")
    return out


def _segment_distance(tag, a, b, x) -> float:
    """Distance from ``x`` to the geodesic segment ``ab``."""
    t = geo.direction_to(tag, a, b)
    length = geo.distance(tag, a, b)
    alpha = -geo.inner(tag, x, a)
    beta = geo.inner(tag, x, t)
    s = math.atanh(max(-1.0, min(1.0, beta / alpha)))
    if s <= 0.0:
        return geo.distance(tag, a, x)
    if s >= length:
        return geo.distance(tag, b, x)
    return math.acosh(max(1.0, math.sqrt(max(alpha * alpha - beta * beta, 1.0))))


def _inside_objects(scene: Scene, p) -> list[str]:
    tag = scene.tag
    hits = []
    q = scene.manifold
    for o in scene.objects:
        s = o.shape
        if isinstance(s, Sphere):
            if geo.distance(tag, scene.point(s.center), p) <= s.radius:
                hits.append(o.id)
        elif isinstance(s, EdgeTubes) and tag == HYPERBOLIC and q.edges:
            if any(_segment_distance(tag, q.vertices[i], q.vertices[j], p) <= s.radius
                   for i, j in q.edges):
                hits.append(o.id)
    return hits


def validate(scene: Scene) -> list[str]:
    """Every violated invariant as ``"<entity>: <rule>"``; empty when valid."""
    out: list[str] = []
    try:
        q = scene.manifold
    except KeyError as e:
        return [f"manifold: {e.args[0]}"]
    tag = int(q.tag)

    def inside(label, chart):
        if tag == HYPERBOLIC and float(np.dot(chart, chart)) >= 1.0:
            out.append(f"{label}: Klein coordinates must lie in the open unit ball")
            return None
        p = scene.point(chart)
        if not quotient.contains(q, p):
            out.append(f"{label}: outside the fundamental domain")
            return None
        return p

    if len(scene.ambient) != 3 or any(a < 0.0 for a in scene.ambient):
        out.append("ambient: must be three non-negative values")

    ids = [o.id for o in scene.objects]
    for dup in sorted({i for i in ids if ids.count(i) > 1}):
        out.append(f"object {dup}: duplicate id")

    for o in scene.objects:
        label = f"object {o.id}"
        out.extend(_validate_material(o.material, o.id))
        s = o.shape
        if isinstance(s, Sphere):
            if not s.radius > 0.0:
                out.append(f"{label}: radius must be positive")
                continue
            c = inside(label, s.center)
            if c is not None and q.faces and s.radius >= q.distance_to_boundary(c):
                out.append(f"{label}: sphere does not fit inside one copy of the domain")
        elif isinstance(s, Quad):
            if tag != EUCLIDEAN:
                out.append(f"{label}: quads are only supported in Euclidean manifolds")
                continue
            u, v = np.asarray(s.edge_u, float), np.asarray(s.edge_v, float)
            if np.linalg.norm(np.cross(u, v)) < 1e-12:
                out.append(f"{label}: degenerate quad")
            c0 = np.asarray(s.corner, float)
            for k, corner in enumerate((c0, c0 + u, c0 + v, c0 + u + v)):
                if q.faces and not quotient.contains(q, scene.point(corner)):
                    out.append(f"{label}: corner {k} outside the fundamental domain")
        elif isinstance(s, EdgeTubes):
            if not q.edges:
                out.append(f"{label}: manifold {q.name} has no polyhedron edges")
            elif not 0.0 < s.radius < q.distance_to_boundary(q.interior_point):
                out.append(f"{label}: tube radius out of range")

    for k, light in enumerate(scene.lights):
        label = f"light {k}"
        if len(light.intensity) != 3 or any(x < 0.0 for x in light.intensity):
            out.append(f"{label}: intensity must be three non-negative values")
        p = inside(label, light.position)
        if p is not None:
            for oid in _inside_objects(scene, p):
                out.append(f"{label}: inside object {oid}")

    cam = scene.camera
    if not 0.0 < cam.vfov_deg < 180.0:
        out.append("camera: vfov_deg must lie in (0, 180)")
    o = inside("camera", cam.origin)
    if o is not None:
        for oid in _inside_objects(scene, o):
            out.append(f"camera: origin inside object {oid}")
        try:
            c = build_camera(scene)
        except ValueError:
            out.append("camera: frame is not orthonormal")
        else:
            if c.frame_errors() > ORTHO_TOL:
                out.append("camera: frame is not orthonormal")
    return out


# --------------------------------------------------------------------------
# file format
# --------------------------------------------------------------------------


def _num(value, where, line=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}", line)
    if not math.isfinite(value):
        raise ParseError(f"{where}: must be finite", line)
    return float(value)


def _vec(value, where, n=3) -> tuple:
    if not isinstance(value, list) or len(value) != n:
        raise ParseError(f"{where}: expected a list of {n} numbers")
    return tuple(_num(x, where) for x in value)


def _get(d, key, where, default=...):
    if not isinstance(d, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in d:
        if default is ...:
            raise ParseError(f"{where}: missing key {key!r}")
        return default
    return d[key]


def _material(d, where) -> Material:
    return Material(
        ka=_vec(_get(d, "ka", where, [0.0, 0.0, 0.0]), f"{where}.ka"),
        kd=_vec(_get(d, "kd", where, [0.0, 0.0, 0.0]), f"{where}.kd"),
        ks=_vec(_get(d, "ks", where, [0.0, 0.0, 0.0]), f"{where}.ks"),
        ke=_num(_get(d, "ke", where, 1.0), f"{where}.ke"),
        emission=_vec(_get(d, "emission", where, [0.0, 0.0, 0.0]), f"{where}.emission"),
        name=str(_get(d, "name", where, "")),
    )


def _object(d, k) -> SceneObject:
    where = f"objects[{k}]"
    kind = _get(d, "type", where)
    oid = str(_get(d, "id", where, f"{kind}{k}"))
    mat = _material(_get(d, "material", where), f"{where}.material")
    if kind == "sphere":
        shape = Sphere(_vec(_get(d, "center", where), f"{where}.center"),
                       _num(_get(d, "radius", where), f"{where}.radius"))
    elif kind == "quad":
        shape = Quad(_vec(_get(d, "corner", where), f"{where}.corner"),
                     _vec(_get(d, "edge_u", where), f"{where}.edge_u"),
                     _vec(_get(d, "edge_v", where), f"{where}.edge_v"))
    elif kind == "edge_tubes":
        shape = EdgeTubes(_num(_get(d, "radius", where), f"{where}.radius"))
    else:
        raise ParseError(f"{where}: unknown object type {kind!r}")
    return SceneObject(oid, shape, mat)


def _camera(d) -> CameraSpec:
    origin = _vec(_get(d, "origin", "camera"), "camera.origin")
    vfov = _num(_get(d, "vfov_deg", "camera"), "camera.vfov_deg")
    frame = _get(d, "frame", "camera", None)
    look_at = _get(d, "look_at", "camera", None)
    if (frame is None) == (look_at is None):
        raise ParseError("camera: exactly one of 'frame' or 'look_at' is required")
    up = _get(d, "up", "camera", None)
    if frame is not None:
        frame = tuple(_vec(_get(frame, k, "camera.frame"), f"camera.frame.{k}")
                      for k in ("right", "up", "forward"))
        return CameraSpec(origin, vfov, frame=frame)
    return CameraSpec(origin, vfov,
                      look_at=_vec(look_at, "camera.look_at"),
                      up=_vec(up, "camera.up") if up is not None else None)


def parse_scene(text: str, *, check: bool = True) -> Scene:
    """Parse (and by default validate) a scene file.

    Raises :class:`ParseError` for malformed input and
    :class:`ValidationError` when an invariant is violated.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", 1)
    manifold = _get(doc, "manifold", "scene")
    if not isinstance(manifold, str):
        raise ParseError("manifold: expected a string")
    lights = _get(doc, "lights", "scene", [])
    objects = _get(doc, "objects", "scene", [])
    if not isinstance(lights, list) or not isinstance(objects, list):
        raise ParseError("lights and objects must be lists")
    scene = Scene(
        manifold_name=manifold,
        ambient=_vec(_get(doc, "ambient", "scene", [0.0, 0.0, 0.0]), "ambient"),
        camera=_camera(_get(doc, "camera", "scene")),
        lights=tuple(
            PointLight(_vec(_get(l, "position", f"lights[{k}]"), f"lights[{k}].position"),
                       _vec(_get(l, "intensity", f"lights[{k}]"), f"lights[{k}].intensity"))
            for k, l in enumerate(lights)
        ),
        objects=tuple(_object(o, k) for k, o in enumerate(objects)),
    )
    if check:
        problems = validate(scene)
        if problems:
            raise ValidationError(problems)
    return scene


def _material_dict(m: Material) -> dict:
    d = {"ka": list(m.ka), "kd": list(m.kd), "ks": list(m.ks), "ke": m.ke,
         "emission": list(m.emission)}
    if m.name:
        d["name"] = m.name
    return d


def scene_to_dict(scene: Scene) -> dict:
    objs = []
    for o in scene.objects:
        s = o.shape
        if isinstance(s, Sphere):
            d = {"type": "sphere", "center": list(s.center), "radius": s.radius}
        elif isinstance(s, Quad):
            d = {"type": "quad", "corner": list(s.corner), "edge_u": list(s.edge_u),
                 "edge_v": list(s.edge_v)}
        else:
            d = {"type": "edge_tubes", "radius": s.radius}
        objs.append({"id": o.id, **d, "material": _material_dict(o.material)})
    cam = scene.camera
    c = {"origin": list(cam.origin), "vfov_deg": cam.vfov_deg}
    if cam.frame is not None:
        c["frame"] = dict(zip(("right", "up", "forward"), (list(v) for v in cam.frame)))
    else:
        c["look_at"] = list(cam.look_at)
        if cam.up is not None:
            c["up"] = list(cam.up)
    return {
        "manifold": scene.manifold_name,
        "ambient": list(scene.ambient),
        "camera": c,
        "lights": [{"position": list(l.position), "intensity": list(l.intensity)}
                   for l in scene.lights],
        "objects": objs,
    }


def serialize_scene(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2) + "\n"


def corpus_names() -> list[str]:
    root = resources.files("riemtrace") / "scenes"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_scene_path(name_or_path: str) -> Path:
    """A filesystem path, or the name of a bundled corpus scene."""
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = resources.files("riemtrace") / "scenes" / f"{p.stem}.json"
    if not p.suffix and bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"scene file not found: {name_or_path}")


def load_scene(name_or_path: str) -> Scene:
    return parse_scene(resolve_scene_path(name_or_path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# kernel arrays
# --------------------------------------------------------------------------

SceneArrays = namedtuple(
    "SceneArrays",
    [
        "tag",
        "face_normals", "face_offsets", "face_pairings", "neighbors",
        "sph_center", "sph_radius", "sph_obj",
        "quad_corner", "quad_u", "quad_v", "quad_normal", "quad_obj",
        "tube_a", "tube_t", "tube_len", "tube_radius", "tube_obj",
        "mat_ka", "mat_kd", "mat_ks", "mat_ke", "mat_em",
        "light_pos", "light_int",
        "ambient",
    ],
)


def _rows(rows, width):
    if not rows:
        return np.zeros((0, width))
    return np.ascontiguousarray(rows, dtype=float).reshape(len(rows), width)


def compile_scene(scene: Scene) -> SceneArrays:
    q = scene.manifold
    tag = int(q.tag)
    sph_c, sph_r, sph_o = [], [], []
    qc, qu, qv, qn, qo = [], [], [], [], []
    ta, tt, tl, tr, to = [], [], [], [], []
    for k, o in enumerate(scene.objects):
        s = o.shape
        if isinstance(s, Sphere):
            sph_c.append(scene.point(s.center))
            sph_r.append(s.radius)
            sph_o.append(k)
        elif isinstance(s, Quad):
            u = np.asarray(s.edge_u, float)
            v = np.asarray(s.edge_v, float)
            n = np.cross(u, v)
            qc.append(scene.point(s.corner))
            qu.append(np.append(u, 0.0))
            qv.append(np.append(v, 0.0))
            qn.append(np.append(n / np.linalg.norm(n), 0.0))
            qo.append(k)
        elif isinstance(s, EdgeTubes):
            for i, j in q.edges:
                a, b = q.vertices[i], q.vertices[j]
                ta.append(a)
                tt.append(geo.direction_to(tag, a, b))
                tl.append(geo.distance(tag, a, b))
                tr.append(s.radius)
                to.append(k)
            for vtx in q.vertices:
                sph_c.append(vtx)
                sph_r.append(s.radius)
                sph_o.append(k)
    mats = [o.material for o in scene.objects]
    return SceneArrays(
        tag=tag,
        face_normals=np.ascontiguousarray(q.normals, dtype=float).reshape(-1, 4),
        face_offsets=np.ascontiguousarray(q.offsets, dtype=float),
        face_pairings=np.ascontiguousarray(q.pairings, dtype=float).reshape(-1, 4, 4),
        neighbors=np.ascontiguousarray(q.neighbor_matrices, dtype=float),
        sph_center=_rows(sph_c, 4),
        sph_radius=np.array(sph_r, dtype=float),
        sph_obj=np.array(sph_o, dtype=np.int64),
        quad_corner=_rows(qc, 4),
        quad_u=_rows(qu, 4),
        quad_v=_rows(qv, 4),
        quad_normal=_rows(qn, 4),
        quad_obj=np.array(qo, dtype=np.int64),
        tube_a=_rows(ta, 4),
        tube_t=_rows(tt, 4),
        tube_len=np.array(tl, dtype=float),
        tube_radius=np.array(tr, dtype=float),
        tube_obj=np.array(to, dtype=np.int64),
        mat_ka=_rows([m.ka for m in mats], 3),
        mat_kd=_rows([m.kd for m in mats], 3),
        mat_ks=_rows([m.ks for m in mats], 3),
        mat_ke=np.array([m.ke for m in mats], dtype=float),
        mat_em=_rows([m.emission for m in mats], 3),
        light_pos=_rows([scene.point(l.position) for l in scene.lights], 4),
        light_int=_rows([l.intensity for l in scene.lights], 3),
        ambient=np.array(scene.ambient, dtype=float),
    )
