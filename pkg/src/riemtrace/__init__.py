"""Deterministic CPU path tracing inside flat and hyperbolic quotient manifolds."""

from ._jit import JIT_ENABLED
from .geometry import EUCLIDEAN, HYPERBOLIC, SPHERICAL, GeometryTag, Isometry
from .integrator import RenderSettings
from .quotient import QuotientManifold, by_name, flat_torus, mirrored_dodecahedron
from .render import Image, primary_hits, render, write_ppm
from .scene import (
    ParseError,
    Scene,
    SceneError,
    ValidationError,
    load_scene,
    parse_scene,
    serialize_scene,
    validate,
)
from .tracer import HitRecord, trace_ray

__all__ = [
    "EUCLIDEAN",
    "HYPERBOLIC",
    "JIT_ENABLED",
    "SPHERICAL",
    "GeometryTag",
    "HitRecord",
    "Image",
    "Isometry",
    "ParseError",
    "QuotientManifold",
    "RenderSettings",
    "Scene",
    "SceneError",
    "ValidationError",
    "by_name",
    "flat_torus",
    "load_scene",
    "mirrored_dodecahedron",
    "parse_scene",
    "primary_hits",
    "render",
    "serialize_scene",
    "trace_ray",
    "validate",
    "write_ppm",
]
