import json
import math

import numpy as np
import pytest

from riemtrace.scene import parse_scene

MATTE = {"ka": [0.0, 0.0, 0.0], "kd": [0.8, 0.8, 0.8], "ks": [0.0, 0.0, 0.0], "ke": 1.0}


def sphere(oid, center, radius, material=None):
    return {"type": "sphere", "id": oid, "center": list(center), "radius": radius,
            "material": material or MATTE}


def quad(oid, corner, eu, ev, material=None):
    return {"type": "quad", "id": oid, "corner": list(corner), "edge_u": list(eu),
            "edge_v": list(ev), "material": material or MATTE}


def make_scene(manifold="flat_torus", objects=(), lights=(), camera=None, ambient=(0, 0, 0),
               check=True):
    """Scene from plain dicts, going through the real parser."""
    if camera is None:
        camera = {"origin": [0.5, 0.5, 0.9] if manifold != "mirrored_dodecahedron" else [0, 0, 0.3],
                  "look_at": [0.5, 0.5, 0.1] if manifold != "mirrored_dodecahedron" else [0, 0, 0],
                  "vfov_deg": 60.0}
    doc = {"manifold": manifold, "ambient": list(ambient), "camera": camera,
           "lights": [{"position": list(p), "intensity": list(i)} for p, i in lights],
           "objects": list(objects)}
    return parse_scene(json.dumps(doc), check=check)


def random_unit3(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_hyperbolic_point(rng, radius=2.0):
    """A point at geodesic distance up to ``radius`` from the origin."""
    d = random_unit3(rng)
    r = rng.uniform(0, radius)
    return np.array([*(math.sinh(r) * d), math.cosh(r)])


def random_spherical_point(rng):
    v = rng.normal(size=4)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
