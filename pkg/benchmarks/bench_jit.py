"""Compiled kernels vs. the pure-Python fallback.

Each backend runs in its own interpreter, since RIEMTRACE_DISABLE_JIT is read
at import time. The JIT run renders once untimed so compilation (or loading the
on-disk cache) is excluded.

    python3 benchmarks/bench_jit.py --scene cornell_torus --width 48 --height 36 --spp 2
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = """
import hashlib, json, sys, time
import riemtrace
from riemtrace import RenderSettings, load_scene, render

name, w, h, spp, depth, repeat = sys.argv[1:]
w, h, spp, depth, repeat = int(w), int(h), int(spp), int(depth), int(repeat)
scene = load_scene(name)
settings = RenderSettings(spp=spp, depth=depth, seed=1)
if riemtrace.JIT_ENABLED:
    render(scene, settings, 4, 3, threads=1)
times = []
for _ in range(repeat):
    t0 = time.perf_counter()
    img = render(scene, settings, w, h, threads=1)
    times.append(time.perf_counter() - t0)
json.dump({"jit": riemtrace.JIT_ENABLED, "times": times,
           "digest": hashlib.sha256(img.data.tobytes()).hexdigest()[:16]}, sys.stdout)
"""


def run(disable, args):
    env = dict(os.environ)
    env.pop("RIEMTRACE_DISABLE_JIT", None)
    if disable:
        env["RIEMTRACE_DISABLE_JIT"] = "1"
    cmd = [sys.executable, "-c", CHILD, args.scene, str(args.width), str(args.height),
           str(args.spp), str(args.depth), str(args.repeat)]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scene", default="cornell_torus")
    ap.add_argument("--width", type=int, default=48)
    ap.add_argument("--height", type=int, default=36)
    ap.add_argument("--spp", type=int, default=2)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rows = {}
    for label, disable in (("jit", False), ("python", True)):
        rows[label] = run(disable, args)
        best = min(rows[label]["times"])
        print(f"{label:>7}: best of {args.repeat} = {best:8.3f} s  "
              f"(jit active: {rows[label]['jit']}, image {rows[label]['digest']})")
    if rows["jit"]["jit"]:
        speedup = min(rows["python"]["times"]) / min(rows["jit"]["times"])
        print(f"speedup: {speedup:.1f}x")
    else:
        print("numba unavailable; both runs used the fallback")
    same = rows["jit"]["digest"] == rows["python"]["digest"]
    print(f"identical images: {same}")


if __name__ == "__main__":
    main()
