"""Command-line renderer: ``riemtrace --scene cornell_torus -o out.ppm``."""

from __future__ import annotations

import argparse
import sys
import time

from .integrator import RenderSettings
from .render import render, resolve_threads, write_ppm
from .scene import SceneError, load_scene

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_IO = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for IO failures here
    def error(self, message):
        raise _UsageError(message)


def _threads(value: str):
    if value == "auto":
        return value
    try:
        resolve_threads(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'auto', got {value!r}")
    return int(value)


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return n


def _non_negative(value: str) -> int:
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="riemtrace", description="Path-trace a scene inside a quotient manifold.")
    p.add_argument("--scene", required=True,
                   help="scene file, or the name of a bundled scene (e.g. cornell_torus)")
    p.add_argument("--width", type=_positive, default=640)
    p.add_argument("--height", type=_positive, default=480)
    p.add_argument("--spp", type=_positive, default=16, help="samples per pixel")
    p.add_argument("--max-bounces", type=int, default=5,
                   help="path depth d; 0 renders direct light only")
    p.add_argument("--max-transport-level", type=_non_negative, default=8,
                   help="domain crossings allowed per ray")
    p.add_argument("--seed", type=_non_negative, default=0)
    p.add_argument("--no-indirect", action="store_true",
                   help="skip indirect light and add the ambient term instead")
    p.add_argument("-o", "--output", default="out.ppm")
    p.add_argument("--threads", type=_threads, default="auto")
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as e:
        print(f"riemtrace: {e}", file=sys.stderr)
        return EXIT_INPUT

    try:
        scene = load_scene(args.scene)
        settings = RenderSettings(spp=args.spp, depth=args.max_bounces,
                                  maxlevel=args.max_transport_level, seed=args.seed,
                                  indirect_enabled=not args.no_indirect)
    except FileNotFoundError as e:
        print(f"riemtrace: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (SceneError, ValueError) as e:
        print(f"riemtrace: invalid scene {args.scene}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"riemtrace: cannot read {args.scene}: {e}", file=sys.stderr)
        return EXIT_IO

    start = time.perf_counter()
    image = render(scene, settings, args.width, args.height, threads=args.threads)
    try:
        write_ppm(image, args.output)
    except OSError as e:
        print(f"riemtrace: cannot write {args.output}: {e}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        print(f"wrote {args.output} ({args.width}x{args.height}, {args.spp} spp) "
              f"in {time.perf_counter() - start:.1f}s", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
