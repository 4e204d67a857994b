"""Command-line entry point: ``scalefree <gen|transform|orbit|simulate|mesh|sky>``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
``SNE_SEED`` in the environment overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from collections import Counter

from .errors import NonConvergenceError, ScaleFreeError
from .transform import format_matrix, local_world_matrix

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _seed(args) -> int:
    env = os.environ.get("SNE_SEED")
    if env is not None and env.strip():
        try:
            return _u64(env.strip())
        except (ValueError, argparse.ArgumentTypeError):
            raise UsageError(f"SNE_SEED is not a valid u64: {env!r}") from None
    return args.seed


def _write_text(path, text: str, out) -> None:
    if path in (None, "-"):
        out.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_scene(path):
    from .scene import scene_from_json

    try:
        return scene_from_json(_read_text(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid scene file {path}: {exc}") from None


# --------------------------------------------------------------------------- commands


def cmd_gen(args, out) -> int:
    from .scene import scene_to_json
    from .universe import MAX_GEN_DEPTH, GenConfig, generate_tree

    if not 0 <= args.depth <= MAX_GEN_DEPTH:
        raise UsageError(f"--depth must lie in 0..{MAX_GEN_DEPTH}")
    config = GenConfig()
    if args.config:
        try:
            config = GenConfig.from_json(json.loads(_read_text(args.config)))
        except (ValueError, TypeError) as exc:
            raise UsageError(f"invalid config {args.config}: {exc}") from None
    world = generate_tree(_seed(args), args.depth, config)
    text = scene_to_json(world)
    per_level = Counter(n.depth for n in world.walk())
    report = "".join(f"level {d}: {per_level[d]}\n" for d in sorted(per_level))
    if args.out in (None, "-"):
        out.write(text)
        sys.stderr.write(report)
    else:
        _write_text(args.out, text, out)
        out.write(report)
    return EXIT_OK


def cmd_transform(args, out) -> int:
    from .scene import resolve_path

    world = _load_scene(args.scene)
    try:
        cur = resolve_path(world, args.from_path)
        tgt = resolve_path(world, args.to_path)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    m = local_world_matrix(cur, tgt)
    out.write(format_matrix(m) + "\n")
    dist = math.sqrt(float(m[3, 0]) ** 2 + float(m[3, 1]) ** 2 + float(m[3, 2]) ** 2) * cur.absolute_size
    out.write(f"distance_m {dist!r}\n")
    return EXIT_OK


def cmd_orbit(args, out) -> int:
    from .orbit import OrbitParams, orbital_position

    try:
        params = OrbitParams.from_json(json.loads(_read_text(args.params)))
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"invalid orbit params {args.params}: {exc}") from None
    if args.period_samples is not None:
        if args.period_samples < 1:
            raise UsageError("--period-samples must be >= 1")
        times = [k * params.period / args.period_samples for k in range(args.period_samples)]
    else:
        times = args.t
    rows = ["t,x,y,z\n"]
    for t in times:
        x, y, z = (float(c) for c in orbital_position(params, t))
        rows.append(f"{t!r},{x!r},{y!r},{z!r}\n")
    out.write("".join(rows))
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    from .horizon import simulate
    from .scene import scene_to_json

    world = _load_scene(args.scene)
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    log = simulate(world, args.steps, args.dt, args.t0)
    lines = "".join(f"{step} {ev.line()}\n" for step, ev in log)
    if args.out:
        _write_text(args.out, scene_to_json(world), out)
    _write_text(args.events, lines, out)
    return EXIT_OK


def cmd_mesh(args, out) -> int:
    from .procgen import emit_mesh, parse_program, run_program, write_obj

    program = parse_program(_read_text(args.ops))
    store = run_program(program, _seed(args))
    groups = args.groups.split(",") if args.groups else None
    mesh = emit_mesh(store, groups)
    if args.out in (None, "-"):
        write_obj(mesh, out)
    else:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as f:
                write_obj(mesh, f)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    return EXIT_OK


def cmd_sky(args, out) -> int:
    from .atmosphere import AtmosphereInput, SkyCamera, render_sky, write_ppm

    if args.width < 1 or args.height < 1:
        raise UsageError("--width and --height must be >= 1")
    try:
        doc = json.loads(_read_text(args.params))
        cam = SkyCamera(**{k: tuple(v) if isinstance(v, list) else v for k, v in doc.pop("camera", {}).items()})
        params = AtmosphereInput.from_json(doc)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"invalid sky params {args.params}: {exc}") from None
    img = render_sky(params, cam, args.width, args.height, jobs=args.jobs)
    try:
        with open(args.out, "wb") as f:
            write_ppm(img, f)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scalefree", description="Scale-free world toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a world snapshot")
    g.add_argument("--seed", type=_u64, default=0)
    g.add_argument("--depth", type=int, default=3)
    g.add_argument("--config")
    g.add_argument("--out")
    g.set_defaults(fn=cmd_gen)

    t = sub.add_parser("transform", help="relative transform between two nodes")
    t.add_argument("--scene", required=True)
    t.add_argument("--from", dest="from_path", required=True)
    t.add_argument("--to", dest="to_path", required=True)
    t.set_defaults(fn=cmd_transform)

    o = sub.add_parser("orbit", help="sample orbital positions as CSV")
    o.add_argument("--params", required=True)
    when = o.add_mutually_exclusive_group(required=True)
    when.add_argument("--t", type=float, action="append")
    when.add_argument("--period-samples", type=int)
    o.set_defaults(fn=cmd_orbit)

    s = sub.add_parser("simulate", help="step orbits and horizon transfers")
    s.add_argument("--scene", required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("--out", help="updated scene snapshot")
    s.add_argument("--events", help="transfer event log (default stdout)")
    s.set_defaults(fn=cmd_simulate)

    m = sub.add_parser("mesh", help="run an op program and export OBJ")
    m.add_argument("--ops", required=True)
    m.add_argument("--seed", type=_u64, default=0)
    m.add_argument("--groups", help="comma-separated groups to export (default all)")
    m.add_argument("--out")
    m.set_defaults(fn=cmd_mesh)

    k = sub.add_parser("sky", help="render the atmosphere model to PPM")
    k.add_argument("--params", required=True)
    k.add_argument("--width", type=int, default=256)
    k.add_argument("--height", type=int, default=128)
    k.add_argument("--out", required=True)
    k.add_argument("--jobs", type=int, default=1)
    k.set_defaults(fn=cmd_sky)
    return p


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args, out)
    except UsageError as exc:
        sys.stderr.write(f"scalefree: error: {exc}\n")
        return EXIT_USAGE
    except NonConvergenceError as exc:
        sys.stderr.write(f"scalefree: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (FloatingPointError, OverflowError, ZeroDivisionError) as exc:
        sys.stderr.write(f"scalefree: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (ScaleFreeError, ValueError) as exc:
        sys.stderr.write(f"scalefree: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
