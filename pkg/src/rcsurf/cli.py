"""Batch command-line entry point.

Subcommands: verify (run suites, exit 0 iff all pass), fields (export a
sample grid), integrate (one named field), list (built-in scenes).
Exit codes: 0 success, 1 verification failure, 2 input or configuration
error.  Grid work is vectorized; --jobs is accepted as a worker hint and
never changes results, so reports and exports are byte-identical across
settings and runs.
"""

from __future__ import annotations

import argparse
import sys

from . import scenes, verify
from .errors import RcsurfError

__all__ = ["main"]


def _add_scene_args(p):
    p.add_argument("--scene", help="path to a .rcscene document")
    p.add_argument("--builtin", help="name of a built-in scene")
    p.add_argument("--param", action="append", default=[], metavar="K=V",
                   help="builtin parameter, repeatable (e.g. lambda=0.5)")
    p.add_argument("--grid", default="32x32", metavar="NxM",
                   help="grid resolution, at least 8 per axis")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker hint; output is identical for any value")


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="rcsurf",
        description="Surfaces in Riemann-Cartan 3-manifolds: residual "
                    "verification, field export, integrals.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    _add_scene_args(v)
    v.add_argument("--tol", default="analytic",
                   help="tolerance tier (analytic, strict) or a number")
    v.add_argument("--suite", help="comma-separated suite names (default: all)")
    v.add_argument("--out", help="write the JSON report here")

    f = sub.add_parser("fields", help="export per-sample fields")
    _add_scene_args(f)
    f.add_argument("--out", required=True, help="output table path")

    i = sub.add_parser("integrate", help="integrate a named field")
    _add_scene_args(i)
    i.add_argument("--field", required=True,
                   help="field name (one, K, K_e, H, star_tau, abs_H, ...)")

    sub.add_parser("list", help="list built-in scenes")
    return ap


def _parse_params(items):
    out = {}
    for item in items:
        if "=" not in item:
            raise ValueError(f"--param needs K=V, got {item!r}")
        key, val = item.split("=", 1)
        key = key.strip()
        if key == "lambda":        # python keyword, factory argument is lam
            key = "lam"
        val = val.strip()
        if "," in val:
            out[key] = tuple(float(x) for x in val.split(","))
        else:
            try:
                out[key] = float(val)
            except ValueError:
                out[key] = val
    return out


def _load(args):
    if bool(args.scene) == bool(args.builtin):
        raise ValueError("exactly one of --scene or --builtin is required")
    if args.scene:
        return scenes.load_scene(args.scene)
    return scenes.builtin(args.builtin, **_parse_params(args.param))


def _grid_shape(text):
    try:
        nu, nv = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"--grid needs NxM, got {text!r}") from None
    if nu < 8 or nv < 8:
        raise ValueError("grid resolution must be at least 8 per axis")
    return nu, nv


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _run(args)
    except RcsurfError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _run(args):
    if args.command == "list":
        for name in scenes.builtin_names():
            print(f"{name:<26} {scenes.builtin_provenance(name)}")
        return 0

    if args.jobs is not None and args.jobs < 1:
        raise ValueError("--jobs must be at least 1")
    scene = _load(args)
    nu, nv = _grid_shape(args.grid)

    if args.command == "verify":
        tol = args.tol
        if tol not in verify.TIERS:
            try:
                tol = float(tol)
            except ValueError:
                raise ValueError(
                    f"--tol must be a tier ({', '.join(verify.TIERS)}) or a number")
            if tol <= 0:
                raise ValueError("--tol must be positive")
        suites = args.suite.split(",") if args.suite else None
        report = verify.run_verification(scene, nu, nv, suites=suites, tol=tol)
        print(f"scene {scene.name} ({report.grid_shape[0]}x{report.grid_shape[1]})")
        for line in report.summary_lines():
            print(line)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(report.to_json())
        return 0 if report.passed else 1

    grid = scenes.make_grid(scene, nu, nv)
    if args.command == "fields":
        scenes.export_fields(grid, args.out)
        print(f"wrote {grid.U.shape[0]} samples to {args.out}")
        return 0
    if args.command == "integrate":
        value = scenes.integrate(grid, args.field)
        print(f"{value:.17g}")
        return 0
    raise ValueError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
