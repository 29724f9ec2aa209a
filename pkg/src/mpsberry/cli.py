"""Command-line entry point: ``python -m mpsberry <subcommand> ...``."""

import argparse
import json
import logging
import math
from pathlib import Path
import sys

import numpy as np

from . import experiments as ex
from .config import RunConfig, dump_config, load_config, with_overrides
from .errors import MpsBerryError
from .geometry import boundary_of_4simplex, cube_grid_complex, validate_closed
from .model import analytic_mps
from .spt import modulus_degeneracy_test, projective_data, spin_flip_group


def _base_config(args, kind):
    cfg = load_config(args.config) if args.config else RunConfig(kind=kind)
    cfg = with_overrides(cfg, kind=kind, seed=args.seed, out=args.out, threads=args.threads)
    if args.analytic:
        cfg = with_overrides(cfg, analytic=True)
    return cfg


def _store_dir(cfg, args):
    if cfg.out is None:
        return None
    root = Path(cfg.out) / "checkpoints"
    if not args.resume and root.exists():
        for p in root.glob("*.json"):
            p.unlink()
    return root


def cmd_fixed(args):
    cfg = _base_config(args, "fixed")
    cfg = with_overrides(cfg, j1=args.j1, j2=args.j2, n_shells=args.shells)
    res = ex.run_fixed_couplings(cfg, _store_dir(cfg, args))
    if cfg.out:
        ex.write_fixed(res, cfg, cfg.out)
        (Path(cfg.out) / "config.txt").write_text(dump_config(cfg))
    print(f"nu = {res.nu:.6f}  (nearest {res.report.nearest}, residual {res.report.residual:.2e}, "
          f"min edge gap {res.report.min_gap:.3e})")
    return 0


def cmd_random(args):
    cfg = _base_config(args, "random")
    if args.grid:
        cfg = with_overrides(cfg, grid=tuple(args.grid))
    cfg = with_overrides(cfg, amplitude=args.amplitude)
    res = ex.run_random_couplings(cfg, _store_dir(cfg, args))
    if cfg.out:
        ex.write_random(res, cfg, cfg.out)
        (Path(cfg.out) / "config.txt").write_text(dump_config(cfg))
    flag = "" if res.complete else f"  INCOMPLETE ({len(res.failures)} failed points)"
    print(f"nu = {res.nu:.6f}  (nearest {res.report.nearest}, residual {res.report.residual:.2e}){flag}")
    return 0 if res.complete else 2


def cmd_chern(args):
    cfg = _base_config(args, "chern")
    res = ex.run_baseline_chern(cfg, reverse=args.reverse)
    if cfg.out:
        ex.write_chern(res, cfg, cfg.out)
    for t, g in zip(res.thetas, res.gamma):
        ref = math.remainder(math.pi * (1 - math.cos(t)), 2 * math.pi)
        print(f"theta = {t:.4f}  gamma = {g:+.6f}  expected (mod 2 pi) = {ref:+.6f}")
    print(f"ch1 = {res.ch1}")
    return 0


def cmd_validate(args):
    if args.mesh:
        cx = cube_grid_complex(*args.mesh)
    else:
        cx = boundary_of_4simplex()
    rep = validate_closed(cx)
    print(json.dumps({"vertices": len(cx.vertices), "tets": len(cx.tets),
                      "euler_characteristic": cx.euler_characteristic(), "closed": rep.closed,
                      "boundary_faces": len(rep.boundary_faces), "bad_faces": len(rep.bad_faces)}))
    return 0 if rep.closed else 1


def cmd_spt(args):
    group = spin_flip_group()
    states = {"on-site singlets": analytic_mps(-math.pi / 4), "bond singlets": analytic_mps(math.pi / 4)}
    for name, mps in states.items():
        data = projective_data(mps, group)
        comm = np.real_if_close(np.round(data.commutator_phases(), 12))
        print(f"{name}: theta = {(np.round(data.thetas, 12) + 0.0).tolist()}, commutator phases =")
        print(comm)
    rep = modulus_degeneracy_test(*states.values(), g_set=group)
    print(f"mixed-map moduli {np.round(rep.moduli, 12).tolist()}: multiplicity {rep.multiplicity}, "
          f"cocycles differ: {rep.cocycles_differ}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="mpsberry", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--analytic", action="store_true", help="use exact states where available")
    common.add_argument("--resume", action="store_true", help="reuse checkpoints in OUT/checkpoints")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fixed", parents=[common], help="prism-stack shell sweep at fixed couplings")
    f.add_argument("--j1", type=float)
    f.add_argument("--j2", type=float)
    f.add_argument("--shells", type=int)
    f.set_defaults(func=cmd_fixed)

    r = sub.add_parser("random", parents=[common], help="random couplings on the full grid")
    r.add_argument("--grid", type=int, nargs=3, metavar=("NA", "NT", "NP"))
    r.add_argument("--amplitude", type=float)
    r.set_defaults(func=cmd_random)

    c = sub.add_parser("chern", parents=[common], help="spin-1/2 Berry phase and Chern number")
    c.add_argument("--reverse", action="store_true", help="reverse the sphere orientation")
    c.set_defaults(func=cmd_chern)

    v = sub.add_parser("validate", parents=[common], help="check a complex is closed and oriented")
    v.add_argument("--mesh", type=int, nargs=3, metavar=("NA", "NT", "NP"))
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("spt", parents=[common], help="projective symmetry data of the model endpoints")
    s.set_defaults(func=cmd_spt)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MpsBerryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
