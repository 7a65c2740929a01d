"""Command-line entry point ``vemhd``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

__all__ = ["main", "build_parser"]


def _frames(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad frame list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vemhd", description="Polygonal virtual element solver for 2D resistive MHD fields.")
    sub = p.add_subparsers(dest="command", required=True)

    mesh = sub.add_parser("mesh", help="mesh utilities")
    msub = mesh.add_subparsers(dest="mesh_command", required=True)
    gen = msub.add_parser("gen", help="generate a mesh on [-1, 1]^2")
    gen.add_argument("--kind", choices=["tri", "pquad", "voronoi", "refined"], required=True)
    gen.add_argument("--n", type=int, required=True, help="cells per direction (refinement levels for 'refined')")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    conv = sub.add_parser("convergence", help="manufactured-solution convergence study")
    conv.add_argument("--mesh-kind", choices=["tri", "pquad", "voronoi"], default="tri")
    conv.add_argument("--levels", type=int, default=4)
    conv.add_argument("--projector", choices=["elliptic", "ls", "galerkin"], default="elliptic")
    conv.add_argument("--theta", type=float, default=0.5)
    conv.add_argument("--dt-c", type=float, default=0.05)
    conv.add_argument("--T", type=float, default=0.25)
    conv.add_argument("--seed", type=int, default=0)
    conv.add_argument("--out", required=True)

    rec = sub.add_parser("reconnect", help="Harris-sheet reconnection")
    rec.add_argument("--levels", type=int, default=3)
    rec.add_argument("--base", type=int, default=8)
    rec.add_argument("--rm", type=float, default=1.0)
    rec.add_argument("--dt", type=float, default=1e-3)
    rec.add_argument("--T", type=float, default=0.45)
    rec.add_argument("--eb", type=float, default=0.0, help="constant boundary electric field")
    rec.add_argument("--frames", type=_frames, default="0,0.021,0.022,0.41,0.45")
    rec.add_argument("--out", required=True)

    chk = sub.add_parser("check", help="run a property suite; exit status 1 on failure")
    chk.add_argument("--suite", choices=["derham", "products", "infsup", "energy", "newton"], required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "mesh":
        from ..mesh import generate, write_mesh

        m = generate(args.kind, args.n, seed=args.seed)
        write_mesh(m, args.out)
        print(f"wrote {m.n_vertices} vertices, {m.n_edges} edges, {m.n_cells} cells to {args.out}")
        return 0

    if args.command == "convergence":
        from .convergence import ExperimentConfig, run_convergence

        if args.levels < 3:
            print("convergence study needs at least 3 levels", file=sys.stderr)
            return 2
        cfg = ExperimentConfig(args.mesh_kind, args.levels, args.projector, args.theta, args.dt_c, args.T, seed=args.seed)
        rows = run_convergence(cfg, out=args.out)
        for r in rows:
            print(
                f"n={r['n']:3d} err_E={r['err_E_rel']:.3e} err_B={r['err_B_rel']:.3e} "
                f"eoc_E={r['eoc_E']:.2f} eoc_B={r['eoc_B']:.2f} div_max={r['div_max']:.1e}"
            )
        return 0

    if args.command == "reconnect":
        from .reconnection import ReconnectionConfig, run_reconnection

        frames = args.frames if isinstance(args.frames, tuple) else _frames(args.frames)
        cfg = ReconnectionConfig(
            levels=args.levels, base=args.base, rm=args.rm, dt=args.dt, T=args.T, E_b=args.eb, frames=frames
        )
        res = run_reconnection(cfg, out_dir=Path(args.out))
        print(json.dumps(res.report(cfg), indent=2))
        return 0

    if args.command == "check":
        from .checks import infsup_table, run_suite, suite_infsup

        if args.suite == "infsup":
            table = infsup_table()
            print("n,beta_h")
            for n, b in table:
                print(f"{n},{b:.12g}")
            results = suite_infsup(table)
        else:
            results = run_suite(args.suite)
        for r in results:
            print(r.line())
        return 0 if all(r.passed for r in results) else 1
    return 2  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
