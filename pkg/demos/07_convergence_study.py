"""Manufactured-solution convergence on triangles (three levels, a few seconds)."""
import tempfile
from pathlib import Path

from vemhd.app.convergence import ExperimentConfig, run_convergence

with tempfile.TemporaryDirectory() as tmp:
    for proj in ("elliptic", "ls", "galerkin"):
        rows = run_convergence(ExperimentConfig(mesh_kind="tri", levels=3, projector=proj), out=Path(tmp) / f"{proj}.csv")
        print(proj)
        for r in rows:
            print(
                f"  n={r['n']:3d} err_E={r['err_E_rel']:.3e} err_B={r['err_B_rel']:.3e} "
                f"eoc_E={r['eoc_E']:.2f} eoc_B={r['eoc_B']:.2f} div_max={r['div_max']:.1e}"
            )
