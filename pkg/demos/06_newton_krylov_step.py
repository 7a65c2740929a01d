"""One theta-scheme step by Jacobian-free Newton-Krylov, with the forcing-term log."""
import numpy as np

from vemhd.mesh import gen_voronoi
from vemhd.products import EMOperators
from vemhd.solver import EMProblem, SolverConfig, initial_state, newton_step_loop

m = gen_voronoi(49, seed=5)
ops = EMOperators(m)
prob = EMProblem(ops, velocity=lambda X, Y, t: (-X, Y))
state = initial_state(prob, ops.R @ np.log(np.cosh(m.vertices[:, 1])))

for eta0 in (None, 0.8):
    cfg = SolverConfig(dt=5e-3, eta0=eta0)
    new, rec = newton_step_loop(prob, cfg, state)
    log = rec.newton
    print(f"eta0={eta0}: {log.iterations} Newton iteration(s), GMRES iterations {log.gmres_iterations}")
    print("  |G| history:", " ".join(f"{g:.2e}" for g in log.residual_norms))
    print("  forcing terms:", " ".join(f"{e:.2e}" for e in log.etas))
    print(f"  |div B| / |B| = {rec.div_norm / rec.B_norm:.1e}, divergence identity defects {max(log.divergence_defects):.1e}")
