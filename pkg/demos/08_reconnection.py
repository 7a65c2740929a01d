"""Short Harris-sheet run on a hanging-node mesh: frames, steady-state metric, divergence.

The full experiment is ``vemhd reconnect --out DIR`` (about a minute and a half).
"""
import tempfile

from vemhd.app.reconnection import ReconnectionConfig, run_reconnection

cfg = ReconnectionConfig(levels=2, base=4, T=0.05, frames=(0.0, 0.025, 0.05), early_time=0.022)
with tempfile.TemporaryDirectory() as tmp:
    res = run_reconnection(cfg, tmp)
    rep = res.report(cfg)
    print(f"{rep['cells']} cells, up to {rep['max_cell_vertices']} vertices per cell, {len(res.frames)} frames written")
    for t in (0.005, 0.022, 0.05):
        print(f"  t={t:.3f} steady-state metric {res.metric_at(t):.4f}")
    print(f"  max |div B| / |B| over all steps: {rep['div_max']:.1e}")
