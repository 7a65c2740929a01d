"""Generate the four mesh families on [-1, 1]^2, check regularity, round-trip to disk."""
import tempfile
from pathlib import Path

from vemhd.mesh import check_regularity, generate, read_mesh, write_mesh

for kind, n in [("tri", 4), ("pquad", 4), ("voronoi", 5), ("refined", 2)]:
    m = generate(kind, n, seed=1)
    rep = check_regularity(m)
    print(
        f"{kind:8s} cells={m.n_cells:3d} edges={m.n_edges:3d} vertices={m.n_vertices:3d} "
        f"h={m.h:.3f} max polygon size={max(len(c) for c in m.cells)} "
        f"min star ratio={rep.min_rho_star:.3f} min edge ratio={rep.min_rho_edge:.3f}"
    )

# hanging nodes of the refined mesh are ordinary polygon vertices
m = generate("refined", 2)
print("cells with more than four vertices:", sum(len(c) > 4 for c in m.cells))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "voronoi.mesh"
    write_mesh(generate("voronoi", 4, seed=7), path)
    back = read_mesh(path)
    print("read back", back)
