import numpy as np
import pytest

from reporting import ACCEPTANCE_LINES
from vemhd.mesh import PolyMesh, gen_single_cell


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@pytest.fixture
def unit_square() -> PolyMesh:
    return gen_single_cell(UNIT_SQUARE)


@pytest.fixture
def two_squares() -> PolyMesh:
    verts = [[0, 0], [1, 0], [2, 0], [0, 1], [1, 1], [2, 1]]
    return PolyMesh.from_cells(verts, [[0, 1, 4, 3], [1, 2, 5, 4]], name="two")
