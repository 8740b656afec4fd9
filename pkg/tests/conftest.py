from __future__ import annotations

import numpy as np
import pytest

from aeroprompt import kernels
from aeroprompt.geometry import TriMesh


@pytest.fixture(scope="session", autouse=True)
def compiled_kernels():
    # pay the numba compilation cost once, outside any timed test
    kernels.warm_up()


def box_mesh(extents=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box as 12 triangles."""
    ex, ey, ez = extents
    cx, cy, cz = center
    corners = np.array(
        [
            [cx + sx * ex / 2, cy + sy * ey / 2, cz + sz * ez / 2]
            for sx in (-1, 1)
            for sy in (-1, 1)
            for sz in (-1, 1)
        ]
    )
    quads = [
        (0, 1, 3, 2),
        (4, 6, 7, 5),
        (0, 4, 5, 1),
        (2, 3, 7, 6),
        (0, 2, 6, 4),
        (1, 5, 7, 3),
    ]
    faces = []
    for a, b, c, d in quads:
        faces.append((a, b, c))
        faces.append((a, c, d))
    return TriMesh(corners, np.array(faces))


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation matrix via QR of a gaussian matrix."""
    m = rng.standard_normal((3, 3))
    q, r = np.linalg.qr(m)
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
