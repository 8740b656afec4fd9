"""Hot numeric kernels with two interchangeable backends.

Two operations dominate runtime in a desk-scale campaign: nearest-neighbor
squared distances between point clouds (Chamfer distance) and rasterization
of projected triangles onto an occupancy lattice (frontal area). Both ship
as a numba ``@njit`` kernel and a pure-numpy fallback.

Backend selection happens once at import time: the numba path is used when
numba imports cleanly and the environment variable ``AEROPROMPT_NO_NUMBA``
is unset (or "0"). Set ``AEROPROMPT_NO_NUMBA=1`` to force the numpy path.
Both variants stay importable so tests and ``benchmarks/bench_kernels.py``
can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

_FLAG = os.environ.get("AEROPROMPT_NO_NUMBA", "").strip()
USE_NUMBA = _HAVE_NUMBA and _FLAG in ("", "0")


def active_backend() -> str:
    """Name of the backend the dispatch functions run on."""
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# nearest-neighbor squared distances
# ---------------------------------------------------------------------------

def nearest_sqdist_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """For each point of `a`, squared euclidean distance to its nearest
    point in `b`. Row-at-a-time to keep memory at O(len(b))."""
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        d = b - a[i]
        out[i] = np.min(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2])
    return out


if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _nearest_sqdist_nb(a, b):  # pragma: no cover - exercised via wrapper
        n = a.shape[0]
        m = b.shape[0]
        out = np.empty(n)
        for i in prange(n):
            ax = a[i, 0]
            ay = a[i, 1]
            az = a[i, 2]
            best = np.inf
            for j in range(m):
                dx = b[j, 0] - ax
                dy = b[j, 1] - ay
                dz = b[j, 2] - az
                d = dx * dx + dy * dy + dz * dz
                if d < best:
                    best = d
            out[i] = best
        return out

    def nearest_sqdist_numba(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return _nearest_sqdist_nb(
            np.ascontiguousarray(a, dtype=np.float64),
            np.ascontiguousarray(b, dtype=np.float64),
        )

else:  # pragma: no cover
    nearest_sqdist_numba = None


def nearest_sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if USE_NUMBA:
        return nearest_sqdist_numba(a, b)
    return nearest_sqdist_numpy(a, b)


# ---------------------------------------------------------------------------
# lattice coverage for projected-triangle rasterization
# ---------------------------------------------------------------------------
#
# The lattice holds the (res+1) x (res+1) cell-corner points of a res x res
# grid spanning the projected bounding rectangle. A point is covered when it
# lies inside (or on the edge of) any projected triangle; edge tests carry a
# small area-scaled tolerance so corners sitting exactly on shared triangle
# edges register on both sides.

def _edge_tolerance(ay, az, by, bz, cy, cz) -> float:
    s = max(abs(ay), abs(az), abs(by), abs(bz), abs(cy), abs(cz), 1e-30)
    return 1e-9 * s * s


def cover_lattice_numpy(
    tris: np.ndarray, y0: float, z0: float, hy: float, hz: float, res: int
) -> np.ndarray:
    covered = np.zeros((res + 1, res + 1), dtype=bool)
    ys = y0 + hy * np.arange(res + 1)
    zs = z0 + hz * np.arange(res + 1)
    for t in range(tris.shape[0]):
        ay, az = tris[t, 0, 0], tris[t, 0, 1]
        by, bz = tris[t, 1, 0], tris[t, 1, 1]
        cy, cz = tris[t, 2, 0], tris[t, 2, 1]
        tol = _edge_tolerance(ay, az, by, bz, cy, cz)
        i0 = max(0, int(np.ceil((min(ay, by, cy) - y0) / hy - 1e-9)))
        i1 = min(res, int(np.floor((max(ay, by, cy) - y0) / hy + 1e-9)))
        j0 = max(0, int(np.ceil((min(az, bz, cz) - z0) / hz - 1e-9)))
        j1 = min(res, int(np.floor((max(az, bz, cz) - z0) / hz + 1e-9)))
        if i0 > i1 or j0 > j1:
            continue
        qy = ys[i0 : i1 + 1][:, None]
        qz = zs[j0 : j1 + 1][None, :]
        e0 = (by - ay) * (qz - az) - (bz - az) * (qy - ay)
        e1 = (cy - by) * (qz - bz) - (cz - bz) * (qy - by)
        e2 = (ay - cy) * (qz - cz) - (az - cz) * (qy - cy)
        inside = ((e0 >= -tol) & (e1 >= -tol) & (e2 >= -tol)) | (
            (e0 <= tol) & (e1 <= tol) & (e2 <= tol)
        )
        covered[i0 : i1 + 1, j0 : j1 + 1] |= inside
    return covered


if _HAVE_NUMBA:

    @njit(cache=True)
    def _cover_lattice_nb(tris, y0, z0, hy, hz, res):  # pragma: no cover
        covered = np.zeros((res + 1, res + 1), dtype=np.bool_)
        for t in range(tris.shape[0]):
            ay = tris[t, 0, 0]
            az = tris[t, 0, 1]
            by = tris[t, 1, 0]
            bz = tris[t, 1, 1]
            cy = tris[t, 2, 0]
            cz = tris[t, 2, 1]
            s = max(abs(ay), abs(az), abs(by), abs(bz), abs(cy), abs(cz), 1e-30)
            tol = 1e-9 * s * s
            ymin = min(ay, min(by, cy))
            ymax = max(ay, max(by, cy))
            zmin = min(az, min(bz, cz))
            zmax = max(az, max(bz, cz))
            i0 = int(np.ceil((ymin - y0) / hy - 1e-9))
            i1 = int(np.floor((ymax - y0) / hy + 1e-9))
            j0 = int(np.ceil((zmin - z0) / hz - 1e-9))
            j1 = int(np.floor((zmax - z0) / hz + 1e-9))
            if i0 < 0:
                i0 = 0
            if i1 > res:
                i1 = res
            if j0 < 0:
                j0 = 0
            if j1 > res:
                j1 = res
            for i in range(i0, i1 + 1):
                qy = y0 + i * hy
                for j in range(j0, j1 + 1):
                    if covered[i, j]:
                        continue
                    qz = z0 + j * hz
                    e0 = (by - ay) * (qz - az) - (bz - az) * (qy - ay)
                    e1 = (cy - by) * (qz - bz) - (cz - bz) * (qy - by)
                    e2 = (ay - cy) * (qz - cz) - (az - cz) * (qy - cy)
                    if (e0 >= -tol and e1 >= -tol and e2 >= -tol) or (
                        e0 <= tol and e1 <= tol and e2 <= tol
                    ):
                        covered[i, j] = True
        return covered

    def cover_lattice_numba(
        tris: np.ndarray, y0: float, z0: float, hy: float, hz: float, res: int
    ) -> np.ndarray:
        return _cover_lattice_nb(
            np.ascontiguousarray(tris, dtype=np.float64), y0, z0, hy, hz, res
        )

else:  # pragma: no cover
    cover_lattice_numba = None


def cover_lattice(
    tris: np.ndarray, y0: float, z0: float, hy: float, hz: float, res: int
) -> np.ndarray:
    if USE_NUMBA:
        return cover_lattice_numba(tris, y0, z0, hy, hz, res)
    return cover_lattice_numpy(tris, y0, z0, hy, hz, res)


def warm_up() -> None:
    """Trigger JIT compilation of the numba kernels on tiny inputs."""
    if not USE_NUMBA:
        return
    pts = np.zeros((2, 3))
    nearest_sqdist_numba(pts, pts)
    tri = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
    cover_lattice_numba(tri, 0.0, 0.0, 0.5, 0.5, 2)
