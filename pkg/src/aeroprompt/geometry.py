"""Triangle-mesh and point-cloud primitives for design evaluation.

Everything here is a pure function over immutable inputs: meshes and clouds
are frozen dataclasses wrapping read-only numpy arrays, so concurrent use
is safe. Distances are in dimensionless model units.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels
from .errors import DegenerateBaseline, EmptyMesh, ZeroProjection

DEGENERATE_FACE_AREA = 1e-12
EXTENT_TIE_TOL = 1e-9
DEFAULT_GRID_RESOLUTION = 256


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TriMesh:
    """Triangle soup: (n,3) float vertices, (m,3) int vertex-index faces."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        object.__setattr__(self, "vertices", _freeze(v))
        object.__setattr__(self, "faces", _freeze(f))

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_faces(self) -> int:
        return self.faces.shape[0]

    def face_areas(self) -> np.ndarray:
        tri = self.vertices[self.faces]
        cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def content_hash(self) -> str:
        """Stable digest over exact vertex/face bytes."""
        import hashlib

        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        h.update(np.ascontiguousarray(self.faces).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class PointCloud:
    """Non-empty set of 3D points."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if p.shape[0] == 0:
            raise ValueError("point cloud is empty")
        if not np.all(np.isfinite(p)):
            raise ValueError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", _freeze(p))

    def __len__(self) -> int:
        return self.points.shape[0]

    def translated(self, offset) -> "PointCloud":
        return PointCloud(self.points + np.asarray(offset, dtype=np.float64))


@dataclass(frozen=True)
class BoundingDims:
    """Axis-aligned extents (max - min per axis)."""

    lx: float
    ly: float
    lz: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.lx, self.ly, self.lz)


@dataclass(frozen=True)
class EvalResult:
    """Drag evaluation output for one design."""

    cd: float
    frontal_area: float
    dims: BoundingDims
    cd_normalized: Optional[float] = None


# ---------------------------------------------------------------------------
# mesh operations
# ---------------------------------------------------------------------------

def validate_mesh(mesh: TriMesh) -> TriMesh:
    """Drop unusable faces and prune unreferenced vertices.

    A face is dropped when it repeats a vertex index, references an
    out-of-range index, touches a non-finite vertex, or spans an area below
    ``DEGENERATE_FACE_AREA``. Raises EmptyMesh when nothing valid remains.
    Idempotent: a validated mesh passes through unchanged.
    """
    v = mesh.vertices
    f = mesh.faces
    if f.shape[0] == 0:
        raise EmptyMesh("mesh has no faces")

    in_range = np.all((f >= 0) & (f < v.shape[0]), axis=1)
    distinct = (f[:, 0] != f[:, 1]) & (f[:, 1] != f[:, 2]) & (f[:, 0] != f[:, 2])
    keep = in_range & distinct

    finite_v = np.all(np.isfinite(v), axis=1)
    # out-of-range rows cannot index; use a safe copy for the gather
    f_safe = np.where(in_range[:, None], f, 0)
    keep &= np.all(finite_v[f_safe], axis=1)

    tri = v[f_safe]
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    with np.errstate(invalid="ignore"):
        area = 0.5 * np.linalg.norm(cross, axis=1)
    keep &= np.isfinite(area) & (area >= DEGENERATE_FACE_AREA)

    if not np.any(keep):
        raise EmptyMesh("no valid face remains after validation")

    f_kept = f[keep]
    used = np.unique(f_kept)
    remap = np.full(v.shape[0], -1, dtype=np.int64)
    remap[used] = np.arange(used.size)
    return TriMesh(v[used], remap[f_kept])


def bounding_dims(mesh: TriMesh) -> BoundingDims:
    """Per-axis max - min of the vertex coordinates."""
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    ext = hi - lo
    return BoundingDims(float(ext[0]), float(ext[1]), float(ext[2]))


def align_to_axes(mesh: TriMesh) -> TriMesh:
    """Permute axes so extents sort lx >= ly >= lz and center the bounding box.

    The permutation keeps the original axis order for extents tied within
    ``EXTENT_TIE_TOL`` and preserves handedness by flipping the z axis when
    the permutation is odd, so the transform stays rigid.
    """
    if mesh.num_faces == 0:
        raise EmptyMesh("mesh has no faces")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    ext = hi - lo

    remaining = [0, 1, 2]
    order = []
    for _ in range(3):
        best = remaining[0]
        for ax in remaining[1:]:
            if ext[ax] > ext[best] + EXTENT_TIE_TOL:
                best = ax
        order.append(best)
        remaining.remove(best)

    v = mesh.vertices[:, order].copy()
    # permutation parity: odd permutations of (0,1,2) need one reflection
    parity = (
        (order[0], order[1], order[2]) in ((0, 1, 2), (1, 2, 0), (2, 0, 1))
    )
    if not parity:
        v[:, 2] = -v[:, 2]
    center = 0.5 * (v.min(axis=0) + v.max(axis=0))
    v -= center
    return TriMesh(v, mesh.faces)


def projected_frontal_area(
    mesh: TriMesh, grid_resolution: int = DEFAULT_GRID_RESOLUTION
) -> float:
    """Area of the union of faces projected onto the y-z plane (flow along +x).

    Projected triangles are rasterized onto a ``grid_resolution``-squared
    occupancy grid spanning the projected bounding rectangle. A cell counts
    as occupied when all four of its corner points are covered by some
    triangle, which makes the estimate converge to the union area from below
    and monotonically under grid refinement for convex silhouettes.
    """
    if grid_resolution < 16:
        raise ValueError("grid_resolution must be >= 16")
    proj = mesh.vertices[:, 1:3]
    lo = proj.min(axis=0)
    hi = proj.max(axis=0)
    span = hi - lo
    if span[0] <= 0.0 or span[1] <= 0.0:
        raise ZeroProjection("projected bounding rectangle has zero area")

    res = int(grid_resolution)
    hy = span[0] / res
    hz = span[1] / res
    tris = proj[mesh.faces]
    covered = kernels.cover_lattice(tris, float(lo[0]), float(lo[1]), hy, hz, res)
    occupied = (
        covered[:-1, :-1] & covered[1:, :-1] & covered[:-1, 1:] & covered[1:, 1:]
    )
    return float(np.count_nonzero(occupied)) * hy * hz


def sample_surface(mesh: TriMesh, n: int, seed: int) -> PointCloud:
    """Sample `n` points area-uniformly over the mesh surface.

    Deterministic for a fixed seed: triangle choice is area-weighted and
    in-triangle placement uses the square-root barycentric trick.
    """
    if n <= 0:
        raise ValueError("sample count must be positive")
    areas = mesh.face_areas()
    total = areas.sum()
    if total <= 0.0:
        raise EmptyMesh("mesh has zero surface area")
    rng = np.random.default_rng(seed)
    idx = rng.choice(mesh.num_faces, size=n, p=areas / total)
    tri = mesh.vertices[mesh.faces[idx]]
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    pts = (
        (1.0 - r1)[:, None] * a
        + (r1 * (1.0 - r2))[:, None] * b
        + (r1 * r2)[:, None] * c
    )
    return PointCloud(pts)


def chamfer_distance(a: PointCloud, b: PointCloud) -> float:
    """Symmetric mean squared nearest-neighbor distance between two clouds.

    Each directional sum is divided by its own cloud size, so the value is
    independent of (possibly unequal) cloud sizes.
    """
    d_ab = kernels.nearest_sqdist(a.points, b.points)
    d_ba = kernels.nearest_sqdist(b.points, a.points)
    return float(d_ab.mean() + d_ba.mean())


def normalize_cd(cd: float, baseline_min: float, baseline_max: float) -> float:
    """Drag coefficient divided by the baseline span (max - min)."""
    span = baseline_max - baseline_min
    if span <= 0.0:
        raise DegenerateBaseline(f"baseline span must be positive, got {span!r}")
    return cd / span


# ---------------------------------------------------------------------------
# I/O: Wavefront OBJ meshes, XYZ point clouds
# ---------------------------------------------------------------------------

def load_obj(path) -> TriMesh:
    """Read an ASCII OBJ (v/f records). Polygon faces are fan-triangulated;
    negative and slash-qualified indices are handled."""
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "v":
                if len(parts) < 4:
                    raise ValueError(f"{path}:{lineno}: malformed vertex record")
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif parts[0] == "f":
                if len(parts) < 4:
                    raise ValueError(f"{path}:{lineno}: face needs >= 3 indices")
                idx = []
                for tok in parts[1:]:
                    head = tok.split("/")[0]
                    i = int(head)
                    idx.append(i - 1 if i > 0 else len(vertices) + i)
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
    if not faces:
        raise EmptyMesh(f"{path}: no faces found")
    return TriMesh(np.array(vertices), np.array(faces))


def save_obj(mesh: TriMesh, path) -> None:
    # repr of a Python float is the shortest exact round-trip decimal
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in mesh.vertices:
            fh.write(f"v {float(x)!r} {float(y)!r} {float(z)!r}\n")
        for i, j, k in mesh.faces:
            fh.write(f"f {i + 1} {j + 1} {k + 1}\n")


def load_xyz(path) -> PointCloud:
    pts = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            x, y, z = line.split()[:3]
            pts.append([float(x), float(y), float(z)])
    return PointCloud(np.array(pts))


def save_xyz(cloud: PointCloud, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in cloud.points:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")


def _box_mesh(extents, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box as 12 triangles; test and fixture helper."""
    ex, ey, ez = extents
    cx, cy, cz = center
    s = np.array(
        [[x, y, z] for x in (-0.5, 0.5) for y in (-0.5, 0.5) for z in (-0.5, 0.5)]
    )
    v = s * np.array([ex, ey, ez]) + np.array([cx, cy, cz])
    f = np.array(
        [
            [0, 1, 3], [0, 3, 2],  # x = min
            [4, 6, 7], [4, 7, 5],  # x = max
            [0, 4, 5], [0, 5, 1],  # y = min
            [2, 3, 7], [2, 7, 6],  # y = max
            [0, 2, 6], [0, 6, 4],  # z = min
            [1, 5, 7], [1, 7, 3],  # z = max
        ]
    )
    return TriMesh(v, f)
