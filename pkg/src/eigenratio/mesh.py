"""Closed triangle surfaces, tetrahedral solids, generators and geometry.

Meshes are frozen dataclasses over read-only numpy arrays. Construction
validates the topological invariants and raises :class:`MeshError` naming
the first violation; orientation problems are reported, never repaired.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

DEGENERATE_AREA_FACTOR = 1e-12


class MeshError(ValueError):
    """A mesh violates one of its structural invariants."""


def _frozen(a, dtype):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _triangle_area_vectors(vertices, faces):
    v0, v1, v2 = (vertices[faces[:, i]] for i in range(3))
    return 0.5 * np.cross(v1 - v0, v2 - v0)


def _validate_surface(vertices: np.ndarray, faces: np.ndarray) -> None:
    if vertices.ndim != 2 or vertices.shape[1] != 3:
        raise MeshError("vertices must have shape (V, 3)")
    if faces.ndim != 2 or faces.shape[1] != 3 or len(faces) == 0:
        raise MeshError("faces must have shape (F, 3) with F > 0")
    if not np.all(np.isfinite(vertices)):
        raise MeshError("non-finite vertex coordinate")
    nv = len(vertices)
    if faces.min() < 0 or faces.max() >= nv:
        raise MeshError("face index out of range")
    if np.any((faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 0] == faces[:, 2])):
        raise MeshError("face repeats a vertex")

    diag = np.linalg.norm(vertices.max(axis=0) - vertices.min(axis=0))
    areas = np.linalg.norm(_triangle_area_vectors(vertices, faces), axis=1)
    bad = np.flatnonzero(areas <= DEGENERATE_AREA_FACTOR * diag**2)
    if len(bad):
        raise MeshError(f"degenerate triangle: face {bad[0]} has area {areas[bad[0]]:.3e}")

    directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    undirected = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(undirected, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if np.any(counts == 1):
        raise MeshError("open surface: boundary edge found")
    if np.any(counts > 2):
        raise MeshError("non-manifold edge: edge shared by more than two faces")
    # each undirected edge must be traversed once forward, once backward
    forward = (directed[:, 0] < directed[:, 1]).astype(np.int64)
    per_edge = np.bincount(inverse, weights=forward, minlength=len(counts))
    if np.any(per_edge != 1):
        raise MeshError("inconsistent orientation")

    used = np.zeros(nv, dtype=bool)
    used[faces.ravel()] = True
    if not used.all():
        raise MeshError("disconnected: unreferenced vertex")
    adj = sparse.coo_matrix(
        (np.ones(len(directed)), (directed[:, 0], directed[:, 1])), shape=(nv, nv)
    )
    ncomp, _ = csgraph.connected_components(adj, directed=False)
    if ncomp != 1:
        raise MeshError(f"disconnected: {ncomp} components")


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Closed, connected, consistently oriented triangle mesh.

    Faces are counterclockwise when seen from outside, so the signed
    volume of a valid mesh is positive. Pass ``check=False`` only to build
    deliberately invalid fixtures (e.g. two disjoint spheres).
    """

    vertices: np.ndarray
    faces: np.ndarray
    check: dataclasses.InitVar[bool] = True

    def __post_init__(self, check):
        object.__setattr__(self, "vertices", _frozen(self.vertices, float))
        object.__setattr__(self, "faces", _frozen(self.faces, np.int64))
        if check:
            _validate_surface(self.vertices, self.faces)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def edges(self) -> np.ndarray:
        """Unique undirected edges, shape (E, 2), sorted per row."""
        directed = np.concatenate(
            [self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]
        )
        return np.unique(np.sort(directed, axis=1), axis=0)

    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges()) + self.n_faces

    def face_areas(self) -> np.ndarray:
        return np.linalg.norm(_triangle_area_vectors(self.vertices, self.faces), axis=1)

    def vertex_areas(self) -> np.ndarray:
        """One third of the incident triangle area at each vertex."""
        return np.bincount(
            self.faces.ravel(), weights=np.repeat(self.face_areas() / 3.0, 3),
            minlength=self.n_vertices,
        )

    def bounding_box_diagonal(self) -> float:
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    def transformed(self, matrix=None, offset=None, scale: float = 1.0) -> "SurfaceMesh":
        """Copy with vertices mapped to ``scale * matrix @ v + offset``.

        ``matrix`` must be a proper rotation (det > 0) to keep orientation.
        """
        v = self.vertices * scale
        if matrix is not None:
            v = v @ np.asarray(matrix, float).T
        if offset is not None:
            v = v + np.asarray(offset, float)
        return SurfaceMesh(v, self.faces)

    def permuted(self, perm) -> "SurfaceMesh":
        """Copy with vertex ``perm[i]`` of the original stored at position i."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        return SurfaceMesh(self.vertices[perm], inv[self.faces])

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        h.update(np.ascontiguousarray(self.faces).tobytes())
        return h.hexdigest()[:16]


def _tet_signed_volumes(vertices, tets):
    v0 = vertices[tets[:, 0]]
    d1 = vertices[tets[:, 1]] - v0
    d2 = vertices[tets[:, 2]] - v0
    d3 = vertices[tets[:, 3]] - v0
    return np.einsum("ij,ij->i", d1, np.cross(d2, d3)) / 6.0


# facet k of a positively oriented tet (a,b,c,d), listed with outward normal
_TET_FACETS = np.array([[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]])


def _boundary_facets(tets: np.ndarray) -> np.ndarray:
    facets = tets[:, _TET_FACETS].reshape(-1, 3)
    key = np.sort(facets, axis=1)
    _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if np.any(counts > 2):
        raise MeshError("non-manifold facet: facet shared by more than two tets")
    return facets[counts[inverse] == 1]


@dataclass(frozen=True, eq=False)
class TetMesh:
    """Tetrahedral mesh of a bounded solid with identified boundary.

    ``boundary_vertices`` is inferred from facet incidence: a facet owned
    by a single tet lies on the boundary.
    """

    vertices: np.ndarray
    tets: np.ndarray
    boundary_vertices: np.ndarray = field(default=None)
    check: dataclasses.InitVar[bool] = True

    def __post_init__(self, check):
        object.__setattr__(self, "vertices", _frozen(self.vertices, float))
        object.__setattr__(self, "tets", _frozen(self.tets, np.int64))
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must have shape (V, 3)")
        if self.tets.ndim != 2 or self.tets.shape[1] != 4 or len(self.tets) == 0:
            raise MeshError("tets must have shape (T, 4) with T > 0")
        if self.tets.min() < 0 or self.tets.max() >= len(self.vertices):
            raise MeshError("tet index out of range")
        vol = _tet_signed_volumes(self.vertices, self.tets)
        bad = np.flatnonzero(vol <= 0)
        if len(bad):
            raise MeshError(f"inverted tet: tet {bad[0]} has signed volume {vol[bad[0]]:.3e}")
        facets = _boundary_facets(self.tets)
        inferred = _frozen(np.unique(facets), np.int64)
        object.__setattr__(self, "boundary_vertices", inferred)
        object.__setattr__(self, "_facets", facets)
        if check:
            used = np.zeros(len(self.vertices), dtype=bool)
            used[self.tets.ravel()] = True
            if not used.all():
                raise MeshError("unreferenced vertex in tet mesh")
            self.boundary_surface()

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def tet_volumes(self) -> np.ndarray:
        return _tet_signed_volumes(self.vertices, self.tets)

    def volume(self) -> float:
        return float(self.tet_volumes().sum())

    def interior_vertices(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = False
        return np.flatnonzero(mask)

    def boundary_surface(self) -> SurfaceMesh:
        """Outward-oriented boundary triangulation, reindexed compactly."""
        facets = self._facets
        used = np.unique(facets)
        remap = np.full(self.n_vertices, -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        return SurfaceMesh(self.vertices[used], remap[facets])

    def transformed(self, matrix=None, offset=None, scale: float = 1.0) -> "TetMesh":
        v = self.vertices * scale
        if matrix is not None:
            v = v @ np.asarray(matrix, float).T
        if offset is not None:
            v = v + np.asarray(offset, float)
        return TetMesh(v, self.tets)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        h.update(np.ascontiguousarray(self.tets).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class GeometrySummary:
    area: float
    volume: float
    genus: int
    euler_characteristic: int
    area_centroid: tuple

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


# ----------------------------------------------------------------------------
# geometry


def surface_area(mesh: SurfaceMesh) -> float:
    return float(mesh.face_areas().sum())


def enclosed_volume(mesh: SurfaceMesh) -> float:
    """Signed volume (1/6) sum det(v1, v2, v3); exact for polyhedra.

    Faces are first shifted to the vertex centroid to limit cancellation;
    the signed sum itself is translation invariant.
    """
    v = mesh.vertices - mesh.vertices.mean(axis=0)
    a, b, c = (v[mesh.faces[:, i]] for i in range(3))
    vol = float(np.einsum("ij,ij->", a, np.cross(b, c)) / 6.0)
    if vol <= 0:
        raise MeshError(f"non-positive enclosed volume {vol:.3e}: faces are oriented inward")
    return vol


def genus(mesh: SurfaceMesh) -> int:
    chi = mesh.euler_characteristic()
    if chi > 2 or chi % 2:
        raise MeshError(f"Euler characteristic {chi} is not that of a closed orientable surface")
    return (2 - chi) // 2


def area_centroid(mesh: SurfaceMesh) -> np.ndarray:
    w = mesh.vertex_areas()
    return w @ mesh.vertices / w.sum()


def center_at_area_centroid(mesh: SurfaceMesh) -> SurfaceMesh:
    """Translate so every coordinate has zero mean under the surface measure.

    For piecewise-linear coordinates the lumped and exact surface integrals
    coincide, so both mass variants see a centered mesh.
    """
    return SurfaceMesh(mesh.vertices - area_centroid(mesh), mesh.faces)


def summarize(mesh: SurfaceMesh) -> GeometrySummary:
    chi = mesh.euler_characteristic()
    return GeometrySummary(
        area=surface_area(mesh),
        volume=enclosed_volume(mesh),
        genus=genus(mesh),
        euler_characteristic=chi,
        area_centroid=tuple(float(x) for x in area_centroid(mesh)),
    )


# ----------------------------------------------------------------------------
# surface generators


_ICO_FACES = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


def gen_icosphere(radius: float = 1.0, subdivisions: int = 3) -> SurfaceMesh:
    """Icosahedron refined by edge midpoints, every vertex projected to the sphere."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    if not 0 <= subdivisions <= 8:
        raise ValueError("subdivisions must be in [0, 8]")
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array([
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ], dtype=float)
    faces = np.array(_ICO_FACES, dtype=np.int64)
    for _ in range(subdivisions):
        edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
        uniq, inverse = np.unique(np.sort(edges, axis=1), axis=0, return_inverse=True)
        inverse = inverse.ravel()
        mid = len(verts) + inverse.reshape(3, -1).T  # columns: m01, m12, m20
        verts = np.vstack([verts, 0.5 * (verts[uniq[:, 0]] + verts[uniq[:, 1]])])
        a, b, c = faces.T
        m01, m12, m20 = mid.T
        faces = np.concatenate([
            np.column_stack([a, m01, m20]),
            np.column_stack([b, m12, m01]),
            np.column_stack([c, m20, m12]),
            np.column_stack([m01, m12, m20]),
        ])
    verts *= radius / np.linalg.norm(verts, axis=1, keepdims=True)
    return SurfaceMesh(verts, faces)


def _orient_outward(vertices, faces):
    v = vertices - vertices.mean(axis=0)
    a, b, c = (v[faces[:, i]] for i in range(3))
    if np.einsum("ij,ij->", a, np.cross(b, c)) < 0:
        faces = faces[:, ::-1]
    return faces


def _grid_quads_to_tris(index: np.ndarray, wrap_u: bool, wrap_v: bool) -> np.ndarray:
    """Split the quads of a structured index grid into triangle pairs."""
    nu, nv = index.shape
    iu = np.arange(nu if wrap_u else nu - 1)
    iv = np.arange(nv if wrap_v else nv - 1)
    U, V = np.meshgrid(iu, iv, indexing="ij")
    U, V = U.ravel(), V.ravel()
    U1, V1 = (U + 1) % nu, (V + 1) % nv
    a, b, c, d = index[U, V], index[U1, V], index[U1, V1], index[U, V1]
    return np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])


def gen_torus(major_radius: float = 2.0, minor_radius: float = 1.0,
              nu: int = 32, nv: int = 16) -> SurfaceMesh:
    """Torus of revolution about z on a structured (nu x nv) angle grid."""
    if not 0 < minor_radius < major_radius:
        raise ValueError("torus requires 0 < minor_radius < major_radius")
    if nu < 3 or nv < 3:
        raise ValueError("nu and nv must be at least 3")
    if minor_radius > 0.99 * major_radius:
        warnings.warn("torus is close to self-intersection near the axis", RuntimeWarning)
    u = 2 * np.pi * np.arange(nu) / nu
    v = 2 * np.pi * np.arange(nv) / nv
    U, V = np.meshgrid(u, v, indexing="ij")
    rho = major_radius + minor_radius * np.cos(V)
    verts = np.column_stack([
        (rho * np.cos(U)).ravel(), (rho * np.sin(U)).ravel(),
        (minor_radius * np.sin(V)).ravel(),
    ])
    index = np.arange(nu * nv).reshape(nu, nv)
    faces = _grid_quads_to_tris(index, True, True)
    return SurfaceMesh(verts, _orient_outward(verts, faces))


def gen_cube_surface(edge: float = 1.0, n: int = 1) -> SurfaceMesh:
    """Surface of [0, edge]^3 with each face cut into n x n quads, two triangles each."""
    if not edge > 0:
        raise ValueError("edge must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    lattice = {}
    verts = []

    def vid(p):
        key = tuple(p)
        if key not in lattice:
            lattice[key] = len(verts)
            verts.append(key)
        return lattice[key]

    faces = []
    for axis in range(3):
        a1, a2 = [ax for ax in range(3) if ax != axis]
        for side in (0, n):
            grid = np.empty((n + 1, n + 1), dtype=np.int64)
            for i in range(n + 1):
                for j in range(n + 1):
                    p = [0, 0, 0]
                    p[axis], p[a1], p[a2] = side, i, j
                    grid[i, j] = vid(p)
            tris = _grid_quads_to_tris(grid, False, False)
            # (a1, a2, axis) is a right-handed frame for axis order (0,1,2),(1,0,2)->flip etc.
            normal = np.cross(np.eye(3)[a1], np.eye(3)[a2])[axis]
            outward = 1 if side == n else -1
            if normal * outward < 0:
                tris = tris[:, ::-1]
            faces.append(tris)
    verts = np.array(verts, dtype=float) * (edge / n)
    return SurfaceMesh(verts, np.concatenate(faces))


# ----------------------------------------------------------------------------
# solid generators


# Kuhn split of the unit cube: one tet per axis permutation
_KUHN_PERMS = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]


def _kuhn_tets(shape, cell_mask=None):
    """Kuhn-split tets over a structured vertex grid of ``shape`` points per axis.

    Returns (tets, vertex_index_grid_coords) where tets index the flattened
    grid. The split is conforming because every cell uses the same diagonal.
    """
    nx, ny, nz = (s - 1 for s in shape)
    cells = np.argwhere(np.ones((nx, ny, nz), dtype=bool) if cell_mask is None else cell_mask)

    def flat(ijk):
        return (ijk[:, 0] * shape[1] + ijk[:, 1]) * shape[2] + ijk[:, 2]

    tets = []
    for perm in _KUHN_PERMS:
        corners = [cells.copy()]
        cur = cells.copy()
        for ax in perm:
            cur = cur.copy()
            cur[:, ax] += 1
            corners.append(cur)
        t = np.column_stack([flat(c) for c in corners])
        tets.append(t)
    return np.concatenate(tets)


def _fix_tet_orientation(vertices, tets):
    vol = _tet_signed_volumes(vertices, tets)
    tets = tets.copy()
    neg = vol < 0
    tets[neg, 2], tets[neg, 3] = tets[neg, 3], tets[neg, 2].copy()
    return tets


def _compact(vertices, tets):
    used = np.unique(tets)
    remap = np.full(len(vertices), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return vertices[used], remap[tets]


def voxel_tet(cell_mask: np.ndarray, cell_size: float = 1.0, refine: int = 1) -> TetMesh:
    """Solid made of the unit voxels set in ``cell_mask``, each cut into refine^3 cubes.

    Used for fixtures such as the genus-2 plate; every voxel is Kuhn-split.
    """
    mask = np.asarray(cell_mask, dtype=bool)
    if refine < 1:
        raise ValueError("refine must be at least 1")
    fine = mask.repeat(refine, 0).repeat(refine, 1).repeat(refine, 2)
    shape = tuple(s + 1 for s in fine.shape)
    grid = np.stack(np.meshgrid(*[np.arange(s) for s in shape], indexing="ij"), -1).reshape(-1, 3)
    verts = grid * (cell_size / refine)
    tets = _kuhn_tets(shape, fine)
    tets = _fix_tet_orientation(verts, tets)
    verts, tets = _compact(verts, tets)
    return TetMesh(verts, tets)


def gen_cube_tet(edge: float = 1.0, n: int = 1) -> TetMesh:
    """Cube [0, edge]^3 on an n^3 grid, six tets per cell."""
    if not edge > 0:
        raise ValueError("edge must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    return voxel_tet(np.ones((1, 1, 1), dtype=bool), cell_size=edge, refine=n)


def gen_ball_tet(radius: float = 1.0, refinement: int = 3) -> TetMesh:
    """Ball from a cube grid of 2**refinement cells per axis, remapped radially.

    A grid point p in [-1, 1]^3 moves to ``radius * |p|_inf * p / |p|_2``,
    so each cubical shell lands on a sphere and the outer shell on the
    boundary sphere.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if not 1 <= refinement <= 6:
        raise ValueError("refinement must be in [1, 6]")
    m = 2**refinement
    shape = (m + 1,) * 3
    grid = np.stack(np.meshgrid(*[np.arange(m + 1)] * 3, indexing="ij"), -1).reshape(-1, 3)
    p = grid * (2.0 / m) - 1.0
    inf = np.abs(p).max(axis=1)
    two = np.linalg.norm(p, axis=1)
    scale = np.divide(inf, two, out=np.zeros_like(inf), where=two > 0)
    verts = radius * p * scale[:, None]
    # fix the boundary radius exactly
    on_shell = inf == 1.0
    verts[on_shell] *= radius / np.linalg.norm(verts[on_shell], axis=1, keepdims=True)
    tets = _kuhn_tets(shape)
    tets = _fix_tet_orientation(verts, tets)
    return TetMesh(verts, tets)


def _prism_tets(bottom, top, tri):
    """Split prisms over triangles ``tri`` (indices into a 2D vertex set) into tets.

    Vertices are ordered by their 2D index, which picks the same quad
    diagonal from both sides of every shared face.
    """
    s = np.sort(tri, axis=1)
    p, q, r = s[:, 0], s[:, 1], s[:, 2]
    return np.concatenate([
        np.column_stack([bottom[p], bottom[q], bottom[r], top[p]]),
        np.column_stack([bottom[q], bottom[r], top[p], top[q]]),
        np.column_stack([bottom[r], top[p], top[q], top[r]]),
    ])


def gen_solid_torus_tet(major_radius: float = 2.0, minor_radius: float = 1.0,
                        nu: int = 24, nr: int = 4, nv: int = 12) -> TetMesh:
    """Solid torus: a polar disk grid (nr rings, nv spokes) swept over nu angles."""
    if not 0 < minor_radius < major_radius:
        raise ValueError("solid torus requires 0 < minor_radius < major_radius")
    if nu < 3 or nv < 3 or nr < 1:
        raise ValueError("need nu >= 3, nv >= 3, nr >= 1")
    # 2D disk: center 0, ring j (1..nr) spoke k -> 1 + (j-1)*nv + k
    rho = np.concatenate([[0.0], np.repeat(np.arange(1, nr + 1) / nr, nv) * minor_radius])
    phi = np.concatenate([[0.0], np.tile(2 * np.pi * np.arange(nv) / nv, nr)])
    k = np.arange(nv)
    k1 = (k + 1) % nv
    tris = [np.column_stack([np.zeros(nv, dtype=np.int64), 1 + k, 1 + k1])]
    for j in range(1, nr):
        inner, outer = 1 + (j - 1) * nv, 1 + j * nv
        tris.append(np.column_stack([inner + k, outer + k, outer + k1]))
        tris.append(np.column_stack([inner + k, outer + k1, inner + k1]))
    tris = np.concatenate(tris)
    n2d = len(rho)
    u = 2 * np.pi * np.arange(nu) / nu
    radial = major_radius + rho[None, :] * np.cos(phi)[None, :]
    verts = np.column_stack([
        (radial * np.cos(u)[:, None]).ravel(),
        (radial * np.sin(u)[:, None]).ravel(),
        np.tile(rho * np.sin(phi), nu),
    ])
    tets = []
    for i in range(nu):
        bottom = i * n2d + np.arange(n2d)
        top = ((i + 1) % nu) * n2d + np.arange(n2d)
        tets.append(_prism_tets(bottom, top, tris))
    tets = _fix_tet_orientation(verts, np.concatenate(tets))
    return TetMesh(verts, tets)
