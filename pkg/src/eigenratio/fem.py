"""Piecewise-linear stiffness and mass matrices on triangle and tet meshes.

All assemblers return ``scipy.sparse.csr_matrix``. Local element matrices
are scattered as COO triplets and summed on conversion, which is
deterministic for a given element order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import io as spio
from scipy import sparse

from .mesh import MeshError, SurfaceMesh, TetMesh


def _scatter(elements: np.ndarray, local: np.ndarray, n: int) -> sparse.csr_matrix:
    """Sum per-element (k x k) blocks into an (n x n) CSR matrix."""
    k = elements.shape[1]
    rows = np.repeat(elements, k, axis=1).ravel()
    cols = np.tile(elements, (1, k)).ravel()
    return sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_surface_stiffness(mesh: SurfaceMesh) -> sparse.csr_matrix:
    """Cotangent stiffness: edge (i, j) gets -(cot a + cot b)/2.

    Weights on obtuse triangles stay negative on purpose; clamping would
    break the exact coordinate-energy identity.
    """
    v = mesh.vertices
    f = mesh.faces
    local = np.zeros((len(f), 3, 3))
    for i in range(3):
        # angle at vertex i is opposite the edge (j, k)
        j, k = (i + 1) % 3, (i + 2) % 3
        e1 = v[f[:, j]] - v[f[:, i]]
        e2 = v[f[:, k]] - v[f[:, i]]
        cot = np.einsum("ij,ij->i", e1, e2) / np.linalg.norm(np.cross(e1, e2), axis=1)
        w = 0.5 * cot
        local[:, j, k] -= w
        local[:, k, j] -= w
        local[:, j, j] += w
        local[:, k, k] += w
    return _scatter(f, local, mesh.n_vertices)


def assemble_surface_mass(mesh: SurfaceMesh, lumped: bool = True) -> sparse.csr_matrix:
    area = mesh.face_areas()
    if lumped:
        return sparse.diags(mesh.vertex_areas()).tocsr()
    pattern = (np.ones((3, 3)) + np.eye(3)) / 12.0
    return _scatter(mesh.faces, area[:, None, None] * pattern, mesh.n_vertices)


def _tet_gradients(tet: TetMesh):
    v = tet.vertices
    t = tet.tets
    edges = np.stack([v[t[:, i]] - v[t[:, 0]] for i in (1, 2, 3)], axis=1)  # (T, 3, 3) rows
    vol = np.linalg.det(edges) / 6.0
    if np.any(vol <= 0):
        raise MeshError("inverted tet in assembly")
    inv = np.linalg.inv(edges)  # columns are gradients of barycentric 1..3
    grads = np.empty((len(t), 4, 3))
    grads[:, 1:, :] = np.transpose(inv, (0, 2, 1))
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
    return grads, vol


def assemble_tet_stiffness(tet: TetMesh) -> sparse.csr_matrix:
    grads, vol = _tet_gradients(tet)
    local = vol[:, None, None] * np.einsum("tik,tjk->tij", grads, grads)
    return _scatter(tet.tets, local, tet.n_vertices)


def assemble_tet_mass(tet: TetMesh, lumped: bool = True) -> sparse.csr_matrix:
    vol = tet.tet_volumes()
    if lumped:
        diag = np.bincount(tet.tets.ravel(), weights=np.repeat(vol / 4.0, 4), minlength=tet.n_vertices)
        return sparse.diags(diag).tocsr()
    pattern = (np.ones((4, 4)) + np.eye(4)) / 20.0
    return _scatter(tet.tets, vol[:, None, None] * pattern, tet.n_vertices)


@dataclass(frozen=True)
class DirichletReduction:
    interior_index_map: np.ndarray
    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix

    def expand(self, x: np.ndarray, n: int) -> np.ndarray:
        """Lift reduced vectors back to all n vertices, zero on the boundary."""
        full = np.zeros((n,) + x.shape[1:])
        full[self.interior_index_map] = x
        return full


def apply_dirichlet(S, M, boundary_vertices) -> DirichletReduction:
    """Eliminate boundary rows and columns (zero Dirichlet data)."""
    n = S.shape[0]
    boundary = np.unique(np.asarray(boundary_vertices, dtype=np.int64))
    if len(boundary) == 0:
        raise MeshError("empty boundary: Dirichlet conditions need boundary vertices")
    keep = np.ones(n, dtype=bool)
    keep[boundary] = False
    interior = np.flatnonzero(keep)
    if len(interior) == 0:
        raise MeshError("no interior degrees of freedom")
    S = sparse.csr_matrix(S)[interior][:, interior]
    M = sparse.csr_matrix(M)[interior][:, interior]
    return DirichletReduction(interior, S.tocsr(), M.tocsr())


def symmetry_defect(A) -> float:
    """max|A - A^T| / max|A|."""
    A = sparse.csr_matrix(A)
    scale = abs(A).max()
    if scale == 0:
        return 0.0
    d = abs(A - A.T)
    return float(d.max() / scale) if d.nnz else 0.0


def write_matrix_market(A, path) -> None:
    spio.mmwrite(str(path), sparse.coo_matrix(A), field="real", symmetry="symmetric")
