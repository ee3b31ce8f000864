import math

import numpy as np
import pytest
import scipy.io
import scipy.linalg
from hypothesis import given, settings, strategies as st

from eigenratio import fem
from eigenratio.mesh import (MeshError, SurfaceMesh, TetMesh, gen_ball_tet, gen_cube_surface, gen_cube_tet,
                             gen_icosphere, gen_solid_torus_tet, gen_torus, surface_area)
from eigenratio.pipeline import FIXTURES

SQUARE = SurfaceMesh(np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], float),
                     np.array([[0, 1, 2], [0, 2, 3]]), check=False)
REF_TET = TetMesh(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], float), np.array([[0, 1, 2, 3]]))


def gradient_energy_oracle(mesh, f):
    """sum_T area_T |grad f|^2 with the gradient of the linear interpolant
    built from rotated edge vectors, independent of cotangent weights."""
    v, total = mesh.vertices, 0.0
    for tri in mesh.faces:
        p = v[tri]
        n = np.cross(p[1] - p[0], p[2] - p[0])
        twice_area = np.linalg.norm(n)
        n /= twice_area
        grad = np.zeros(3)
        for i in range(3):
            e = p[(i + 2) % 3] - p[(i + 1) % 3]  # edge opposite vertex i
            grad += f[tri[i]] * np.cross(n, e) / twice_area
        total += 0.5 * twice_area * grad @ grad
    return total


def surfaces():
    return [gen_icosphere(1.0, 2), gen_torus(2, 1, 16, 8), gen_cube_surface(1, 3), FIXTURES["genus2"].surface()]


class TestSurfaceStiffness:
    def test_square_diagonal_weight_zero(self):
        S = fem.assemble_surface_stiffness(SQUARE)
        assert S[0, 2] == pytest.approx(0.0, abs=1e-15)
        assert S[0, 1] == pytest.approx(-0.5)

    def test_square_linear_energy(self):
        S = fem.assemble_surface_stiffness(SQUARE)
        x = SQUARE.vertices[:, 0]
        assert x @ S @ x == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("mesh", surfaces(), ids=["ico2", "torus", "cube", "genus2"])
    def test_invariants(self, mesh):
        S = fem.assemble_surface_stiffness(mesh)
        assert fem.symmetry_defect(S) <= 1e-12
        assert np.abs(S @ np.ones(mesh.n_vertices)).max() <= 1e-10 * abs(S).max()
        smallest = scipy.linalg.eigvalsh(S.toarray(), subset_by_index=[0, 1])
        assert smallest[0] >= -1e-10 * abs(S).max()

    @pytest.mark.parametrize("mesh", surfaces(), ids=["ico2", "torus", "cube", "genus2"])
    def test_coordinate_energy_identity(self, mesh):
        S = fem.assemble_surface_stiffness(mesh)
        x = mesh.vertices
        energy = float(np.einsum("ij,ij->", x, S @ x))
        assert energy == pytest.approx(2 * surface_area(mesh), rel=1e-9)
        oracle = sum(gradient_energy_oracle(mesh, x[:, k]) for k in range(3))
        assert energy == pytest.approx(oracle, rel=1e-9)

    def test_ico4_identity(self):
        m = gen_icosphere(1.0, 4)
        x = m.vertices
        S = fem.assemble_surface_stiffness(m)
        assert np.einsum("ij,ij->", x, S @ x) == pytest.approx(2 * surface_area(m), rel=1e-9)

    def test_random_function_matches_oracle(self, rng):
        m = gen_torus(2, 1, 10, 6)
        f = rng.standard_normal(m.n_vertices)
        S = fem.assemble_surface_stiffness(m)
        assert f @ S @ f == pytest.approx(gradient_energy_oracle(m, f), rel=1e-10)


class TestSurfaceMass:
    def test_cube_lumped_trace(self):
        M = fem.assemble_surface_mass(gen_cube_surface(1, 1), lumped=True)
        assert M.diagonal().sum() == pytest.approx(6.0, rel=1e-14)
        assert M.nnz == 8

    @pytest.mark.parametrize("lumped", [True, False])
    @pytest.mark.parametrize("mesh", surfaces(), ids=["ico2", "torus", "cube", "genus2"])
    def test_partition_of_unity(self, mesh, lumped):
        M = fem.assemble_surface_mass(mesh, lumped=lumped)
        one = np.ones(mesh.n_vertices)
        assert one @ M @ one == pytest.approx(surface_area(mesh), rel=1e-10)
        assert fem.symmetry_defect(M) <= 1e-12
        scipy.linalg.cholesky(M.toarray())

    def test_single_triangle_consistent(self):
        tri = SurfaceMesh(np.array([[0, 0, 0], [2, 0, 0], [0, 3, 0]], float), np.array([[0, 1, 2]]), check=False)
        M = fem.assemble_surface_mass(tri, lumped=False).toarray()
        np.testing.assert_allclose(M.sum(axis=1), 3.0 / 3)
        np.testing.assert_allclose(M, 3.0 / 12 * (np.ones((3, 3)) + np.eye(3)))

    def test_lumped_is_row_sum(self):
        m = gen_torus(2, 1, 12, 6)
        lumped = fem.assemble_surface_mass(m, True).diagonal()
        consistent = np.asarray(fem.assemble_surface_mass(m, False).sum(axis=1)).ravel()
        np.testing.assert_allclose(lumped, consistent, rtol=1e-13)
        assert np.all(lumped > 0)


class TestTet:
    def test_reference_tet_energy(self):
        S = fem.assemble_tet_stiffness(REF_TET)
        x = REF_TET.vertices[:, 0]
        assert x @ S @ x == pytest.approx(1 / 6, rel=1e-14)

    @pytest.mark.parametrize("lumped", [True, False])
    def test_cube_mass_total(self, lumped):
        t = gen_cube_tet(1, 3)
        M = fem.assemble_tet_mass(t, lumped)
        one = np.ones(t.n_vertices)
        assert one @ M @ one == pytest.approx(1.0, rel=1e-13)

    def test_cube_linear_energy(self):
        t = gen_cube_tet(1, 2)
        x = t.vertices[:, 0]
        assert x @ fem.assemble_tet_stiffness(t) @ x == pytest.approx(1.0, rel=1e-13)

    @pytest.mark.parametrize("tet", [gen_ball_tet(1, 2), gen_solid_torus_tet(2, 1, 12, 2, 6), gen_cube_tet(1, 3)],
                             ids=["ball", "solid-torus", "cube"])
    def test_invariants(self, tet):
        S = fem.assemble_tet_stiffness(tet)
        M = fem.assemble_tet_mass(tet, lumped=False)
        assert fem.symmetry_defect(S) <= 1e-12
        assert fem.symmetry_defect(M) <= 1e-12
        assert np.abs(S @ np.ones(tet.n_vertices)).max() <= 1e-10 * abs(S).max()
        red = fem.apply_dirichlet(S, M, tet.boundary_vertices)
        scipy.linalg.cholesky(red.stiffness.toarray())
        scipy.linalg.cholesky(red.mass.toarray())

    def test_consistent_mass_element(self):
        M = fem.assemble_tet_mass(REF_TET, lumped=False).toarray()
        np.testing.assert_allclose(M, (1 / 6) / 20 * (np.ones((4, 4)) + np.eye(4)), rtol=1e-14)


class TestDirichlet:
    def test_no_interior(self):
        t = gen_cube_tet(1, 1)
        with pytest.raises(MeshError, match="no interior degrees of freedom"):
            fem.apply_dirichlet(fem.assemble_tet_stiffness(t), fem.assemble_tet_mass(t), t.boundary_vertices)

    def test_empty_boundary(self):
        t = gen_cube_tet(1, 2)
        with pytest.raises(MeshError, match="empty boundary"):
            fem.apply_dirichlet(fem.assemble_tet_stiffness(t), fem.assemble_tet_mass(t), [])

    def test_single_interior(self):
        t = gen_cube_tet(1, 2)
        red = fem.apply_dirichlet(fem.assemble_tet_stiffness(t), fem.assemble_tet_mass(t), t.boundary_vertices)
        assert red.stiffness.shape == (1, 1)
        np.testing.assert_allclose(t.vertices[red.interior_index_map[0]], [0.5, 0.5, 0.5])

    def test_ball_bookkeeping(self):
        t = gen_ball_tet(1, 3)
        red = fem.apply_dirichlet(fem.assemble_tet_stiffness(t), fem.assemble_tet_mass(t), t.boundary_vertices)
        assert red.stiffness.shape[0] == t.n_vertices - len(t.boundary_vertices)
        assert fem.symmetry_defect(red.stiffness) <= 1e-12
        x = np.arange(red.stiffness.shape[0], dtype=float)
        full = red.expand(x, t.n_vertices)
        assert np.all(full[t.boundary_vertices] == 0)


@settings(max_examples=10, deadline=None)
@given(t=st.sampled_from([0.5, 3.0, 0.37, 7.5]), seed=st.integers(0, 2**16))
def test_scaling_covariance(t, seed):
    rng = np.random.default_rng(seed)
    m = gen_torus(2, 1, 8, 6)
    # jitter keeps the mesh generic while staying valid
    v = m.vertices + 0.02 * rng.standard_normal(m.vertices.shape)
    m = SurfaceMesh(v, m.faces)
    ms = m.transformed(scale=t)
    for lumped in (True, False):
        a, b = fem.assemble_surface_mass(m, lumped), fem.assemble_surface_mass(ms, lumped)
        assert abs(b - t**2 * a).max() <= 1e-12 * abs(b).max()
    a, b = fem.assemble_surface_stiffness(m), fem.assemble_surface_stiffness(ms)
    assert abs(b - a).max() <= 1e-12 * abs(a).max()
    tet = gen_ball_tet(1, 1)
    tets = tet.transformed(scale=t)
    a, b = fem.assemble_tet_stiffness(tet), fem.assemble_tet_stiffness(tets)
    assert abs(b - t * a).max() <= 1e-12 * abs(b).max()
    a, b = fem.assemble_tet_mass(tet, False), fem.assemble_tet_mass(tets, False)
    assert abs(b - t**3 * a).max() <= 1e-12 * abs(b).max()


def test_matrix_market_roundtrip(tmp_path):
    S = fem.assemble_surface_stiffness(gen_icosphere(1.0, 1))
    fem.write_matrix_market(S, tmp_path / "s.mtx")
    back = scipy.io.mmread(str(tmp_path / "s.mtx"))
    assert abs(back.tocsr() - S).max() <= 1e-15 * abs(S).max()
    assert "symmetric" in (tmp_path / "s.mtx").read_text().splitlines()[0]
