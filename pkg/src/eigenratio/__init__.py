"""Laplace-Beltrami and Dirichlet spectra of closed surfaces and the solids they bound,
with numerical checks of the eigenvalue inequalities that link them."""

__version__ = "0.1.0"

from .mesh import (GeometrySummary, MeshError, SurfaceMesh, TetMesh, center_at_area_centroid,
                   enclosed_volume, gen_ball_tet, gen_cube_surface, gen_cube_tet, gen_icosphere,
                   gen_solid_torus_tet, gen_torus, genus, summarize, surface_area)
from .spectra import (SurfaceSpectrum, VolumeSpectrum, ball_dirichlet_reference,
                      cube_dirichlet_reference, dirichlet_spectrum, sphere_reference,
                      surface_spectrum)

__all__ = [
    "GeometrySummary", "MeshError", "SurfaceMesh", "TetMesh", "center_at_area_centroid",
    "enclosed_volume", "gen_ball_tet", "gen_cube_surface", "gen_cube_tet", "gen_icosphere",
    "gen_solid_torus_tet", "gen_torus", "genus", "summarize", "surface_area",
    "SurfaceSpectrum", "VolumeSpectrum", "ball_dirichlet_reference", "cube_dirichlet_reference",
    "dirichlet_spectrum", "sphere_reference", "surface_spectrum",
]
