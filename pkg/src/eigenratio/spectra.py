"""Surface and Dirichlet spectra under the 1-based nonzero index convention.

``surface_spectrum(mesh, k)`` returns lambda_1 <= ... <= lambda_k, the first
k NONZERO Laplace-Beltrami eigenvalues (the single constant mode is
stripped). ``dirichlet_spectrum(tet, k)`` returns lambda^D_1..lambda^D_k.
The analytic references for sphere, ball and cube are kept free of any
mesh or solver code so they can serve as independent oracles.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import fem
from .eigen import EigenRequest, classify_zero_modes, default_shift, solve_generalized
from .mesh import GeometrySummary, SurfaceMesh, TetMesh, summarize, surface_area


@dataclass
class SurfaceSpectrum:
    summary: GeometrySummary
    eigenvalues: np.ndarray  # nonzero, ascending
    residuals: np.ndarray
    zero_modes: int
    zero_value: float
    zero_residual: float = 0.0

    def __post_init__(self):
        if self.zero_modes != 1:
            raise ValueError("a closed connected surface has exactly one zero mode")

    def __getitem__(self, k: int) -> float:
        """lambda_k with k starting at 1."""
        if not 1 <= k <= len(self.eigenvalues):
            raise IndexError(f"lambda_{k} not available (have 1..{len(self.eigenvalues)})")
        return float(self.eigenvalues[k - 1])


@dataclass
class VolumeSpectrum:
    volume: float
    boundary_area: float
    eigenvalues: np.ndarray
    residuals: np.ndarray

    def __getitem__(self, k: int) -> float:
        if not 1 <= k <= len(self.eigenvalues):
            raise IndexError(f"lambda^D_{k} not available (have 1..{len(self.eigenvalues)})")
        return float(self.eigenvalues[k - 1])


def surface_spectrum(mesh: SurfaceMesh, k: int = 10, lumped: bool = True,
                     tolerance: float = 1e-8, max_iterations: int = 200,
                     verbose: bool = False) -> SurfaceSpectrum:
    S = fem.assemble_surface_stiffness(mesh)
    M = fem.assemble_surface_mass(mesh, lumped=lumped)
    req = EigenRequest(k + 1, tolerance=tolerance, shift=default_shift(S),
                       max_iterations=max_iterations, verbose=verbose)
    result = solve_generalized(S, M, req)
    # the largest requested eigenvalue sets the zero-mode threshold
    split = classify_zero_modes(result, scale=result.eigenvalues[-1], expected=1)
    return SurfaceSpectrum(
        summary=summarize(mesh),
        eigenvalues=split.nonzero,
        residuals=split.nonzero_residuals,
        zero_modes=len(split.zero_modes),
        zero_value=float(split.zero_modes[0]),
        zero_residual=float(split.zero_residuals[0]),
    )


def dirichlet_spectrum(tet: TetMesh, k: int = 10, lumped: bool = True,
                       tolerance: float = 1e-8, max_iterations: int = 200,
                       verbose: bool = False) -> VolumeSpectrum:
    S = fem.assemble_tet_stiffness(tet)
    M = fem.assemble_tet_mass(tet, lumped=lumped)
    red = fem.apply_dirichlet(S, M, tet.boundary_vertices)
    req = EigenRequest(k, tolerance=tolerance, shift=0.0,
                       max_iterations=max_iterations, verbose=verbose)
    result = solve_generalized(red.stiffness, red.mass, req)
    classify_zero_modes(result, scale=result.eigenvalues[-1], expected=0)
    return VolumeSpectrum(
        volume=tet.volume(),
        boundary_area=surface_area(tet.boundary_surface()),
        eigenvalues=result.eigenvalues,
        residuals=result.residuals,
    )


# ----------------------------------------------------------------------------
# analytic references


def sphere_reference(radius: float, count: int) -> np.ndarray:
    """l(l+1)/r^2 with multiplicity 2l+1, l >= 1."""
    if count < 1:
        raise ValueError("count must be positive")
    values = []
    l = 1
    while len(values) < count:
        values += [l * (l + 1) / radius**2] * (2 * l + 1)
        l += 1
    return np.array(values[:count])


def spherical_jn(l: int, x: float) -> float:
    """j_l(x) from the closed forms of j_0, j_1 and upward recurrence.

    Upward recurrence is accurate for x > l, which covers every root.
    """
    s, c = math.sin(x), math.cos(x)
    j0 = s / x
    if l == 0:
        return j0
    j1 = s / x**2 - c / x
    for n in range(1, l):
        j0, j1 = j1, (2 * n + 1) / x * j1 - j0
    return j1


def _bisect(f, a, b, tol=1e-12):
    fa = f(a)
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fa * fm <= 0:
            b = mid
        else:
            a, fa = mid, fm
        if b - a <= tol * max(1.0, abs(a)):
            break
    return 0.5 * (a + b)


def spherical_jn_zeros(l: int, upper: float) -> list[float]:
    """Positive zeros of j_l below ``upper``, by sign scan then bisection.

    The scan starts at l + 1/2, a lower bound for the first zero, and uses a
    step well below the zero spacing (which exceeds pi/2 once x > l).
    """
    roots = []
    step = 0.05
    x = l + 0.5
    f_prev = spherical_jn(l, x)
    while x < upper:
        x_next = min(x + step, upper)
        f_next = spherical_jn(l, x_next)
        if f_prev == 0.0:
            roots.append(x)
        elif f_prev * f_next < 0:
            roots.append(_bisect(lambda t: spherical_jn(l, t), x, x_next))
        x, f_prev = x_next, f_next
    return roots


def ball_dirichlet_reference(radius: float, count: int) -> np.ndarray:
    """Dirichlet eigenvalues of the ball: (j_{l,m} / r)^2, multiplicity 2l+1.

    Enumerates three times ``count`` values before truncating so that no
    multiplet is cut at an arbitrary point.
    """
    if count < 1:
        raise ValueError("count must be positive")
    want = 3 * count
    upper = 2 * math.pi
    while True:
        values = []
        l = 0
        while l + 0.5 < upper:
            for z in spherical_jn_zeros(l, upper):
                values += [z * z] * (2 * l + 1)
            l += 1
        if len(values) >= want:
            break
        upper *= 1.5
    return np.sort(values)[:count] / radius**2


def cube_dirichlet_reference(edge: float, count: int) -> np.ndarray:
    """pi^2 (i^2 + j^2 + k^2) / edge^2 over i, j, k >= 1, by brute force."""
    if count < 1:
        raise ValueError("count must be positive")
    want = 3 * count
    n = 2
    while True:
        i = np.arange(1, n + 1)
        q = (i[:, None, None] ** 2 + i[None, :, None] ** 2 + i[None, None, :] ** 2).ravel()
        q.sort()
        # values up to n^2 + 2 are complete when the box edge is n
        complete = q[q <= n * n + 2]
        if len(complete) >= want:
            return math.pi**2 * complete[:count].astype(float) / edge**2
        n *= 2


def unit_ball_volume(dim: int) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)


def weyl_constant(dim: int) -> float:
    """(2 pi)^2 omega_dim^(-2/dim)."""
    return (2 * math.pi) ** 2 * unit_ball_volume(dim) ** (-2.0 / dim)


def weyl_trend(eigenvalues, volume: float, dim: int = 3) -> np.ndarray:
    """lambda_k / (C_dim (k / vol)^(2/dim)) for k = 1, 2, ..."""
    lam = np.asarray(eigenvalues, float)
    k = np.arange(1, len(lam) + 1)
    return lam / (weyl_constant(dim) * (k / volume) ** (2.0 / dim))


def spectrum_csv(eigenvalues, residuals, start: int = 1) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "eigenvalue", "residual"])
    for i, (lam, res) in enumerate(zip(eigenvalues, residuals), start):
        w.writerow([i, repr(float(lam)), repr(float(res))])
    return buf.getvalue()
