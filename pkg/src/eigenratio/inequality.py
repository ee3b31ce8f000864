"""Eigenvalue inequalities, constants and the main ratio as checkable reports.

Every report is normalized to the form ``lhs >= rhs``; the bound side is
whichever the inequality needs. ``margin = lhs - rhs`` is therefore
non-negative exactly when the inequality holds, and ``equality_gap`` is
the normalized distance to equality used to spot the extremal
(sphere/ball) configurations.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .mesh import SurfaceMesh, surface_area
from .spectra import SurfaceSpectrum, VolumeSpectrum, unit_ball_volume, weyl_constant

SATISFIED_RTOL = 1e-9
DISCRETIZATION_RTOL = 1e-2
EQUALITY_GAP_THRESHOLD = 0.05

GENUS0_OPTIMAL = math.pi**3 / (2 * math.sqrt(2))


class InequalityError(ValueError):
    pass


@dataclass(frozen=True)
class Constants:
    """Unit-ball volume and Weyl constant in dimension n."""

    n: int
    omega: float
    weyl: float

    @classmethod
    def for_dim(cls, n: int) -> "Constants":
        return cls(n, unit_ball_volume(n), weyl_constant(n))


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    satisfied: bool
    margin: float
    equality_gap: float
    inputs: dict = field(default_factory=dict)
    conjectural: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def within_discretization(self) -> bool:
        """Holds up to the 1% slack allowed for mesh error."""
        return self.margin >= -DISCRETIZATION_RTOL * max(abs(self.lhs), abs(self.rhs))

    def near_equality(self, threshold: float = EQUALITY_GAP_THRESHOLD) -> bool:
        return self.equality_gap <= threshold

    def as_dict(self) -> dict:
        return asdict(self)


def report(name: str, lhs: float, rhs: float, inputs=None, conjectural=False, extra=None) -> InequalityReport:
    lhs, rhs = float(lhs), float(rhs)
    scale = max(abs(lhs), abs(rhs))
    margin = lhs - rhs
    gap = abs(margin) / scale if scale > 0 else 0.0
    if math.isinf(lhs) and not math.isinf(rhs):
        margin, gap = math.inf, 1.0
    return InequalityReport(
        name=name, lhs=lhs, rhs=rhs,
        satisfied=bool(margin >= -SATISFIED_RTOL * scale),
        margin=margin, equality_gap=gap,
        inputs=dict(inputs or {}), conjectural=conjectural, extra=dict(extra or {}),
    )


def _positive(**kw):
    for key, val in kw.items():
        if not val > 0:
            raise InequalityError(f"{key} must be positive, got {val}")


def _ascending(values):
    lam = np.asarray(values, float)
    if np.any(np.diff(lam) < 0):
        raise InequalityError("eigenvalues must be non-decreasing")
    return lam


# ----------------------------------------------------------------------------
# individual inequalities


def check_reilly(area: float, lambda1: float, volume: float, n: int = 2) -> InequalityReport:
    """vol <= sqrt(n)/(n+1) * area * lambda1^(-1/2); equality only for the ball."""
    _positive(area=area, volume=volume)
    bound = math.sqrt(n) / (n + 1) * area / math.sqrt(lambda1) if lambda1 > 0 else math.inf
    return report("reilly", bound, volume, dict(area=area, lambda1=lambda1, volume=volume, n=n))


def check_yang_yau(lambda1: float, area: float, genus: int) -> InequalityReport:
    _positive(lambda1=lambda1, area=area)
    product = lambda1 * area
    floor_bound = 8 * math.pi * ((genus + 3) // 2)
    return report(
        "yang_yau", 8 * math.pi * (genus + 1), product,
        dict(lambda1=lambda1, area=area, genus=genus),
        extra=dict(floor_bound=floor_bound, floor_margin=floor_bound - product),
    )


def li_yau_bound(k: int, volume: float, dim: int = 3) -> float:
    """n/(n+2) * C_n * (k/vol)^(2/n)."""
    return dim / (dim + 2) * weyl_constant(dim) * (k / volume) ** (2.0 / dim)


def check_li_yau_pointwise(lambda_kD: float, k: int, volume: float, dim: int = 3) -> InequalityReport:
    _positive(volume=volume)
    return report("li_yau_pointwise", lambda_kD, li_yau_bound(k, volume, dim),
                  dict(lambda_kD=lambda_kD, k=k, volume=volume, dim=dim))


def check_li_yau_average(lambdas, volume: float, dim: int = 3) -> InequalityReport:
    lam = _ascending(lambdas)
    _positive(volume=volume)
    k = len(lam)
    return report("li_yau_average", lam.mean(), li_yau_bound(k, volume, dim),
                  dict(k=k, volume=volume, dim=dim, eigenvalues=lam.tolist()))


def check_polya_dirichlet(lambda_kD: float, k: int, volume: float, dim: int = 3) -> InequalityReport:
    """Polya's Dirichlet bound; proven only for tiling domains, so informational."""
    _positive(volume=volume)
    return report("polya_dirichlet", lambda_kD, weyl_constant(dim) * (k / volume) ** (2.0 / dim),
                  dict(lambda_kD=lambda_kD, k=k, volume=volume, dim=dim), conjectural=True)


def check_isoperimetric(area: float, volume: float) -> InequalityReport:
    _positive(area=area, volume=volume)
    bound = 3 * (4 * math.pi / 3) ** (1 / 3) * volume ** (2 / 3)
    return report("isoperimetric", area, bound, dict(area=area, volume=volume))


def check_faber_krahn(lambda1D: float, volume: float) -> InequalityReport:
    """lambda1D >= pi^2 (4 pi / (3 vol))^(2/3), the ball value at equal volume."""
    _positive(volume=volume)
    bound = math.pi**2 * (4 * math.pi / (3 * volume)) ** (2 / 3)
    return report("faber_krahn", lambda1D, bound, dict(lambda1D=lambda1D, volume=volume))


def check_genus0_optimal(lambda1D: float, lambda1Sigma: float, genus: int = 0) -> InequalityReport:
    """(lambda1D / lambda1)^(3/2) >= pi^3 / (2 sqrt 2) for genus-0 boundaries."""
    if genus != 0:
        raise InequalityError("genus-0 check applied to genus > 0")
    _positive(lambda1D=lambda1D, lambda1Sigma=lambda1Sigma)
    return report("genus0_optimal", (lambda1D / lambda1Sigma) ** 1.5, GENUS0_OPTIMAL,
                  dict(lambda1D=lambda1D, lambda1Sigma=lambda1Sigma, genus=genus))


def check_rayleigh_trace(mesh: SurfaceMesh, S, M, lambda1: float) -> InequalityReport:
    """lambda1 * sum_k x_k^T M x_k <= 2 * area for a centered mesh.

    With S, M the pencil lambda1 came from, this is the discrete Rayleigh
    principle applied to the three coordinate functions, so it holds
    exactly rather than up to discretization error.
    """
    x = mesh.vertices
    area = surface_area(mesh)
    tol = 1e-10 * mesh.bounding_box_diagonal()
    mean = (M @ x).sum(axis=0) / M.sum()
    if np.any(np.abs(mean) > tol):
        raise InequalityError("centering precondition violated")
    energy = float(np.einsum("ij,ij->", x, S @ x))
    second_moment = float(np.einsum("ij,ij->", x, M @ x))
    return report("rayleigh_trace", 2 * area, lambda1 * second_moment,
                  dict(lambda1=lambda1, area=area),
                  extra=dict(coordinate_energy=energy, second_moment=second_moment))


# ----------------------------------------------------------------------------
# main ratio and constants


@dataclass
class RatioResult:
    k: int
    lambda_kD: float
    lambda_k: float
    lambda_1: float
    ratio: float
    genus: int

    def as_dict(self) -> dict:
        return asdict(self)


def ratio_value(lambda_kD: float, lambda_k: float, lambda_1: float) -> float:
    """lambda_k^D^(3/2) / (lambda_k sqrt(lambda_1))."""
    return lambda_kD**1.5 / (lambda_k * math.sqrt(lambda_1))


def main_ratio(surface: SurfaceSpectrum, volume_spectrum: VolumeSpectrum, k: int = 1) -> RatioResult:
    if not 1 <= k <= min(len(surface.eigenvalues), len(volume_spectrum.eigenvalues)):
        raise InequalityError(f"k={k} out of range of the supplied spectra")
    lam_d, lam_k, lam_1 = volume_spectrum[k], surface[k], surface[1]
    return RatioResult(k, lam_d, lam_k, lam_1, ratio_value(lam_d, lam_k, lam_1), surface.summary.genus)


def korevaar_estimate(lambda_k: float, k: int, area: float, genus: int) -> float:
    """lambda_k * area / ((g+1) k): any admissible universal constant is at least this."""
    _positive(lambda_k=lambda_k, area=area, k=k)
    return lambda_k * area / ((genus + 1) * k)


def korevaar_envelope(eigenvalues, area: float, genus: int) -> tuple[float, int]:
    """Largest Korevaar estimate over k = 1..len(eigenvalues) and its k."""
    lam = np.asarray(eigenvalues, float)
    k = np.arange(1, len(lam) + 1)
    c = lam * area / ((genus + 1) * k)
    i = int(np.argmax(c))
    return float(c[i]), i + 1


def k_g(C: float, genus: int) -> float:
    """3^(5/2) C_3^(3/2) / (5^(3/2) sqrt(2) C (g+1)), with C_3^(3/2) = 6 pi^2."""
    _positive(C=C)
    return 3**2.5 * 6 * math.pi**2 / (5**1.5 * math.sqrt(2) * C) / (genus + 1)


def k_n(n: int, C_of_n: float) -> float:
    """(n+1)^((n+3)/2) / (sqrt(n) C(n)^(n/2)) * (C_{n+1} / (n+3))^((n+1)/2)."""
    _positive(C_of_n=C_of_n)
    return ((n + 1) ** ((n + 3) / 2) / (math.sqrt(n) * C_of_n ** (n / 2))
            * (weyl_constant(n + 1) / (n + 3)) ** ((n + 1) / 2))


def proof_chain(surface: SurfaceSpectrum, volume_spectrum: VolumeSpectrum, k: int,
                genus: int, C: float) -> list[InequalityReport]:
    """The three factor inequalities behind the ratio bound, then their product.

    Factor sides multiply out to the ratio (lhs) and K_g(C) (rhs), so the
    product holds whenever all three factors do.
    """
    if not 1 <= k <= min(len(surface.eigenvalues), len(volume_spectrum.eigenvalues)):
        raise InequalityError(f"k={k} out of range of the supplied spectra")
    area = surface.summary.area
    vol = volume_spectrum.volume
    lam1, lamk, lamd = surface[1], surface[k], volume_spectrum[k]
    c3 = weyl_constant(3)
    inputs = dict(k=k, genus=genus, C=C, area=area, volume=vol,
                  lambda_1=lam1, lambda_k=lamk, lambda_kD=lamd)
    reilly = report("chain_reilly", 1 / math.sqrt(lam1), 3 / math.sqrt(2) * vol / area, inputs)
    li_yau = report("chain_li_yau", lamd**1.5, (3 * c3 / 5) ** 1.5 * k / vol, inputs)
    korevaar = report("chain_korevaar", 1 / lamk, area / (C * (genus + 1) * k), inputs)
    product = report("chain_product", ratio_value(lamd, lamk, lam1), k_g(C, genus), inputs,
                     extra=dict(factors_satisfied=reilly.satisfied and li_yau.satisfied and korevaar.satisfied))
    return [reilly, li_yau, korevaar, product]
