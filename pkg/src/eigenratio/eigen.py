"""Smallest eigenpairs of the symmetric pencil S x = lambda M x.

The solver factors S - sigma M once (sparse LU), then runs block Lanczos on
the inverted operator (S - sigma M)^{-1} M, which is self-adjoint in the
M-inner product. Every new block is reorthogonalized twice against the full
basis. A block rather than single-vector recurrence is needed because
symmetric meshes carry exact eigenvalue multiplicities (3 and 5 on the
icosphere), which a single Krylov vector cannot resolve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import splu

log = logging.getLogger(__name__)


class EigenError(RuntimeError):
    pass


class ZeroModeError(EigenError):
    pass


@dataclass
class EigenRequest:
    count: int
    tolerance: float = 1e-8
    shift: float | None = None  # None: -1e-3 * trace(S) / dim
    max_iterations: int = 200  # block Lanczos steps
    block_size: int | None = None
    seed: int = 0
    verbose: bool = False

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be positive")
        if not 0 < self.tolerance <= 1e-2:
            raise ValueError("tolerance must lie in (0, 1e-2]")


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    eigenvectors: np.ndarray | None = None
    shift: float = 0.0
    iterations: int = 0
    history: list = field(default_factory=list)

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))


def default_shift(S) -> float:
    """Small negative shift, keeps S - sigma M nonsingular for a PSD S with a kernel."""
    return -1e-3 * float(S.diagonal().sum()) / S.shape[0]


def relative_residuals(S, M, values, vectors, shift: float = 0.0) -> np.ndarray:
    """|Sx - lam Mx| / (|Sx| + max(|lam|, |shift|) |Mx|) per column.

    The shift magnitude stands in for |lam| on zero modes, where the plain
    relative residual has a vanishing denominator.
    """
    SX = S @ vectors
    MX = M @ vectors
    r = np.linalg.norm(SX - MX * values, axis=0)
    scale = np.maximum(np.abs(values), abs(shift))
    den = np.linalg.norm(SX, axis=0) + scale * np.linalg.norm(MX, axis=0)
    return np.divide(r, den, out=np.zeros_like(r), where=den > 0)


def _factor(S, M, shift):
    sigma = shift
    for attempt in range(4):
        try:
            lu = splu(sparse.csc_matrix(S - sigma * M))
        except RuntimeError as exc:
            if attempt == 3:
                raise EigenError(f"factorization of S - sigma M failed at sigma={sigma:g}") from exc
            log.debug("factorization failed at sigma=%g, retrying", sigma)
            # a zero shift cannot be perturbed multiplicatively; step below it instead
            sigma = sigma * (1.0 + 1e-3) if sigma != 0 else -1e-6 * abs(S.diagonal()).mean()
            continue
        return lu, sigma


def _m_orthonormalize(W, basis, M, rng):
    """M-orthonormalize the columns of W against ``basis`` and each other.

    Returns (V, R) with W - basis(...) = V R. A column that collapses is
    replaced by a random orthogonal direction with a zero R diagonal.
    """
    n, b = W.shape
    V = np.empty_like(W)
    R = np.zeros((b, b))
    for c in range(b):
        w = W[:, c].copy()
        norm0 = np.sqrt(max(w @ (M @ w), 0.0))
        for _ in range(2):
            if basis is not None and basis.shape[1]:
                w -= basis @ (basis.T @ (M @ w))
            if c:
                h = V[:, :c].T @ (M @ w)
                w -= V[:, :c] @ h
                R[:c, c] += h
        norm = np.sqrt(max(w @ (M @ w), 0.0))
        if norm > 1e-10 * norm0 and norm > 0:
            V[:, c] = w / norm
            R[c, c] = norm
            continue
        w = rng.standard_normal(n)
        for _ in range(2):
            if basis is not None and basis.shape[1]:
                w -= basis @ (basis.T @ (M @ w))
            if c:
                w -= V[:, :c] @ (V[:, :c].T @ (M @ w))
        V[:, c] = w / np.sqrt(w @ (M @ w))
    return V, R


def solve_generalized(S, M, request: EigenRequest) -> SpectrumResult:
    """The ``request.count`` smallest eigenpairs by shift-invert block Lanczos.

    Only eigenvalues above the shift are found, so the shift must lie at or
    below the bottom of the spectrum (the default and the Dirichlet choice 0
    both do).

    Residuals are measured on the original pencil. Pairs that do not meet
    the tolerance within ``max_iterations`` steps come back flagged as
    unconverged rather than raising.
    """
    S = sparse.csr_matrix(S)
    M = sparse.csr_matrix(M)
    n = S.shape[0]
    if S.shape != M.shape or S.shape[0] != S.shape[1]:
        raise ValueError("S and M must be square with matching shapes")
    count = request.count
    if count >= n:
        raise ValueError(f"count {count} must be smaller than the dimension {n}")
    shift = default_shift(S) if request.shift is None else request.shift
    lu, shift = _factor(S, M, shift)
    tol = request.tolerance
    b = request.block_size or min(max(count, 6), 12)
    b = min(b, n)
    rng = np.random.default_rng(request.seed)

    def op(X):
        return lu.solve(np.asarray(M @ X))

    V, _ = _m_orthonormalize(rng.standard_normal((n, b)), None, M, rng)
    blocks = [V]
    T = np.zeros((0, 0))
    prev, B_prev = None, None
    history = []
    theta = s = None
    steps = 0
    for steps in range(1, request.max_iterations + 1):
        V = blocks[-1]
        W = op(V)
        A = V.T @ (M @ W)
        A = 0.5 * (A + A.T)
        W = W - V @ A
        if prev is not None:
            W = W - prev @ B_prev.T
        m_old = T.shape[0]
        bw = V.shape[1]
        T_new = np.zeros((m_old + bw, m_old + bw))
        T_new[:m_old, :m_old] = T
        T_new[m_old:, m_old:] = A
        if prev is not None:
            pw = prev.shape[1]
            T_new[m_old:, m_old - pw:m_old] = B_prev
            T_new[m_old - pw:m_old, m_old:] = B_prev.T
        T = T_new
        basis = np.hstack(blocks)
        m = basis.shape[1]

        theta, s = scipy.linalg.eigh(T)
        order = np.argsort(-theta)
        theta, s = theta[order], s[:, order]

        room = n - m
        if room > 0:
            nb = min(bw, room)
            V_next, R = _m_orthonormalize(W[:, :nb], basis, M, rng)
            if nb < bw:
                # the basis is about to span the whole space
                R = V_next.T @ (M @ W)
            coupling = R @ s[m - bw:, :count]
            estimate = np.linalg.norm(coupling, axis=0) / np.abs(theta[:count])
        else:
            V_next = None
            estimate = np.zeros(count)
        history.append(float(estimate.max()))
        if request.verbose:
            log.info("lanczos step %d: basis %d, max residual estimate %.3e", steps, m, estimate.max())
        if V_next is None or (m >= count and np.all(estimate <= 0.1 * tol)):
            values = shift + 1.0 / theta[:count]
            vectors = basis @ s[:, :count]
            res = relative_residuals(S, M, values, vectors, shift)
            if V_next is None or np.all(res <= tol):
                break
        prev, B_prev = V, R
        blocks.append(V_next)

    basis = np.hstack(blocks)[:, : T.shape[0]]
    values = shift + 1.0 / theta[:count]
    vectors = basis @ s[:, :count]
    order = np.argsort(values, kind="stable")
    values, vectors = values[order], vectors[:, order]
    res = relative_residuals(S, M, values, vectors, shift)
    return SpectrumResult(
        eigenvalues=values,
        residuals=res,
        converged=res <= tol,
        eigenvectors=vectors,
        shift=shift,
        iterations=steps,
        history=history,
    )


def solve_dense(S, M, count: int) -> np.ndarray:
    """Reference path: dense symmetric-definite diagonalization."""
    S = S.toarray() if sparse.issparse(S) else np.asarray(S)
    M = M.toarray() if sparse.issparse(M) else np.asarray(M)
    return scipy.linalg.eigh(S, M, eigvals_only=True, subset_by_index=[0, count - 1])


@dataclass(frozen=True)
class ZeroModeSplit:
    zero_modes: np.ndarray
    nonzero: np.ndarray
    nonzero_residuals: np.ndarray
    zero_residuals: np.ndarray


def classify_zero_modes(result: SpectrumResult, scale: float, expected: int | None = None) -> ZeroModeSplit:
    """Separate eigenvalues below 1e-6 * scale.

    ``expected`` is 1 for a closed connected surface and 0 for a Dirichlet
    problem; any other count signals a disconnected mesh or a solver fault.
    """
    if not result.all_converged:
        raise EigenError("cannot classify zero modes of an unconverged spectrum")
    zero = np.abs(result.eigenvalues) < 1e-6 * abs(scale)
    if expected is not None and int(zero.sum()) != expected:
        raise ZeroModeError(
            f"found {int(zero.sum())} zero modes, expected {expected}"
            + (" (disconnected mesh?)" if zero.sum() > expected else "")
        )
    return ZeroModeSplit(result.eigenvalues[zero], result.eigenvalues[~zero],
                         result.residuals[~zero], result.residuals[zero])
