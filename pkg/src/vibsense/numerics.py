"""Dense symmetric linear-algebra kernels.

Factorizations, generalized symmetric eigensolves and Schur-complement
inverses used throughout the library. Everything is dense float64; the
models this library targets stay small enough (a few thousand DOFs at
most, a few hundred after reduction) that dense routines are both the
fastest and the most predictable choice.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NoConvergence, NotPositiveDefinite, SingularBlock

# Pivots below this fraction of the largest diagonal entry are treated as
# a rank deficiency rather than round-off.
_PIVOT_RTOL = 1e-12


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Average a matrix with its transpose."""
    return 0.5 * (a + a.T)


def _as_square(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    return a


class Factorization:
    """Cholesky factorization of an SPD matrix, reusable for repeated solves."""

    def __init__(self, a: np.ndarray):
        a = _as_square(a, "matrix")
        self.n = a.shape[0]
        if self.n == 0:
            self._chol = None
            return
        try:
            self._chol = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(str(exc)) from exc
        pivots = np.diag(self._chol[0]) ** 2
        if np.any(pivots <= _PIVOT_RTOL * np.max(np.diag(a))):
            raise NotPositiveDefinite(
                "matrix is numerically singular or indefinite "
                f"(smallest pivot {pivots.min():.3e})"
            )

    def solve(self, b) -> np.ndarray:
        """Solve A x = b for one right-hand side or a block of them."""
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise DimensionMismatch(
                f"right-hand side has leading dimension {b.shape[0]}, expected {self.n}"
            )
        if self.n == 0:
            return b.copy()
        return scipy.linalg.cho_solve(self._chol, b, check_finite=False)


def factorize(a: np.ndarray) -> Factorization:
    """Factorize a symmetric positive definite matrix for repeated solves.

    Raises NotPositiveDefinite when a pivot falls at or below
    ``1e-12 * max(diag(a))``, which rejects rank-deficient input without
    false alarms at double precision.
    """
    return Factorization(a)


def sym_generalized_eig(k, m, count: int):
    """Smallest eigenpairs of ``K phi = gamma M phi`` with M-orthonormal vectors.

    Parameters
    ----------
    k, m : ndarray
        Symmetric stiffness-like and SPD mass-like matrices.
    count : int
        Number of smallest eigenvalues requested, ``1 <= count <= n``.

    Returns
    -------
    gamma : ndarray, shape (count,)
        Eigenvalues in ascending order.
    phi : ndarray, shape (n, count)
        Eigenvectors satisfying ``phi.T @ M @ phi = I``.

    Notes
    -----
    Solved by Cholesky reduction to a standard symmetric problem:
    M = L L^T, eigendecomposition of L^-1 K L^-T, back-transform. Robust
    for the dense, moderately sized matrices this library works with.
    """
    k = _as_square(k, "k")
    m = _as_square(m, "m")
    if k.shape != m.shape:
        raise DimensionMismatch(f"k {k.shape} and m {m.shape} differ")
    n = k.shape[0]
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}], got {count}")
    try:
        lo = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("mass matrix is not positive definite") from exc
    # A = L^-1 K L^-T via two triangular solves.
    tmp = scipy.linalg.solve_triangular(lo, k, lower=True, check_finite=False)
    a = scipy.linalg.solve_triangular(lo, tmp.T, lower=True, check_finite=False).T
    a = symmetrize(a)
    try:
        gamma, y = scipy.linalg.eigh(a, subset_by_index=(0, count - 1), check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    phi = scipy.linalg.solve_triangular(lo, y, lower=True, trans="T", check_finite=False)
    return gamma, phi


def pencil_eigenvalues(k, m, count: int | None = None) -> np.ndarray:
    """Eigenvalues of ``K phi = gamma M phi`` with high relative accuracy per mode.

    A single Cholesky-reduced solve resolves eigenvalues to an absolute
    accuracy of eps times the spectral radius, which starves the low end
    of wide-spread pencils of relative accuracy. This routine therefore
    solves from both sides, mass side for the top of the spectrum and
    stiffness side (where low modes become dominant inverse eigenvalues)
    for the bottom, and blends at the geometric mean. Falls back to the
    mass side alone when K is not positive definite.
    """
    k = _as_square(k, "k")
    m = _as_square(m, "m")
    if k.shape != m.shape:
        raise DimensionMismatch(f"k {k.shape} and m {m.shape} differ")
    n = k.shape[0]
    count = n if count is None else count
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}], got {count}")

    def _one_sided(num, den):
        lo = np.linalg.cholesky(den)
        a = scipy.linalg.solve_triangular(lo, num, lower=True, check_finite=False)
        a = scipy.linalg.solve_triangular(lo, a.T, lower=True, check_finite=False).T
        return scipy.linalg.eigh(symmetrize(a), eigvals_only=True, check_finite=False)

    try:
        gamma_m = _one_sided(k, m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("mass matrix is not positive definite") from exc
    try:
        mu = _one_sided(m, k)
    except np.linalg.LinAlgError:
        return gamma_m[:count]
    if np.any(mu <= 0):
        return gamma_m[:count]
    gamma_k = 1.0 / mu[::-1]
    threshold = np.sqrt(gamma_k[0] * gamma_m[-1])
    return np.where(gamma_m <= threshold, gamma_k, gamma_m)[:count]


def schur_complement_inverse(kmm, kc, ku) -> np.ndarray:
    """Inverse of the Schur complement ``kmm - kc ku^-1 kc^T``.

    Equals the (measured, measured) block of the inverse of the full
    matrix ``[[kmm, kc], [kc^T, ku]]``. An empty ``ku`` degenerates to
    ``inv(kmm)``. The result is symmetrized before returning.
    """
    kmm = _as_square(kmm, "kmm")
    kc = np.asarray(kc, dtype=float)
    ku = _as_square(ku, "ku")
    nm = kmm.shape[0]
    if kc.size == 0:
        kc = kc.reshape(nm, ku.shape[0])
    if kc.shape != (nm, ku.shape[0]):
        raise DimensionMismatch(
            f"coupling block has shape {kc.shape}, expected {(nm, ku.shape[0])}"
        )
    if ku.shape[0] == 0:
        schur = kmm
    else:
        try:
            x = scipy.linalg.solve(ku, kc.T, assume_a="sym", check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise SingularBlock("unmeasured block is singular") from exc
        if not np.all(np.isfinite(x)):
            raise SingularBlock("unmeasured block is numerically singular")
        schur = kmm - kc @ x
    try:
        h = scipy.linalg.solve(schur, np.eye(nm), assume_a="sym", check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularBlock("Schur complement is singular") from exc
    if not np.all(np.isfinite(h)):
        raise SingularBlock("Schur complement is numerically singular")
    return symmetrize(h)
