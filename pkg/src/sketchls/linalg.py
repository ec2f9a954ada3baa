"""Dense linear-algebra kernels: thin SVD, min-norm solves, leverage scores, FWHT."""
from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix
from .exceptions import InvalidInputError, NumericError


@dataclass(frozen=True)
class ThinSVD:
    """Rank-truncated factorization ``M = U @ diag(singular_values) @ V.T``."""

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return self.singular_values.shape[0]

    def reconstruct(self):
        return (self.U * self.singular_values) @ self.V.T


def default_rank_tol(shape):
    return max(shape) * np.finfo(np.float64).eps


def thin_svd(M, rank_tol=None):
    """Thin SVD keeping singular values above ``rank_tol * sigma_max``.

    ``rank_tol`` defaults to ``max(rows, cols) * eps``. A zero matrix has rank 0
    and returns empty factors.
    """
    A = as_matrix(M, "M")
    if rank_tol is None:
        rank_tol = default_rank_tol(A.shape)
    if rank_tol < 0:
        raise InvalidInputError("rank_tol must be nonnegative")
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"SVD did not converge for a {A.shape[0]}x{A.shape[1]} matrix "
            f"(Frobenius norm {np.linalg.norm(A):.3e}): {exc}"
        ) from exc
    if s.size == 0 or s[0] == 0.0:
        k = 0
    else:
        k = int(np.count_nonzero(s > rank_tol * s[0]))
    return ThinSVD(U=U[:, :k], singular_values=s[:k], V=Vt[:k].T)


def pinv_from_svd(svd):
    """Moore-Penrose pseudo-inverse assembled from a (truncated) thin SVD."""
    return (svd.V / svd.singular_values) @ svd.U.T


def pinv_solve(A, b, rank_tol=None):
    """Minimum-norm least-squares solution ``pinv(A) @ b``.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    A = as_matrix(A, "A")
    b_arr = np.asarray(b, dtype=np.float64)
    if b_arr.shape[0] != A.shape[0]:
        raise InvalidInputError(
            f"dimension mismatch: A has {A.shape[0]} rows, b has {b_arr.shape[0]}"
        )
    if not np.all(np.isfinite(b_arr)):
        raise InvalidInputError("b contains non-finite entries")
    svd = thin_svd(A, rank_tol)
    return (svd.V / svd.singular_values) @ (svd.U.T @ b_arr)


def leverage_scores(X, rank_tol=None):
    """Diagonal of the hat matrix, computed as squared row norms of the left
    singular vectors. Entries lie in [0, 1] and sum to rank(X)."""
    U = thin_svd(X, rank_tol).U
    return np.einsum("ij,ij->i", U, U)


def cross_leverage(X, i, j, rank_tol=None):
    """Entry ``(i, j)`` of ``U @ U.T`` for the left singular basis of ``X``."""
    U = thin_svd(X, rank_tol).U
    n = U.shape[0]
    for idx in (i, j):
        if isinstance(idx, (bool, np.bool_)) or int(idx) != idx or not 0 <= idx < n:
            raise InvalidInputError(f"index {idx!r} out of range for {n} rows")
    return float(U[int(i)] @ U[int(j)])


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n):
    return 1 << max(0, int(n - 1).bit_length())


def fwht(v):
    """Unnormalized fast Walsh-Hadamard transform along axis 0.

    Works on a vector or on each column of a matrix; ``fwht(fwht(v)) == len(v) * v``.
    Returns a new array.
    """
    a = np.array(v, dtype=np.float64, copy=True)
    if a.ndim not in (1, 2):
        raise InvalidInputError("fwht expects a vector or a matrix")
    n = a.shape[0]
    if not is_power_of_two(n):
        raise InvalidInputError(f"fwht length must be a power of two, got {n}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("fwht input contains non-finite entries")
    tail = a.shape[1:]
    h = 1
    while h < n:
        blocks = a.reshape((n // (2 * h), 2, h) + tail)
        top = blocks[:, 0].copy()
        blocks[:, 0] += blocks[:, 1]
        blocks[:, 1] = top - blocks[:, 1]
        h *= 2
    return a


def hadamard_matrix(n):
    """Dense Sylvester Hadamard matrix with +-1 entries (test oracle helper)."""
    if not is_power_of_two(n):
        raise InvalidInputError(f"Hadamard order must be a power of two, got {n}")
    H = np.ones((1, 1))
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return H
