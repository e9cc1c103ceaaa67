"""QR of the alpha-stacked matrix and the normal-equation solves built on it.

For ``A`` of shape ``(m, n)`` the factor ``R`` of ``[A'; sqrt(alpha) I]`` is the
Cholesky factor of ``A A' + alpha I``, obtained without forming the product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular, svdvals

__all__ = [
    "EPS",
    "SingularFactorError",
    "StackedQR",
    "solve_least_norm",
    "solve_normal",
    "stacked_qr",
]

EPS = np.finfo(float).eps


class SingularFactorError(np.linalg.LinAlgError):
    """Raised when a triangular solve is attempted on a rank-deficient factor."""


@dataclass(frozen=True)
class StackedQR:
    A: np.ndarray
    alpha: float
    R: np.ndarray
    rank_flags: np.ndarray

    @property
    def full_rank(self) -> bool:
        return not bool(self.rank_flags.any())


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite entries in input")


def stacked_qr(A, alpha: float = 0.0) -> StackedQR:
    """Factor ``[A'; sqrt(alpha) I_m] = Q R`` with ``R`` upper triangular, ``m x m``.

    ``rank_flags[i]`` is set when ``|R[i, i]| <= ||A|| * eps * max(m, n)``.
    Without pivoting a tiny singular value need not show on the diagonal, so
    when the smallest singular value of ``R`` is below the same threshold the
    smallest diagonal entry is flagged as well.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    _check_finite(A, alpha)
    m, n = A.shape
    stacked = np.vstack([A.T, np.sqrt(alpha) * np.eye(m)])
    R = np.linalg.qr(stacked, mode="r")
    # fix the sign convention so that diag(R) >= 0, as for a Cholesky factor
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    R = R * signs[:, None]
    drop = np.linalg.norm(A, 2) * EPS * max(m, n) if A.size else 0.0
    flags = np.abs(np.diag(R)) <= drop
    if m and not flags.any() and svdvals(R)[-1] <= drop:
        flags[np.argmin(np.abs(np.diag(R)))] = True
    return StackedQR(A=A, alpha=alpha, R=R, rank_flags=flags)


def solve_normal(qr: StackedQR, rhs):
    """Solve ``R'R q = rhs``; also return ``p = R^{-T} q``.

    ``||p||^2 = q' (A A' + alpha I)^{-1} q``, which is the derivative
    information needed by the secular-equation Newton step.
    """
    if not qr.full_rank:
        raise SingularFactorError("factor is rank deficient; regularize with alpha > 0")
    rhs = np.asarray(rhs, dtype=float)
    _check_finite(rhs)
    t = solve_triangular(qr.R, rhs, trans="T", lower=False)
    q = solve_triangular(qr.R, t, lower=False)
    p = solve_triangular(qr.R, q, trans="T", lower=False)
    return q, p


def solve_least_norm(A, rhs) -> np.ndarray:
    """Solve ``A A' x = rhs``, regularizing with ``sqrt(eps) I`` if ``A`` is rank deficient.

    With full row rank this is ``(A A')^{-1} rhs``. Otherwise the solution of
    ``(A A' + sqrt(eps) I) x = rhs`` approximates the minimum-norm solution.
    """
    rhs = np.asarray(rhs, dtype=float)
    _check_finite(rhs)
    qr = stacked_qr(A, 0.0)
    if not qr.full_rank:
        qr = stacked_qr(A, np.sqrt(EPS))
    return solve_normal(qr, rhs)[0]
