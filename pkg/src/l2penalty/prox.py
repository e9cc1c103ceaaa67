"""Proximal operators of ``u -> tau ||A u + b||`` in the Euclidean norm.

With ``y`` the dual vector, the minimizer of
``0.5/nu ||u - w||^2 + tau ||A u + b||`` is ``u = w + A'y`` where either
``||y|| < nu tau`` and ``A A' y = -(A w + b)`` (interior), or ``y = s(alpha)``
solves ``(A A' + alpha I) s = -(A w + b)`` with ``||s(alpha)|| = nu tau``.
The scalar root is found by Newton's method on
``phi(alpha) = 1/||s(alpha)|| - 1/(nu tau)``, which is increasing and concave,
so iterates started left of the root approach it monotonically.

The quadratic variant adds ``0.5 u'Bu`` and solves the same kind of secular
equation through symmetric saddle-point systems and MINRES.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import lstsq

from .krylov import minres
from .linalg import EPS, StackedQR, solve_normal, stacked_qr

__all__ = [
    "Branch",
    "IndefiniteCurvatureError",
    "KrylovError",
    "ProxNonConvergence",
    "ProxQuery",
    "ProxResult",
    "SecularState",
    "prox_l2_linear",
    "prox_l2_quadratic",
]

SAFEGUARD = 0.8
MAX_NEWTON = 10_000
KRYLOV_MAX = 10_000
ALPHA_FLOOR = EPS**0.75
CONSISTENCY_TOL = 1e-10
STALL = 10
REFINE = 3


class Branch(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"


class ProxNonConvergence(RuntimeError):
    def __init__(self, msg, state=None):
        super().__init__(msg)
        self.state = state


class IndefiniteCurvatureError(ValueError):
    """``I + nu B`` is not positive definite."""


class KrylovError(RuntimeError):
    pass


@dataclass
class ProxQuery:
    A: Any
    b: Any
    w: Any
    nu: float
    tau: float
    curvature: Any = None

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        m, n = self.A.shape
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.w = np.asarray(self.w, dtype=float).reshape(-1)
        if self.b.shape != (m,) or self.w.shape != (n,):
            raise ValueError(
                f"inconsistent shapes: A {self.A.shape}, b {self.b.shape}, w {self.w.shape}"
            )
        if not (self.nu > 0 and self.tau > 0):
            raise ValueError("nu and tau must be positive")
        for arr in (self.A, self.b, self.w):
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite entries in prox query")


@dataclass
class SecularState:
    alpha: float
    qr: StackedQR | None
    s_alpha: np.ndarray
    p: np.ndarray
    phi: float


@dataclass
class ProxResult:
    u: np.ndarray
    y: np.ndarray
    alpha_star: float
    newton_iters: int
    branch: Branch
    history: list = field(default_factory=list, repr=False)


def _newton(evaluate, alpha0, radius, tol, record):
    """Safeguarded Newton iteration on the secular equation.

    ``evaluate(alpha)`` returns ``(s, d, state)`` where ``d`` is minus the
    derivative of ``||s||^2 / 2`` in ``alpha``. Converged when
    ``| ||s|| - radius | < tol``. If round-off keeps the gap
    from shrinking for ``STALL`` consecutive steps, the best iterate is
    returned. Returns ``(alpha, s, iterations, branch, history)``.
    """
    alpha = alpha0
    history = []
    best = None
    since_best = 0
    last = None
    for it in range(MAX_NEWTON + 1):
        s, d, state = evaluate(alpha)
        last = state
        ns = float(np.linalg.norm(s))
        gap = abs(ns - radius)
        if record:
            history.append(state)
        if gap < tol:
            return alpha, s, it, Branch.BOUNDARY, history
        if alpha <= ALPHA_FLOOR and ns < radius:
            # the root lies below the floor, which is as good as interior
            return alpha, s, it, Branch.INTERIOR, history
        if best is None or gap < 0.5 * best[0]:
            best = (gap, alpha, s)
            since_best = 0
        else:
            since_best += 1
            if since_best >= STALL and best[0] < 1e3 * tol:
                return best[1], best[2], it, Branch.BOUNDARY, history
        if d <= 0.0:
            raise ProxNonConvergence("secular derivative vanished", last)
        new = alpha + (ns - radius) * ns * ns / (radius * d)
        if new <= 0.0:
            new = SAFEGUARD * alpha
        new = max(new, ALPHA_FLOOR)
        if abs(new - alpha) <= 4 * EPS * alpha:
            return alpha, s, it, Branch.BOUNDARY, history
        alpha = new
    raise ProxNonConvergence(f"no convergence in {MAX_NEWTON} Newton iterations", last)


def _min_norm_normal(A, rhs):
    """Minimum-norm solution of ``A A' x = rhs`` as ``pinv(A') pinv(A) rhs``."""
    t = lstsq(A, rhs, cond=None)[0]
    return lstsq(A.T, t, cond=None)[0]


def prox_l2_linear(q: ProxQuery, record: bool = False) -> ProxResult:
    """Minimize ``0.5/nu ||u - w||^2 + tau ||A u + b||``.

    With ``record=True`` the result carries one :class:`SecularState` per
    evaluated ``alpha``.
    """
    A, w, radius = q.A, q.w, q.nu * q.tau
    r = A @ w + q.b

    qr0 = stacked_qr(A, 0.0)
    if qr0.full_rank:
        s0 = -solve_normal(qr0, r)[0]
        consistent = True
        alpha0 = 0.0
    else:
        s0 = -_min_norm_normal(A, r)
        res = A @ (A.T @ s0) + r
        consistent = np.linalg.norm(res) <= CONSISTENCY_TOL * (1.0 + np.linalg.norm(r))
        alpha0 = np.sqrt(EPS)

    if consistent and np.linalg.norm(s0) <= radius:
        return ProxResult(w + A.T @ s0, s0, 0.0, 0, Branch.INTERIOR)

    def evaluate(alpha):
        qr = qr0 if alpha == 0.0 else stacked_qr(A, alpha)
        # ||p||^2 = s'(AA' + alpha I)^{-1} s
        s, p = solve_normal(qr, -r)
        ns = np.linalg.norm(s)
        phi = 1.0 / ns - 1.0 / radius if ns > 0 else -np.inf
        return s, float(p @ p), SecularState(alpha, qr, s, p, phi)

    tol = ALPHA_FLOOR * min(1.0, radius)
    alpha, s, iters, branch, history = _newton(evaluate, alpha0, radius, tol, record)
    return ProxResult(w + A.T @ s, s, float(alpha), iters, branch, history)


def _curvature_parts(B, n):
    """Return ``(apply, lambda_min, lambda_max)`` for a curvature argument."""
    if B is None:
        return (lambda v: np.zeros_like(v)), 0.0, 0.0
    if isinstance(B, np.ndarray) or np.isscalar(B):
        M = np.asarray(B, dtype=float) * (np.eye(n) if np.ndim(B) == 0 else 1.0)
        if M.shape != (n, n):
            raise ValueError(f"curvature has shape {M.shape}, expected ({n}, {n})")
        M = 0.5 * (M + M.T)
        lam = np.linalg.eigvalsh(M)
        return (lambda v: M @ v), float(lam[0]), float(lam[-1])
    lo, hi = B.eig_bounds
    return B.apply, float(lo), float(hi)


def prox_l2_quadratic(q: ProxQuery, record: bool = False) -> ProxResult:
    """Minimize ``0.5/nu ||u - w||^2 + 0.5 u'Bu + tau ||A u + b||``.

    ``q.curvature`` is ``B``: ``None`` (zero), a dense symmetric array or a
    :class:`~l2penalty.quasi_newton.QuasiNewtonOp`. The problem is solved in
    the scaled form ``Q' = I/nu + B`` with dual radius ``tau``; the returned
    ``y`` and ``alpha_star`` are mapped back to the scale of
    :func:`prox_l2_linear`, so that ``B = 0`` reproduces it.

    For rank-deficient ``A`` the interior case is tried first on the singular
    ``alpha = 0`` system: when it is consistent, MINRES started from zero
    returns its minimum-norm solution, whose dual part is the pseudo-inverse
    dual. Otherwise the secular search starts at ``alpha = sqrt(eps)``.
    """
    A, w, b, nu, tau = q.A, q.w, q.b, q.nu, q.tau
    m, n = A.shape
    apply_B, lam_min, lam_max = _curvature_parts(q.curvature, n)
    if 1.0 + nu * lam_min <= 0.0:
        raise IndefiniteCurvatureError(
            f"I + nu B is not positive definite (nu={nu:g}, lambda_min(B)={lam_min:g})"
        )

    def saddle(alpha):
        def apply(v):
            u, y = v[:n], v[n:]
            top = -(u / nu + apply_B(u)) + A.T @ y
            bot = A @ u + alpha * y
            return np.concatenate([top, bot])

        return apply

    def solve(alpha, rhs, refine=REFINE):
        op = saddle(alpha)
        x, ok, _ = minres(op, rhs, tol=EPS, max_iter=KRYLOV_MAX)
        if not ok:
            raise KrylovError(f"MINRES did not converge at alpha={alpha:g}")
        # a few rounds of residual correction recover the digits that the
        # conditioning of the saddle matrix costs
        res = rhs - op(x)
        for _ in range(refine):
            dx, ok, _ = minres(op, res, tol=EPS, max_iter=KRYLOV_MAX)
            new_res = rhs - op(x + dx)
            if not ok or np.linalg.norm(new_res) >= np.linalg.norm(res):
                break
            x, res = x + dx, new_res
        return x[:n], x[n:]

    full_rank = stacked_qr(A, 0.0).full_rank
    alpha0 = 0.0 if full_rank else np.sqrt(EPS)
    rhs = np.concatenate([-w / nu, -b])
    cache = {}

    def evaluate(alpha):
        u, y = solve(alpha, rhs)
        _, wt = solve(alpha, np.concatenate([np.zeros(n), y]))
        cache[alpha] = u
        ny = np.linalg.norm(y)
        phi = 1.0 / ny - 1.0 / tau if ny > 0 else -np.inf
        return y, float(y @ wt), SecularState(alpha / nu, None, nu * y, nu * wt, phi / nu)

    if not full_rank:
        try:
            # no refinement: on a singular matrix the rounding part of the
            # residual is incompatible and the correction need not be minimal
            u0, y0 = solve(0.0, rhs, refine=0)
        except KrylovError:
            pass
        else:
            scale = (1.0 / nu + max(abs(lam_min), abs(lam_max)) + np.linalg.norm(A, 2))
            res = rhs - saddle(0.0)(np.concatenate([u0, y0]))
            size = scale * np.hypot(np.linalg.norm(u0), np.linalg.norm(y0)) + np.linalg.norm(rhs)
            if np.linalg.norm(res) <= CONSISTENCY_TOL * size and np.linalg.norm(y0) <= tau:
                return ProxResult(u0, nu * y0, 0.0, 0, Branch.INTERIOR)

    u0, y0 = solve(alpha0, rhs)
    if np.linalg.norm(y0) <= tau:
        return ProxResult(u0, nu * y0, alpha0 / nu, 0, Branch.INTERIOR)

    # relative: Krylov solves cannot resolve an absolute gap when tau is large
    alpha, y, iters, branch, history = _newton(evaluate, alpha0, tau, ALPHA_FLOOR * tau, record)
    return ProxResult(cache[alpha], nu * y, float(alpha) / nu, iters, branch, history)
