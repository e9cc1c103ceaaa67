"""MINRES for symmetric, possibly indefinite or singular, systems.

Follows the Lanczos/QR recurrences of Paige and Saunders. Started from
``x = 0`` every iterate lies in the Krylov space of ``rhs``, which is contained
in ``range(M)``; for a consistent singular system the limit is therefore the
minimum-norm solution.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .linalg import EPS

__all__ = ["minres"]


def minres(apply: Callable[[np.ndarray], np.ndarray], rhs, tol: float = EPS, max_iter: int = 10_000):
    """Solve ``M x = rhs`` where ``apply(v) = M v`` and ``M`` is symmetric.

    Stops when the normwise backward error ``||r|| / (||M|| ||x|| + ||rhs||)``
    or the least-squares measure ``||M r|| / (||M|| ||r||)`` falls below
    ``tol``, or when either is already negligible in floating point.
    ``||M||`` is the Frobenius estimate accumulated from the Lanczos
    tridiagonal.

    Returns ``(x, converged, iterations)``. On ``max_iter`` the last iterate is
    returned with ``converged=False``.
    """
    b = np.asarray(rhs, dtype=float)
    n = b.size
    x = np.zeros(n)
    beta1 = math.sqrt(b @ b)
    if beta1 == 0.0:
        return x, True, 0

    r1 = b.copy()
    r2 = b.copy()
    y = b.copy()
    oldb = 0.0
    beta = beta1
    dbar = 0.0
    epsln = 0.0
    phibar = beta1
    tnorm2 = 0.0
    cs = -1.0
    sn = 0.0
    w = np.zeros(n)
    w2 = np.zeros(n)

    itn = 0
    while itn < max_iter:
        itn += 1
        v = y / beta
        y = apply(v)
        if itn >= 2:
            y = y - (beta / oldb) * r1
        alfa = v @ y
        y = y - (alfa / beta) * r2
        r1 = r2
        r2 = y
        oldb = beta
        beta = math.sqrt(y @ y)
        tnorm2 += alfa * alfa + oldb * oldb + beta * beta

        # apply the previous rotation, then build the next one
        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        root = math.hypot(gbar, dbar)
        gamma = max(math.hypot(gbar, beta), EPS)
        cs = gbar / gamma
        sn = beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1 = w2
        w2 = w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w

        anorm = math.sqrt(tnorm2)
        xnorm = math.sqrt(x @ x)
        rnorm = phibar
        test1 = rnorm / (anorm * xnorm + beta1)
        test2 = root / anorm if anorm > 0 else math.inf
        if test1 <= tol or test2 <= tol or 1.0 + test1 <= 1.0 or 1.0 + test2 <= 1.0:
            return x, True, itn
        if beta == 0.0:
            # invariant subspace exhausted; x is the exact Krylov solution
            return x, True, itn
    return x, False, itn
