"""Brute-force trust-region measures, for testing the first-order measures.

``xi_tr_oracle`` is the model decrease achievable inside the unit ball,
``theta_tr_oracle`` the same with ``f = 0`` and ``tau = 1``. Both minimize
``g's + tau ||c + J s||`` over ``||s|| <= 1`` by projected subgradient descent
from 64 random starts and ``s = 0``. When cvxpy is installed, its conic
solution is added as one more candidate. Every candidate is feasible, so the
returned decrease never exceeds the true one.
"""

from __future__ import annotations

import numpy as np

from .models import ModelPoint

__all__ = ["xi_tr_oracle", "theta_tr_oracle"]


def _ball(S):
    nrm = np.linalg.norm(S, axis=-1, keepdims=True)
    return S / np.maximum(nrm, 1.0)


def _values(S, g, c, J, tau):
    return S @ g + tau * np.linalg.norm(c + S @ J.T, axis=-1)


def _subgradient(g, c, J, tau, starts, iters, rng):
    n = g.size
    S = rng.normal(size=(starts, n))
    S = S / np.linalg.norm(S, axis=1, keepdims=True) * rng.uniform(size=(starts, 1)) ** (1.0 / n)
    S = np.vstack([np.zeros(n), S])
    best = _values(S, g, c, J, tau)
    best_s = S.copy()
    scale = np.linalg.norm(g) + tau * np.linalg.norm(J, 2) + 1e-300
    for k in range(iters):
        r = c + S @ J.T
        nr = np.linalg.norm(r, axis=1, keepdims=True)
        G = g + tau * np.where(nr > 0, r / np.where(nr > 0, nr, 1.0), 0.0) @ J
        S = _ball(S - (1.0 / (scale * np.sqrt(k + 1.0))) * G)
        v = _values(S, g, c, J, tau)
        better = v < best
        best = np.where(better, v, best)
        best_s[better] = S[better]
    i = int(np.argmin(best))
    return best[i], best_s[i]


def _conic(g, c, J, tau):
    try:
        import cvxpy as cp
    except ImportError:
        return None
    s = cp.Variable(g.size)
    prob = cp.Problem(cp.Minimize(g @ s + tau * cp.norm(c + J @ s, 2)), [cp.norm(s, 2) <= 1])
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        return None
    if s.value is None:
        return None
    return _ball(np.asarray(s.value, dtype=float))


def _min_model(g, c, J, tau, starts, iters, seed):
    rng = np.random.default_rng(seed)
    best, _ = _subgradient(g, c, J, tau, starts, iters, rng)
    s = _conic(g, c, J, tau)
    if s is not None:
        best = min(best, float(_values(s[None, :], g, c, J, tau)[0]))
    return float(best)


def xi_tr_oracle(mp: ModelPoint, starts: int = 64, iters: int = 10_000, seed: int = 0) -> float:
    """``f + tau||c|| - min_{||s|| <= 1} (f + g's + tau||c + J s||)``."""
    if mp.g.size > 4:
        raise ValueError("brute-force oracle is meant for n <= 4")
    low = _min_model(mp.g, mp.c, mp.J, mp.tau, starts, iters, seed)
    return max(mp.tau * float(np.linalg.norm(mp.c)) - low, 0.0)


def theta_tr_oracle(c, J, starts: int = 64, iters: int = 10_000, seed: int = 0) -> float:
    """``||c|| - min_{||s|| <= 1} ||c + J s||``."""
    c = np.asarray(c, dtype=float).reshape(-1)
    J = np.atleast_2d(np.asarray(J, dtype=float)).reshape(c.size, -1)
    if J.shape[1] > 4:
        raise ValueError("brute-force oracle is meant for n <= 4")
    low = _min_model(np.zeros(J.shape[1]), c, J, 1.0, starts, iters, seed)
    return max(float(np.linalg.norm(c)) - low, 0.0)
