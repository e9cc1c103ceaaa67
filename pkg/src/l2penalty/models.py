"""Models of the penalized objective ``f + tau ||c||`` and the measures built on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import as_evaluator
from .prox import ProxQuery, ProxResult, prox_l2_linear

__all__ = [
    "ModelPoint",
    "model_error_diagnostic",
    "model_value",
    "penalty_objective",
    "theta",
    "xi",
    "xi_step",
]

CLAMP = 1e-12


@dataclass
class ModelPoint:
    """Function and derivative values cached at ``x``."""

    x: np.ndarray
    f: float
    g: np.ndarray
    c: np.ndarray
    J: np.ndarray
    tau: float

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.g = np.asarray(self.g, dtype=float).reshape(-1)
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        self.J = np.atleast_2d(np.asarray(self.J, dtype=float)).reshape(self.c.size, self.g.size)
        self.f = float(self.f)

    @classmethod
    def at(cls, problem, x, tau: float) -> "ModelPoint":
        ev = as_evaluator(problem)
        return cls(x, ev.f(x), ev.g(x), ev.c(x), ev.J(x), tau)


def penalty_objective(mp: ModelPoint) -> float:
    return mp.f + mp.tau * float(np.linalg.norm(mp.c))


def model_value(mp: ModelPoint, s) -> float:
    s = np.asarray(s, dtype=float)
    return mp.f + float(mp.g @ s) + mp.tau * float(np.linalg.norm(mp.c + mp.J @ s))


def _decrease(mp: ModelPoint, s) -> float:
    # f + tau||c|| - model(s), without forming f so that large |f| costs no digits
    return -float(mp.g @ s) + mp.tau * (
        float(np.linalg.norm(mp.c)) - float(np.linalg.norm(mp.c + mp.J @ s))
    )


def xi_step(mp: ModelPoint, sigma: float) -> tuple[float, np.ndarray, ProxResult]:
    """Like :func:`xi`, also returning the prox result behind the step."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    res = prox_l2_linear(ProxQuery(mp.J, mp.c, -mp.g / sigma, 1.0 / sigma, mp.tau))
    val = _decrease(mp, res.u)
    if val < 0 and val >= -CLAMP * (1.0 + abs(mp.f)):
        val = 0.0
    return val, res.u, res


def xi(mp: ModelPoint, sigma: float) -> tuple[float, np.ndarray]:
    """Model decrease at the first proximal-gradient step with regularization ``sigma``.

    Returns ``(xi, s_cp)``; the stationarity statistic is ``sqrt(sigma * xi)``.
    """
    val, s, _ = xi_step(mp, sigma)
    return val, s


def theta(c, J) -> float:
    """Feasibility measure: the decrease of ``||c + J s||`` at the unit prox step."""
    c = np.asarray(c, dtype=float).reshape(-1)
    J = np.atleast_2d(np.asarray(J, dtype=float)).reshape(c.size, -1)
    nc = float(np.linalg.norm(c))
    if nc == 0.0:
        return 0.0
    s = prox_l2_linear(ProxQuery(J, c, np.zeros(J.shape[1]), 1.0, 1.0)).u
    return min(max(nc - float(np.linalg.norm(c + J @ s)), 0.0), nc)


def model_error_diagnostic(p, x, s, tau: float) -> float:
    """``|f(x+s) + tau||c(x+s)|| - model(s)| / ||s||^2``, evaluated without counters."""
    s = np.asarray(s, dtype=float)
    ns = float(np.linalg.norm(s))
    if ns == 0:
        raise ValueError("s must be nonzero")
    x = np.asarray(x, dtype=float)
    mp = ModelPoint(x, p.obj(x), p.grad(x), p.cons(x), p.jac(x), tau)
    xs = x + s
    actual = float(p.obj(xs)) + tau * float(np.linalg.norm(p.cons(xs)))
    return abs(actual - model_value(mp, s)) / ns**2
