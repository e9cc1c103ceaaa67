"""Inner solvers for ``min f(x) + tau ||c(x)||`` at fixed ``tau``.

R2 takes the proximal-gradient step of the linearized model regularized by
``sigma/2 ||s||^2`` and adapts ``sigma`` with a ratio test. R2N adds a
limited-memory quasi-Newton term to the model and evaluates the step with the
quadratic prox.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import EPS, solve_least_norm
from .models import ModelPoint, penalty_objective, xi_step
from .problem import EvalCounters, Evaluator, as_evaluator
from .prox import IndefiniteCurvatureError, ProxQuery, prox_l2_quadratic
from .quasi_newton import QuasiNewtonOp, qn_update

__all__ = [
    "InnerConfig",
    "InnerResult",
    "InnerStatus",
    "TraceRecord",
    "r2_solve",
    "r2n_solve",
]

log = logging.getLogger(__name__)


class InnerStatus(enum.Enum):
    FIRST_ORDER = "first_order"
    MAX_ITER = "max_iter"
    STALLED = "stalled"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class InnerConfig:
    """Ratio-test and regularization parameters.

    ``kkt_tol`` enables an early exit once ``||c|| <= kkt_tol`` and the
    least-squares KKT residual is ``<= kkt_tol``; ``None`` disables it.
    """

    eta1: float = 1e-4
    eta2: float = 0.9
    gamma1: float = 3.0
    gamma3: float = 1.0 / 3.0
    sigma_min: float = EPS
    max_inner: int = 10_000
    theta_param: float = 0.5
    qn_kind: str = "none"
    qn_memory: int = 5
    kkt_tol: float | None = None

    def __post_init__(self):
        if not 0 < self.eta1 <= self.eta2 < 1:
            raise ValueError("need 0 < eta1 <= eta2 < 1")
        if not self.gamma1 > 1 or not 0 < self.gamma3 <= 1:
            raise ValueError("need gamma1 > 1 and 0 < gamma3 <= 1")
        if not self.sigma_min > 0:
            raise ValueError("sigma_min must be positive")
        if not 0 < self.theta_param < 1:
            raise ValueError("theta_param must lie in (0, 1)")
        if self.qn_kind not in ("none", "lbfgs", "lsr1"):
            raise ValueError(f"unknown qn_kind {self.qn_kind!r}")


@dataclass
class TraceRecord:
    """One trial step. ``phi_before``/``phi_after`` are penalized objective values."""

    j: int
    f: float
    cnorm: float
    xi: float
    sigma: float
    rho: float
    accepted: bool
    newton_iters: int
    phi_before: float
    phi_after: float
    model_error: float

    FIELDS = ("j", "f", "cnorm", "xi", "sigma", "rho", "accepted", "newton_iters",
              "phi_before", "phi_after", "model_error")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}


@dataclass
class InnerResult:
    x: np.ndarray
    sigma_final: float
    xi_final: float
    status: InnerStatus
    inner_iters: int
    accepted_steps: int
    point: ModelPoint = field(repr=False)
    trace: list = field(default_factory=list, repr=False)
    qn: QuasiNewtonOp | None = field(default=None, repr=False)


def kkt_measure(mp: ModelPoint) -> tuple[float, np.ndarray]:
    """Least-squares multipliers and the residual ``||g + J'y||``."""
    if mp.c.size == 0:
        return float(np.linalg.norm(mp.g)), np.zeros(0)
    y = solve_least_norm(mp.J, -(mp.J @ mp.g))
    return float(np.linalg.norm(mp.g + mp.J.T @ y)), y


def _kkt_ok(mp: ModelPoint, tol) -> bool:
    if tol is None or np.linalg.norm(mp.c) > tol:
        return False
    return kkt_measure(mp)[0] <= tol


def _evaluator(p, counters):
    if counters is not None:
        ev = Evaluator(p.problem if isinstance(p, Evaluator) else p, counters)
        return ev
    return as_evaluator(p)


def _solve(ev, x_start, tau, eps_k, sigma0, cfg, deadline, qn):
    if not (tau > 0 and eps_k > 0):
        raise ValueError("tau and eps_k must be positive")
    if sigma0 < cfg.sigma_min:
        raise ValueError("sigma0 must be at least sigma_min")
    x = np.asarray(x_start, dtype=float).copy()
    mp = ModelPoint.at(ev, x, tau)
    phi = penalty_objective(mp)
    sigma = float(sigma0)
    trials = accepted = 0
    trace = []

    def done(status, xi_val):
        return InnerResult(mp.x, sigma, xi_val, status, trials, accepted, mp, trace, qn)

    xi_val = math.nan
    while True:
        if _kkt_ok(mp, cfg.kkt_tol):
            return done(InnerStatus.FIRST_ORDER, xi_val)

        if qn is None:
            sig_meas = sigma
        else:
            sig_meas = (sigma + qn.norm_estimate) / cfg.theta_param
        xi_val, s, res = xi_step(mp, sig_meas)
        if math.sqrt(sig_meas * xi_val) <= eps_k:
            return done(InnerStatus.FIRST_ORDER, xi_val)
        if xi_val <= EPS:
            return done(InnerStatus.STALLED, xi_val)
        if trials >= cfg.max_inner:
            return done(InnerStatus.MAX_ITER, xi_val)
        if deadline is not None and time.monotonic() > deadline:
            return done(InnerStatus.TIME_LIMIT, xi_val)

        newton = res.newton_iters
        if qn is not None:
            nu = 1.0 / sigma
            try:
                res = prox_l2_quadratic(ProxQuery(mp.J, mp.c, -nu * mp.g, nu, tau, qn))
            except IndefiniteCurvatureError:
                sigma *= cfg.gamma1
                log.debug("indefinite model, sigma -> %g", sigma)
                continue
            s, newton = res.u, res.newton_iters

        x_new = mp.x + s
        f_new = ev.f(x_new)
        c_new = ev.c(x_new)
        phi_new = f_new + tau * float(np.linalg.norm(c_new))
        trials += 1
        rho = (phi - phi_new) / xi_val
        ok = rho >= cfg.eta1
        ns = float(np.linalg.norm(s))
        lin = mp.f + float(mp.g @ s) + tau * float(np.linalg.norm(mp.c + mp.J @ s))
        rec = TraceRecord(trials, mp.f, float(np.linalg.norm(mp.c)), xi_val, sigma, rho, ok,
                          newton, phi, phi_new, abs(phi_new - lin) / ns**2 if ns else 0.0)
        trace.append(rec)
        log.debug("%s", rec.as_dict())

        if ok:
            g_new = ev.g(x_new)
            if qn is not None:
                qn_update(qn, s, g_new - mp.g)
            mp = ModelPoint(x_new, f_new, g_new, c_new, ev.J(x_new), tau)
            phi = phi_new
            accepted += 1
        if rho < cfg.eta1:
            sigma *= cfg.gamma1
        elif rho >= cfg.eta2:
            sigma = max(cfg.sigma_min, cfg.gamma3 * sigma)


def r2_solve(p, x_start, tau: float, eps_k: float, sigma0: float,
             cfg: InnerConfig | None = None, counters: EvalCounters | None = None,
             deadline: float | None = None) -> InnerResult:
    """Adaptive proximal-gradient method on ``f + tau ||c||``.

    Stops at the first iterate with ``sqrt(sigma * xi) <= eps_k``. ``p`` is a
    :class:`Problem` or an :class:`Evaluator`; evaluations are charged to
    ``counters`` when given, else to the evaluator's own counters.
    ``deadline`` is a :func:`time.monotonic` value.
    """
    cfg = cfg or InnerConfig()
    return _solve(_evaluator(p, counters), x_start, tau, eps_k, sigma0, cfg, deadline, None)


def r2n_solve(p, x_start, tau: float, eps_k: float, sigma0: float,
              cfg: InnerConfig | None = None, counters: EvalCounters | None = None,
              deadline: float | None = None, qn: QuasiNewtonOp | None = None) -> InnerResult:
    """Proximal quasi-Newton variant of :func:`r2_solve`.

    The step minimizes ``g's + 0.5 s'(B + sigma I)s + tau ||c + J s||``. The
    stopping statistic and the ratio denominator use the first-order measure at
    ``(sigma + ||B||) / theta_param``. An indefinite model triggers
    ``sigma *= gamma1`` and a retry, which costs no evaluations. Pass ``qn`` to
    continue with an existing operator.
    """
    cfg = cfg or InnerConfig(qn_kind="lbfgs")
    if cfg.qn_kind == "none":
        cfg = replace(cfg, qn_kind="lbfgs")
    ev = _evaluator(p, counters)
    if qn is None:
        qn = QuasiNewtonOp(ev.n, cfg.qn_kind, cfg.qn_memory)
    return _solve(ev, x_start, tau, eps_k, sigma0, cfg, deadline, qn)
