"""Outer exact-penalty loop: penalty and tolerance schedules, feasibility checks."""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import EPS
from .models import ModelPoint, theta
from .problem import EvalCounters, Evaluator
from .subsolvers import InnerConfig, InnerStatus, kkt_measure, r2_solve, r2n_solve

__all__ = ["OuterConfig", "OuterRecord", "SolveReport", "SolveStatus", "kkt_residual", "solve"]

log = logging.getLogger(__name__)


class SolveStatus(enum.Enum):
    FIRST_ORDER = "first_order"
    INFEASIBLE_STATIONARY = "infeasible_stationary"
    MAX_ITER = "max_iter"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class OuterConfig:
    """Penalty schedule. ``eps0`` is raised to ``eps_final`` if it is smaller.

    ``infeasible_patience`` is the number of consecutive outer iterations,
    taken at the final tolerance, that must look infeasible-stationary before
    the solve gives up on feasibility.
    """

    tau0: float = 500.0
    beta1: float = 500.0
    beta2: float = 0.1
    beta3: float = 1e-2
    beta4: float = EPS
    eps0: float = 1e-2
    eps_final: float = 1e-3
    max_outer: int = 10_000
    max_time_s: float = 300.0
    infeasible_patience: int = 1

    def __post_init__(self):
        for name in ("tau0", "beta1", "beta3", "beta4", "eps_final", "max_time_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.beta2 < 1:
            raise ValueError("beta2 must lie in (0, 1)")
        if self.eps0 < self.eps_final:
            object.__setattr__(self, "eps0", self.eps_final)


@dataclass
class OuterRecord:
    k: int
    tau: float
    eps: float
    theta_sqrt: float
    kkt: float
    inner_iters: int
    inner_status: str


@dataclass
class SolveReport:
    status: SolveStatus
    x: np.ndarray
    y_ls: np.ndarray
    kkt_residual: float
    feasibility: float
    theta_final: float
    tau_final: float
    outer_iters: int
    total_inner_iters: int
    counters: EvalCounters
    wall_time_s: float
    outer_trace: list = field(default_factory=list, repr=False)
    inner_traces: list = field(default_factory=list, repr=False)


def kkt_residual(p, x) -> tuple[float, np.ndarray]:
    """``min_y ||grad f(x) + J(x)'y||`` and its least-squares multipliers.

    Uses the problem callbacks directly, so no counters are charged.
    """
    x = np.asarray(x, dtype=float)
    mp = ModelPoint(x, 0.0, p.grad(x), p.cons(x), p.jac(x), 1.0)
    return kkt_measure(mp)


def solve(p, cfg: OuterConfig | None = None, inner_cfg: InnerConfig | None = None,
          solver: str | None = None) -> SolveReport:
    """Run the exact-penalty method on ``p``.

    ``solver`` is ``"r2"``, ``"r2n-lbfgs"`` or ``"r2n-lsr1"``; by default it
    follows ``inner_cfg.qn_kind``. Each inner solve starts from
    ``sigma = max(beta3 tau, beta4)`` with floor ``beta4``.
    """
    cfg = cfg or OuterConfig()
    inner_cfg = inner_cfg or InnerConfig()
    if solver is not None:
        kind = {"r2": "none", "r2n-lbfgs": "lbfgs", "r2n-lsr1": "lsr1"}.get(solver)
        if kind is None:
            raise ValueError(f"unknown solver {solver!r}")
        inner_cfg = replace(inner_cfg, qn_kind=kind)
    inner_cfg = replace(inner_cfg, sigma_min=cfg.beta4, kkt_tol=cfg.eps_final)
    inner = r2_solve if inner_cfg.qn_kind == "none" else r2n_solve

    start = time.monotonic()
    deadline = start + cfg.max_time_s
    ev = Evaluator(p)
    x = p.x0.copy()
    tau, eps_k = cfg.tau0, cfg.eps0
    total_inner = 0
    suspicious = 0
    outer_trace, inner_traces = [], []
    status = SolveStatus.MAX_ITER
    th = math.nan
    mp = None

    k = 0
    while k < cfg.max_outer:
        sigma0 = max(cfg.beta3 * tau, cfg.beta4)
        res = inner(ev, x, tau, eps_k, sigma0, inner_cfg, deadline=deadline)
        k += 1
        total_inner += res.inner_iters
        inner_traces.append(res.trace)
        mp = res.point
        x = mp.x
        th = theta(mp.c, mp.J)
        th_sqrt = math.sqrt(th)
        kkt, _ = kkt_measure(mp)
        cnorm = float(np.linalg.norm(mp.c))
        rec = OuterRecord(k - 1, tau, eps_k, th_sqrt, kkt, res.inner_iters, res.status.value)
        outer_trace.append(rec)
        log.info("outer %d: tau=%g eps=%g theta^1/2=%.3e kkt=%.3e |c|=%.3e inner=%d (%s)",
                 rec.k, tau, eps_k, th_sqrt, kkt, cnorm, res.inner_iters, res.status.value)

        if kkt <= cfg.eps_final and cnorm <= cfg.eps_final:
            status = SolveStatus.FIRST_ORDER
            break
        if th_sqrt <= cfg.eps_final and eps_k <= cfg.eps_final and cnorm > cfg.eps_final:
            suspicious += 1
            if suspicious >= cfg.infeasible_patience:
                status = SolveStatus.INFEASIBLE_STATIONARY
                break
        else:
            suspicious = 0
        if res.status is InnerStatus.TIME_LIMIT or time.monotonic() > deadline:
            status = SolveStatus.TIME_LIMIT
            break

        if th_sqrt > eps_k:
            tau += cfg.beta1
        else:
            eps_k = max(cfg.beta2 * eps_k, cfg.eps_final)

    # certify from fresh, uncounted evaluations
    kkt, y_ls = kkt_residual(p, x)
    feas = float(np.linalg.norm(p.cons(x)))
    if status is SolveStatus.FIRST_ORDER and not (kkt <= cfg.eps_final and feas <= cfg.eps_final):
        status = SolveStatus.MAX_ITER
    return SolveReport(status, x, y_ls, kkt, feas, th, tau, k, total_inner, ev.counters,
                       time.monotonic() - start, outer_trace, inner_traces)
