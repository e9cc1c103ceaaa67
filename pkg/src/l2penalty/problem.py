"""Equality-constrained NLP container, evaluation counting, derivative checks."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "EvalCounters",
    "Evaluator",
    "Problem",
    "ShapeError",
    "Violation",
    "verify_derivatives",
]


class ShapeError(ValueError):
    """A problem callback returned an array of the wrong shape."""


@dataclass
class Problem:
    """``min f(x)  s.t.  c(x) = 0`` with dense derivatives.

    ``jac`` returns the ``m x n`` Jacobian of ``cons``.
    """

    name: str
    n: int
    m: int
    x0: np.ndarray
    obj: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    cons: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    x_star: np.ndarray | None = None
    f_star: float | None = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float).copy()
        if self.x0.shape != (self.n,):
            raise ShapeError(f"x0 has shape {self.x0.shape}, expected ({self.n},)")
        if self.x_star is not None:
            self.x_star = np.asarray(self.x_star, dtype=float)


@dataclass
class EvalCounters:
    n_f: int = 0
    n_grad: int = 0
    n_c: int = 0
    n_jac: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Evaluator:
    """Shape-checking, counting front end to a :class:`Problem`.

    One evaluator belongs to one solve; it is not meant to be shared between
    threads.
    """

    problem: Problem
    counters: EvalCounters = field(default_factory=EvalCounters)

    @property
    def n(self) -> int:
        return self.problem.n

    @property
    def m(self) -> int:
        return self.problem.m

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ShapeError(f"x has shape {x.shape}, expected ({self.n},)")
        return x

    def f(self, x) -> float:
        x = self._check_x(x)
        self.counters.n_f += 1
        val = np.asarray(self.problem.obj(x), dtype=float)
        if val.size != 1:
            raise ShapeError(f"objective returned shape {val.shape}, expected a scalar")
        return float(val.reshape(()))

    def g(self, x) -> np.ndarray:
        x = self._check_x(x)
        self.counters.n_grad += 1
        val = np.asarray(self.problem.grad(x), dtype=float)
        if val.shape != (self.n,):
            raise ShapeError(f"gradient returned shape {val.shape}, expected ({self.n},)")
        return val

    def c(self, x) -> np.ndarray:
        x = self._check_x(x)
        self.counters.n_c += 1
        val = np.asarray(self.problem.cons(x), dtype=float).reshape(-1)
        if val.shape != (self.m,):
            raise ShapeError(f"constraints returned shape {val.shape}, expected ({self.m},)")
        return val

    def J(self, x) -> np.ndarray:
        x = self._check_x(x)
        self.counters.n_jac += 1
        val = np.asarray(self.problem.jac(x), dtype=float)
        if val.shape != (self.m, self.n):
            raise ShapeError(
                f"Jacobian returned shape {val.shape}, expected ({self.m}, {self.n})"
            )
        return val


def as_evaluator(p) -> Evaluator:
    return p if isinstance(p, Evaluator) else Evaluator(p)


@dataclass(frozen=True)
class Violation:
    """One derivative entry that disagrees with its finite-difference estimate."""

    kind: str  # "grad" or "jac"
    index: tuple
    analytic: float
    approx: float
    error: float


def verify_derivatives(p: Problem, x, tol: float = 1e-5) -> list[Violation]:
    """Compare ``grad`` and ``jac`` against central differences at ``x``.

    The step for component ``i`` is ``eps**(1/3) * (1 + |x_i|)``. The error of
    an entry is ``|analytic - approx| / max(1, |analytic|, |approx|)``.
    Returns one :class:`Violation` per entry whose error exceeds ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    ev = Evaluator(p)
    x = ev._check_x(x).copy()
    g = ev.g(x)
    J = ev.J(x)

    base = np.cbrt(np.finfo(float).eps)
    g_fd = np.empty(p.n)
    J_fd = np.empty((p.m, p.n))
    for i in range(p.n):
        h = base * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g_fd[i] = (ev.f(xp) - ev.f(xm)) / (xp[i] - xm[i])
        J_fd[:, i] = (ev.c(xp) - ev.c(xm)) / (xp[i] - xm[i])

    out = []
    for kind, a, d in (("grad", g, g_fd), ("jac", J, J_fd)):
        err = np.abs(a - d) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(d)))
        for idx in zip(*np.nonzero(err > tol)):
            idx = tuple(int(k) for k in idx)
            out.append(Violation(kind, idx, float(a[idx]), float(d[idx]), float(err[idx])))
    return out
