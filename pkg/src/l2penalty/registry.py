"""Small built-in equality-constrained test problems.

The Hock-Schittkowski entries follow the standard collection (objective,
constraints, starting point and reported optimum). Inequality constraints and
bounds are absent from every problem kept here.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .problem import Problem

__all__ = ["UnknownProblemError", "load_qp_json", "qp_problem", "registry_get", "registry_names"]


class UnknownProblemError(KeyError):
    def __init__(self, name, available):
        self.name = name
        self.available = list(available)
        super().__init__(f"unknown problem {name!r}; available: {', '.join(self.available)}")

    def __str__(self):
        return self.args[0]


def qp_problem(Q, g, A, b, x0, name="qp", x_star=None) -> Problem:
    """``min 1/2 x'Qx + g'x  s.t.  Ax + b = 0``."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    g = np.asarray(g, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    n = Q.shape[0]
    if Q.shape != (n, n) or g.shape != (n,) or A.shape[1] != n or b.shape != (A.shape[0],):
        raise ValueError("inconsistent QP data shapes")
    return Problem(
        name=name,
        n=n,
        m=A.shape[0],
        x0=x0,
        obj=lambda x: 0.5 * x @ Q @ x + g @ x,
        grad=lambda x: Q @ x + g,
        cons=lambda x: A @ x + b,
        jac=lambda x: A.copy(),
        x_star=x_star,
    )


def load_qp_json(path) -> Problem:
    """Read a ``{"Q", "g", "A", "b", "x0"}`` file as a :class:`Problem`."""
    data = json.loads(Path(path).read_text())
    missing = {"Q", "g", "A", "b", "x0"} - data.keys()
    if missing:
        raise ValueError(f"QP file {path} lacks keys: {sorted(missing)}")
    return qp_problem(data["Q"], data["g"], data["A"], data["b"], data["x0"], name=Path(path).stem)


def _qp_known_multiplier():
    # min 1/2 ||x||^2  s.t.  x1 - 1 = 0; multiplier 1 under grad f = J' y
    n = 3
    e1 = np.zeros(n)
    e1[0] = 1.0
    return Problem(
        name="qp-known-multiplier",
        n=n,
        m=1,
        x0=[0.5, 1.0, -1.0],
        obj=lambda x: 0.5 * x @ x,
        grad=lambda x: x.copy(),
        cons=lambda x: np.array([x[0] - 1.0]),
        jac=lambda x: e1[None, :].copy(),
        x_star=e1,
        f_star=0.5,
    )


def _hs48():
    # linearly-constrained convex quadratic
    Q = np.zeros((5, 5))
    Q[0, 0] = 2.0
    Q[1:3, 1:3] = [[2.0, -2.0], [-2.0, 2.0]]
    Q[3:5, 3:5] = [[2.0, -2.0], [-2.0, 2.0]]
    g = np.array([-2.0, 0.0, 0.0, 0.0, 0.0])
    A = np.array([[1.0, 1.0, 1.0, 1.0, 1.0], [0.0, 0.0, 1.0, -2.0, -2.0]])
    b = np.array([-5.0, 3.0])
    p = qp_problem(Q, g, A, b, [3.0, 5.0, -3.0, 2.0, -2.0], name="hs48", x_star=np.ones(5))
    # objective constant dropped by the QP form is +1
    obj = p.obj
    p.obj = lambda x: obj(x) + 1.0
    p.f_star = 0.0
    return p


def _hs6():
    return Problem(
        name="hs6",
        n=2,
        m=1,
        x0=[-1.2, 1.0],
        obj=lambda x: (1.0 - x[0]) ** 2,
        grad=lambda x: np.array([-2.0 * (1.0 - x[0]), 0.0]),
        cons=lambda x: np.array([10.0 * (x[1] - x[0] ** 2)]),
        jac=lambda x: np.array([[-20.0 * x[0], 10.0]]),
        x_star=[1.0, 1.0],
        f_star=0.0,
    )


def _hs7():
    def obj(x):
        return math.log1p(x[0] ** 2) - x[1]

    def grad(x):
        return np.array([2.0 * x[0] / (1.0 + x[0] ** 2), -1.0])

    def cons(x):
        return np.array([(1.0 + x[0] ** 2) ** 2 + x[1] ** 2 - 4.0])

    def jac(x):
        return np.array([[4.0 * x[0] * (1.0 + x[0] ** 2), 2.0 * x[1]]])

    return Problem("hs7", 2, 1, [2.0, 2.0], obj, grad, cons, jac,
                   x_star=[0.0, math.sqrt(3.0)], f_star=-math.sqrt(3.0))


def _hs26():
    def obj(x):
        return (x[0] - x[1]) ** 2 + (x[1] - x[2]) ** 4

    def grad(x):
        a = 2.0 * (x[0] - x[1])
        b = 4.0 * (x[1] - x[2]) ** 3
        return np.array([a, -a + b, -b])

    def cons(x):
        return np.array([(1.0 + x[1] ** 2) * x[0] + x[2] ** 4 - 3.0])

    def jac(x):
        return np.array([[1.0 + x[1] ** 2, 2.0 * x[0] * x[1], 4.0 * x[2] ** 3]])

    return Problem("hs26", 3, 1, [-2.6, 2.0, 2.0], obj, grad, cons, jac,
                   x_star=[1.0, 1.0, 1.0], f_star=0.0)


def _hs27():
    def obj(x):
        return 0.01 * (x[0] - 1.0) ** 2 + (x[1] - x[0] ** 2) ** 2

    def grad(x):
        r = x[1] - x[0] ** 2
        return np.array([0.02 * (x[0] - 1.0) - 4.0 * x[0] * r, 2.0 * r, 0.0])

    def cons(x):
        return np.array([x[0] + x[2] ** 2 + 1.0])

    def jac(x):
        return np.array([[1.0, 0.0, 2.0 * x[2]]])

    return Problem("hs27", 3, 1, [2.0, 2.0, 2.0], obj, grad, cons, jac,
                   x_star=[-1.0, 1.0, 0.0], f_star=0.04)


def _hs39():
    def cons(x):
        return np.array([x[1] - x[0] ** 3 - x[2] ** 2, x[0] ** 2 - x[1] - x[3] ** 2])

    def jac(x):
        return np.array([
            [-3.0 * x[0] ** 2, 1.0, -2.0 * x[2], 0.0],
            [2.0 * x[0], -1.0, 0.0, -2.0 * x[3]],
        ])

    return Problem("hs39", 4, 2, [2.0, 2.0, 2.0, 2.0],
                   obj=lambda x: -x[0],
                   grad=lambda x: np.array([-1.0, 0.0, 0.0, 0.0]),
                   cons=cons, jac=jac, x_star=[1.0, 1.0, 0.0, 0.0], f_star=-1.0)


def _hs40():
    def obj(x):
        return -x[0] * x[1] * x[2] * x[3]

    def grad(x):
        return -np.array([
            x[1] * x[2] * x[3],
            x[0] * x[2] * x[3],
            x[0] * x[1] * x[3],
            x[0] * x[1] * x[2],
        ])

    def cons(x):
        return np.array([
            x[0] ** 3 + x[1] ** 2 - 1.0,
            x[0] ** 2 * x[3] - x[2],
            x[3] ** 2 - x[1],
        ])

    def jac(x):
        return np.array([
            [3.0 * x[0] ** 2, 2.0 * x[1], 0.0, 0.0],
            [2.0 * x[0] * x[3], 0.0, -1.0, x[0] ** 2],
            [0.0, -1.0, 0.0, 2.0 * x[3]],
        ])

    x_star = [2.0 ** (-1 / 3), 2.0 ** (-1 / 2), 2.0 ** (-11 / 12), 2.0 ** (-1 / 4)]
    return Problem("hs40", 4, 3, [0.8] * 4, obj, grad, cons, jac, x_star=x_star, f_star=-0.25)


def _hs42():
    target = np.arange(1.0, 5.0)

    def cons(x):
        return np.array([x[0] - 2.0, x[2] ** 2 + x[3] ** 2 - 2.0])

    def jac(x):
        return np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 2.0 * x[2], 2.0 * x[3]]])

    r2 = math.sqrt(2.0)
    return Problem("hs42", 4, 2, [1.0] * 4,
                   obj=lambda x: float(np.sum((x - target) ** 2)),
                   grad=lambda x: 2.0 * (x - target),
                   cons=cons, jac=jac,
                   x_star=[2.0, 2.0, 0.6 * r2, 0.8 * r2], f_star=28.0 - 10.0 * r2)


def _hs78():
    def obj(x):
        return float(np.prod(x))

    def grad(x):
        return np.array([np.prod(np.delete(x, i)) for i in range(5)])

    def cons(x):
        return np.array([
            x @ x - 10.0,
            x[1] * x[2] - 5.0 * x[3] * x[4],
            x[0] ** 3 + x[1] ** 3 + 1.0,
        ])

    def jac(x):
        return np.array([
            2.0 * x,
            [0.0, x[2], x[1], -5.0 * x[4], -5.0 * x[3]],
            [3.0 * x[0] ** 2, 3.0 * x[1] ** 2, 0.0, 0.0, 0.0],
        ])

    x_star = [-1.717143, 1.595709, 1.827247, -0.7636413, -0.7636450]
    return Problem("hs78", 5, 3, [-2.0, 1.5, 2.0, -1.0, -1.0], obj, grad, cons, jac,
                   x_star=x_star, f_star=-2.91970041)


def _hs79():
    r2 = math.sqrt(2.0)

    def obj(x):
        return ((x[0] - 1.0) ** 2 + (x[0] - x[1]) ** 2 + (x[1] - x[2]) ** 2
                + (x[2] - x[3]) ** 4 + (x[3] - x[4]) ** 4)

    def grad(x):
        d01 = 2.0 * (x[0] - x[1])
        d12 = 2.0 * (x[1] - x[2])
        d23 = 4.0 * (x[2] - x[3]) ** 3
        d34 = 4.0 * (x[3] - x[4]) ** 3
        return np.array([2.0 * (x[0] - 1.0) + d01, -d01 + d12, -d12 + d23, -d23 + d34, -d34])

    def cons(x):
        return np.array([
            x[0] + x[1] ** 2 + x[2] ** 3 - 2.0 - 3.0 * r2,
            x[1] - x[2] ** 2 + x[3] + 2.0 - 2.0 * r2,
            x[0] * x[4] - 2.0,
        ])

    def jac(x):
        return np.array([
            [1.0, 2.0 * x[1], 3.0 * x[2] ** 2, 0.0, 0.0],
            [0.0, 1.0, -2.0 * x[2], 1.0, 0.0],
            [x[4], 0.0, 0.0, 0.0, x[0]],
        ])

    x_star = [1.191127, 1.362603, 1.472818, 1.635017, 1.679081]
    return Problem("hs79", 5, 3, [2.0] * 5, obj, grad, cons, jac,
                   x_star=x_star, f_star=0.0787768209)


def _dup_sphere():
    # the unit-sphere constraint appears twice, so J never has full row rank
    w = np.array([1.0, 2.0, 2.0])

    def cons(x):
        r = x @ x - 1.0
        return np.array([r, r])

    def jac(x):
        return np.vstack([2.0 * x, 2.0 * x])

    return Problem("rank-deficient-sphere", 3, 2, [1.0, 0.5, 0.5],
                   obj=lambda x: float(w @ x),
                   grad=lambda x: w.copy(),
                   cons=cons, jac=jac, x_star=-w / 3.0, f_star=-3.0)


def _infeasible_circle():
    # x1^2 + 1 = 0 has no real solution; x1 = 0 minimizes the violation.
    # x2 is free, so it starts at 0 to make the limit point unique.
    return Problem("infeasible-circle", 2, 1, [1.0, 0.0],
                   obj=lambda x: 0.0,
                   grad=lambda x: np.zeros(2),
                   cons=lambda x: np.array([x[0] ** 2 + 1.0]),
                   jac=lambda x: np.array([[2.0 * x[0], 0.0]]))


_REGISTRY = {
    "qp-known-multiplier": _qp_known_multiplier,
    "hs48": _hs48,
    "hs6": _hs6,
    "hs7": _hs7,
    "hs26": _hs26,
    "hs27": _hs27,
    "hs39": _hs39,
    "hs40": _hs40,
    "hs42": _hs42,
    "hs78": _hs78,
    "hs79": _hs79,
    "rank-deficient-sphere": _dup_sphere,
    "infeasible-circle": _infeasible_circle,
}

INFEASIBLE = frozenset({"infeasible-circle"})


def registry_names(feasible_only: bool = False) -> list[str]:
    return [k for k in _REGISTRY if not (feasible_only and k in INFEASIBLE)]


def registry_get(name: str) -> Problem:
    """Return a fresh instance of a built-in problem."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownProblemError(name, _REGISTRY) from None
    return factory()
