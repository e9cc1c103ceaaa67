"""Limited-memory BFGS and SR1 approximations applied as ``v -> B v``.

``B`` is kept in unrolled low-rank form ``B = gamma I + U diag(c) U'`` and
rebuilt from the stored pairs after each update, so products cost ``O(kn)``
and the spectrum can be read off a ``k x k`` eigenproblem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["QuasiNewtonOp", "qn_update"]

SKIP_TOL = 1e-8


@dataclass
class QuasiNewtonOp:
    """Limited-memory approximation of a Hessian.

    ``kind`` is ``"lbfgs"`` or ``"lsr1"``. An operator without pairs is the
    identity. L-BFGS scales its seed by ``y'y / s'y`` of the newest pair;
    L-SR1 keeps the identity seed.
    """

    n: int
    kind: str = "lbfgs"
    memory: int = 5
    pairs: list = field(default_factory=list)
    gamma: float = 1.0
    _U: np.ndarray = field(default=None, repr=False)
    _c: np.ndarray = field(default=None, repr=False)
    _eig: tuple = field(default=(1.0, 1.0), repr=False)

    def __post_init__(self):
        if self.kind not in ("lbfgs", "lsr1"):
            raise ValueError(f"unknown quasi-Newton kind {self.kind!r}")
        self._rebuild()

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.gamma * v
        if self._c.size:
            c = self._c if v.ndim == 1 else self._c[:, None]
            out = out + self._U @ (c * (self._U.T @ v))
        return out

    __matmul__ = apply

    @property
    def eig_bounds(self) -> tuple[float, float]:
        """Smallest and largest eigenvalue of ``B``."""
        return self._eig

    @property
    def norm_estimate(self) -> float:
        lo, hi = self._eig
        return max(abs(lo), abs(hi))

    def to_dense(self) -> np.ndarray:
        return self.apply(np.eye(self.n))

    def _rebuild(self):
        cols = []
        coefs = []
        if self.kind == "lbfgs" and self.pairs:
            s, y = self.pairs[-1]
            self.gamma = float(y @ y / (s @ y))
        else:
            self.gamma = 1.0

        def current(v):
            out = self.gamma * v
            for u, c in zip(cols, coefs):
                out = out + c * (u @ v) * u
            return out

        kept = []
        for s, y in self.pairs:
            if self.kind == "lbfgs":
                bs = current(s)
                cols += [bs, y]
                coefs += [-1.0 / (s @ bs), 1.0 / (y @ s)]
                kept.append((s, y))
            else:
                r = y - current(s)
                den = r @ s
                if abs(den) <= SKIP_TOL * np.linalg.norm(s) * np.linalg.norm(r):
                    continue
                cols.append(r)
                coefs.append(1.0 / den)
                kept.append((s, y))
        self.pairs = kept
        self._U = np.array(cols).T if cols else np.zeros((self.n, 0))
        self._c = np.array(coefs, dtype=float)
        self._eig = self._spectrum()

    def _spectrum(self) -> tuple[float, float]:
        if not self._c.size:
            return (self.gamma, self.gamma)
        # B restricted to range(U) is gamma I + T diag(c) T' with U = V T
        V, T = np.linalg.qr(self._U)
        k = T.shape[0]
        small = self.gamma * np.eye(k) + T @ (self._c[:, None] * T.T)
        lam = np.linalg.eigvalsh(0.5 * (small + small.T))
        if k < self.n:
            lam = np.append(lam, self.gamma)
        return (float(lam.min()), float(lam.max()))


def qn_update(op: QuasiNewtonOp, s, y) -> QuasiNewtonOp:
    """Offer the pair ``(s, y)`` to ``op`` in place; return ``op``.

    L-BFGS accepts the pair iff ``s'y > 1e-8 ||s|| ||y||``. L-SR1 accepts it
    iff ``|s'(y - Bs)| > 1e-8 ||s|| ||y - Bs||``. The oldest pair is dropped
    beyond ``op.memory``.
    """
    s = np.asarray(s, dtype=float).copy()
    y = np.asarray(y, dtype=float).copy()
    if s.shape != (op.n,) or y.shape != (op.n,):
        raise ValueError(f"pair shapes {s.shape}, {y.shape} do not match n={op.n}")
    ns = np.linalg.norm(s)
    if ns == 0.0:
        raise ValueError("s must be nonzero")
    if op.kind == "lbfgs":
        if s @ y <= SKIP_TOL * ns * np.linalg.norm(y):
            return op
    else:
        r = y - op.apply(s)
        if abs(s @ r) <= SKIP_TOL * ns * np.linalg.norm(r):
            return op
    op.pairs.append((s, y))
    if len(op.pairs) > op.memory:
        op.pairs.pop(0)
    op._rebuild()
    return op
