"""Dolan-More performance profiles from solver run records."""

from __future__ import annotations

import math
from collections import defaultdict

__all__ = ["METRICS", "ProfileInputError", "performance_profile"]

METRICS = {"nf": "n_f", "ngrad": "n_grad", "nc": "n_c"}


class ProfileInputError(ValueError):
    pass


def performance_profile(records, metric: str = "nf") -> dict[str, list[tuple[float, float]]]:
    """Return ``{solver: [(t, fraction), ...]}`` sorted by ``t``.

    A run counts as solved iff its status is ``"first_order"``; unsolved runs
    get ratio infinity. Every curve is evaluated at the union of finite ratios
    over all solvers, so curves are directly comparable.
    """
    try:
        key = METRICS[metric]
    except KeyError:
        raise ProfileInputError(f"unknown metric {metric!r}; choose from {sorted(METRICS)}") from None

    cost = defaultdict(dict)
    for r in records:
        cost[r["solver"]][r["problem"]] = (
            float(r[key]) if r["status"] == "first_order" else math.inf
        )
    if len(cost) < 2:
        raise ProfileInputError("a profile needs at least two solvers")
    problems = None
    for solver, runs in cost.items():
        if problems is None:
            problems = set(runs)
        elif set(runs) != problems:
            raise ProfileInputError(f"solver {solver!r} was run on a different problem set")

    ratios = {s: [] for s in cost}
    for prob in sorted(problems):
        best = min(cost[s][prob] for s in cost)
        for s in cost:
            c = cost[s][prob]
            if math.isinf(c) or math.isinf(best):
                ratios[s].append(math.inf)
            elif best == 0:
                ratios[s].append(1.0 if c == 0 else math.inf)
            else:
                ratios[s].append(c / best)

    grid = sorted({r for rs in ratios.values() for r in rs if math.isfinite(r)}) or [1.0]
    n = len(problems)
    return {
        s: [(t, sum(r <= t for r in rs) / n) for t in grid] for s, rs in sorted(ratios.items())
    }
