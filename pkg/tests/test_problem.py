import json

import numpy as np
import pytest

from l2penalty.problem import EvalCounters, Evaluator, Problem, ShapeError, verify_derivatives
from l2penalty.registry import (
    INFEASIBLE,
    UnknownProblemError,
    load_qp_json,
    registry_get,
    registry_names,
)


def _problem(grad, n=2, **kw):
    return Problem("t", n, 1, np.ones(n), obj=kw.get("obj", lambda x: 0.5 * x @ x), grad=grad,
                   cons=lambda x: np.array([x[0]]), jac=lambda x: np.eye(1, n))


class TestVerifyDerivatives:
    def test_exact_quadratic(self):
        p = _problem(lambda x: x)
        assert verify_derivatives(p, np.array([1.0, 2.0]), 1e-5) == []

    def test_planted_gradient_bug(self):
        p = _problem(lambda x: np.zeros(2), obj=lambda x: x[0] ** 2)
        out = verify_derivatives(p, np.array([1.0, 0.0]), 1e-5)
        assert len(out) == 1
        assert out[0].kind == "grad" and out[0].index == (0,)
        np.testing.assert_allclose(out[0].approx, 2.0, rtol=1e-6)

    def test_planted_jacobian_bug(self):
        p = Problem("t", 2, 1, [0.0, 0.0], obj=lambda x: 0.0, grad=lambda x: np.zeros(2),
                    cons=lambda x: np.array([x[0] * x[1]]), jac=lambda x: np.array([[x[1], 0.0]]))
        out = verify_derivatives(p, np.array([1.0, 2.0]))
        assert [(v.kind, v.index) for v in out] == [("jac", (0, 1))]

    def test_wrong_shape_raises(self):
        p = _problem(lambda x: np.zeros(3))
        with pytest.raises(ShapeError):
            verify_derivatives(p, np.zeros(2))

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            verify_derivatives(_problem(lambda x: x), np.zeros(2), 0.0)

    @pytest.mark.parametrize("name", registry_names())
    def test_registry_derivatives(self, name):
        p = registry_get(name)
        assert verify_derivatives(p, p.x0, 1e-5) == []


class TestEvaluator:
    def test_counters_track_calls(self):
        ev = Evaluator(registry_get("hs6"))
        for _ in range(4):
            ev.f(ev.problem.x0)
        ev.g(ev.problem.x0)
        ev.c(ev.problem.x0)
        assert ev.counters == EvalCounters(4, 1, 1, 0)

    def test_input_shape_checked(self):
        ev = Evaluator(registry_get("hs6"))
        with pytest.raises(ShapeError):
            ev.f(np.zeros(3))

    def test_output_shape_checked(self):
        p = Problem("t", 2, 1, [0, 0], obj=lambda x: 0.0, grad=lambda x: x,
                    cons=lambda x: np.zeros(2), jac=lambda x: np.zeros((1, 2)))
        with pytest.raises(ShapeError):
            Evaluator(p).c(np.zeros(2))


class TestRegistry:
    def test_hs6(self):
        p = registry_get("hs6")
        assert (p.n, p.m) == (2, 1)
        np.testing.assert_allclose(p.x0, [-1.2, 1.0])
        np.testing.assert_allclose(p.obj(np.ones(2)), 0.0)
        np.testing.assert_allclose(p.cons(np.ones(2)), [0.0], atol=1e-15)

    def test_known_multiplier_qp(self):
        p = registry_get("qp-known-multiplier")
        np.testing.assert_allclose(p.x_star, np.eye(p.n)[0])
        # grad f + J'y = 0 with y = -1, i.e. multiplier magnitude 1
        np.testing.assert_allclose(p.grad(p.x_star) - p.jac(p.x_star)[0], 0.0)

    def test_unknown_lists_keys(self):
        with pytest.raises(UnknownProblemError, match="hs6"):
            registry_get("unknown-xyz")

    def test_contents(self):
        names = registry_names()
        assert len(registry_names(feasible_only=True)) >= 10
        for key in ("hs6", "hs7", "hs26", "hs27", "hs40", "hs42", "hs78", "hs79",
                    "qp-known-multiplier", "rank-deficient-sphere", "infeasible-circle"):
            assert key in names
        assert INFEASIBLE <= set(names)

    @pytest.mark.parametrize("name", registry_names(feasible_only=True))
    def test_reference_optimum(self, name):
        p = registry_get(name)
        assert p.n <= 50 and p.m < p.n
        assert np.linalg.norm(p.cons(p.x_star)) <= 1e-5
        np.testing.assert_allclose(p.obj(p.x_star), p.f_star, rtol=1e-6, atol=1e-8)

    def test_rank_deficient_jacobian(self):
        p = registry_get("rank-deficient-sphere")
        assert np.linalg.matrix_rank(p.jac(p.x0)) < p.m

    def test_infeasible_constraint(self):
        p = registry_get("infeasible-circle")
        xs = np.random.default_rng(0).normal(size=(50, 2))
        assert min(p.cons(x)[0] for x in xs) >= 1.0

    def test_fresh_instances(self):
        a, b = registry_get("hs7"), registry_get("hs7")
        a.x0[0] = 99.0
        assert b.x0[0] != 99.0


class TestLoadQP:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "qp.json"
        path.write_text(json.dumps({"Q": [[2, 0], [0, 2]], "g": [0, 0], "A": [[1, 1]],
                                    "b": [-1], "x0": [0, 0]}))
        p = load_qp_json(path)
        assert (p.n, p.m, p.name) == (2, 1, "qp")
        np.testing.assert_allclose(p.obj(np.array([1.0, 1.0])), 2.0)
        np.testing.assert_allclose(p.cons(np.array([0.5, 0.5])), [0.0])
        assert verify_derivatives(p, np.array([0.3, -0.2])) == []

    def test_missing_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"Q": [[1]]}))
        with pytest.raises(ValueError, match="lacks keys"):
            load_qp_json(path)
