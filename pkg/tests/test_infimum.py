import numpy as np
import pytest
from scipy.optimize import minimize

from gordankit import (
    Box,
    FinitePointSet,
    NonnegOrthant,
    QuadraticFamily,
    QuadraticFunction,
    Reals,
    SymMatrix,
    UnitSphere,
    eval_quadratic,
    quadratic_infimum,
)
from gordankit.infimum import batch_infimum, batch_orthant_infimum, batch_real_infimum
from gordankit.sampling import grid_points, rng_stream, sphere_sample


def _quad(a, b, c):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return QuadraticFunction(SymMatrix(a), b, c)


class TestRealsInfimum:
    def test_convex_parabola(self):
        res = quadratic_infimum(_quad([[1.0]], [0.0], 0.0), Reals(1))
        assert res.value == 0.0 and res.exact
        assert abs(res.argmin[0]) == 0.0

    def test_unbounded_linear(self):
        res = quadratic_infimum(QuadraticFunction.linear([1.0]), Reals(1))
        assert res.value == -np.inf
        # The reported ray really descends.
        q = QuadraticFunction.linear([1.0])
        assert eval_quadratic(q, 100.0 * res.direction) < -50.0

    def test_indefinite_unbounded(self):
        res = quadratic_infimum(_quad([[1.0, 2.0], [2.0, 1.0]], [0.0, 0.0], 0.0), Reals(2))
        assert res.value == -np.inf
        d = res.direction
        assert 0.5 * d @ np.array([[1.0, 2.0], [2.0, 1.0]]) @ d < 0

    def test_shifted_minimum(self):
        # c - b^2/(2a) by completing the square.
        res = quadratic_infimum(_quad([[2.0]], [-4.0], 1.0), Reals(1))
        assert res.value == pytest.approx(1.0 - 4.0, abs=1e-14)
        assert res.argmin[0] == pytest.approx(2.0, abs=1e-14)

    def test_singular_in_range(self):
        res = quadratic_infimum(_quad(np.diag([2.0, 0.0]), [-4.0, 0.0], 0.0), Reals(2))
        assert res.value == pytest.approx(-4.0, abs=1e-14)

    def test_singular_out_of_range(self):
        res = quadratic_infimum(_quad(np.diag([2.0, 0.0]), [0.0, 1.0], 0.0), Reals(2))
        assert res.value == -np.inf


class TestOrthantInfimum:
    def test_vertex_solution(self):
        res = quadratic_infimum(_quad([[1.0]], [-2.0], 0.0), NonnegOrthant(1))
        assert res.value == pytest.approx(-2.0, abs=1e-14)
        assert res.argmin[0] == pytest.approx(2.0, abs=1e-14)

    def test_positive_slope_pins_at_zero(self):
        res = quadratic_infimum(QuadraticFunction.linear([1.0], 0.5), NonnegOrthant(1))
        assert res.value == 0.5 and res.argmin[0] == 0.0

    def test_negative_slope_unbounded(self):
        res = quadratic_infimum(QuadraticFunction.linear([-1.0]), NonnegOrthant(1))
        assert res.value == -np.inf

    def test_copositive_indefinite_bounded(self):
        # x1*x2 is indefinite yet nonnegative on the orthant.
        res = quadratic_infimum(_quad([[0.0, 1.0], [1.0, 0.0]], [0.0, 0.0], 0.25), NonnegOrthant(2))
        assert res.value == pytest.approx(0.25, abs=1e-12)

    def test_negative_curvature_direction_unbounded(self):
        res = quadratic_infimum(_quad([[-0.5]], [3.0], 0.0), NonnegOrthant(1))
        assert res.value == -np.inf
        q = _quad([[-0.5]], [3.0], 0.0)
        assert eval_quadratic(q, 1e4 * res.direction) < -1e6

    def test_active_set_matches_convex_oracle(self):
        # Independent oracle: projected convex minimization (L-BFGS-B).
        rng = rng_stream(21, 0)
        for _ in range(120):
            n = int(rng.integers(1, 7))
            g = rng.normal(size=(n, n))
            a = g @ g.T
            b = rng.normal(size=n)
            c = float(rng.normal())
            res = quadratic_infimum(_quad(a, b, c), NonnegOrthant(n))
            sol = minimize(
                lambda x: 0.5 * x @ a @ x + b @ x + c,
                np.ones(n),
                jac=lambda x: a @ x + b,
                bounds=[(0.0, None)] * n,
                method="L-BFGS-B",
                options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": 2000},
            )
            assert res.value <= sol.fun + 1e-9
            assert res.value >= sol.fun - 1e-6

    def test_argmin_is_feasible_witness(self):
        rng = rng_stream(22, 0)
        for _ in range(150):
            n = int(rng.integers(1, 5))
            m = rng.normal(size=(n, n))
            q = _quad(m + m.T, rng.normal(size=n), float(rng.normal()))
            res = quadratic_infimum(q, NonnegOrthant(n))
            if np.isfinite(res.value):
                assert res.argmin.min() >= -1e-12
                assert eval_quadratic(q, res.argmin) == pytest.approx(res.value, abs=1e-10)
            else:
                d = res.direction
                assert d is not None and d.min() >= -1e-12

    def test_dominance_chain(self):
        rng = rng_stream(23, 0)
        for _ in range(100):
            n = int(rng.integers(1, 5))
            m = rng.normal(size=(n, n))
            q = _quad(m + m.T, rng.normal(size=n), float(rng.normal()))
            v_real = quadratic_infimum(q, Reals(n)).value
            v_orth = quadratic_infimum(q, NonnegOrthant(n)).value
            assert v_real <= v_orth + 1e-10
            for _ in range(10):
                x = np.abs(rng.normal(size=n))
                assert v_orth <= eval_quadratic(q, x) + 1e-10


class TestSphereInfimum:
    def test_homogeneous_is_half_min_eigenvalue(self):
        q = _quad(np.diag([2.0, -4.0]), [0.0, 0.0], 1.0)
        res = quadratic_infimum(q, UnitSphere(2))
        assert res.value == pytest.approx(1.0 - 2.0, abs=1e-12)

    def test_one_dimensional_sphere(self):
        q = _quad([[2.0]], [5.0], 0.0)
        res = quadratic_infimum(q, UnitSphere(1))
        assert res.value == pytest.approx(1.0 - 5.0, abs=1e-14)
        assert res.argmin[0] == -1.0

    def test_matches_dense_sampling_low_dim(self):
        rng = rng_stream(31, 0)
        for trial in range(30):
            n = int(rng.integers(2, 4))
            m = rng.normal(size=(n, n))
            q = _quad(m + m.T, rng.normal(size=n), float(rng.normal()))
            res = quadratic_infimum(q, UnitSphere(n))
            pts = sphere_sample(n, 40000, trial)
            vals = 0.5 * np.einsum("ki,ij,kj->k", pts, q.a.entries, pts) + pts @ q.b + q.c
            assert res.value <= vals.min() + 1e-9
            assert res.value >= vals.min() - 0.02  # sampling resolution slack

    def test_global_optimality_certificate(self):
        # Exact condition for the spherical minimizer x*: there is a
        # multiplier mu with (A + mu I) x* = -b and A + mu I >= 0.
        rng = rng_stream(32, 0)
        for _ in range(60):
            n = int(rng.integers(2, 7))
            m = rng.normal(size=(n, n))
            q = _quad(m + m.T, rng.normal(size=n), float(rng.normal()))
            res = quadratic_infimum(q, UnitSphere(n))
            x = res.argmin
            scale = 1.0 + np.abs(q.a.entries).max() + np.abs(q.b).max()
            assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-9)
            mu = -float(x @ (q.a.entries @ x + q.b))
            resid = np.linalg.norm((q.a.entries + mu * np.eye(n)) @ x + q.b)
            assert resid <= 1e-7 * scale
            assert np.linalg.eigvalsh(q.a.entries)[0] + mu >= -1e-7 * scale
            assert eval_quadratic(q, x) == pytest.approx(res.value, abs=1e-9)


class TestBoxAndFiniteInfimum:
    def test_box_matches_fine_grid(self):
        rng = rng_stream(41, 0)
        for _ in range(40):
            n = int(rng.integers(1, 4))
            m = rng.normal(size=(n, n))
            q = _quad(m + m.T, rng.normal(size=n), float(rng.normal()))
            lo = -np.abs(rng.normal(size=n)) - 1.0
            hi = np.abs(rng.normal(size=n)) + 1.0
            box = Box(lo, hi)
            res = quadratic_infimum(q, box)
            assert res.exact
            pts = grid_points(box, max(5, int(round(100000 ** (1 / n)))))
            vals = 0.5 * np.einsum("ki,ij,kj->k", pts, q.a.entries, pts) + pts @ q.b + q.c
            assert res.value <= vals.min() + 1e-9
            assert res.value >= vals.min() - 0.05

    def test_finite_point_set(self):
        q = _quad([[2.0]], [0.0], 0.0)
        res = quadratic_infimum(q, FinitePointSet([[-3.0], [0.5], [2.0]]))
        assert res.value == pytest.approx(0.25, abs=1e-15)
        assert res.argmin[0] == 0.5


class TestBatchInfimum:
    def test_batch_matches_scalar_reals_and_orthant(self):
        rng = rng_stream(51, 0)
        k, n = 300, 3
        a = rng.normal(size=(k, n, n))
        a = (a + a.transpose(0, 2, 1)) / 2.0
        g = rng.normal(size=(k // 2, n, n))
        a[: k // 2] = np.einsum("kij,klj->kil", g, g)
        b = rng.normal(size=(k, n))
        c = rng.normal(size=k)
        for dom, batch in ((Reals(n), batch_real_infimum), (NonnegOrthant(n), batch_orthant_infimum)):
            vals, flags = batch(a, b, c)
            for i in range(k):
                if flags[i]:
                    continue
                sv = quadratic_infimum(_quad(a[i], b[i], c[i]), dom).value
                if np.isinf(sv) or np.isinf(vals[i]):
                    assert np.isinf(sv) and np.isinf(vals[i])
                else:
                    assert vals[i] == pytest.approx(sv, rel=1e-9, abs=1e-9)

    def test_batch_finite_point_set(self):
        dom = FinitePointSet([[0.0], [1.0], [2.0]])
        a = np.zeros((2, 1, 1))
        b = np.array([[1.0], [-1.0]])
        c = np.array([0.0, 0.0])
        vals, flags = batch_infimum(a, b, c, dom)
        assert np.array_equal(vals, [0.0, -2.0])
        assert not flags.any()
