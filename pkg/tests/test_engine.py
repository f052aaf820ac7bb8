import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gordankit import (
    Certificate,
    EngineConfig,
    FeasiblePoint,
    FinitePointSet,
    Indeterminate,
    NonnegOrthant,
    QuadraticFamily,
    QuadraticFunction,
    Reals,
    SimplexWeight,
    SymMatrix,
    UnitSphere,
    aggregate,
    characterization_probe,
    decide_alternative,
    lemma_min_bound_check,
    positive_normalized_check,
    quadratic_infimum,
    yuan_alternative,
    yuan_pencil_max,
)
from gordankit.errors import DimensionMismatchError
from gordankit.sampling import (
    random_convex_family,
    rng_stream,
    simplex_lattice_array,
    sphere_sample,
)


def _linear_family(*slopes_and_consts):
    return QuadraticFamily(tuple(QuadraticFunction.linear([s], c) for s, c in slopes_and_consts))


class TestEngineConfig:
    def test_defaults_valid(self):
        cfg = EngineConfig()
        assert cfg.simplex_grid_resolution == 32
        assert cfg.multistart_count == 64
        assert cfg.refine_iters == 200
        assert cfg.alpha == 0.0

    @pytest.mark.parametrize("kwargs", [
        {"simplex_grid_resolution": 0},
        {"multistart_count": -1},
        {"tol_cert": 0.0},
        {"delta_strict": -1e-9},
        {"seed": -5},
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            EngineConfig(**kwargs)


class TestDecideAlternative:
    def test_feasible_point_single_parabola(self, cfg):
        fam = QuadraticFamily((QuadraticFunction(SymMatrix([[1.0]]), [0.0], -1.0),))
        out = decide_alternative(fam, Reals(1), cfg)
        assert isinstance(out, FeasiblePoint)
        assert out.margin == pytest.approx(-1.0, abs=1e-9)

    def test_certificate_for_opposing_slopes(self, cfg):
        out = decide_alternative(_linear_family((1.0, 0.0), (-1.0, 0.0)), Reals(1), cfg)
        assert isinstance(out, Certificate)
        assert np.allclose(out.weights.t, [0.5, 0.5])
        assert out.inf_value >= -cfg.tol_cert

    def test_feasible_point_for_shifted_slopes(self, cfg):
        out = decide_alternative(_linear_family((1.0, -1.0), (-1.0, -1.0)), Reals(1), cfg)
        assert isinstance(out, FeasiblePoint)
        assert out.margin == pytest.approx(-1.0, abs=1e-9)

    def test_alpha_shift_changes_outcome(self, cfg):
        from dataclasses import replace

        fam = _linear_family((1.0, 0.0), (-1.0, 0.0))
        # At level 0.5 the origin satisfies max(x, -x) = 0 < 0.5.
        out = decide_alternative(fam, Reals(1), replace(cfg, alpha=0.5))
        assert isinstance(out, FeasiblePoint)
        assert out.margin == pytest.approx(-0.5, abs=1e-9)
        # At level -0.5 no point has max < -0.5, but the zero aggregate
        # clears inf >= -0.5.
        out2 = decide_alternative(fam, Reals(1), replace(cfg, alpha=-0.5))
        assert isinstance(out2, Certificate)
        assert out2.inf_value == pytest.approx(0.5, abs=1e-9)

    def test_dimension_mismatch(self, cfg):
        fam = _linear_family((1.0, 0.0))
        with pytest.raises(DimensionMismatchError):
            decide_alternative(fam, Reals(2), cfg)

    def test_certificate_reverifies_via_public_api(self, cfg):
        fam = _linear_family((1.0, 0.0), (-1.0, 0.0))
        out = decide_alternative(fam, Reals(1), cfg)
        agg = aggregate(fam, out.weights)
        assert quadratic_infimum(agg, Reals(1)).value >= -cfg.tol_cert

    def test_positive_scaling_preserves_outcome_class(self, cfg):
        for seed in range(25):
            fam = random_convex_family(2, 2, seed)
            dom = Reals(2) if seed % 2 == 0 else NonnegOrthant(2)
            base = decide_alternative(fam, dom, cfg)
            if isinstance(base, Indeterminate):
                continue
            for beta in (0.25, 4.0):
                scaled = decide_alternative(fam.scaled(beta), dom, cfg)
                assert type(scaled) is type(base), (seed, beta)

    def test_determinism_bytes(self, cfg):
        fam = random_convex_family(3, 3, 77)
        a = decide_alternative(fam, NonnegOrthant(3), cfg)
        b = decide_alternative(fam, NonnegOrthant(3), cfg)
        assert type(a) is type(b)
        if isinstance(a, FeasiblePoint):
            assert a.x.tobytes() == b.x.tobytes() and a.margin == b.margin
        elif isinstance(a, Certificate):
            assert a.weights.t.tobytes() == b.weights.t.tobytes()
            assert a.inf_value == b.inf_value

    def test_exclusivity_on_random_families(self, cfg):
        # When one side is decided, an intensified opposite-side search must
        # not find a witness beyond the band.
        for seed in range(30):
            fam = random_convex_family(2, 2, 1000 + seed)
            dom = Reals(2) if seed % 2 == 0 else NonnegOrthant(2)
            out = decide_alternative(fam, dom, cfg)
            if isinstance(out, FeasiblePoint):
                lattice = simplex_lattice_array(fam.size, 64)
                a_s, b_s, c_s = fam.coefficient_stacks()
                from gordankit.infimum import batch_infimum

                a = np.einsum("km,mij->kij", lattice, a_s)
                vals, flags = batch_infimum(a, lattice @ b_s, lattice @ c_s, dom)
                assert vals.max() < cfg.tol_band
            elif isinstance(out, Certificate):
                pts = rng_stream(seed, 60).uniform(-8, 8, size=(4000, 2))
                if isinstance(dom, NonnegOrthant):
                    pts = np.abs(pts)
                sups = fam.eval_members(pts).max(axis=0)
                assert sups.min() > -cfg.tol_band


class TestFinitePointSetEngine:
    def test_enumeration_is_exact(self, cfg):
        fam = _linear_family((1.0, 0.0), (-1.0, 0.0))
        dom = FinitePointSet([[-1.0], [1.0]])
        out = decide_alternative(fam, dom, cfg)
        # No feasible point (min over the two points of max(x,-x) is 1),
        # but the zero aggregate at t = 1/2 has min 0 >= 0: a certificate.
        assert isinstance(out, Certificate)
        assert np.allclose(out.weights.t, [0.5, 0.5])
        assert out.inf_value == pytest.approx(0.0, abs=1e-12)

    def test_both_fail_goes_indeterminate_at_half_level(self, cfg):
        from dataclasses import replace

        fam = _linear_family((1.0, 0.0), (-1.0, 0.0))
        dom = FinitePointSet([[-1.0], [1.0]])
        out = decide_alternative(fam, dom, replace(cfg, alpha=0.5))
        assert isinstance(out, Indeterminate)
        assert out.best_sup == pytest.approx(0.5)   # 1 - alpha
        assert out.best_inf == pytest.approx(-0.5, abs=1e-9)  # 0 - alpha


class TestYuanPencil:
    def test_identity_vs_negation(self):
        t, lam = yuan_pencil_max(SymMatrix.identity(2), SymMatrix(-np.eye(2)))
        assert t == pytest.approx(1.0, abs=1e-9)
        assert lam == pytest.approx(1.0, abs=1e-9)

    def test_constant_pencil(self):
        t, lam = yuan_pencil_max(SymMatrix(-np.eye(2)), SymMatrix(-np.eye(2)))
        assert lam == pytest.approx(-1.0, abs=1e-12)

    def test_diagonal_crossing_fixture(self):
        t, lam = yuan_pencil_max(SymMatrix(np.diag([1.0, -1.0])), SymMatrix(np.diag([-1.0, 1.0])))
        assert t == pytest.approx(0.5, abs=1e-9)
        assert lam == pytest.approx(0.0, abs=1e-10)

    def test_concavity_of_pencil_minimum(self):
        rng = rng_stream(13, 0)
        for _ in range(300):
            n = int(rng.integers(1, 9))
            g1, g2 = rng.normal(size=(n, n)), rng.normal(size=(n, n))
            a1, a2 = g1 + g1.T, g2 + g2.T

            def g(t):
                return np.linalg.eigvalsh(t * a1 + (1 - t) * a2)[0]

            t1, t2 = rng.uniform(0, 1, size=2)
            assert g((t1 + t2) / 2) >= (g(t1) + g(t2)) / 2 - 1e-9


class TestYuanAlternative:
    def test_psd_first_matrix(self, cfg):
        out = yuan_alternative(SymMatrix.identity(2), SymMatrix(-np.eye(2)), Reals(2), cfg)
        assert isinstance(out, Certificate)
        assert out.weights.t[0] == pytest.approx(1.0, abs=1e-9)

    def test_jointly_negative(self, cfg):
        out = yuan_alternative(SymMatrix(-np.eye(2)), SymMatrix(-np.eye(2)), UnitSphere(2), cfg)
        assert isinstance(out, FeasiblePoint)
        assert out.margin == pytest.approx(-0.5, abs=1e-9)

    def test_diagonal_crossing(self, cfg):
        out = yuan_alternative(SymMatrix(np.diag([1.0, -1.0])), SymMatrix(np.diag([-1.0, 1.0])),
                               Reals(2), cfg)
        assert isinstance(out, Certificate)
        assert out.weights.t[0] == pytest.approx(0.5, abs=1e-6)

    def test_agreement_with_dense_oracle(self, cfg):
        # N = 3 and 4 only: on the 2-sphere exclusivity has no convexity
        # guarantee, so those instances are probed but never asserted.
        rng = rng_stream(14, 0)
        for trial in range(40):
            n = 3 + trial % 2
            g1, g2 = rng.normal(size=(n, n)), rng.normal(size=(n, n))
            a1, a2 = SymMatrix(g1 + g1.T), SymMatrix(g2 + g2.T)
            tgrid = np.linspace(0.0, 1.0, 2000)
            stacked = tgrid[:, None, None] * a1.entries + (1 - tgrid)[:, None, None] * a2.entries
            gvals = np.linalg.eigvalsh(stacked)[:, 0]
            pts = sphere_sample(n, 4000, trial)
            forms = np.maximum(
                0.5 * np.einsum("ki,ij,kj->k", pts, a1.entries, pts),
                0.5 * np.einsum("ki,ij,kj->k", pts, a2.entries, pts),
            )
            out = yuan_alternative(a1, a2, UnitSphere(n), cfg)
            if gvals.max() >= 1e-3:
                assert isinstance(out, Certificate), trial
            elif gvals.max() < -1e-3 and forms.min() < -1e-3:
                assert isinstance(out, FeasiblePoint), trial


class TestCharacterizationProbe:
    def test_both_fail_on_two_point_set(self, cfg):
        fam = _linear_family((1.0, 0.0), (-1.0, 0.0))
        report = characterization_probe(fam, FinitePointSet([[-1.0], [1.0]]), 0.5, cfg)
        assert report.verdict == "both-fail"
        assert report.exhaustive
        assert report.feasible_margin == pytest.approx(0.5)  # 1 - alpha
        assert report.certificate_inf == pytest.approx(-0.5, abs=1e-9)  # 0 - alpha

    def test_a1_for_negative_parabola(self, cfg):
        fam = QuadraticFamily((QuadraticFunction(SymMatrix([[1.0]]), [0.0], -1.0),))
        report = characterization_probe(fam, Reals(1), 0.0, cfg)
        assert report.verdict == "a1" and not report.exhaustive

    def test_a2_for_opposing_slopes(self, cfg):
        report = characterization_probe(_linear_family((1.0, 0.0), (-1.0, 0.0)), Reals(1), 0.0, cfg)
        assert report.verdict == "a2"
        assert np.allclose(report.certificate_weight.t, [0.5, 0.5])


class TestLemmaMinBound:
    def test_worked_example(self):
        assert lemma_min_bound_check([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5], [0.5, 0.5])

    def test_single_row_reduces_to_sup_bound(self):
        assert lemma_min_bound_check([[-1.0, 1.0]], [0.5, 0.5], [1.0])

    def test_random_instances_always_true(self):
        rng = rng_stream(15, 0)
        for _ in range(1000):
            m = int(rng.integers(1, 7))
            k = int(rng.integers(1, 7))
            vals = rng.normal(size=(m, k)) * rng.uniform(0.1, 10)
            L = rng.dirichlet(np.ones(k))
            t = rng.dirichlet(np.ones(m))
            assert lemma_min_bound_check(vals, L, t)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            lemma_min_bound_check([[1.0, 0.0]], [0.5, 0.5], [0.5, 0.5])


class TestPositiveNormalizedCheck:
    def test_simplex_passes_probes(self):
        rng = rng_stream(16, 0)
        probes = rng.normal(size=(50, 2))
        report = positive_normalized_check([0.5, 0.5], probes)
        assert report.is_simplex and report.violating_probe is None

    def test_negative_entry_yields_basis_probe(self):
        report = positive_normalized_check([2.0, -1.0], [])
        assert not report.is_simplex
        assert np.array_equal(report.violating_probe, [0.0, -1.0])
        assert report.probe_value == pytest.approx(1.0)
        assert report.probe_max == pytest.approx(0.0)
        assert report.probe_value > report.probe_max

    def test_normalization_failure_yields_ones_probe(self):
        report = positive_normalized_check([0.5, 0.25], [])
        assert not report.is_simplex
        assert np.array_equal(report.violating_probe, [-1.0, -1.0])
        assert report.probe_value == pytest.approx(-0.75)
        assert report.probe_max == pytest.approx(-1.0)
        assert report.probe_value > report.probe_max

    @given(st.integers(0, 2_000))
    def test_simplex_bound_holds_on_random_probes(self, seed):
        rng = rng_stream(seed, 17)
        k = int(rng.integers(1, 8))
        L = rng.dirichlet(np.ones(k))
        probes = rng.normal(size=(20, k)) * rng.uniform(0.1, 5)
        report = positive_normalized_check(L, probes)
        assert report.is_simplex and report.violating_probe is None
