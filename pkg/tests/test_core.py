import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitrate.core import (BasisSubspace, BlockSeparable, Custom,
                            DiagonalQuadratic, DistanceToSubspace,
                            IndicatorAffine, IndicatorSubspace, L1Norm,
                            Quadratic, Translate, UnsupportedOperationError,
                            Zero, apply_prs_operator, check_firm_nonexpansive,
                            prox, prox_distance, refl)
from conftest import grid_argmin_2d

X_AXIS = BasisSubspace([[1.0, 0.0]])


def all_kinds(dim=5, rng=None):
    rng = rng or np.random.default_rng(0)
    A = rng.standard_normal((dim, dim))
    Q = A.T @ A
    basis = rng.standard_normal((2, dim))
    return [
        Zero(),
        L1Norm(0.7),
        IndicatorSubspace(BasisSubspace(basis)),
        IndicatorAffine(BasisSubspace(basis), rng.standard_normal(dim)),
        Quadratic(Q, rng.standard_normal(dim), 0.3),
        DiagonalQuadratic(rng.uniform(0.0, 2.0, dim)),
        DistanceToSubspace(BasisSubspace(basis)),
        Translate(L1Norm(1.0), rng.standard_normal(dim)),
        BlockSeparable([(L1Norm(1.0), 2), (Quadratic(np.eye(3)), 3)]),
    ]


class TestProx:
    def test_soft_threshold_value(self):
        assert prox(L1Norm(1.0), 1.0, [1.9]) == pytest.approx([0.9], abs=1e-15)

    def test_zero_is_identity(self):
        x = np.array([3.0, -1.0, 2.5])
        assert np.array_equal(prox(Zero(), 2.3, x), x)

    def test_diagonal_quadratic_closed_form(self):
        f = DiagonalQuadratic([1.0, 0.5])  # weights 1/j
        out = prox(f, 1.0, [1.0, 1.0])
        assert out == pytest.approx([0.5, 2.0 / 3.0], abs=1e-15)

    def test_diagonal_quadratic_grid_oracle(self):
        f = DiagonalQuadratic([1.0, 0.5])
        x = np.array([1.0, 1.0])
        oracle = grid_argmin_2d(
            lambda a, b: f(np.array([a, b])) + 0.5 * ((a - 1) ** 2 + (b - 1) ** 2),
            -0.5, 1.5)
        assert prox(f, 1.0, x) == pytest.approx(oracle, abs=5e-3)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="non-finite"):
            prox(Zero(), 1.0, [np.nan, 1.0])

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(ValueError, match="gamma"):
            prox(Zero(), 0.0, [1.0])

    def test_custom_without_prox_unsupported(self):
        f = Custom(eval=lambda x: 0.0)
        with pytest.raises(UnsupportedOperationError):
            prox(f, 1.0, [1.0])

    @pytest.mark.parametrize("kind_index", range(9))
    def test_resolvent_optimality_sampled(self, kind_index, rng):
        # f(u) >= f(p) + <u - p, (x - p)/gamma> at p = prox(gamma, x)
        f = all_kinds(rng=np.random.default_rng(3))[kind_index]
        gamma = 0.8
        for _ in range(15):
            x = rng.standard_normal(5)
            p = prox(f, gamma, x)
            s = (x - p) / gamma
            for _ in range(10):
                u = p + rng.standard_normal(5)
                fu = f(u)
                if not np.isfinite(fu):
                    continue
                assert fu >= f(p) + s @ (u - p) - 1e-10


class TestRefl:
    def test_zero(self):
        assert np.array_equal(refl(Zero(), 1.0, [3.0, -1.0]), [3.0, -1.0])

    def test_subspace_reflection(self):
        f = IndicatorSubspace(X_AXIS)
        assert refl(f, 1.0, [1.0, 1.0]) == pytest.approx([1.0, -1.0])

    def test_soft_threshold(self):
        assert refl(L1Norm(1.0), 1.0, [1.9]) == pytest.approx([-0.1])

    def test_nonexpansive_all_kinds(self, rng):
        for f in all_kinds(rng=np.random.default_rng(4)):
            for _ in range(20):
                x, y = rng.standard_normal(5), rng.standard_normal(5)
                rx, ry = refl(f, 1.3, x), refl(f, 1.3, y)
                assert np.linalg.norm(rx - ry) <= np.linalg.norm(x - y) + 1e-10


class TestProxDistance:
    def test_partial_step(self):
        out = prox_distance(X_AXIS, 1.0, [0.0, 3.0])
        assert out == pytest.approx([0.0, 2.0])

    def test_point_in_set(self):
        out = prox_distance(X_AXIS, 1.0, [2.0, 0.0])
        assert out == pytest.approx([2.0, 0.0])

    def test_full_projection_when_close(self):
        out = prox_distance(X_AXIS, 5.0, [0.0, 3.0])
        assert out == pytest.approx([0.0, 0.0])

    def test_grid_oracle(self):
        d = DistanceToSubspace(X_AXIS)
        oracle = grid_argmin_2d(
            lambda a, b: d(np.array([a, b]))
            + 0.5 * (a ** 2 + (b - 3.0) ** 2),
            -0.5, 3.5)
        assert prox_distance(X_AXIS, 1.0, [0.0, 3.0]) == pytest.approx(oracle, abs=2e-2)

    def test_degenerate_basis_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            BasisSubspace([[1.0, 0.0], [2.0, 0.0]])


class TestPRSOperator:
    def test_square_geometry(self):
        f = IndicatorSubspace(BasisSubspace([[0.0, 1.0]]))
        g = IndicatorSubspace(X_AXIS)
        tri = apply_prs_operator(f, g, 1.0, [1.0, 1.0])
        assert tri.x_g == pytest.approx([1.0, 0.0])
        assert tri.x_f == pytest.approx([0.0, -1.0])
        assert tri.prs_point == pytest.approx([-1.0, -1.0])

    def test_fixed_point_collapses_triangle(self):
        f = g = IndicatorSubspace(X_AXIS)
        tri = apply_prs_operator(f, g, 1.0, [2.0, 0.0])
        assert np.allclose(tri.x_g, tri.x_f)
        assert np.allclose(tri.prs_point, [2.0, 0.0])

    def test_soft_threshold_chain(self):
        tri = apply_prs_operator(L1Norm(1.0), Zero(), 1.0, [1.9])
        assert tri.x_g == pytest.approx([1.9])
        assert tri.x_f == pytest.approx([0.9])
        assert tri.prs_point == pytest.approx([-0.1])

    def test_reconstruction_identities(self, rng):
        f, g = L1Norm(0.4), Quadratic(np.eye(5) * 0.7)
        gamma = 1.7
        for _ in range(20):
            tri = apply_prs_operator(f, g, gamma, rng.standard_normal(5))
            assert np.allclose(tri.x_g, tri.z - gamma * tri.subgrad_g,
                               rtol=0, atol=1e-14)
            assert np.allclose(
                tri.x_f,
                tri.x_g - gamma * tri.subgrad_g - gamma * tri.subgrad_f,
                rtol=0, atol=1e-14)


class TestFirmNonexpansiveness:
    def test_zero_passes_with_equality(self, rng):
        pairs = [(rng.standard_normal(3), rng.standard_normal(3))
                 for _ in range(10)]
        rep = check_firm_nonexpansive(Zero(), 1.0, pairs)
        assert rep.passed and np.allclose(rep.margin, 0.0)

    def test_soft_threshold_random_pairs(self, rng):
        pairs = [(rng.standard_normal(5), rng.standard_normal(5))
                 for _ in range(100)]
        assert check_firm_nonexpansive(L1Norm(1.0), 1.0, pairs).passed

    def test_projection_equality_on_parallel_pairs(self, rng):
        f = IndicatorSubspace(X_AXIS)
        pairs = [(np.array([a, 0.0]), np.array([b, 0.0]))
                 for a, b in rng.standard_normal((5, 2))]
        rep = check_firm_nonexpansive(f, 1.0, pairs)
        assert rep.passed and np.allclose(rep.margin, 0.0, atol=1e-12)

    def test_every_kind(self, rng):
        for f in all_kinds(rng=np.random.default_rng(5)):
            pairs = [(rng.standard_normal(5), rng.standard_normal(5))
                     for _ in range(25)]
            rep = check_firm_nonexpansive(f, 0.9, pairs)
            assert rep.passed, type(f).__name__

    def test_empty_pairs_rejected(self):
        with pytest.raises(ValueError):
            check_firm_nonexpansive(Zero(), 1.0, [])


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(0.05, 1.0),
       seed=st.integers(0, 10 ** 6))
def test_averaged_contraction(lam, seed):
    # ||T_lam x - T_lam y||^2 <= ||x-y||^2
    #   - ((1-lam)/lam) ||(I-T_lam)x - (I-T_lam)y||^2
    rng = np.random.default_rng(seed)
    f, g = L1Norm(0.6), DiagonalQuadratic(rng.uniform(0.0, 2.0, 4))
    gamma = 1.1

    def T(z):
        x_g = g.prox(gamma, z)
        x_f = f.prox(gamma, 2.0 * x_g - z)
        return z + 2.0 * (x_f - x_g)

    def T_lam(z):
        return (1.0 - lam) * z + lam * T(z)

    x, y = rng.standard_normal(4), rng.standard_normal(4)
    tx, ty = T_lam(x), T_lam(y)
    lhs = np.sum((tx - ty) ** 2)
    rhs = np.sum((x - y) ** 2) - (1.0 - lam) / lam * np.sum(
        ((x - tx) - (y - ty)) ** 2)
    assert lhs <= rhs + 1e-9


class TestQuadratic:
    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            Quadratic([[1.0, 2.0], [0.0, 1.0]])

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError, match="semidefinite"):
            Quadratic([[1.0, 0.0], [0.0, -1.0]])

    def test_prox_solves_resolvent(self, rng):
        A = rng.standard_normal((4, 4))
        f = Quadratic(A.T @ A, rng.standard_normal(4))
        x = rng.standard_normal(4)
        p = f.prox(0.7, x)
        # optimality: grad f(p) + (p - x)/gamma = 0
        assert np.allclose(f.grad(p) + (p - x) / 0.7, 0.0, atol=1e-12)


class TestSubspaces:
    def test_projection_idempotent(self, rng):
        s = BasisSubspace(rng.standard_normal((3, 7)))
        x = rng.standard_normal(7)
        p = s.project(x)
        assert np.allclose(s.project(p), p, atol=1e-12)

    def test_orthonormal_rows(self, rng):
        s = BasisSubspace(rng.standard_normal((4, 9)))
        G = s.onb @ s.onb.T
        assert np.allclose(G, np.eye(4), atol=1e-12)

    def test_affine_projection(self):
        aff = IndicatorAffine(BasisSubspace([[1.0, 0.0]]), [0.0, 2.0])
        assert aff.prox(1.0, np.array([3.0, 5.0])) == pytest.approx([3.0, 2.0])
        assert aff(np.array([1.0, 2.0])) == 0.0
        assert aff(np.array([1.0, 2.1])) == np.inf

    def test_indicator_membership_tolerance(self):
        f = IndicatorSubspace(X_AXIS)
        assert f(np.array([1.0, 5e-10])) == 0.0
        assert f(np.array([1.0, 1e-6])) == np.inf
