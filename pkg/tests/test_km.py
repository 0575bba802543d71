import numpy as np
import pytest

from splitrate.core import BasisSubspace, IndicatorSubspace
from splitrate.km import (ErrorSchedule, RelaxationSchedule,
                          UnsupportedScheduleError, check_fejer,
                          check_fpr_bound, check_fpr_monotone,
                          check_fpr_summability, check_little_o_tail,
                          decaying_errors, fpr_bound, inexact_fpr_reports,
                          km_step, run_km)
from splitrate.counterexamples import RotationSpaceSpec, build_rotation_operator


HALF = RelaxationSchedule.constant(0.5)


class TestSchedules:
    def test_constant_values(self):
        lam = HALF.values(4)
        assert np.array_equal(lam, [0.5] * 4)
        assert np.array_equal(HALF.partial_sums(4), [0.5, 1.0, 1.5, 2.0])
        assert HALF.tau_min(4) == 0.25

    def test_partial_sums_exact_increments(self):
        sched = RelaxationSchedule.from_values([0.3, 0.7, 0.25, 1.0])
        Lam = sched.partial_sums(4)
        lam = sched.values(4)
        assert np.all(np.diff(Lam) > 0)
        for k in range(1, 4):
            assert Lam[k] == Lam[k - 1] + lam[k]

    def test_polynomial_kind(self):
        sched = RelaxationSchedule.polynomial(-0.5)
        assert sched.values(3) == pytest.approx([1.0, 2 ** -0.5, 3 ** -0.5])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match=r"\(0, 1\]"):
            RelaxationSchedule.constant(1.5).values(1)
        with pytest.raises(ValueError, match=r"\(0, 1\]"):
            RelaxationSchedule.from_values([0.5, 0.0]).values(2)

    def test_list_too_short(self):
        with pytest.raises(ValueError, match="values"):
            RelaxationSchedule.from_values([0.5]).values(2)

    def test_values_extended_repeats_list_tail(self):
        sched = RelaxationSchedule.from_values([0.5, 0.25])
        assert np.array_equal(sched.values_extended(2), [0.5, 0.25, 0.25])


class TestErrorSchedules:
    def test_envelope_validation(self):
        sched = ErrorSchedule(generate=lambda k: np.array([1.0]),
                              omega=lambda k: -1.0)
        with pytest.raises(ValueError, match="nonnegative"):
            sched.omegas(3)
        increasing = ErrorSchedule(generate=lambda k: np.array([0.0]),
                                   omega=lambda k: float(k))
        with pytest.raises(ValueError, match="nonincreasing"):
            increasing.omegas(3)

    def test_envelope_must_dominate(self):
        bad = ErrorSchedule(generate=lambda k: np.array([10.0]),
                            omega=lambda k: 1e-3)
        with pytest.raises(ValueError, match="envelope"):
            run_km(lambda z: -z, HALF, np.ones(1), 3, errors=bad)


class TestKMStep:
    def test_point_reflection_half_step(self):
        out = km_step(lambda z: -z, 0.5, [4.0, 2.0])
        assert np.array_equal(out, [0.0, 0.0])

    def test_identity(self):
        z = np.array([1.0, -2.0])
        assert np.array_equal(km_step(lambda v: v, 0.37, z), z)

    def test_zero_operator(self):
        out = km_step(lambda z: np.zeros_like(z), 0.3, [2.0])
        assert out == pytest.approx([(1 - 0.3) * 2.0])

    def test_lambda_range(self):
        with pytest.raises(ValueError):
            km_step(lambda z: z, 0.0, [1.0])


class TestRunKM:
    def test_point_reflection_trace(self):
        trace = run_km(lambda z: -z, HALF, [1.0, 1.0], 5, zstar=np.zeros(2))
        assert len(trace) == 6
        assert trace.fpr == pytest.approx([8.0, 0, 0, 0, 0, 0], abs=1e-30)
        assert trace.dist_sq[1] == 0.0

    def test_rotation_fpr_monotone(self):
        spec = RotationSpaceSpec.from_angles(np.linspace(0.2, 1.5, 8))
        T = build_rotation_operator(spec)
        rng = np.random.default_rng(0)
        trace = run_km(T, HALF, rng.standard_normal(16), 200)
        assert check_fpr_monotone(trace).passed

    def test_error_injection_tail_decay(self):
        # decaying errors keep the little-o behaviour of the residual
        spec = RotationSpaceSpec.from_angles(np.linspace(0.3, 1.5, 5))
        T = build_rotation_operator(spec)
        errs = decaying_errors(10, 1.5, seed=3, lam_bound=0.5)
        trace = run_km(T, HALF, np.ones(10), 2000, errors=errs,
                       zstar=np.zeros(10))
        assert check_little_o_tail(trace.fpr).passed

    def test_error_run_is_deterministic(self):
        T = lambda z: -z
        errs1 = decaying_errors(2, 1.5, seed=9, lam_bound=0.5)
        errs2 = decaying_errors(2, 1.5, seed=9, lam_bound=0.5)
        t1 = run_km(T, HALF, np.ones(2), 50, errors=errs1)
        t2 = run_km(T, HALF, np.ones(2), 50, errors=errs2)
        assert np.array_equal(t1.fpr, t2.fpr)

    def test_nonfinite_abort(self):
        trace = run_km(lambda z: 3.0 * z, RelaxationSchedule.constant(1.0),
                       np.full(1, 1e300), 10)
        assert trace.diagnostic is not None
        assert len(trace) <= 11

    def test_record_iterates(self):
        trace = run_km(lambda z: -z, HALF, [2.0], 4, record_iterates=True)
        assert trace.z.shape == (5, 1)
        assert trace.z[0] == pytest.approx([2.0])


class TestFprBound:
    def test_half_schedule_values(self):
        assert fpr_bound(HALF, 1.0, 3) == pytest.approx(1.0)
        assert fpr_bound(HALF, 0.0, 7) == 0.0
        assert fpr_bound(HALF, 1.0, 0) == pytest.approx(4.0)

    def test_tau_zero_unsupported(self):
        with pytest.raises(UnsupportedScheduleError):
            fpr_bound(RelaxationSchedule.constant(1.0), 1.0, 2)


class TestChecks:
    def test_fejer_constant_at_fixed_point(self):
        trace = run_km(lambda z: z, HALF, [1.0, 2.0], 5, zstar=np.array([1.0, 2.0]))
        rep = check_fejer(trace)
        assert rep.passed and np.allclose(rep.margin, 0.0)

    def test_fejer_square_oscillation(self):
        f = IndicatorSubspace(BasisSubspace([[0.0, 1.0]]))
        g = IndicatorSubspace(BasisSubspace([[1.0, 0.0]]))

        def T(z):
            x_g = g.prox(1.0, z)
            x_f = f.prox(1.0, 2 * x_g - z)
            return z + 2 * (x_f - x_g)

        trace = run_km(T, RelaxationSchedule.constant(1.0), [1.0, 1.0], 8,
                       zstar=np.zeros(2))
        assert np.allclose(trace.dist_sq, 2.0)
        assert check_fejer(trace).passed

    def test_fejer_random_averaged_runs(self, rng):
        for seed in range(20):
            r = np.random.default_rng(seed)
            Q = np.linalg.qr(r.standard_normal((6, 3)))[0]
            P = Q @ Q.T

            def T(z):
                return P @ (-z)  # nonexpansive with fixed point 0

            trace = run_km(T, HALF, r.standard_normal(6), 100,
                           zstar=np.zeros(6))
            assert check_fejer(trace).passed

    def test_summability_fixed_point_start(self):
        trace = run_km(lambda z: z, HALF, [3.0], 5)
        rep = check_fpr_summability(trace, HALF, 0.0)
        assert rep.passed

    def test_summability_rotation(self):
        spec = RotationSpaceSpec.from_angles(np.linspace(0.1, 1.5, 10))
        T = build_rotation_operator(spec)
        z0 = np.random.default_rng(1).standard_normal(20)
        trace = run_km(T, HALF, z0, 10 ** 3)
        assert check_fpr_summability(trace, HALF, float(z0 @ z0)).passed

    def test_bound_and_summability_random_projections(self, rng):
        for seed in range(10):
            r = np.random.default_rng(seed + 100)
            QA = np.linalg.qr(r.standard_normal((8, 3)))[0]
            QB = np.linalg.qr(r.standard_normal((8, 4)))[0]

            def T(z):
                return QA @ (QA.T @ (QB @ (QB.T @ z)))

            z0 = r.standard_normal(8)
            trace = run_km(T, HALF, z0, 300, zstar=np.zeros(8))
            d0 = float(z0 @ z0)
            assert check_fpr_bound(trace, HALF, d0).passed
            assert check_fpr_summability(trace, HALF, d0).passed


class TestInexactAccounting:
    def test_reports_pass(self):
        rng = np.random.default_rng(2)
        Q = np.linalg.qr(rng.standard_normal((10, 4)))[0]
        P = Q @ Q.T
        T = lambda z: P @ z
        z0 = rng.standard_normal(10)
        errs = decaying_errors(10, 1.5, seed=5, lam_bound=0.5)
        trace = run_km(T, HALF, z0, 2000, errors=errs, zstar=P @ z0 * 0.0 + 0.0)
        reps = inexact_fpr_reports(trace, HALF, float(z0 @ z0))
        assert all(r.passed for r in reps.values())

    def test_requires_error_columns(self):
        trace = run_km(lambda z: -z, HALF, [1.0], 10)
        with pytest.raises(ValueError, match="errors"):
            inexact_fpr_reports(trace, HALF, 1.0)
