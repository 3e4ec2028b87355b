import numpy as np
import pytest

from fpiter.algorithms import (
    ALGORITHMS,
    RunConfig,
    TerminalReason,
    cq_step,
    inertial_mann_step,
    mann_step,
    mimha_step,
    mimva_step,
    run,
)
from fpiter.operators import Ball, Operator, SingularityError, project_ball
from fpiter.schedules import Schedules
from fpiter.space import EuclideanSpace

R1 = EuclideanSpace(1)
R2 = EuclideanSpace(2)

ZERO_MAP = Operator(R1, lambda x: np.zeros(1), name="zero")
ZERO_MAP_2D = Operator(R2, lambda x: np.zeros(2), name="zero")
IDENTITY_2D = Operator(R2, lambda x: R2.check(x), name="identity")


def arr(*values):
    return np.array([float(v) for v in values])


class TestMannStep:
    def test_identity_operator_is_inert(self):
        x = arr(1.5, -2.0)
        out = mann_step(R2, IDENTITY_2D, x, 0.25)
        assert np.allclose(out, x, rtol=0, atol=1e-15)

    def test_psi_one_keeps_current_point(self):
        x = arr(1.5, -2.0)
        assert np.array_equal(mann_step(R2, ZERO_MAP_2D, x, 1.0), x)

    def test_quarter_step_toward_zero(self):
        out = mann_step(R2, ZERO_MAP_2D, arr(2.0, 0.0), 0.25)
        assert np.array_equal(out, arr(0.5, 0.0))

    def test_psi_out_of_range(self):
        with pytest.raises(ValueError, match="psi"):
            mann_step(R2, ZERO_MAP_2D, arr(1.0, 1.0), 1.5)


class TestInertialMannStep:
    def test_zero_inertia_reduces_to_mann_bitwise(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            x = rng.normal(size=2)
            x_prev = rng.normal(size=2)
            psi = rng.uniform(0, 1)
            a = inertial_mann_step(R2, ZERO_MAP_2D, x, x_prev, 0.0, psi)
            b = mann_step(R2, ZERO_MAP_2D, x, psi)
            assert np.array_equal(a, b)

    def test_equal_iterates_ignore_inertia(self):
        x = arr(3.0, -1.0)
        out = inertial_mann_step(R2, IDENTITY_2D, x, x, 0.9, 0.5)
        assert np.allclose(out, x, rtol=0, atol=1e-15)

    def test_one_dimensional_example(self):
        out = inertial_mann_step(R1, ZERO_MAP, arr(2.0), arr(0.0), 0.5, 0.2)
        # w = 3, result 0.2*3 + 0.8*0
        assert out[0] == pytest.approx(0.6, rel=1e-15)

    def test_negative_inertia_rejected(self):
        with pytest.raises(ValueError, match="delta"):
            inertial_mann_step(R1, ZERO_MAP, arr(1.0), arr(0.0), -0.1, 0.5)


class TestCqStep:
    def test_identity_operator_projects_onto_anchoring_cut(self):
        # y = x makes the first cut the whole space
        x = arr(1.0, 1.0)
        x0 = arr(3.0, 1.0)
        out = cq_step(R2, IDENTITY_2D, x, x0, 0.5)
        # remaining cut: <x0 - x, u> <= <x0 - x, x>  =>  u_1 <= 1
        assert np.allclose(out, arr(1.0, 1.0), atol=1e-12)

    def test_start_equal_current_projects_onto_contraction_cut(self):
        x = arr(4.0)
        out = cq_step(R1, ZERO_MAP, x, x, 0.0)
        # y = 0: cut is u <= 2; anchoring cut is degenerate
        assert out[0] == pytest.approx(2.0, rel=1e-12)

    def test_one_dimensional_case_analysis(self):
        out = cq_step(R1, ZERO_MAP, arr(4.0), arr(4.0), 0.0)
        assert out[0] == pytest.approx(2.0, rel=1e-12)

    def test_accepts_psi_equal_one(self):
        # the baseline schedule 1/(n+1) starts at exactly 1
        out = cq_step(R1, ZERO_MAP, arr(4.0), arr(4.0), 1.0)
        assert out[0] == pytest.approx(4.0)


class TestMimhaStep:
    def test_full_anchor_weight_returns_anchor(self):
        u = arr(1.0, 7.0)
        out = mimha_step(R2, ZERO_MAP_2D, arr(2.0, 2.0), arr(0.0, 0.0), u, 0.5, 0.2, 1.0)
        assert np.array_equal(out, u)

    def test_reduces_to_mann_without_anchor_and_inertia(self):
        x = arr(2.0, -4.0)
        x_prev = arr(1.0, 1.0)
        u = arr(9.0, 9.0)
        out = mimha_step(R2, ZERO_MAP_2D, x, x_prev, u, 0.0, 0.25, 0.0)
        assert np.array_equal(out, mann_step(R2, ZERO_MAP_2D, x, 0.25))

    def test_one_dimensional_example(self):
        out = mimha_step(R1, ZERO_MAP, arr(2.0), arr(0.0), arr(1.0), 0.5, 0.2, 0.1)
        # w = 3, y = 0.6, result 0.1*1 + 0.9*0.6
        assert out[0] == pytest.approx(0.64, rel=1e-15)


class TestMimvaStep:
    def test_zero_contraction_full_weight(self):
        f = lambda x: np.zeros(2)  # noqa: E731
        out = mimva_step(R2, IDENTITY_2D, arr(3.0, 3.0), arr(1.0, 1.0), f, 0.3, 0.5, 1.0)
        assert np.array_equal(out, np.zeros(2))

    def test_zero_inertia_matches_plain_viscosity_composition(self):
        rng = np.random.default_rng(42)
        f = lambda p: 0.9 * p  # noqa: E731
        for _ in range(20):
            x = rng.normal(size=2)
            x_prev = rng.normal(size=2)
            psi, nu = rng.uniform(0, 1, size=2)
            a = mimva_step(R2, ZERO_MAP_2D, x, x_prev, f, 0.0, psi, nu)
            b = R2.combine(nu, f(x), mann_step(R2, ZERO_MAP_2D, x, psi))
            assert np.array_equal(a, b)

    def test_one_dimensional_example(self):
        f = lambda x: 0.9 * x  # noqa: E731
        out = mimva_step(R1, ZERO_MAP, arr(2.0), arr(0.0), f, 0.5, 0.2, 0.1)
        # 0.1*(0.9*2) + 0.9*0.6
        assert out[0] == pytest.approx(0.72, rel=1e-15)


class TestFixedPointRetention:
    def test_steps_hold_fixed_points(self):
        # projection onto a ball fixes interior points exactly
        space = EuclideanSpace(2)
        ball = Ball(np.zeros(2), 8.0)
        T = Operator(space, lambda x: project_ball(space, ball, x), name="ball-proj")
        p = arr(2.0, -4.0)  # dyadic so the convex combinations are exact
        assert np.array_equal(mann_step(space, T, p, 0.25), p)
        assert np.array_equal(inertial_mann_step(space, T, p, p, 0.5, 0.25), p)
        out = mimha_step(space, T, p, p, arr(1.0, 1.0), 0.5, 0.25, 0.25)
        assert np.array_equal(out, 0.25 * arr(1.0, 1.0) + 0.75 * p)


class TestFejerMonotonicity:
    def test_mann_never_moves_away_from_a_fixed_point(self):
        space = EuclideanSpace(3)
        ball = Ball(np.zeros(3), 1.0)
        T = Operator(space, lambda x: project_ball(space, ball, x), name="ball-proj")
        p = np.zeros(3)  # fixed point of T
        rng = np.random.default_rng(43)
        for _ in range(50):
            x = rng.normal(size=3) * 5
            for n in range(30):
                x_next = mann_step(space, T, x, 1.0 / (n + 2))
                assert space.norm(x_next - p) <= space.norm(x - p) + 1e-10
                x = x_next


def contracting_operator(space, rate=0.5):
    return Operator(space, lambda x: rate * space.check(x), name="scaler")


def metric_to_zero(space):
    return lambda x: space.norm(x)


class TestRun:
    def test_starts_inside_tolerance(self):
        space = EuclideanSpace(2)
        config = RunConfig(error_metric=metric_to_zero(space), tolerance=1e-3)
        trace = run("mann", contracting_operator(space), config, np.zeros(2))
        assert trace.terminal_reason is TerminalReason.TOLERANCE_MET
        assert len(trace.records) == 1
        assert trace.records[0].n == 0
        assert trace.iterations == 0

    def test_trace_shape_and_cap(self):
        space = EuclideanSpace(2)
        config = RunConfig(
            error_metric=metric_to_zero(space), max_iterations=25, tolerance=1e-30
        )
        trace = run("mann", IDENTITY_2D, config, arr(1.0, 1.0))
        assert trace.terminal_reason is TerminalReason.MAX_ITERATIONS
        assert len(trace.records) == 26  # records n = 0..25
        assert trace.iterations == 25
        assert [r.n for r in trace.records] == list(range(26))

    def test_converges_on_contraction(self):
        space = EuclideanSpace(2)
        config = RunConfig(error_metric=metric_to_zero(space), tolerance=1e-6)
        trace = run("mann", contracting_operator(space), config, arr(4.0, 4.0))
        assert trace.terminal_reason is TerminalReason.TOLERANCE_MET
        assert trace.final_error < 1e-6

    def test_numeric_determinism(self):
        space = EuclideanSpace(3)
        ball = Ball(np.ones(3), 2.0)
        T = Operator(space, lambda x: project_ball(space, ball, x), name="ball-proj")
        config = RunConfig(
            error_metric=lambda x: space.norm(x - np.ones(3)),
            max_iterations=40,
            tolerance=1e-9,
        )
        x0 = arr(5.0, -3.0, 2.0)
        first = run("mimva", T, config, x0)
        second = run("mimva", T, config, x0)
        assert [r.error for r in first.records] == [r.error for r in second.records]
        assert [r.delta for r in first.records] == [r.delta for r in second.records]
        assert first.terminal_reason == second.terminal_reason

    def test_inertia_recorded_and_first_step_inertia_free(self):
        space = EuclideanSpace(2)
        config = RunConfig(
            error_metric=metric_to_zero(space), max_iterations=10, tolerance=1e-30
        )
        trace = run("mimva", contracting_operator(space), config, arr(2.0, 2.0))
        assert trace.records[0].delta == 0.0
        assert trace.records[1].delta == 0.0  # cap (n-1)/(n+eta-1) is 0 at n=1
        assert any(r.delta > 0 for r in trace.records[2:])

    def test_non_inertial_algorithms_record_zero_delta(self):
        space = EuclideanSpace(2)
        config = RunConfig(
            error_metric=metric_to_zero(space), max_iterations=5, tolerance=1e-30
        )
        for algorithm in ("mann", "cq", "mmha", "mmva"):
            trace = run(algorithm, contracting_operator(space), config, arr(2.0, 2.0))
            assert all(r.delta == 0.0 for r in trace.records)

    def test_zero_mode_reproduces_non_inertial_baselines_bitwise(self):
        space = EuclideanSpace(3)
        ball = Ball(np.zeros(3), 1.0)
        T = Operator(space, lambda x: project_ball(space, ball, x), name="ball-proj")
        config = RunConfig(
            error_metric=metric_to_zero(space), max_iterations=30, tolerance=1e-30
        )
        zeroed = RunConfig(
            error_metric=config.error_metric,
            max_iterations=30,
            tolerance=1e-30,
            schedules=Schedules(delta_mode="zero"),
        )
        x0 = arr(4.0, 1.0, -2.0)
        for base, modified in (("mmha", "mimha"), ("mmva", "mimva")):
            a = run(base, T, config, x0)
            b = run(modified, T, zeroed, x0)
            assert [r.error for r in a.records] == [r.error for r in b.records]
            assert [r.delta for r in a.records] == [r.delta for r in b.records]

    def test_singularity_terminates_run(self):
        space = EuclideanSpace(2)

        def exploding(x):
            raise SingularityError("undefined here")

        T = Operator(space, exploding, name="singular")
        config = RunConfig(error_metric=metric_to_zero(space), tolerance=1e-9)
        trace = run("mann", T, config, arr(1.0, 1.0))
        assert trace.terminal_reason is TerminalReason.SINGULARITY
        assert len(trace.records) == 1

    def test_explicit_previous_point_and_anchor(self):
        space = EuclideanSpace(1)
        T = Operator(space, lambda x: np.zeros(1), name="zero")
        config = RunConfig(
            error_metric=metric_to_zero(space),
            max_iterations=1,
            tolerance=1e-30,
            schedules=Schedules(delta_mode="constant", delta_value=0.5),
        )
        trace = run(
            "mimha", T, config, arr(2.0), x_init_prev=arr(0.0), anchor=arr(1.0)
        )
        # n=0: nu=1 so x_1 = anchor; error at n=1 is |anchor|
        assert trace.records[1].error == pytest.approx(1.0)

    def test_unknown_algorithm(self):
        space = EuclideanSpace(1)
        config = RunConfig(error_metric=metric_to_zero(space))
        with pytest.raises(ValueError, match="unknown algorithm"):
            run("sgd", ZERO_MAP, config, arr(1.0))

    def test_all_listed_algorithms_run(self):
        space = EuclideanSpace(2)
        ball = Ball(np.zeros(2), 1.0)
        T = Operator(space, lambda x: project_ball(space, ball, x), name="ball-proj")
        config = RunConfig(
            error_metric=metric_to_zero(space), max_iterations=8, tolerance=1e-30
        )
        for algorithm in ALGORITHMS:
            trace = run(algorithm, T, config, arr(3.0, 0.5))
            assert trace.iterations == 8


class TestRunConfigValidation:
    def test_bounds(self):
        metric = lambda x: 0.0  # noqa: E731
        with pytest.raises(ValueError):
            RunConfig(error_metric=metric, max_iterations=0)
        with pytest.raises(ValueError):
            RunConfig(error_metric=metric, tolerance=0.0)
        with pytest.raises(ValueError):
            RunConfig(error_metric=metric, contraction_rho=1.0)
