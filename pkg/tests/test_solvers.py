import numpy as np
import pytest

from fejerlab import (
    Affine,
    Ball,
    Composition,
    ConvexFnOracle,
    EmptyProblem,
    Halfspace,
    Harmonic,
    Geometric,
    Constant,
    Projection,
    StopRule,
    inner_approx_separating,
    iterate_fixed_point,
    sequential_projections,
    simultaneous_projections,
)
from fejerlab.solvers import (
    Trace,
    load_trace_csv,
    load_trace_json,
    save_trace_csv,
    save_trace_json,
    trace_from_json,
    trace_to_json,
)

HALF_X = Halfspace(normal=(1.0, 0.0), offset=0.0)
HALF_Y = Halfspace(normal=(0.0, 1.0), offset=0.0)


def two_ball_oracles():
    def make(cx):
        c = np.array([cx, 0.0])
        return ConvexFnOracle(
            value=lambda y, c=c: float((y - c) @ (y - c)) - 1.0,
            subgradient=lambda y, c=c: 2.0 * (y - c),
        )

    return [make(-0.5), make(0.5)]


class TestSchedules:
    def test_harmonic(self):
        sched = Harmonic(scale=1.0)
        assert sched.value(0) == 1.0
        assert sched.value(9) == 0.1

    def test_geometric(self):
        sched = Geometric(base=2.0, ratio=0.5)
        assert sched.value(0) == 2.0
        assert sched.value(3) == 0.25

    def test_validation(self):
        with pytest.raises(ValueError):
            Harmonic(scale=0.0)
        with pytest.raises(ValueError):
            Geometric(base=1.0, ratio=1.5)
        with pytest.raises(ValueError):
            Constant(value_=-1.0)
        with pytest.raises(ValueError):
            StopRule(max_iters=0)


class TestFixedPoint:
    def test_halving_map_converges(self):
        op = Affine(matrix=0.5 * np.eye(2), shift=np.zeros(2))
        trace = iterate_fixed_point(op, (1.0, 0.0), StopRule(max_iters=100, residual_tol=1e-10))
        assert trace.status == "Converged"
        assert len(trace) == 35
        assert np.linalg.norm(trace.iterates[-1]) < 1e-9

    def test_identity_stops_immediately(self):
        op = Affine(matrix=np.eye(2), shift=np.zeros(2))
        trace = iterate_fixed_point(op, (3.0, -1.0), StopRule(max_iters=100))
        assert len(trace) == 2
        assert np.array_equal(trace.iterates[0], trace.iterates[1])

    def test_projection_composition_one_step(self):
        op = Composition(ops=(Projection(HALF_X), Projection(HALF_Y)))
        trace = iterate_fixed_point(op, (1.0, 1.0), StopRule(max_iters=100))
        assert np.allclose(trace.iterates[1], (0.0, 0.0))

    def test_residual_annotations(self):
        op = Affine(matrix=0.5 * np.eye(2), shift=np.zeros(2))
        trace = iterate_fixed_point(op, (1.0, 0.0), StopRule(max_iters=5, residual_tol=0.0))
        assert trace.status == "Budget"
        residuals = [a["residual"] for a in trace.annotations[1:]]
        assert np.allclose(residuals, [0.5 * 2.0**-k for k in range(5)])


class TestSimultaneous:
    def test_geometric_decay_in_positive_quadrant(self):
        trace = simultaneous_projections(
            [HALF_X, HALF_Y], [0.5, 0.5], (2.0, 2.0), StopRule(max_iters=100, feasibility_tol=1e-9)
        )
        assert np.allclose(trace.iterates[1], (1.0, 1.0))
        assert np.allclose(trace.iterates[2], (0.5, 0.5))

    def test_feasible_start_confirms_in_one_step(self):
        trace = simultaneous_projections(
            [HALF_X, HALF_Y], [0.5, 0.5], (-1.0, -1.0), StopRule(max_iters=100)
        )
        assert trace.status == "Feasible"
        assert len(trace) == 2
        assert np.array_equal(trace.iterates[0], trace.iterates[1])

    def test_single_set_is_plain_projection(self):
        trace = simultaneous_projections([HALF_X], [1.0], (3.0, 4.0), StopRule(max_iters=10))
        assert np.allclose(trace.iterates[1], (0.0, 4.0))

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            simultaneous_projections([HALF_X, HALF_Y], [0.9, 0.9], (1.0, 1.0), StopRule(max_iters=5))


class TestSequential:
    def test_one_sweep_reaches_corner(self):
        trace = sequential_projections([HALF_X, HALF_Y], (1.0, 1.0), StopRule(max_iters=50))
        assert trace.status == "Feasible"
        assert np.allclose(trace.iterates[1], (0.0, 0.0))
        assert len(trace) == 2

    def test_redundant_halfspace(self):
        other = Halfspace(normal=(1.0, 0.0), offset=1.0)
        trace = sequential_projections([HALF_X, other], (5.0, 0.0), StopRule(max_iters=50))
        assert np.allclose(trace.iterates[1], (0.0, 0.0))

    def test_feasible_start(self):
        trace = sequential_projections([HALF_X, HALF_Y], (-2.0, -3.0), StopRule(max_iters=50))
        assert trace.status == "Feasible"
        assert len(trace) == 2

    def test_empty_problem(self):
        with pytest.raises(EmptyProblem):
            sequential_projections([], (0.0, 0.0), StopRule(max_iters=5))


class TestInnerApproxSeparating:
    def test_two_balls_finite_convergence(self):
        trace = inner_approx_separating(
            two_ball_oracles(),
            (3.0, 3.0),
            schedule=Harmonic(scale=1.0),
            control="most_violated",
            stop=StopRule(max_iters=500, feasibility_tol=0.0),
        )
        assert trace.status == "FinitelyConvergent"
        x = trace.iterates[-1]
        for fn in two_ball_oracles():
            assert fn.value(x) <= 0.0

    def test_feasible_start_terminates_at_step_zero(self):
        trace = inner_approx_separating(
            two_ball_oracles(), (0.0, 0.0), schedule=Harmonic(scale=1.0)
        )
        assert trace.status == "FinitelyConvergent"
        assert trace.params["termination_index"] == 0
        assert len(trace) == 1

    def test_affine_constraint_first_cut(self):
        fn = ConvexFnOracle(
            value=lambda y: float(y[0]), subgradient=lambda y: np.array([1.0, 0.0])
        )
        trace = inner_approx_separating([fn], (2.0, 0.0), schedule=Harmonic(scale=1.0))
        # first cut is {y1 <= -1}, projecting (2,0) to (-1,0), then feasible
        assert np.allclose(trace.iterates[1], (-1.0, 0.0))
        assert trace.status == "FinitelyConvergent"

    def test_cyclic_control_records_null_steps(self):
        fns = two_ball_oracles()
        trace = inner_approx_separating(
            fns, (0.9, 0.0), schedule=Harmonic(scale=1.0), control="cyclic"
        )
        assert trace.status == "FinitelyConvergent"
        nulls = [a for a in trace.annotations[1:] if a and a.get("null_step")]
        steps = [a for a in trace.annotations[1:] if a and not a.get("null_step")]
        # x0 is inside the left ball, so the cyclic pass over it is a null step
        assert nulls or len(steps) == len(trace.annotations) - 1

    def test_rejects_constant_schedule(self):
        with pytest.raises(ValueError):
            inner_approx_separating(two_ball_oracles(), (3.0, 3.0), schedule=Constant(value_=0.5))

    def test_empty_problem(self):
        with pytest.raises(EmptyProblem):
            inner_approx_separating([], (0.0, 0.0), schedule=Harmonic(scale=1.0))


class TestTraceIO:
    def make_trace(self):
        rng = np.random.default_rng(11)
        pts = tuple(rng.standard_normal(3) for _ in range(7))
        anns = (None,) + tuple({"residual": float(k)} for k in range(6))
        return Trace(pts, "synthetic", {"status": "Budget", "note": "io test"}, anns)

    def test_json_round_trip_is_bit_exact(self, tmp_path):
        trace = self.make_trace()
        path = tmp_path / "t.json"
        save_trace_json(trace, str(path))
        back = load_trace_json(str(path))
        assert back.algorithm == trace.algorithm
        assert back.params == trace.params
        for a, b in zip(trace.iterates, back.iterates):
            assert np.array_equal(a, b)

    def test_in_memory_round_trip(self):
        trace = self.make_trace()
        back = trace_from_json(trace_to_json(trace))
        for a, b in zip(trace.iterates, back.iterates):
            assert np.array_equal(a, b)

    def test_csv_round_trip_is_bit_exact(self, tmp_path):
        trace = self.make_trace()
        path = tmp_path / "t.csv"
        save_trace_csv(trace, str(path))
        back = load_trace_csv(str(path))
        for a, b in zip(trace.iterates, back.iterates):
            assert np.array_equal(a, b)

    def test_trace_validation(self):
        with pytest.raises(ValueError):
            Trace((), "empty")
