import dataclasses

import numpy as np
import pytest

from aermax.kinematics import (
    TrajectoryPlan,
    check_feasibility,
    initial_trajectory,
    plan_from_csv,
    plan_to_csv,
)
from aermax.model import horizontal_power
from tests.conftest import exact_straight_plan


class TestInitialTrajectory:
    def test_starts_at_initial_point(self, scenario1):
        plan = initial_trajectory(scenario1, "2d")
        assert np.allclose(plan.q[0], scenario1.q_i)

    def test_degenerate_segment(self, scenario1):
        s = dataclasses.replace(scenario1, q_f=scenario1.q_i.copy())
        plan = initial_trajectory(s, "2d")
        assert np.allclose(plan.q, np.tile(s.q_i, (s.n + 1, 1)))
        assert np.allclose(plan.v_xy, 0.0)

    def test_table3_midpoint(self, scenario1):
        plan = initial_trajectory(scenario1, "2d")
        # interior samples sit at fractions n/(N+1) of the segment
        assert plan.q[50][0] == pytest.approx(-500.0 + 50.0 / 101.0 * 1000.0)
        assert plan.q[50][1] == pytest.approx(500.0)
        # the final sample stops one interior step short of the target
        assert plan.q[scenario1.n][0] == pytest.approx(-500.0 + 100.0 / 101.0 * 1000.0)

    def test_dynamics_consistent(self, scenario1):
        plan = initial_trajectory(scenario1, "3d")
        dt = scenario1.delta_t
        for i in range(scenario1.n):
            assert np.allclose(
                plan.q[i] + plan.v_xy[i] * dt + 0.5 * plan.a_xy[i] * dt ** 2,
                plan.q[i + 1], atol=1e-9)
            assert np.isclose(
                plan.z[i] + plan.v_z[i] * dt + 0.5 * plan.a_z[i] * dt ** 2,
                plan.z[i + 1], atol=1e-9)
        assert np.allclose(plan.v_xy[0], plan.v_xy[scenario1.n])
        assert plan.v_z[0] == plan.v_z[scenario1.n]


class TestCheckFeasibility:
    def test_straight_line_kinematically_clean(self, scenario1):
        # the interior-fraction straight line misses the final endpoint by
        # construction; every motion constraint is otherwise satisfied
        plan = initial_trajectory(scenario1, "2d")
        report = check_feasibility(scenario1, plan, "2d")
        assert report.ok(categories=report.KINEMATIC)
        assert report.ok(categories=("budget_hor",))
        endpoint = report.by_constraint("endpoint")
        assert [v.slot for v in endpoint] == [scenario1.n]
        assert endpoint[0].magnitude == pytest.approx(
            float(np.linalg.norm(scenario1.q_f - scenario1.q_i)) / (scenario1.n + 1))

    def test_exact_plan_fully_feasible(self, scenario1):
        plan = exact_straight_plan(scenario1, "2d")
        assert check_feasibility(scenario1, plan, "2d").ok()

    def test_single_speed_violation_flagged(self, scenario1):
        plan = exact_straight_plan(scenario1, "2d")
        v = plan.v_xy.copy()
        v[7] = np.array([scenario1.v_xy_max + 1.0, 0.0])
        bad = TrajectoryPlan(q=plan.q, z=plan.z, v_xy=v, v_z=plan.v_z,
                             a_xy=plan.a_xy, a_z=plan.a_z)
        report = check_feasibility(scenario1, bad, "2d")
        speed = report.by_constraint("speed")
        assert [v_.slot for v_ in speed] == [7]
        assert speed[0].magnitude == pytest.approx(1.0)

    def test_hover_within_budget(self, scenario1):
        s = dataclasses.replace(scenario1, q_f=scenario1.q_i.copy())
        plan = initial_trajectory(s, "2d")
        report = check_feasibility(s, plan, "2d")
        assert report.ok(categories=("budget_hor",))
        assert horizontal_power(0.0, s.rotor) == 183.0 <= s.p_hor_ave

    def test_budget_violation_flagged(self, scenario1):
        # sustained top speed exceeds the average power budget
        s = scenario1
        n = s.n
        v = np.tile([s.v_xy_max, 0.0], (n + 1, 1))
        q = s.q_i[None, :] + np.arange(n + 1)[:, None] * v[0][None, :] * s.delta_t
        plan = TrajectoryPlan(q=q, z=np.full(n + 1, s.z_e_fixed), v_xy=v,
                              v_z=np.zeros(n + 1), a_xy=np.zeros((n + 1, 2)),
                              a_z=np.zeros(n + 1))
        report = check_feasibility(s, plan, "2d")
        expect = horizontal_power(s.v_xy_max, s.rotor) - s.p_hor_ave
        flagged = report.by_constraint("budget_hor")
        assert len(flagged) == 1
        assert flagged[0].magnitude == pytest.approx(expect)

    def test_vertical_checks(self, scenario1):
        plan = initial_trajectory(scenario1, "3d")
        report = check_feasibility(scenario1, plan, "3d")
        assert report.ok(categories=report.KINEMATIC)
        assert report.ok(categories=("budget_ver",))


class TestCsvRoundTrip:
    def test_round_trip_exact(self, scenario1, tmp_path):
        plan = initial_trajectory(scenario1, "3d")
        path = tmp_path / "trajectory.csv"
        plan_to_csv(plan, path, scenario1.delta_t)
        loaded = plan_from_csv(path)
        for name in ("q", "z", "v_xy", "v_z", "a_xy", "a_z"):
            assert np.array_equal(getattr(plan, name), getattr(loaded, name))

    def test_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            plan_from_csv(path)
