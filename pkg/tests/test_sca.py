"""Tangency, gradient, and bound-direction checks for every surrogate bound.

Reference values are recomputed here from the raw log expressions, fully
independently of the coefficient formulas under test; gradients are checked
against central finite differences with a relative step of 1e-4.
"""

import math

import numpy as np
import pytest

from aermax import sca
from aermax.kinematics import initial_trajectory
from aermax.model import LN2, UavPose, rate, snr_eavesdropper
from aermax.sca import SlackState, check_lemma1_convexity, lemma_f, lemma_grad_x

REL_STEP = 1e-4
TANGENT_RTOL = 1e-10
GRAD_RTOL = 1e-6


def fd_grad(f, x0, rel_step=REL_STEP):
    """Central finite-difference gradient of a scalar function of a vector."""
    x0 = np.asarray(x0, dtype=float)
    out = np.empty_like(x0)
    for i in range(len(x0)):
        h = rel_step * max(abs(x0[i]), 1.0)
        hi = x0.copy(); hi[i] += h
        lo = x0.copy(); lo[i] -= h
        out[i] = (f(hi) - f(lo)) / (2.0 * h)
    return out


# raw reference expressions (independent of the coefficient formulas)

def raw_re1(s, d_se, d_re):
    arg = (1.0 + s.beta0 * s.k2 / d_re
           + s.rho_s * s.beta0 / d_se
           + s.rho_s * s.beta0 ** 2 * s.k2 / (s.d_sr * d_re)
           + s.rho_s * math.sqrt(4.0 * s.beta0 ** 3 * s.k2 / (s.d_sr * d_se * d_re)))
    return math.log2(arg)


def raw_re2(s, d_re):
    return math.log2(1.0 + s.beta0 * s.k2 / d_re)


def raw_rd_dist(s, p_e, d_ed):
    return math.log2(1.0 + s.c_sig / (s.d_noise + p_e * s.beta0 / d_ed))


def raw_rd_power(s, p_e, h2_ed):
    return math.log2(1.0 + s.c_sig / (s.d_noise + p_e * h2_ed))


def raw_rd1_power(s, p_e, h2_ed):
    return math.log2(s.d_noise + p_e * h2_ed + s.c_sig)


@pytest.fixture(scope="module")
def state(scenario1):
    plan = initial_trajectory(scenario1, "2d")
    p_e = np.linspace(0.2, 1.0, scenario1.n + 1) * scenario1.p_e_max
    return SlackState.from_iterate(scenario1, plan, p_e)


@pytest.fixture(scope="module")
def state3d(scenario1):
    plan = initial_trajectory(scenario1, "3d")
    p_e = np.linspace(0.2, 1.0, scenario1.n + 1) * scenario1.p_e_max
    return plan, SlackState.from_iterate(scenario1, plan, p_e)


class TestLbRE1Horizontal:
    def test_tangency(self, scenario1, state):
        bounds = sca.lb_RE1_horizontal(state, scenario1)
        for b, d_se0, d_re0 in zip(bounds, state.d_se, state.d_re):
            want = raw_re1(scenario1, d_se0, d_re0)
            assert b(**b.expansion_point) == pytest.approx(want, rel=TANGENT_RTOL)
            assert b.sense == "lower"

    def test_gradient_matches_fd(self, scenario1, state):
        bounds = sca.lb_RE1_horizontal(state, scenario1)
        for b in bounds[:: len(bounds) // 10]:
            x0 = [b.expansion_point["d_re"], b.expansion_point["d_se"]]
            g = fd_grad(lambda x: raw_re1(scenario1, x[1], x[0]), x0)
            assert b.gradient["d_re"] == pytest.approx(g[0], rel=GRAD_RTOL)
            assert b.gradient["d_se"] == pytest.approx(g[1], rel=GRAD_RTOL)

    def test_global_lower_bound(self, scenario1, state):
        # convex original: the tangent stays below everywhere
        rng = np.random.default_rng(5)
        b = sca.lb_RE1_horizontal(state, scenario1)[50]
        for _ in range(1000):
            d_se = rng.uniform(1e3, 3e6)
            d_re = rng.uniform(1e3, 3e6)
            assert b(d_se=d_se, d_re=d_re) <= raw_re1(scenario1, d_se, d_re) + 1e-12

    def test_matches_monitor_rate(self, scenario1, state):
        # R_E1 - R_E2 at the true distances equals the physical monitor rate
        plan = initial_trajectory(scenario1, "2d")
        i = 37
        pose = UavPose(plan.q[i], plan.z[i])
        r_e = rate(snr_eavesdropper(scenario1, pose))
        split = (raw_re1(scenario1, state.d_se[i], state.d_re[i])
                 - raw_re2(scenario1, state.d_re[i]))
        assert split == pytest.approx(r_e, rel=1e-10)

    def test_rejects_bad_expansion(self, scenario1):
        with pytest.raises(ValueError):
            sca.re1_coefficients(scenario1, -1.0, 100.0)


class TestLbDistanceED:
    def test_tangency(self, scenario1):
        q0 = np.array([120.0, -40.0])
        b = sca.lb_distance_ED(q0, scenario1, 100.0)
        want = float(np.sum((q0 - scenario1.q_d) ** 2)) + 100.0 ** 2
        assert b(qx=q0[0], qy=q0[1]) == pytest.approx(want, rel=TANGENT_RTOL)

    def test_global_lower_bound(self, scenario1):
        rng = np.random.default_rng(9)
        q0 = rng.uniform(-500, 500, size=2)
        b = sca.lb_distance_ED(q0, scenario1, 130.0)
        for _ in range(1000):
            q = rng.uniform(-2000, 2000, size=2)
            true = float(np.sum((q - scenario1.q_d) ** 2)) + 130.0 ** 2
            assert b(qx=q[0], qy=q[1]) <= true + 1e-9

    def test_expansion_at_destination(self, scenario1):
        # zero-gradient tangent at the minimizer of the squared distance
        b = sca.lb_distance_ED(scenario1.q_d, scenario1, 90.0)
        assert b.gradient["qx"] == 0.0
        assert b.gradient["qy"] == 0.0
        assert b(qx=500.0, qy=500.0) == pytest.approx(90.0 ** 2)


class TestUbRDHorizontal:
    def test_tangency_and_gradient(self, scenario1, state):
        bounds = sca.ub_RD_horizontal(state, scenario1)
        for i in range(0, len(bounds), 10):
            b = bounds[i]
            p_e = state.p_e[i]
            d0 = b.expansion_point["d_ed"]
            assert b(d_ed=d0) == pytest.approx(
                raw_rd_dist(scenario1, p_e, d0), rel=TANGENT_RTOL)
            g = fd_grad(lambda x: raw_rd_dist(scenario1, p_e, x[0]), [d0])
            assert b.gradient["d_ed"] == pytest.approx(g[0], rel=GRAD_RTOL)
            assert b.sense == "upper"

    def test_upper_bound_near_expansion(self, scenario1, state):
        # concave original in the distance slack: tangent lies above
        rng = np.random.default_rng(13)
        bounds = sca.ub_RD_horizontal(state, scenario1)
        for i in (0, 40, 80):
            b = bounds[i]
            d0 = b.expansion_point["d_ed"]
            p_e = state.p_e[i]
            for _ in range(1000):
                d = rng.uniform(0.5 * d0, 1.5 * d0)
                assert b(d_ed=d) >= raw_rd_dist(scenario1, p_e, d) - 1e-12


class TestLbRE2Horizontal:
    def test_tangency_gradient_direction(self, scenario1, state):
        bounds = sca.lb_RE2_horizontal(state, scenario1)
        rng = np.random.default_rng(17)
        for i in (0, 33, 66, 100):
            b = bounds[i]
            d0 = b.expansion_point["d_re"]
            assert b(d_re=d0) == pytest.approx(
                raw_re2(scenario1, d0), rel=TANGENT_RTOL)
            g = fd_grad(lambda x: raw_re2(scenario1, x[0]), [d0])
            assert b.gradient["d_re"] == pytest.approx(g[0], rel=GRAD_RTOL)
            for _ in range(250):
                d = rng.uniform(1e3, 3e6)
                assert b(d_re=d) <= raw_re2(scenario1, d) + 1e-12


class TestLbPropulsionTau:
    def test_tangency(self, scenario1, state):
        v0 = scenario1.rotor.v_0
        bounds = sca.lb_propulsion_tau(state, v0)
        for b, t0, u0 in zip(bounds, state.tau, state.upsilon):
            want = t0 ** 2 + u0 ** 2 / v0 ** 2
            assert b(**b.expansion_point) == pytest.approx(want, rel=TANGENT_RTOL)

    def test_global_lower_bound(self, scenario1, state):
        v0 = scenario1.rotor.v_0
        b = sca.lb_propulsion_tau(state, v0)[5]
        rng = np.random.default_rng(19)
        for _ in range(1000):
            tau, ups = rng.uniform(0.0, 50.0, size=2)
            assert b(tau=tau, upsilon=ups) <= tau ** 2 + ups ** 2 / v0 ** 2 + 1e-12

    def test_zero_expansion(self, scenario1, state):
        zero = SlackState(
            d_se=state.d_se, d_re=state.d_re, d_ed=state.d_ed,
            z_h=state.z_h, z_er=state.z_er,
            upsilon=np.zeros_like(state.upsilon), tau=np.zeros_like(state.tau),
            p_e=state.p_e)
        b = sca.lb_propulsion_tau(zero, scenario1.rotor.v_0)[0]
        assert b(tau=3.0, upsilon=7.0) == 0.0


class TestPowerBounds:
    def test_lb_rd_power(self, scenario1, state):
        h2_ed = scenario1.beta0 / state.d_ed
        bounds = sca.lb_RD_power(state, h2_ed, scenario1)
        rng = np.random.default_rng(29)
        for i in (0, 50, 100):
            b = bounds[i]
            p0 = b.expansion_point["p_e"]
            assert b(p_e=p0) == pytest.approx(
                raw_rd_power(scenario1, p0, h2_ed[i]), rel=TANGENT_RTOL)
            g = fd_grad(lambda x: raw_rd_power(scenario1, x[0], h2_ed[i]), [p0],
                        rel_step=1e-6)
            assert b.gradient["p_e"] == pytest.approx(g[0], rel=GRAD_RTOL)
            for _ in range(1000):
                p = rng.uniform(0.0, scenario1.p_e_max)
                assert b(p_e=p) <= raw_rd_power(scenario1, p, h2_ed[i]) + 1e-12

    def test_ub_rd1_power(self, scenario1, state):
        h2_ed = scenario1.beta0 / state.d_ed
        bounds = sca.ub_RD1_power(state, h2_ed, scenario1)
        rng = np.random.default_rng(31)
        for i in (0, 50, 100):
            b = bounds[i]
            p0 = b.expansion_point["p_e"]
            assert b(p_e=p0) == pytest.approx(
                raw_rd1_power(scenario1, p0, h2_ed[i]), rel=TANGENT_RTOL)
            g = fd_grad(lambda x: raw_rd1_power(scenario1, x[0], h2_ed[i]), [p0],
                        rel_step=1e-6)
            assert b.gradient["p_e"] == pytest.approx(g[0], rel=GRAD_RTOL)
            for _ in range(1000):
                p = rng.uniform(0.0, scenario1.p_e_max)
                assert b(p_e=p) >= raw_rd1_power(scenario1, p, h2_ed[i]) - 1e-12


class TestBoundsVertical:
    def test_all_four_tangent(self, scenario1, state3d):
        plan, st = state3d
        bounds = sca.bounds_vertical(st, scenario1, plan)
        q = plan.q
        hq_se = np.sum((q - scenario1.q_s) ** 2, axis=1)
        hq_re = np.sum((q - scenario1.q_r) ** 2, axis=1)
        hq_ed = np.sum((q - scenario1.q_d) ** 2, axis=1)
        for i in (0, 25, 75, 100):
            z_h0, z_er0 = st.z_h[i], st.z_er[i]
            b = bounds["re1_lb"][i]
            assert b(z_h=z_h0, z_er=z_er0) == pytest.approx(
                raw_re1(scenario1, hq_se[i] + z_h0, hq_re[i] + z_er0),
                rel=TANGENT_RTOL)
            b = bounds["rd_ub"][i]
            assert b(z_h=z_h0) == pytest.approx(
                raw_rd_dist(scenario1, st.p_e[i], hq_ed[i] + z_h0), rel=TANGENT_RTOL)
            b = bounds["re2_lb"][i]
            assert b(z_er=z_er0) == pytest.approx(
                raw_re2(scenario1, hq_re[i] + z_er0), rel=TANGENT_RTOL)
            b = bounds["zsq_lb"][i]
            assert b(z_e=plan.z[i]) == pytest.approx(plan.z[i] ** 2, rel=TANGENT_RTOL)

    def test_re1_gradient_matches_fd(self, scenario1, state3d):
        plan, st = state3d
        bounds = sca.bounds_vertical(st, scenario1, plan)
        q = plan.q
        hq_se = np.sum((q - scenario1.q_s) ** 2, axis=1)
        hq_re = np.sum((q - scenario1.q_r) ** 2, axis=1)
        for i in (10, 60, 90):
            b = bounds["re1_lb"][i]
            x0 = [b.expansion_point["z_h"], b.expansion_point["z_er"]]
            g = fd_grad(lambda x: raw_re1(scenario1, hq_se[i] + x[0], hq_re[i] + x[1]),
                        x0, rel_step=1e-5)
            assert b.gradient["z_h"] == pytest.approx(g[0], rel=GRAD_RTOL)
            assert b.gradient["z_er"] == pytest.approx(g[1], rel=GRAD_RTOL)

    def test_zsq_global_lower_bound(self, scenario1, state3d):
        plan, st = state3d
        b = sca.bounds_vertical(st, scenario1, plan)["zsq_lb"][40]
        for z in np.linspace(-300, 500, 1000):
            assert b(z_e=z) <= z ** 2 + 1e-9


class TestLemma1:
    def test_unit_coefficients_pass(self):
        ok, witness = check_lemma1_convexity(1.0, 1.0, 1.0, 1.0, n_samples=1000)
        assert ok, f"hessian violation at {witness}"

    def test_zero_cross_term_passes(self):
        ok, _ = check_lemma1_convexity(1.0, 1.0, 1.0, 0.0, n_samples=1000)
        assert ok

    def test_random_coefficients_pass(self):
        rng = np.random.default_rng(41)
        for _ in range(5):
            c = rng.uniform(0.1, 10.0, size=4)
            ok, witness = check_lemma1_convexity(*c, n_samples=200)
            assert ok, f"violation at {witness} for {c}"

    def test_analytic_derivative_matches_fd(self):
        c = (2.0, 0.5, 1.5, 3.0)
        for x, y in ((0.5, 2.0), (10.0, 0.3), (40.0, 70.0)):
            g = fd_grad(lambda v: lemma_f(c, v[0], y), [x])
            assert lemma_grad_x(c, x, y) == pytest.approx(g[0], rel=1e-6)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            check_lemma1_convexity(0.0, 1.0, 1.0, 1.0, n_samples=10)
