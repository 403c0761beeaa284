import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonholo.control import (WrapperSpec, desired_heading, driving_force,
                             feedback_steer, feedforward_steer,
                             longitudinal_accel, preview_max_curvature,
                             steer_derivative_chain, steering_saturation,
                             steering_torque, target_speed, wrapper,
                             wrapper_deriv)
from nonholo.models import DriveInput, Variant, eom_rhs
from nonholo.params import ControlGains
from nonholo.path import CurvatureProfile

import oracles


class TestWrapperFamily:
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8, 1000, math.inf])
    def test_origin_conditions(self, n):
        spec = WrapperSpec(n, 0.7)
        assert wrapper(spec, 0.0) == 0.0
        assert wrapper_deriv(spec, 0.0) == pytest.approx(1.0, rel=1e-14)

    def test_n2_is_scaled_arctan(self):
        spec = WrapperSpec(2, math.pi / 2.0)
        for x in (-3.0, -0.4, 0.0, 0.7, 10.0):
            assert wrapper(spec, x) == pytest.approx(math.atan(x), rel=1e-15)

    def test_n2_saturates(self):
        spec = WrapperSpec(2, 1.0)
        assert wrapper(spec, 1e9) == pytest.approx(1.0, abs=1e-6)
        assert wrapper(spec, 1e9) < 1.0

    def test_against_quadrature(self):
        for n in range(2, 9):
            for x in (-2.5, -0.7, 0.3, 0.7, 1.9):
                got = wrapper(WrapperSpec(n, 1.0), x)
                ref = oracles.wrapper_by_quadrature(n, 1.0, x)
                assert got == pytest.approx(ref, abs=1e-10)

    def test_clamp_is_exact(self):
        spec = WrapperSpec(math.inf, 0.3)
        assert wrapper(spec, 0.1) == 0.1
        assert wrapper(spec, 5.0) == 0.3
        assert wrapper(spec, -5.0) == -0.3
        assert wrapper_deriv(spec, 0.0) == 1.0
        assert wrapper_deriv(spec, 1.0) == 0.0

    @pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
    def test_recurrence_closure_at_large_argument(self, n):
        spec = WrapperSpec(n, 1.0)
        assert wrapper(spec, 1e6) == pytest.approx(1.0, abs=1e-6)
        assert wrapper(spec, -1e6) == pytest.approx(-1.0, abs=1e-6)

    @settings(max_examples=150)
    @given(n=st.integers(2, 10), g_sat=st.floats(0.05, 5.0),
           x=st.floats(-50.0, 50.0))
    def test_odd_bounded_unit_slope(self, n, g_sat, x):
        spec = WrapperSpec(n, g_sat)
        g = wrapper(spec, x)
        assert wrapper(spec, -x) == pytest.approx(-g, abs=1e-14)
        assert abs(g) <= g_sat
        d = wrapper_deriv(spec, x)
        assert 0.0 < d <= 1.0

    @given(n=st.integers(2, 8), x=st.floats(-5.0, 5.0))
    def test_derivative_consistent(self, n, x):
        spec = WrapperSpec(n, 1.0)
        h = 1e-6
        fd = (wrapper(spec, x + h) - wrapper(spec, x - h)) / (2 * h)
        assert wrapper_deriv(spec, x) == pytest.approx(fd, abs=1e-8)


class TestSteering:
    def test_feedforward_values(self):
        assert feedforward_steer(0.0, 2.57) == 0.0
        assert feedforward_steer(1.0 / 200.0, 2.57) == \
            pytest.approx(0.0128493, abs=1e-6)
        assert feedforward_steer(0.004 * math.pi, 2.57) == \
            pytest.approx(0.0322844, abs=1e-6)

    def test_all_laws_vanish_at_zero(self, gains):
        for law in ("linear", "nonlinear", "wrapped"):
            assert feedback_steer(0.0, 0.0, gains, gamma_sat=0.1,
                                  law=law) == 0.0

    def test_far_field_heading(self, gains):
        assert desired_heading(1e12, gains) == pytest.approx(-math.pi / 2,
                                                             abs=1e-9)
        gsat = 0.0257
        far = feedback_steer(1e12, 0.0, gains, gamma_sat=gsat, law="wrapped")
        c = math.pi / (2 * gsat)
        expected = math.atan(c * gains.k1 * (0.0 + math.pi / 2)) / c
        assert far == pytest.approx(expected, abs=1e-6)

    @given(e=st.floats(-100.0, 100.0), th=st.floats(-3.0, 3.0))
    def test_odd_symmetry(self, e, th):
        gains = ControlGains()
        for law in ("linear", "nonlinear", "wrapped"):
            plus = feedback_steer(e, th, gains, gamma_sat=0.05, law=law)
            minus = feedback_steer(-e, -th, gains, gamma_sat=0.05, law=law)
            assert plus == pytest.approx(-minus, abs=1e-15)

    @given(e=st.floats(-1e6, 1e6), th=st.floats(-500.0, 500.0))
    def test_wrapped_strictly_inside_bound(self, e, th):
        gains = ControlGains()
        out = feedback_steer(e, th, gains, gamma_sat=0.0257, law="wrapped")
        assert abs(out) < 0.0257

    def test_heading_sign_opposes_error(self, gains, rng):
        for _ in range(50):
            e = rng.uniform(-50.0, 50.0)
            th = desired_heading(e, gains)
            if e != 0.0:
                assert math.copysign(1.0, th) == -math.copysign(1.0, e)
            assert abs(th) < math.pi / 2

    def test_wrapped_deviates_from_linear_at_third_order(self, gains, rng):
        gsat = 0.5
        for _ in range(10):
            e0 = rng.uniform(-1.0, 1.0)
            th0 = rng.uniform(-0.5, 0.5)
            def diff(scale):
                w = feedback_steer(scale * e0, scale * th0, gains,
                                   gamma_sat=gsat, law="wrapped")
                lin = feedback_steer(scale * e0, scale * th0, gains,
                                     law="linear")
                return w - lin
            d1, d2 = diff(1e-2), diff(5e-3)
            if abs(d1) < 1e-16:
                continue
            assert d2 / d1 == pytest.approx(0.125, rel=0.15)

    def test_saturation_examples(self, gains, params):
        got = steering_saturation(20.0, gains, params)
        assert got == pytest.approx(math.atan(4.0 * 2.57 / 400.0), rel=1e-14)
        assert got == pytest.approx(0.025694, abs=1e-6)
        assert steering_saturation(0.0, gains, params) == params.gamma_max
        assert steering_saturation(1e-3, gains, params) == params.gamma_max
        # continuity where both branches meet
        v_star = math.sqrt(gains.a_lat_max * params.l / math.tan(params.gamma_max))
        lo = steering_saturation(v_star * (1 - 1e-9), gains, params)
        hi = steering_saturation(v_star * (1 + 1e-9), gains, params)
        assert lo == pytest.approx(hi, rel=1e-6)

    def test_torque_servo(self, gains):
        assert steering_torque(0.2, 0.2, gains) == 0.0
        assert abs(steering_torque(10.0, 0.0, gains)) == \
            pytest.approx(1.0, abs=1e-2)
        assert abs(steering_torque(10.0, 0.0, gains)) < 1.0
        delta = 1e-8
        assert steering_torque(delta, 0.0, gains) / delta == \
            pytest.approx(-6.0, rel=1e-6)


class TestLongitudinal:
    def test_target_speed_values(self, gains):
        assert target_speed(0.0, gains) == 30.0
        assert target_speed(0.004 * math.pi, gains) == \
            pytest.approx(17.8412, abs=1e-3)
        sharp = ControlGains(a_lat_max=12.0)
        assert target_speed(math.pi / 50.0, sharp) == \
            pytest.approx(13.8198, abs=1e-3)

    def test_preview_max_curvature(self, n4_profile):
        # window fully before the peak: max at the leading edge
        assert preview_max_curvature(n4_profile, 10.0, 50.0) == \
            pytest.approx(n4_profile.kappa(60.0), rel=1e-12)
        # window straddling the peak at s = 125
        assert preview_max_curvature(n4_profile, 100.0, 50.0) == \
            pytest.approx(n4_profile.kappa_max, rel=1e-12)
        # whole-period window on the short path
        sharp = CurvatureProfile.periodic(4, 50.0)
        assert preview_max_curvature(sharp, 17.3, 50.0) == \
            pytest.approx(sharp.kappa_max, rel=1e-12)
        assert preview_max_curvature(CurvatureProfile.straight(), 5.0, 50.0) == 0.0

    def test_longitudinal_accel(self, gains):
        assert longitudinal_accel(20.0, 20.0, gains) == 0.0
        assert longitudinal_accel(0.0, 1e6, gains) == pytest.approx(6.0, abs=1e-3)
        assert abs(longitudinal_accel(0.0, 1e6, gains)) < 6.0
        small = longitudinal_accel(19.999, 20.0, gains)
        assert small == pytest.approx(-(-5.0) * 0.001, rel=1e-6)
        assert small > 0.0

    def test_driving_force_zero_steer(self, params):
        F = driving_force(2.0, 0.0, 0.0, 0.0, 20.0, params)
        assert F.F_R == pytest.approx(params.m1 * 2.0, rel=1e-15)
        assert F.iota == 0.0 and F.a1 == 0.0 and F.a2 == 0.0

    def test_driving_force_inverts_longitudinal_dynamics(self, params, rng):
        for _ in range(100):
            a_des = rng.uniform(-6.0, 6.0)
            gamma = rng.uniform(-1.0, 1.0)
            gd = rng.uniform(-0.5, 0.5)
            gdd = rng.uniform(-1.0, 1.0)
            sigma1 = rng.uniform(1.0, 30.0)
            F = driving_force(a_des, gamma, gd, gdd, sigma1, params)
            u = DriveInput(gamma=gamma, gamma_dot=gd, gamma_ddot=gdd,
                           F_R=F.F_R)
            dy = eom_rhs(Variant.SKATE_FORCE, [0.0, 0.0, 0.0, sigma1], u,
                         params)
            assert dy[3] == pytest.approx(a_des, abs=1e-12)

    def test_driving_force_split_identity(self, params, rng):
        for _ in range(30):
            a_des = rng.uniform(-5.0, 5.0)
            gamma = rng.uniform(-0.8, 0.8)
            F = driving_force(a_des, gamma, 0.3, -0.2, 15.0, params)
            recomposed = params.m1 * ((1.0 + F.iota) * a_des + F.a1 + F.a2)
            assert F.F_R == pytest.approx(recomposed, rel=1e-12, abs=1e-9)


class TestDerivativeChain:
    def test_steady_state_on_constant_curvature(self, params, gains):
        prof = CurvatureProfile.circle(200.0)
        cmd = steer_derivative_chain(40.0, 0.0, 0.0, 20.0, 0.0, prof, gains,
                                     0.0257, params)
        assert cmd.gamma_fb == 0.0
        assert cmd.gamma_des == pytest.approx(math.atan(params.l / 200.0))
        assert cmd.gamma_dot == 0.0
        assert cmd.gamma_ddot == 0.0

    def test_matches_finite_differences_along_flow(self, params, gains,
                                                   n4_profile):
        V = 20.0
        gsat = steering_saturation(V, gains, params)
        prof = n4_profile

        def rhs(y):
            cmd = steer_derivative_chain(y[0], y[1], y[2], V, 0.0, prof,
                                         gains, gsat, params)
            kap = prof.kappa(y[0])
            one = 1.0 - kap * y[1]
            sd = V * math.cos(y[2]) / one
            return np.array([sd, V * math.sin(y[2]),
                             V * math.tan(cmd.gamma_des) / params.l - kap * sd])

        def flow(y0, T, h=1e-6):
            y = np.array(y0, float)
            hh = math.copysign(h, T)
            for _ in range(int(round(abs(T) / h))):
                a = rhs(y)
                b = rhs(y + 0.5 * hh * a)
                c = rhs(y + 0.5 * hh * b)
                d = rhs(y + hh * c)
                y = y + hh / 6.0 * (a + 2 * b + 2 * c + d)
            return y

        def gamma_at(y):
            return steer_derivative_chain(y[0], y[1], y[2], V, 0.0, prof,
                                          gains, gsat, params).gamma_des

        rng = np.random.default_rng(7)
        for _ in range(5):
            y0 = np.array([rng.uniform(0.0, 1000.0), rng.uniform(-3.0, 3.0),
                           rng.uniform(-0.3, 0.3)])
            cmd = steer_derivative_chain(y0[0], y0[1], y0[2], V, 0.0, prof,
                                         gains, gsat, params)
            h1 = 1e-5
            fd1 = (gamma_at(flow(y0, h1)) - gamma_at(flow(y0, -h1))) / (2 * h1)
            assert cmd.gamma_dot == pytest.approx(fd1, abs=1e-6)
            h2 = 5e-4
            g = [gamma_at(flow(y0, k * h2)) for k in (-2, -1, 0, 1, 2)]
            fd2 = (-g[0] + 16 * g[1] - 30 * g[2] + 16 * g[3] - g[4]) \
                / (12 * h2 * h2)
            assert cmd.gamma_ddot == pytest.approx(fd2, abs=1e-4)
