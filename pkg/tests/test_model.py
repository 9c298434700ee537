"""Kinematics oracles: DH matrix chain, finite differences, reach sampling."""

import math

import numpy as np
import pytest

from ortho3r.model import (
    CartesianPoint,
    JointConfig,
    Params,
    det_j_closed,
    fk,
    jacobian,
    reach,
    to_section,
    wrap_angle,
)

P_FIG2 = Params(2.0, 1.5, 1.0)


def dh_transform(alpha, d, theta, r):
    """Modified DH link transform Rot(x,alpha) Trans(x,d) Rot(z,theta) Trans(z,r)."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    ct, st = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [ct, -st, 0.0, d],
            [ca * st, ca * ct, -sa, -r * sa],
            [sa * st, sa * ct, ca, r * ca],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def fk_matrix_chain(p: Params, q: JointConfig) -> np.ndarray:
    """Independent forward kinematics: multiply the homogeneous transforms."""
    T = (
        dh_transform(0.0, 0.0, q.theta1, 0.0)
        @ dh_transform(-math.pi / 2, 1.0, q.theta2, p.r2)
        @ dh_transform(math.pi / 2, p.d3, q.theta3, 0.0)
    )
    return p.d2_scale * (T @ np.array([p.d4, 0.0, 0.0, 1.0]))[:3]


def random_params(rng):
    return Params(*rng.uniform(0.05, 5.0, 3))


def random_config(rng):
    return JointConfig(*rng.uniform(-np.pi, np.pi, 3))


class TestParams:
    @pytest.mark.parametrize("bad", [(0, 1, 1), (1, -2, 1), (1, 1, 0), (np.nan, 1, 1)])
    def test_rejects_degenerate(self, bad):
        with pytest.raises(ValueError):
            Params(*bad)

    def test_wraps_angles(self):
        q = JointConfig(3 * np.pi, -np.pi, np.pi)
        assert -np.pi <= q.theta1 < np.pi
        assert q.theta2 == pytest.approx(-np.pi)
        assert q.theta3 == pytest.approx(-np.pi)

    def test_wrap_insensitive_fk(self):
        q1 = JointConfig(0.3, 1.1, -2.0)
        q2 = JointConfig(0.3 + 2 * np.pi, 1.1 - 2 * np.pi, -2.0 + 4 * np.pi)
        assert fk(P_FIG2, q1).as_array() == pytest.approx(
            fk(P_FIG2, q2).as_array(), abs=1e-12
        )


class TestFk:
    def test_spec_points(self):
        assert fk(P_FIG2, JointConfig(0, 0, 0)).as_array() == pytest.approx(
            [4.5, 1.0, 0.0]
        )
        assert fk(P_FIG2, JointConfig(np.pi / 2, 0, 0)).as_array() == pytest.approx(
            [-1.0, 4.5, 0.0]
        )
        assert fk(P_FIG2, JointConfig(0, 0, np.pi)).as_array() == pytest.approx(
            [1.5, 1.0, 0.0]
        )

    def test_matches_matrix_chain(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            p, q = random_params(rng), random_config(rng)
            assert fk(p, q).as_array() == pytest.approx(
                fk_matrix_chain(p, q), abs=1e-12
            )

    def test_scale_factor(self):
        p1 = Params(2, 1.5, 1)
        p2 = Params(2, 1.5, 1, d2_scale=3.5)
        q = JointConfig(0.4, -1.2, 2.2)
        assert fk(p2, q).as_array() == pytest.approx(3.5 * fk(p1, q).as_array())

    def test_z_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            p, q = random_params(rng), random_config(rng)
            a = fk(p, q)
            b = fk(p, JointConfig(q.theta1, -q.theta2, q.theta3))
            assert math.hypot(a.x, a.y) == pytest.approx(
                math.hypot(b.x, b.y), abs=1e-12
            )
            assert a.z == pytest.approx(-b.z, abs=1e-12)


class TestJacobian:
    def test_finite_differences(self):
        rng = np.random.default_rng(3)
        h = 1e-6
        for _ in range(100):
            p, q = random_params(rng), random_config(rng)
            J = jacobian(p, q)
            t = q.as_array()
            for k in range(3):
                tp, tm = t.copy(), t.copy()
                tp[k] += h
                tm[k] -= h
                col = (
                    fk(p, JointConfig(*tp)).as_array()
                    - fk(p, JointConfig(*tm)).as_array()
                ) / (2 * h)
                assert J[:, k] == pytest.approx(col, abs=1e-5)

    def test_det_matches_closed_form(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            p, q = random_params(rng), random_config(rng)
            dj = np.linalg.det(jacobian(p, q))
            dc = det_j_closed(p, q)
            assert dj == pytest.approx(dc, rel=1e-9, abs=1e-12)

    def test_singular_at_c2_zero_s3_zero(self):
        # both factors of the second bracket vanish
        q = JointConfig(0.7, np.pi / 2, 0.0)
        assert det_j_closed(P_FIG2, q) == pytest.approx(0.0, abs=1e-12)
        assert np.linalg.det(jacobian(P_FIG2, q)) == pytest.approx(0.0, abs=1e-9)

    def test_spec_det_value(self):
        q = JointConfig(0.0, 0.0, np.pi / 2)
        assert det_j_closed(P_FIG2, q) == pytest.approx(9.0)

    def test_det_zero_when_effector_meets_axis2(self):
        p = Params(1.0, 1.2, 0.7)  # d3 <= d4
        t3 = math.acos(-p.d3 / p.d4)
        for t2 in (-2.0, 0.3, 1.4):
            assert det_j_closed(p, JointConfig(0, t2, t3)) == pytest.approx(
                0.0, abs=1e-12
            )

    def test_theta1_invariance_of_singular_values(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            p = random_params(rng)
            t2, t3 = rng.uniform(-np.pi, np.pi, 2)
            s1 = np.linalg.svd(
                jacobian(p, JointConfig(rng.uniform(-np.pi, np.pi), t2, t3)),
                compute_uv=False,
            )
            s2 = np.linalg.svd(
                jacobian(p, JointConfig(rng.uniform(-np.pi, np.pi), t2, t3)),
                compute_uv=False,
            )
            assert s1 == pytest.approx(s2, abs=1e-12)

    def test_scaling_leaves_conditioning(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            p = random_params(rng)
            q = random_config(rng)
            lam = rng.uniform(0.1, 10.0)
            ps = Params(p.d3, p.d4, p.r2, d2_scale=lam)
            s1 = np.linalg.svd(jacobian(p, q), compute_uv=False)
            s2 = np.linalg.svd(jacobian(ps, q), compute_uv=False)
            assert s2 == pytest.approx(lam * s1, rel=1e-9)
            assert s2[0] / s2[2] == pytest.approx(s1[0] / s1[2], rel=1e-9)


class TestReach:
    def test_spec_values(self):
        assert reach(P_FIG2) == pytest.approx(1.5 + math.sqrt(10), rel=1e-12)
        assert reach(P_FIG2) == pytest.approx(4.66228, abs=1e-5)
        assert reach(Params(4.5, 2.9, 1.0)) == pytest.approx(
            2.9 + math.sqrt(1 + 30.25), rel=1e-12
        )
        assert reach(Params(4.5, 2.9, 1.0)) == pytest.approx(8.49017, abs=1e-5)

    def test_bounds_and_attains(self):
        rng = np.random.default_rng(7)
        for p in [P_FIG2, Params(0.1, 2.25, 1.0), Params(0.7, 0.4, 2.0)]:
            rmax = reach(p)
            t = rng.uniform(-np.pi, np.pi, (200_000, 3))
            F = p.d3 + p.d4 * np.cos(t[:, 2])
            G = p.d4 * np.sin(t[:, 2]) + p.r2
            a = 1.0 + F * np.cos(t[:, 1])
            norms = np.sqrt(a * a + G * G + (F * np.sin(t[:, 1])) ** 2)
            assert norms.max() <= rmax + 1e-12
            # the analytic argmax: theta2 = 0, theta3 aligned with (1+d3, r2)
            t3 = math.atan2(p.r2, 1.0 + p.d3)
            best = fk(p, JointConfig(0.0, 0.0, t3)).norm()
            assert best == pytest.approx(rmax, abs=1e-12)
            assert norms.max() == pytest.approx(rmax, abs=1e-3)


class TestSection:
    def test_examples(self):
        for pt, expected in [
            (CartesianPoint(3, 4, 5), (5, 5)),
            (CartesianPoint(0, 0, -2), (0, -2)),
            (CartesianPoint(-1, 0, 0), (1, 0)),
        ]:
            s = to_section(pt)
            assert (s.rho, s.z) == pytest.approx(expected)

    def test_wrap_angle(self):
        assert wrap_angle(np.pi) == pytest.approx(-np.pi)
        assert wrap_angle(-np.pi) == pytest.approx(-np.pi)
        assert wrap_angle(0.5) == pytest.approx(0.5)
        assert wrap_angle(2 * np.pi + 0.5) == pytest.approx(0.5)
