"""Posture enumeration: round trips, counts, parity, brute-force basins."""

import math

import numpy as np
import pytest
from scipy.optimize import minimize

from ortho3r.ik import count_grid, count_solutions, ik_full, ik_section
from ortho3r.model import (
    CartesianPoint,
    JointConfig,
    Params,
    SectionPoint,
    fk,
    reach,
    to_section,
)

P_FIG2 = Params(2.0, 1.5, 1.0)


def circ_diff(a, b):
    d = abs(a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def section_error(p, t2, t3, rho, z):
    F = p.d3 + p.d4 * math.cos(t3)
    G = p.d4 * math.sin(t3) + p.r2
    a = 1.0 + F * math.cos(t2)
    return (math.hypot(a, G) - rho) ** 2 + (-F * math.sin(t2) - z) ** 2


def brute_force_postures(p, rho, z, n=800):
    """Independent oracle: basins of the squared section error on the torus."""
    t = np.linspace(-np.pi, np.pi, n, endpoint=False)
    T2, T3 = np.meshgrid(t, t, indexing="ij")
    F = p.d3 + p.d4 * np.cos(T3)
    G = p.d4 * np.sin(T3) + p.r2
    a = 1.0 + F * np.cos(T2)
    E = (np.hypot(a, G) - rho) ** 2 + (-F * np.sin(T2) - z) ** 2
    local_min = np.ones_like(E, bool)
    for ax, sh in ((0, 1), (0, -1), (1, 1), (1, -1)):
        local_min &= E <= np.roll(E, sh, axis=ax)
    sols = []
    for i, j in np.argwhere(local_min & (E < (0.05 * (1 + rho)) ** 2)):
        res = minimize(
            lambda q: section_error(p, q[0], q[1], rho, z),
            [T2[i, j], T3[i, j]],
            method="Nelder-Mead",
            options={"xatol": 1e-13, "fatol": 1e-26, "maxiter": 3000},
        )
        if res.fun < 1e-18:
            q = np.mod(np.asarray(res.x) + np.pi, 2 * np.pi) - np.pi
            if not any(
                np.max(np.abs(np.mod(q - s + np.pi, 2 * np.pi) - np.pi)) < 1e-5
                for s in sols
            ):
                sols.append(q)
    return sols


class TestIkSection:
    def test_round_trip_random(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            q = JointConfig(0.0, *rng.uniform(-np.pi, np.pi, 2))
            s = to_section(fk(P_FIG2, q))
            sols = ik_section(P_FIG2, s)
            hit = [
                sol
                for sol in sols
                if circ_diff(sol.theta2, q.theta2) < 1e-8
                and circ_diff(sol.theta3, q.theta3) < 1e-8
            ]
            assert hit, f"original posture not recovered for {q}"

    def test_unreachable_empty(self):
        rmax = reach(P_FIG2)
        assert ik_section(P_FIG2, SectionPoint(rmax * 0.9, rmax * 0.9)) == []
        assert ik_section(P_FIG2, SectionPoint(2 * rmax, 0.0)) == []

    def test_four_postures_inside_ws1(self):
        # interior of the four-posture region bounded by WS1; oracle: basin count
        pt = SectionPoint(2.0, 0.0)
        assert len(brute_force_postures(P_FIG2, pt.rho, pt.z)) == 4
        sols = ik_section(P_FIG2, pt)
        assert len(sols) == 4

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        p = Params(4.5, 2.9, 1.0)
        for _ in range(12):
            q2, q3 = rng.uniform(-np.pi, np.pi, 2)
            rho, z = (
                to_section(fk(p, JointConfig(0, q2, q3))).rho,
                fk(p, JointConfig(0, q2, q3)).z,
            )
            assert len(ik_section(p, SectionPoint(rho, z))) == len(
                brute_force_postures(p, rho, z)
            )

    def test_residuals_tiny(self):
        rng = np.random.default_rng(12)
        rmax = reach(P_FIG2)
        for _ in range(100):
            q = JointConfig(0.0, *rng.uniform(-np.pi, np.pi, 2))
            s = to_section(fk(P_FIG2, q))
            for sol in ik_section(P_FIG2, s):
                assert sol.residual <= 1e-8 * rmax


class TestIkFull:
    def test_round_trip_contains_original(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            q = JointConfig(*rng.uniform(-np.pi, np.pi, 3))
            target = fk(P_FIG2, q)
            ps = ik_full(P_FIG2, target)
            best = min(
                np.max(
                    np.abs(
                        np.mod(sol.as_array() - q.as_array() + np.pi, 2 * np.pi)
                        - np.pi
                    )
                )
                for sol in ps.solutions
            )
            assert best < 1e-8

    def test_residual_bound(self):
        rng = np.random.default_rng(14)
        rmax = reach(P_FIG2)
        for _ in range(100):
            q = JointConfig(*rng.uniform(-np.pi, np.pi, 3))
            ps = ik_full(P_FIG2, fk(P_FIG2, q))
            assert ps.residual_max <= 1e-8 * rmax

    def test_axis_target_flagged(self):
        p = Params(1.0, 2.0, 1.0)  # d4 >= r2: the Z axis is reachable
        # z on the axis: need (1 + z^2) = F^2 at G = 0
        s3 = -p.r2 / p.d4
        t3 = math.asin(s3)
        F = p.d3 + p.d4 * math.cos(t3)
        z = math.sqrt(F * F - 1.0)
        ps = ik_full(p, CartesianPoint(0.0, 0.0, z))
        assert ps.axis_degenerate
        assert all(sol.theta1 == 0.0 for sol in ps.solutions)
        assert len(ps.solutions) >= 1

    def test_count_cross_module(self):
        rng = np.random.default_rng(15)
        p = Params(0.1, 2.25, 1.0)
        for _ in range(50):
            q = JointConfig(*rng.uniform(-np.pi, np.pi, 3))
            target = fk(p, q)
            ps = ik_full(p, target)
            assert len(ps.solutions) == len(
                ik_section(p, to_section(target))
            )


class TestCounts:
    def test_unreachable_zero(self):
        assert count_solutions(P_FIG2, SectionPoint(10.0, 10.0)) == 0

    def test_fig2_annulus_and_core(self):
        # between WS1 and WS2: 2 postures; inside WS1: 4 (paper Fig 2)
        assert count_solutions(P_FIG2, SectionPoint(4.0, 0.0)) == 2
        assert count_solutions(P_FIG2, SectionPoint(2.0, 0.0)) == 4

    def test_parity_even(self):
        rng = np.random.default_rng(16)
        rmax = reach(P_FIG2)
        for _ in range(2000):
            s = SectionPoint(rng.uniform(0, rmax), rng.uniform(-rmax, rmax))
            assert count_solutions(P_FIG2, s) in (0, 2, 4)

    def test_z_symmetry(self):
        rng = np.random.default_rng(17)
        rmax = reach(P_FIG2)
        for _ in range(300):
            rho = rng.uniform(0, rmax)
            z = rng.uniform(0, rmax)
            assert count_solutions(P_FIG2, SectionPoint(rho, z)) == count_solutions(
                P_FIG2, SectionPoint(rho, -z)
            )

    def test_never_exceeds_four(self):
        rng = np.random.default_rng(18)
        for p in [P_FIG2, Params(0.1, 2.25, 1.0), Params(0.5, 0.6, 2.0)]:
            rmax = reach(p)
            rho = rng.uniform(0, rmax, 400)
            z = rng.uniform(-rmax, rmax, 7)
            counts = count_grid(p, rho, z)
            assert counts.max() <= 4

    def test_grid_matches_pointwise(self):
        rng = np.random.default_rng(19)
        p = Params(0.1, 2.25, 1.0)
        rmax = reach(p)
        rho = rng.uniform(0, rmax, 60)
        z = rng.uniform(-rmax, rmax, 3)
        grid = count_grid(p, rho, z)
        for j, zz in enumerate(z):
            for i, rr in enumerate(rho):
                sols = ik_section(p, SectionPoint(rr, zz))
                assert grid[i, j] == len(sols)
