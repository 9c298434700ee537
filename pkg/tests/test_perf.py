"""Conditioning sweeps, volume proportions, iso-maps."""

import math

import numpy as np
import pytest

from ortho3r.model import JointConfig, Params
from ortho3r.perf import (
    IsoMap,
    inv_condition,
    iso_map,
    isotropic_on_e2,
    kinv_sweep,
    volume_proportions,
)
from ortho3r.singular import branch_theta2

P_WT3 = Params(3.0, 1.7, 1.0)
P_WT8 = Params(0.1, 1.2, 1.0)


class TestInvCondition:
    def test_zero_on_singular_branch(self):
        p = Params(2.0, 1.5, 1.0)
        for t3 in (0.1, 1.0, 2.5):
            for t2 in branch_theta2(p, t3):
                assert inv_condition(p, JointConfig(0.4, t2, t3)) < 1e-9

    def test_theta1_invariant(self):
        rng = np.random.default_rng(30)
        for _ in range(50):
            p = Params(*rng.uniform(0.1, 4.0, 3))
            t2, t3 = rng.uniform(-np.pi, np.pi, 2)
            a = inv_condition(p, JointConfig(rng.uniform(-np.pi, np.pi), t2, t3))
            b = inv_condition(p, JointConfig(rng.uniform(-np.pi, np.pi), t2, t3))
            assert a == pytest.approx(b, abs=1e-12)

    def test_exact_isotropy_at_unit_geometry(self):
        # d3 = d4 = r2 = 1 admits an orthonormal Jacobian column set
        val = inv_condition(Params(1, 1, 1), JointConfig(0.7, np.pi / 2, -np.pi / 2))
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_range(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            p = Params(*rng.uniform(0.1, 4.0, 3))
            q = JointConfig(*rng.uniform(-np.pi, np.pi, 3))
            assert 0.0 <= inv_condition(p, q) <= 1.0

    def test_scale_invariant(self):
        rng = np.random.default_rng(32)
        for _ in range(50):
            p = Params(*rng.uniform(0.1, 4.0, 3))
            q = JointConfig(*rng.uniform(-np.pi, np.pi, 3))
            ps = Params(p.d3, p.d4, p.r2, d2_scale=rng.uniform(0.2, 8.0))
            assert inv_condition(p, q) == pytest.approx(
                inv_condition(ps, q), rel=1e-9
            )


class TestKinvSweep:
    def test_wt3_reference_values(self):
        rep = kinv_sweep(P_WT3)
        assert rep.kinv_mean == pytest.approx(0.23, abs=0.02)
        assert rep.kinv_max == pytest.approx(0.81, abs=0.02)

    def test_wt8_reference_values(self):
        rep = kinv_sweep(P_WT8)
        assert rep.kinv_mean == pytest.approx(0.21, abs=0.02)
        assert rep.kinv_max == pytest.approx(0.83, abs=0.02)

    def test_mean_le_max(self):
        rng = np.random.default_rng(33)
        for _ in range(3):
            p = Params(*rng.uniform(0.2, 3.0, 3))
            rep = kinv_sweep(p, n=180)
            assert 0.0 <= rep.kinv_mean <= rep.kinv_max <= 1.0

    def test_argmax_attains_max(self):
        rep = kinv_sweep(P_WT3, n=360)
        assert inv_condition(P_WT3, rep.argmax) == pytest.approx(
            rep.kinv_max, abs=1e-9
        )

    def test_grid_refinement_stable(self):
        # 10x finer step changes the indices by well under 1e-2
        a = kinv_sweep(P_WT3, n=180)
        b = kinv_sweep(P_WT3, n=1800)
        assert abs(a.kinv_mean - b.kinv_mean) < 1e-2
        assert abs(a.kinv_max - b.kinv_max) < 1e-2

    def test_resolution_guard(self):
        with pytest.raises(ValueError):
            kinv_sweep(P_WT3, n=90)


class TestVolumeProportions:
    def test_wt3_reference(self):
        rep = volume_proportions(Params(4.5, 2.9, 1.0))
        assert rep.p4 == pytest.approx(0.26, abs=0.02)
        assert rep.p2 == pytest.approx(0.48, abs=0.02)
        assert rep.p_total == pytest.approx(0.74, abs=0.02)

    def test_wt9_reference(self):
        rep = volume_proportions(Params(0.1, 2.25, 1.0))
        assert rep.p4 == pytest.approx(0.49, abs=0.02)
        assert rep.p2 == pytest.approx(0.11, abs=0.02)
        assert rep.p_total == pytest.approx(0.60, abs=0.02)

    def test_total_is_sum(self):
        rep = volume_proportions(Params(2.0, 1.5, 1.0), 200, 200, n_theta=1024)
        assert rep.p_total == rep.p2 + rep.p4
        assert rep.p_total <= 1.0

    def test_refinement_stable(self):
        a = volume_proportions(Params(2.0, 1.5, 1.0), 400, 400)
        b = volume_proportions(Params(2.0, 1.5, 1.0), 800, 800)
        assert abs(a.p4 - b.p4) < 5e-3
        assert abs(a.p2 - b.p2) < 5e-3

    def test_solid_measure_bounded(self):
        rep = volume_proportions(
            Params(2.0, 1.5, 1.0), 200, 200, n_theta=1024, measure="solid"
        )
        assert 0.0 < rep.p_total <= 1.0

    def test_resolution_guard(self):
        with pytest.raises(ValueError):
            volume_proportions(Params(2, 1.5, 1), 100, 400)
        with pytest.raises(ValueError):
            volume_proportions(Params(2, 1.5, 1), 400, 400, measure="area")


class TestIsotropySearch:
    def test_unit_geometry_found(self):
        d3, kmax = isotropic_on_e2(1.0)
        assert kmax >= 0.999
        assert d3 == pytest.approx(1.0, abs=0.05)


class TestIsoMap:
    def test_shapes_and_serialization(self, tmp_path):
        m = iso_map(
            "kinv_mean",
            np.linspace(0.5, 2.5, 4),
            np.linspace(0.5, 2.5, 3),
            1.0,
            inner_n=180,
        )
        assert m.values.shape == (3, 4)
        csv = m.to_csv()
        assert csv.startswith("# ortho3r isomap v1")
        assert len(csv.strip().splitlines()) == 4 + 3
        d = m.to_json_dict()
        assert d["schema"] == "ortho3r-isomap-v1"
        assert np.asarray(d["values"]).shape == (3, 4)

    def test_e2_line_contains_isotropic_point(self):
        # the map restricted to d4 = d3 must reach kinv_max ~ 1 near (1, 1)
        ts = np.linspace(0.8, 1.2, 5)
        m = iso_map("kinv_max", ts, ts, 1.0, inner_n=180)
        diag = np.array([m.values[i, i] for i in range(len(ts))])
        assert diag.max() >= 0.999

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            iso_map("p5", np.array([1.0]), np.array([1.0]), 1.0)

    def test_values_match_direct_eval(self):
        m = iso_map("p4", np.array([2.0]), np.array([1.5]), 1.0, section_n=200)
        direct = volume_proportions(Params(2.0, 1.5, 1.0), 200, 200, n_theta=1024)
        assert m.values[0, 0] == pytest.approx(direct.p4, abs=1e-12)
