"""RRT* baseline: collision gating, tree consistency, anytime behavior."""

from types import SimpleNamespace

import numpy as np
import pytest

from occupath.errors import InvalidArgumentError, InvalidEndpointError
from occupath.rrtstar import (
    RrtConfig,
    RrtResult,
    edge_free,
    export_polyline_csv,
    rrt_star_plan,
)


class RectOcc:
    """Analytic stand-in for the occupancy model: 1 inside rects, else 0."""

    def __init__(self, lo, hi, rects=()):
        self.rects = [(np.asarray(a, float), np.asarray(b, float))
                      for a, b in rects]
        self.features = SimpleNamespace(
            domain=(np.asarray(lo, float), np.asarray(hi, float)))

    def query_batch(self, pts):
        pts = np.atleast_2d(np.asarray(pts, float))
        occ = np.zeros(pts.shape[0])
        for a, b in self.rects:
            inside = np.all((pts >= a) & (pts <= b), axis=1)
            occ[inside] = 1.0
        return occ

    def query(self, x):
        return float(self.query_batch(np.asarray(x, float)[None, :])[0])


def open_room():
    return RectOcc([0.0, 0.0], [5.0, 4.0])


def walled_room(gap_lo=1.8, gap_hi=2.2):
    # vertical wall at x in [2.4, 2.6] with one gap
    return RectOcc([0.0, 0.0], [5.0, 4.0], rects=[
        ([2.4, 0.0], [2.6, gap_lo]),
        ([2.4, gap_hi], [2.6, 4.0]),
    ])


class TestConfig:
    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            RrtConfig(steer_step=0.0)
        with pytest.raises(InvalidArgumentError):
            RrtConfig(collision_resolution=0.9, steer_step=0.5)
        with pytest.raises(InvalidArgumentError):
            RrtConfig(max_samples=0)
        with pytest.raises(InvalidArgumentError):
            RrtConfig(goal_bias=1.0)
        with pytest.raises(InvalidArgumentError):
            RrtConfig(p_safe=0.0)
        with pytest.raises(InvalidArgumentError):
            RrtConfig(neighbor_gamma=-1.0)

    def test_doc_round_trip(self):
        cfg = RrtConfig(max_samples=123, steer_step=0.7, seed=9)
        assert RrtConfig.from_doc(cfg.to_doc()) == cfg


class TestEdgeFree:
    def test_clear_edge(self):
        occ = walled_room()
        assert edge_free(occ, [0.5, 2.0], [2.0, 2.0], RrtConfig())

    def test_edge_through_wall_blocked(self):
        occ = walled_room()
        assert not edge_free(occ, [1.0, 0.5], [4.0, 0.5], RrtConfig())

    def test_edge_through_gap_free(self):
        occ = walled_room()
        assert edge_free(occ, [1.0, 2.0], [4.0, 2.0], RrtConfig())

    def test_resolution_controls_detection(self):
        # a sliver 6 cm wide: coarse stepping can miss it, fine cannot
        occ = RectOcc([0.0, 0.0], [4.0, 4.0],
                      rects=[([1.97, 0.0], [2.03, 4.0])])
        coarse = RrtConfig(collision_resolution=0.5)
        fine = RrtConfig(collision_resolution=0.01)
        a, b = [1.75, 1.0], [2.25, 1.0]
        assert edge_free(occ, a, b, coarse)
        assert not edge_free(occ, a, b, fine)


class TestPlan:
    def test_open_room_near_straight(self):
        occ = open_room()
        res = rrt_star_plan(occ, [0.5, 2.0], [4.5, 2.0],
                            RrtConfig(max_samples=1500, seed=0))
        assert res.status == "ok"
        np.testing.assert_allclose(res.polyline[0], [0.5, 2.0])
        np.testing.assert_allclose(res.polyline[-1], [4.5, 2.0])
        # finite-budget RRT* stays a few percent above the straight segment
        assert res.cost < 4.0 * 1.15

    def test_wall_gap_is_threaded(self):
        occ = walled_room()
        res = rrt_star_plan(occ, [0.5, 0.5], [4.5, 3.5],
                            RrtConfig(max_samples=3000, seed=1))
        assert res.status == "ok"
        crossing = res.polyline[(res.polyline[:, 0] > 2.3)
                                & (res.polyline[:, 0] < 2.7)]
        # every waypoint near the wall lies inside the gap
        assert np.all((crossing[:, 1] > 1.7) & (crossing[:, 1] < 2.3))
        cfg = RrtConfig()
        for a, b in zip(res.polyline[:-1], res.polyline[1:]):
            assert edge_free(occ, a, b, cfg)

    def test_same_seed_bitwise_identical(self):
        occ = walled_room()
        cfg = RrtConfig(max_samples=800, seed=5)
        r1 = rrt_star_plan(occ, [0.5, 0.5], [4.5, 3.5], cfg)
        r2 = rrt_star_plan(occ, [0.5, 0.5], [4.5, 3.5], cfg)
        assert r1.cost == r2.cost
        assert r1.samples_to_first == r2.samples_to_first
        np.testing.assert_array_equal(r1.polyline, r2.polyline)
        np.testing.assert_array_equal(r1.nodes, r2.nodes)

    def test_more_budget_never_worse_same_seed(self):
        # the first N iterations of a longer run replay the shorter run
        occ = walled_room()
        short = rrt_star_plan(occ, [0.5, 0.5], [4.5, 3.5],
                              RrtConfig(max_samples=900, seed=3))
        long = rrt_star_plan(occ, [0.5, 0.5], [4.5, 3.5],
                             RrtConfig(max_samples=3600, seed=3))
        assert long.cost <= short.cost

    def test_no_path_reported_not_raised(self):
        # start sealed inside a box of occupied space
        occ = RectOcc([0.0, 0.0], [5.0, 4.0], rects=[
            ([0.8, 0.8], [2.2, 1.0]),
            ([0.8, 2.0], [2.2, 2.2]),
            ([0.8, 0.8], [1.0, 2.2]),
            ([2.0, 0.8], [2.2, 2.2]),
        ])
        res = rrt_star_plan(occ, [1.5, 1.5], [4.5, 3.5],
                            RrtConfig(max_samples=400, seed=0))
        assert res.status == "no-path"
        assert res.polyline is None
        assert res.cost == np.inf
        assert res.samples_to_first == -1
        assert res.samples_total == 400

    def test_occupied_endpoint_rejected(self):
        occ = RectOcc([0.0, 0.0], [5.0, 4.0], rects=[([3.0, 3.0], [4.0, 4.0])])
        with pytest.raises(InvalidEndpointError):
            rrt_star_plan(occ, [3.5, 3.5], [1.0, 1.0], RrtConfig())
        with pytest.raises(InvalidEndpointError):
            rrt_star_plan(occ, [1.0, 1.0], [3.5, 3.5], RrtConfig())

    def test_tree_consistency(self):
        occ = walled_room()
        res = rrt_star_plan(occ, [0.5, 0.5], [4.5, 3.5],
                            RrtConfig(max_samples=1200, seed=7))
        n = res.nodes.shape[0]
        assert res.parents[0] == -1
        assert res.costs[0] == 0.0
        for i in range(1, n):
            p = res.parents[i]
            assert 0 <= p < n
            edge = float(np.linalg.norm(res.nodes[i] - res.nodes[p]))
            # rewiring must keep stored costs consistent with the tree
            assert res.costs[i] == pytest.approx(res.costs[p] + edge,
                                                 abs=1e-9)
            # walking to the root terminates (no cycles)
            seen = 0
            j = i
            while j >= 0:
                j = res.parents[j]
                seen += 1
                assert seen <= n
        frees = occ.query_batch(res.nodes)
        assert np.all(frees <= RrtConfig().p_safe)

    def test_sampling_stats(self):
        occ = open_room()
        res = rrt_star_plan(occ, [0.5, 2.0], [4.5, 2.0],
                            RrtConfig(max_samples=1000, seed=2))
        assert res.status == "ok"
        assert 1 <= res.samples_to_first <= res.samples_total
        doc = res.to_doc()
        assert doc["format"] == "occupath-rrt-run"
        assert doc["tree_size"] == res.nodes.shape[0]


class TestExport:
    def test_csv_round_trip(self, tmp_path):
        poly = np.array([[0.0, 1.5], [2.25, 3.125], [4.0, 0.0]])
        out = tmp_path / "poly.csv"
        export_polyline_csv(poly, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "x_1,x_2"
        back = np.array([[float(v) for v in ln.split(",")]
                         for ln in lines[1:]])
        np.testing.assert_array_equal(back, poly)
