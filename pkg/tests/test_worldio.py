"""Laser-log parsing, scan-to-point conversion, and synthetic ray casting."""

import io
import math

import numpy as np
import pytest

from occupath.errors import (
    EmptyLogError,
    InvalidArgumentError,
    InvalidPoseError,
)
from occupath.worldio import (
    ConvexPolygon,
    Disc,
    LaserScan,
    Rect,
    SyntheticWorld,
    obstacle_from_doc,
    parse_carmen,
    points_to_arrays,
    read_points_csv,
    scans_to_points,
    simulate_laser,
    subsample_scans,
    write_carmen,
    write_points_csv,
)


def flaser_line(ranges, pose, odom=None, ts=17.25):
    odom = pose if odom is None else odom
    fields = ["FLASER", str(len(ranges))]
    fields += [repr(float(r)) for r in ranges]
    fields += [repr(float(v)) for v in pose]
    fields += [repr(float(v)) for v in odom]
    fields += [repr(float(ts)), "host", repr(float(ts))]
    return " ".join(fields)


class TestLaserScan:
    def test_beam_angles_span_fov(self):
        scan = LaserScan(pose=np.array([0.0, 0.0, 0.5]),
                         ranges=np.array([1.0, 1.0, 1.0]), fov=math.pi)
        np.testing.assert_allclose(
            scan.beam_angles(), [0.5 - math.pi / 2, 0.5, 0.5 + math.pi / 2])

    def test_single_beam_points_along_heading(self):
        scan = LaserScan(pose=np.array([0.0, 0.0, 0.3]), ranges=np.array([2.0]))
        np.testing.assert_allclose(scan.beam_angles(), [0.3])

    def test_endpoints_polar_to_cartesian(self):
        scan = LaserScan(pose=np.array([1.0, 2.0, 0.0]),
                         ranges=np.array([2.0, 3.0]), fov=math.pi)
        # beams at theta -pi/2 and +pi/2
        np.testing.assert_allclose(
            scan.endpoints(), [[1.0, 0.0], [1.0, 5.0]], atol=1e-12)

    def test_rejects_bad_pose_and_ranges(self):
        with pytest.raises(InvalidArgumentError):
            LaserScan(pose=np.zeros(2), ranges=np.array([1.0]))
        with pytest.raises(InvalidArgumentError):
            LaserScan(pose=np.zeros(3), ranges=np.array([-0.1]))
        with pytest.raises(InvalidArgumentError):
            LaserScan(pose=np.zeros(3), ranges=np.array([81.0]), max_range=80.0)


class TestParseCarmen:
    def test_parses_fields(self):
        line = flaser_line([1.5, 2.5], pose=(1.0, 2.0, 0.25),
                           odom=(9.0, 9.0, 9.0), ts=33.5)
        scans = parse_carmen([line])
        assert len(scans) == 1
        np.testing.assert_allclose(scans[0].ranges, [1.5, 2.5])
        np.testing.assert_allclose(scans[0].pose, [1.0, 2.0, 0.25])
        assert scans[0].timestamp == 33.5

    def test_odometry_pose_selectable(self):
        line = flaser_line([1.0], pose=(1.0, 2.0, 0.25), odom=(4.0, 5.0, 6.0))
        scans = parse_carmen([line], use_odometry=True)
        np.testing.assert_allclose(scans[0].pose, [4.0, 5.0, 6.0])

    def test_skips_other_record_types(self):
        lines = ["ODOM 1 2 3 4 5 6 7 h 8",
                 "PARAM robot_x 1",
                 flaser_line([2.0], pose=(0.0, 0.0, 0.0))]
        scans = parse_carmen(lines)
        assert len(scans) == 1

    def test_skips_malformed_records(self):
        good = flaser_line([2.0], pose=(0.0, 0.0, 0.0))
        bad_count = "FLASER 3 1.0 2.0 0 0 0 0 0 0 1.0 h 1.0"
        bad_token = good.replace("2.0", "abc", 1)
        scans = parse_carmen([bad_count, bad_token, good])
        assert len(scans) == 1

    def test_clamps_long_ranges(self):
        line = flaser_line([150.0], pose=(0.0, 0.0, 0.0))
        scans = parse_carmen([line], max_range=80.0)
        assert scans[0].ranges[0] == 80.0

    def test_empty_log_raises(self):
        with pytest.raises(EmptyLogError):
            parse_carmen(["ODOM 0 0 0 0 0 0 1 h 1"])

    def test_negative_range_is_malformed(self):
        line = flaser_line([2.0], pose=(0.0, 0.0, 0.0)).replace("2.0", "-2.0", 1)
        with pytest.raises(EmptyLogError):
            parse_carmen([line])

    def test_write_parse_round_trip(self):
        scans = [LaserScan(pose=np.array([0.5, -1.25, 0.125]),
                           ranges=np.array([3.0625, 7.5]),
                           timestamp=42.5)]
        buf = io.StringIO()
        write_carmen(scans, buf)
        back = parse_carmen(buf.getvalue().splitlines())
        np.testing.assert_array_equal(back[0].ranges, scans[0].ranges)
        np.testing.assert_array_equal(back[0].pose, scans[0].pose)
        assert back[0].timestamp == 42.5


class TestScansToPoints:
    def test_hit_beam_yields_endpoint_and_free_points(self):
        # one beam along +x, range 2.0: free points sit at
        # (k + 0.5) / 4 * (2.0 - margin) for k = 0..3, hit at x = 2.0
        scan = LaserScan(pose=np.array([0.0, 0.0, 0.0]), ranges=np.array([2.0]))
        pts = scans_to_points([scan], free_per_beam=4, hit_margin=0.05)
        free = [p for p in pts if p.y == -1]
        hits = [p for p in pts if p.y == 1]
        assert len(free) == 4 and len(hits) == 1
        span = 2.0 - 0.05
        expect = (np.arange(4) + 0.5) / 4 * span
        np.testing.assert_allclose(sorted(p.x[0] for p in free), expect)
        np.testing.assert_allclose(hits[0].x, [2.0, 0.0], atol=1e-12)

    def test_max_range_beam_yields_free_only(self):
        scan = LaserScan(pose=np.array([0.0, 0.0, 0.0]),
                         ranges=np.array([80.0]), max_range=80.0)
        pts = scans_to_points([scan], free_per_beam=2)
        assert all(p.y == -1 for p in pts) and len(pts) == 2

    def test_max_range_discard_drops_beam(self):
        scan = LaserScan(pose=np.array([0.0, 0.0, 0.0]),
                         ranges=np.array([80.0]), max_range=80.0)
        assert scans_to_points([scan], max_range_discard=True) == []

    def test_bounds_filter(self):
        scan = LaserScan(pose=np.array([0.0, 0.0, 0.0]), ranges=np.array([4.0]))
        pts = scans_to_points([scan], free_per_beam=4,
                              bounds=([0.0, -1.0], [2.0, 1.0]))
        assert all(p.x[0] <= 2.0 for p in pts)
        assert not any(p.y == 1 for p in pts)  # hit at x=4 is outside

    def test_rejects_empty_and_negative(self):
        with pytest.raises(InvalidArgumentError):
            scans_to_points([])
        scan = LaserScan(pose=np.zeros(3), ranges=np.array([1.0]))
        with pytest.raises(InvalidArgumentError):
            scans_to_points([scan], free_per_beam=-1)

    def test_points_to_arrays_shapes(self):
        scan = LaserScan(pose=np.zeros(3), ranges=np.array([2.0, 3.0]), fov=1.0)
        X, y = points_to_arrays(scans_to_points([scan]))
        assert X.shape == (y.size, 2)
        assert set(np.unique(y)) == {-1.0, 1.0}


class TestSubsample:
    def test_every_kth(self):
        scans = list(range(10))
        assert subsample_scans(scans, every=3) == [0, 3, 6, 9]

    def test_bad_stride(self):
        with pytest.raises(InvalidArgumentError):
            subsample_scans([1], every=0)


class TestPointsCsv:
    def test_round_trip(self, tmp_path):
        scan = LaserScan(pose=np.zeros(3), ranges=np.array([2.0]))
        pts = scans_to_points([scan])
        file = tmp_path / "points.csv"
        write_points_csv(pts, file)
        back = read_points_csv(file)
        assert len(back) == len(pts)
        for a, b in zip(pts, back):
            np.testing.assert_array_equal(a.x, b.x)
            assert a.y == b.y

    def test_bad_header(self, tmp_path):
        file = tmp_path / "points.csv"
        file.write_text("a,b,c\n")
        with pytest.raises(InvalidArgumentError):
            read_points_csv(file)


class TestRectRaycast:
    def test_perpendicular_hit(self):
        rect = Rect(low=np.array([2.0, -1.0]), high=np.array([3.0, 1.0]))
        assert rect.raycast(np.array([0.0, 0.0]), np.array([1.0, 0.0])) == 2.0

    def test_miss_parallel(self):
        rect = Rect(low=np.array([2.0, -1.0]), high=np.array([3.0, 1.0]))
        assert rect.raycast(np.array([0.0, 2.0]), np.array([1.0, 0.0])) == np.inf

    def test_behind_origin(self):
        rect = Rect(low=np.array([2.0, -1.0]), high=np.array([3.0, 1.0]))
        assert rect.raycast(np.array([0.0, 0.0]), np.array([-1.0, 0.0])) == np.inf

    def test_origin_inside_gives_zero(self):
        rect = Rect(low=np.array([-1.0, -1.0]), high=np.array([1.0, 1.0]))
        assert rect.raycast(np.array([0.0, 0.0]), np.array([1.0, 0.0])) == 0.0

    def test_diagonal_hits_corner_slab(self):
        # unit diagonal from origin reaches x=1 face at t = sqrt(2)
        rect = Rect(low=np.array([1.0, 0.0]), high=np.array([2.0, 3.0]))
        d = np.array([1.0, 1.0]) / math.sqrt(2.0)
        t = rect.raycast(np.array([0.0, 0.0]), d)
        assert t == pytest.approx(math.sqrt(2.0))

    def test_contains(self):
        rect = Rect(low=np.array([0.0, 0.0]), high=np.array([1.0, 1.0]))
        assert rect.contains([0.5, 0.5]) and rect.contains([1.0, 1.0])
        assert not rect.contains([1.0001, 0.5])

    def test_degenerate_rejected(self):
        with pytest.raises(InvalidArgumentError):
            Rect(low=np.array([0.0, 0.0]), high=np.array([0.0, 1.0]))


class TestDiscRaycast:
    def test_head_on(self):
        # |oc|^2 = 9, b = -3, disc_term = 9 - 8 = 1: t = 3 - 1 = 2
        disc = Disc(center=np.array([3.0, 0.0]), radius=1.0)
        t = disc.raycast(np.array([0.0, 0.0]), np.array([1.0, 0.0]))
        assert t == pytest.approx(2.0)

    def test_tangent(self):
        disc = Disc(center=np.array([3.0, 1.0]), radius=1.0)
        t = disc.raycast(np.array([0.0, 0.0]), np.array([1.0, 0.0]))
        assert t == pytest.approx(3.0)

    def test_miss(self):
        disc = Disc(center=np.array([3.0, 1.5]), radius=1.0)
        assert disc.raycast(np.array([0.0, 0.0]),
                            np.array([1.0, 0.0])) == np.inf

    def test_from_inside_exits_forward(self):
        disc = Disc(center=np.array([3.0, 0.0]), radius=1.0)
        t = disc.raycast(np.array([3.0, 0.0]), np.array([1.0, 0.0]))
        assert t == pytest.approx(1.0)

    def test_behind(self):
        disc = Disc(center=np.array([-3.0, 0.0]), radius=1.0)
        assert disc.raycast(np.array([0.0, 0.0]),
                            np.array([1.0, 0.0])) == np.inf

    def test_bad_radius(self):
        with pytest.raises(InvalidArgumentError):
            Disc(center=np.zeros(2), radius=0.0)


class TestPolygon:
    def square(self):
        return ConvexPolygon(vertices=np.array(
            [[1.0, -1.0], [2.0, -1.0], [2.0, 1.0], [1.0, 1.0]]))

    def test_raycast_first_edge(self):
        t = self.square().raycast(np.array([0.0, 0.0]), np.array([1.0, 0.0]))
        assert t == pytest.approx(1.0)

    def test_raycast_matches_equivalent_rect(self):
        rect = Rect(low=np.array([1.0, -1.0]), high=np.array([2.0, 1.0]))
        rng = np.random.default_rng(3)
        for _ in range(25):
            origin = rng.uniform([-1.0, -3.0], [0.5, 3.0])
            a = rng.uniform(-math.pi, math.pi)
            d = np.array([math.cos(a), math.sin(a)])
            tp = self.square().raycast(origin, d)
            tr = rect.raycast(origin, d)
            if np.isinf(tr):
                assert np.isinf(tp)
            else:
                assert tp == pytest.approx(tr, abs=1e-9)

    def test_contains(self):
        assert self.square().contains([1.5, 0.0])
        assert not self.square().contains([0.99, 0.0])

    def test_clockwise_rejected(self):
        with pytest.raises(InvalidArgumentError):
            ConvexPolygon(vertices=np.array(
                [[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]))

    def test_too_few_vertices(self):
        with pytest.raises(InvalidArgumentError):
            ConvexPolygon(vertices=np.array([[0.0, 0.0], [1.0, 0.0]]))


class TestSyntheticWorld:
    def world(self):
        return SyntheticWorld(
            bounds=(np.array([0.0, 0.0]), np.array([10.0, 10.0])),
            obstacles=(Rect(low=np.array([4.0, 4.0]), high=np.array([6.0, 6.0])),
                       Disc(center=np.array([8.0, 2.0]), radius=1.0)),
        )

    def test_point_free(self):
        w = self.world()
        assert w.point_free([1.0, 1.0])
        assert not w.point_free([5.0, 5.0])
        assert not w.point_free([8.0, 2.5])
        assert not w.point_free([-0.1, 5.0])  # outside bounds

    def test_raycast_minimum_over_obstacles(self):
        w = self.world()
        t = w.raycast(np.array([5.0, 0.0]), np.array([0.0, 1.0]))
        assert t == pytest.approx(4.0)

    def test_obstacle_outside_bounds_rejected(self):
        with pytest.raises(InvalidArgumentError):
            SyntheticWorld(
                bounds=(np.zeros(2), np.array([5.0, 5.0])),
                obstacles=(Disc(center=np.array([5.0, 5.0]), radius=1.0),),
            )

    def test_save_load_round_trip(self, tmp_path):
        w = self.world()
        file = tmp_path / "world.json"
        w.save(file)
        back = SyntheticWorld.load(file)
        assert len(back.obstacles) == 2
        np.testing.assert_array_equal(back.bounds[1], [10.0, 10.0])
        np.testing.assert_array_equal(back.obstacles[0].low, [4.0, 4.0])

    def test_from_doc_rejects_foreign(self):
        with pytest.raises(InvalidArgumentError):
            SyntheticWorld.from_doc({"format": "something-else"})
        with pytest.raises(InvalidArgumentError):
            obstacle_from_doc({"type": "torus"})


class TestSimulateLaser:
    def test_exact_range_to_rect(self):
        w = SyntheticWorld(
            bounds=(np.zeros(2), np.array([10.0, 10.0])),
            obstacles=(Rect(low=np.array([4.0, 0.0]), high=np.array([5.0, 10.0])),),
        )
        scan = simulate_laser(w, pose=[1.0, 5.0, 0.0], beams=1,
                              fov=math.pi, max_range=80.0)
        assert scan.ranges[0] == pytest.approx(3.0)

    def test_clear_beam_reports_max_range(self):
        w = SyntheticWorld(bounds=(np.zeros(2), np.array([10.0, 10.0])),
                           obstacles=())
        scan = simulate_laser(w, pose=[5.0, 5.0, 0.0], beams=3,
                              fov=math.pi / 2, max_range=7.5)
        np.testing.assert_allclose(scan.ranges, 7.5)

    def test_pose_inside_obstacle_rejected(self):
        w = SyntheticWorld(
            bounds=(np.zeros(2), np.array([10.0, 10.0])),
            obstacles=(Disc(center=np.array([5.0, 5.0]), radius=1.0),),
        )
        with pytest.raises(InvalidPoseError):
            simulate_laser(w, pose=[5.0, 5.0, 0.0], beams=1,
                           fov=math.pi, max_range=80.0)

    def test_noise_requires_rng(self):
        w = SyntheticWorld(bounds=(np.zeros(2), np.ones(2) * 10.0), obstacles=())
        with pytest.raises(InvalidArgumentError):
            simulate_laser(w, pose=[5.0, 5.0, 0.0], beams=1, fov=math.pi,
                           max_range=80.0, noise_sigma=0.01)

    def test_noise_is_seeded_and_clamped(self):
        w = SyntheticWorld(
            bounds=(np.zeros(2), np.ones(2) * 10.0),
            obstacles=(Rect(low=np.array([6.0, 0.0]),
                            high=np.array([6.5, 10.0])),),
        )
        a = simulate_laser(w, pose=[5.0, 5.0, 0.0], beams=9, fov=math.pi,
                           max_range=8.0, noise_sigma=0.5,
                           rng=np.random.default_rng(11))
        b = simulate_laser(w, pose=[5.0, 5.0, 0.0], beams=9, fov=math.pi,
                           max_range=8.0, noise_sigma=0.5,
                           rng=np.random.default_rng(11))
        clean = simulate_laser(w, pose=[5.0, 5.0, 0.0], beams=9, fov=math.pi,
                               max_range=8.0)
        np.testing.assert_array_equal(a.ranges, b.ranges)
        assert np.all(a.ranges <= 8.0)
        hits = clean.ranges < 8.0
        assert hits.any() and (~hits).any()
        assert np.all(a.ranges[hits] != clean.ranges[hits])
        # misses stay pinned at max_range, noise never invents returns
        np.testing.assert_array_equal(a.ranges[~hits], 8.0)
