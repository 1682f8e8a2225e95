"""Path representation: offsets, weights, boundary term, serialization."""

import numpy as np
import pytest

from occupath import features as ft
from occupath import path as pa
from occupath.errors import InvalidArgumentError


def straight_path(m=32, ell=0.15, seed=0):
    f = ft.build_rff(m, ell, seed=seed)
    off = pa.StraightOffset(start=np.array([0.0, 0.0]), goal=np.array([4.0, 2.0]))
    return pa.Path(f, off)


class TestOffsets:
    def test_straight_line_values(self):
        off = pa.StraightOffset(np.array([1.0, 5.0]), np.array([9.0, 5.0]))
        ts = np.array([0.0, 0.25, 1.0])
        np.testing.assert_allclose(
            off.evaluate_batch(ts), [[1.0, 5.0], [3.0, 5.0], [9.0, 5.0]]
        )
        np.testing.assert_allclose(off.evaluate_batch(ts, order=1), [[8.0, 0.0]] * 3)
        np.testing.assert_allclose(off.evaluate_batch(ts, order=2), 0.0)

    def test_polyline_interpolation(self):
        verts = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]])
        off = pa.PolylineOffset(verts)
        np.testing.assert_allclose(off.evaluate_batch([0.5])[0], [1.0, 1.0])
        np.testing.assert_allclose(off.evaluate_batch([0.25])[0], [0.5, 0.5])
        # velocity is segment slope times segment count
        np.testing.assert_allclose(off.evaluate_batch([0.25], order=1)[0], [2.0, 2.0])

    def test_polyline_needs_two_vertices(self):
        with pytest.raises(InvalidArgumentError):
            pa.PolylineOffset(np.array([[0.0, 0.0]]))


class TestPathAlgebra:
    def test_zero_weights_follow_offset(self):
        p = straight_path()
        ts = np.linspace(0, 1, 9)
        np.testing.assert_allclose(
            p.evaluate_batch(ts), p.offset.evaluate_batch(ts), atol=1e-12
        )

    def test_evaluation_linear_in_weights(self):
        p = straight_path()
        rng = np.random.default_rng(3)
        w1 = rng.normal(size=p.weights.shape)
        w2 = rng.normal(size=p.weights.shape)
        ts = np.linspace(0, 1, 5)
        p.weights[:] = w1
        a = p.evaluate_batch(ts)
        p.weights[:] = w2
        b = p.evaluate_batch(ts)
        p.weights[:] = w1 + w2
        both = p.evaluate_batch(ts)
        base = p.offset.evaluate_batch(ts)
        np.testing.assert_allclose(both - base, (a - base) + (b - base), atol=1e-10)

    def test_derivatives_match_finite_differences(self):
        p = straight_path()
        rng = np.random.default_rng(8)
        p.weights[:] = 0.3 * rng.normal(size=p.weights.shape)
        ts = np.linspace(0.1, 0.9, 7)
        h = 1e-5
        v = p.evaluate_batch(ts, order=1)
        fd = (p.evaluate_batch(ts + h) - p.evaluate_batch(ts - h)) / (2 * h)
        np.testing.assert_allclose(v, fd, rtol=1e-4, atol=1e-6)
        a = p.evaluate_batch(ts, order=2)
        fd2 = (p.evaluate_batch(ts + h, order=1) - p.evaluate_batch(ts - h, order=1)) / (2 * h)
        np.testing.assert_allclose(a, fd2, rtol=1e-4, atol=1e-4)

    def test_weight_shape_validated(self):
        f = ft.build_rff(16, 0.2, seed=0)
        off = pa.StraightOffset(np.zeros(2), np.ones(2))
        with pytest.raises(InvalidArgumentError):
            pa.Path(f, off, weights=np.zeros((2, 17)))

    def test_copy_is_independent(self):
        p = straight_path()
        q = p.copy()
        q.weights += 1.0
        assert np.all(p.weights == 0.0)


class TestBoundaryFeatures:
    def test_landmarks_at_endpoints(self):
        bf = pa.default_boundary_features()
        assert bf.kind == "nystrom"
        np.testing.assert_allclose(np.sort(bf.landmarks), [0.0, 1.0])

    def test_cross_influence_is_negligible(self):
        # a unit correction at t=0 moves t=1 by at most ~exp(-8)
        bf = pa.default_boundary_features()
        phi0 = bf.evaluate(0.0)
        phi1 = bf.evaluate(1.0)
        influence = abs(float(phi0 @ phi1))
        assert influence < 5e-4


class TestMetric:
    def test_identity_metric_is_identity(self):
        m = pa.IdentityMetric()
        v = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(m.solve(v), v)

    def test_gram_metric_solves_gram_system(self):
        f = ft.build_rff(24, 0.2, seed=1)
        gm = pa.GramMetric(f, grid=128, ridge=1e-8)
        ts = np.linspace(0, 1, 128)
        phi = f.evaluate_batch(ts)
        gram = phi.T @ phi / 128 + 1e-8 * np.eye(24)
        rng = np.random.default_rng(0)
        v = rng.normal(size=24)
        np.testing.assert_allclose(gram @ gm.solve(v), v, atol=1e-8)


class TestSerialization:
    def test_round_trip_bit_exact(self, tmp_path):
        p = straight_path(seed=13)
        rng = np.random.default_rng(5)
        p.weights[:] = rng.normal(size=p.weights.shape)
        p.boundary_weights[:] = rng.normal(size=p.boundary_weights.shape)
        file = tmp_path / "path.json"
        p.save(file)
        q = pa.Path.load(file)
        ts = np.linspace(0, 1, 33)
        np.testing.assert_array_equal(p.evaluate_batch(ts), q.evaluate_batch(ts))
        # serializing again yields identical bytes
        file2 = tmp_path / "path2.json"
        q.save(file2)
        assert file.read_bytes() == file2.read_bytes()

    def test_rejects_foreign_documents(self):
        with pytest.raises(InvalidArgumentError):
            pa.Path.from_doc({"format": "something-else"})

    def test_csv_export_shape(self, tmp_path):
        p = straight_path()
        out = tmp_path / "p.csv"
        pa.export_csv(p, out, resolution=50)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,x_1,x_2"
        assert len(lines) == 51
        first = [float(v) for v in lines[1].split(",")]
        np.testing.assert_allclose(first, [0.0, 0.0, 0.0], atol=1e-12)

    def test_csv_resolution_validated(self, tmp_path):
        p = straight_path()
        with pytest.raises(InvalidArgumentError):
            pa.export_csv(p, tmp_path / "p.csv", resolution=1)
