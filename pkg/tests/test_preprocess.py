import numpy as np
import pytest

from lordmimo import (
    DegenerateChannelError,
    Ordering,
    RealLattice,
    count_ops,
    preprocess,
    project_observation,
    realize_channel,
    summarize_channel,
    triangularize,
)
from lordmimo.preprocess import ChannelSummary, ObservationProjection

from oracles import gram_schmidt, materialize_qr


def _random_lattice(rng, n, lr=2, es=1.0):
    h = (rng.standard_normal((n, lr, 2)) + 1j * rng.standard_normal((n, lr, 2))) / np.sqrt(2)
    return realize_channel(h, es)


class TestSummary:
    def test_identity(self):
        cs = summarize_channel(realize_channel(np.eye(2, dtype=complex), 2.0))
        assert (cs.sigma1_sq, cs.sigma2_sq, cs.s1, cs.s2, cs.r3) == (1, 1, 0, 0, 1)

    def test_hand_computed(self):
        lat = realize_channel(np.array([[1, 1], [0, 1]], dtype=complex), 2.0)
        np.testing.assert_array_equal(lat.column(1), [1, 0, 0, 0])
        np.testing.assert_array_equal(lat.column(3), [1, 0, 1, 0])
        cs = summarize_channel(lat)
        assert (cs.sigma1_sq, cs.sigma2_sq, cs.s1, cs.s2, cs.r3) == (1, 2, 1, 0, 1)

    @pytest.mark.parametrize("lr", [2, 4])
    def test_r3_against_gram_schmidt(self, rng, lr):
        lat = _random_lattice(rng, 200, lr)
        cs = summarize_channel(lat)
        for i in range(200):
            g = gram_schmidt(lat.columns[i])
            # residual of h3 off span(h1, h2) has squared norm r3 / sigma1_sq
            np.testing.assert_allclose(cs.r3[i], cs.sigma1_sq[i] * (g[:, 2] @ g[:, 2]), rtol=1e-10)
            # the projected h3, h4 are orthogonal with equal norms, so their Gram
            # determinant is (r3 / sigma1_sq)**2
            gram = g[:, 2:].T @ g[:, 2:]
            np.testing.assert_allclose(
                np.linalg.det(gram), (cs.r3[i] / cs.sigma1_sq[i]) ** 2, rtol=1e-9
            )

    def test_degenerate_channel_rejected(self):
        h = np.array([[1, 2], [1j, 2j]], dtype=complex)  # second column = 2 * first
        with pytest.raises(DegenerateChannelError):
            summarize_channel(realize_channel(h, 1.0))
        with pytest.raises(DegenerateChannelError):
            summarize_channel(realize_channel(np.zeros((2, 2)), 1.0))

    def test_column_rotation_is_also_degenerate(self):
        # h2 = j * h1 still lies in span(h1 columns) of the real lattice
        h1 = np.array([0.3 - 1j, 0.7 + 0.2j])
        h = np.column_stack([h1, 1j * h1])
        with pytest.raises(DegenerateChannelError):
            summarize_channel(realize_channel(h, 1.0))


class TestProjection:
    def test_identity(self):
        lat = realize_channel(np.eye(2, dtype=complex), 2.0)
        np.testing.assert_array_equal(project_observation(lat, [1.0, 2, 3, 4]).v, [1, 2, 3, 4])

    def test_on_first_column(self, rng):
        lat = _random_lattice(rng, 1)
        h1 = lat.column(1)[0]
        v = project_observation(RealLattice(lat.columns[0], 1.0), h1).v
        assert v[0] == pytest.approx(h1 @ h1)
        assert v[1] == pytest.approx(0, abs=1e-14)

    def test_matches_naive_inner_products(self, rng):
        lat = _random_lattice(rng, 50, lr=3)
        y = rng.standard_normal((50, 6))
        v = project_observation(lat, y).v
        for i in range(50):
            np.testing.assert_allclose(v[i], [lat.columns[i][:, k] @ y[i] for k in range(4)], rtol=1e-12)

    def test_length_mismatch(self, rng):
        with pytest.raises(ValueError, match="does not match"):
            project_observation(_random_lattice(rng, 1, lr=2), np.zeros((1, 6)))


class TestTriangularize:
    def test_identity(self):
        lat = realize_channel(np.eye(2, dtype=complex), 2.0)
        tm = triangularize(*preprocess(lat, np.array([1.0, 2, 3, 4])))
        np.testing.assert_array_equal(tm.y_tilde, [1, 2, 3, 4])
        assert tm.diag_top == 1 and tm.diag_bottom == 1

    def test_substitution(self):
        cs = ChannelSummary(np.float64(1), np.float64(2), np.float64(1), np.float64(0))
        op = ObservationProjection(np.array([0.5, -1.5, 2.25, 4.0]))
        tm = triangularize(cs, op)
        assert tm.y_tilde[2] == 2.25 - 0.5

    def test_rotation_blocks(self, rng):
        lat = _random_lattice(rng, 10)
        cs, op = preprocess(lat, rng.standard_normal((10, 4)))
        a = triangularize(cs, op, Ordering.ANTENNA1_FIRST).upper
        b = triangularize(cs, op, Ordering.ANTENNA2_FIRST).upper
        s1, s2 = cs.s1, cs.s2
        np.testing.assert_array_equal(a, np.stack([np.stack([s1, s2], -1), np.stack([-s2, s1], -1)], -2))
        np.testing.assert_array_equal(b, np.stack([np.stack([s1, -s2], -1), np.stack([s2, s1], -1)], -2))

    @pytest.mark.parametrize("lr", [2, 3])
    def test_reproduces_projected_lattice(self, rng, lr):
        lat = _random_lattice(rng, 100, lr, es=2.5)
        x = rng.standard_normal((100, 4))
        y_r = lat.apply(x)
        tm = triangularize(*preprocess(lat, y_r))
        for i in range(100):
            q, _, _ = materialize_qr(lat.columns[i])
            np.testing.assert_allclose(q.T @ y_r[i], tm.y_tilde[i], rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(tm.matrix()[i] @ x[i], q.T @ y_r[i], rtol=1e-10, atol=1e-12)

    def test_ordering_symmetry(self, rng):
        lat = _random_lattice(rng, 300, lr=3)
        y_r = rng.standard_normal((300, 6))
        shifted = triangularize(*preprocess(lat, y_r), Ordering.ANTENNA2_FIRST)
        swapped = triangularize(*preprocess(lat.swapped(), y_r), Ordering.ANTENNA1_FIRST)
        np.testing.assert_allclose(shifted.y_tilde, swapped.y_tilde, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(shifted.matrix(), swapped.matrix(), rtol=1e-12, atol=1e-12)

    def test_shifted_model_formulas(self, rng):
        lat = _random_lattice(rng, 20)
        cs, op = preprocess(lat, rng.standard_normal((20, 4)))
        v1, v2, v3, v4 = op.v.T
        tm = triangularize(cs, op, Ordering.ANTENNA2_FIRST)
        expect = np.column_stack([
            v3, v4,
            cs.sigma2_sq * v1 - cs.s1 * v3 - cs.s2 * v4,
            cs.sigma2_sq * v2 + cs.s2 * v3 - cs.s1 * v4,
        ])
        np.testing.assert_allclose(tm.y_tilde, expect, rtol=1e-14)
        np.testing.assert_array_equal(tm.diag_top, cs.sigma2_sq)


class TestCost:
    @pytest.mark.parametrize("lr", [2, 4])
    def test_eight_inner_products(self, rng, lr):
        lat = _random_lattice(rng, 1, lr)
        y = rng.standard_normal((1, 2 * lr))
        with count_ops() as ops:
            cs, op = preprocess(lat, y)
            triangularize(cs, op, Ordering.ANTENNA1_FIRST)
            triangularize(cs, op, Ordering.ANTENNA2_FIRST)
        assert ops["inner_product"] == 8

    def test_counts_scale_with_batch(self, rng):
        lat = _random_lattice(rng, 37)
        with count_ops() as ops:
            preprocess(lat, rng.standard_normal((37, 4)))
        assert ops["inner_product"] == 8 * 37

    def test_nothing_recorded_outside_scope(self, rng):
        with count_ops() as ops:
            pass
        preprocess(_random_lattice(rng, 3), rng.standard_normal((3, 4)))
        assert ops["inner_product"] == 0
