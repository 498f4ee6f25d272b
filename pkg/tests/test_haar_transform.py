import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import LevelRangeError, NotDyadicError, PyramidStructureError
from haar_transform import (WaveletPyramid, WaveletType, detail_types, forward, gradient_coefficients,
                            higher_order_indices, inverse, level_alphas)
from metrics_oracle import closed_form_moment
from phantoms import phantom
from volume_grid import Volume


def random_volume(s, m, seed=0):
    return Volume(np.random.default_rng(seed).standard_normal((2 ** m,) * s))


class TestWaveletType(unittest.TestCase):

    def test_index_round_trip_and_order(self):
        """theta maps to sum(theta_j << (j - 1)) and back."""
        t = WaveletType((1, 0, 1))
        self.assertEqual(t.index, 5)
        self.assertEqual(t.order, 2)
        self.assertEqual(WaveletType.from_index(5, 3), t)

    def test_unit_types(self):
        self.assertEqual(WaveletType.unit(0, 2).theta, (1, 0))
        self.assertEqual(WaveletType.unit(1, 2).theta, (0, 1))
        self.assertEqual(WaveletType.unit(2, 3).index, 4)

    def test_detail_types_in_bit_pattern_order(self):
        self.assertEqual([t.theta for t in detail_types(2)], [(1, 0), (0, 1), (1, 1)])
        self.assertEqual(len(list(detail_types(3))), 7)

    def test_higher_order_indices(self):
        self.assertEqual(higher_order_indices(1), ())
        self.assertEqual(higher_order_indices(2), (3,))
        self.assertEqual(higher_order_indices(3), (3, 5, 6, 7))


class TestForwardTransform(unittest.TestCase):

    def test_two_by_two_example(self):
        """[[a, b], [c, d]] gives the four normalised sums and differences."""
        a, b, c, d = 1.0, 2.0, 3.0, 5.0
        p = forward(Volume(np.array([[a, b], [c, d]])))
        self.assertAlmostEqual(p.scaling_value, (a + b + c + d) / 2)
        self.assertAlmostEqual(p.coefficient(0, (1, 0), (0, 0)), (a - b + c - d) / 2)
        self.assertAlmostEqual(p.coefficient(0, (0, 1), (0, 0)), (a + b - c - d) / 2)
        self.assertAlmostEqual(p.coefficient(0, (1, 1), (0, 0)), (a - b - c + d) / 2)

    def test_one_dimensional_pair(self):
        p = forward(Volume(np.array([1.0, 2.0])))
        self.assertAlmostEqual(p.scaling_value, 3 / np.sqrt(2))
        self.assertAlmostEqual(p.detail[0][0, 0], -1 / np.sqrt(2))

    def test_scaling_only_pyramid_inverts_to_constant(self):
        m, k = 3, 1.5
        values = np.zeros(4 ** m)
        values[0] = k * 2 ** m
        v = inverse(WaveletPyramid.from_vector(2, m, values))
        np.testing.assert_allclose(v.data, k)

    def test_constant_volume(self):
        """A constant k on a 2-D grid of side 2**m has scaling k * 2**m and no details."""
        m, k = 3, 2.5
        p = forward(phantom('constant', (2 ** m,) * 2, value=k))
        self.assertAlmostEqual(p.scaling_value, k * 2 ** m)
        for block in p.detail:
            np.testing.assert_allclose(block, 0.0, atol=1e-12)

    def test_constant_line_scaling(self):
        """In one dimension the scaling coefficient of a constant is k * 2**(m/2)."""
        m, k = 4, 3.0
        p = forward(phantom('constant', (2 ** m,), value=k))
        self.assertAlmostEqual(p.scaling_value, k * 2 ** (m / 2))

    def test_pyramid_shapes(self):
        p = forward(random_volume(3, 3))
        self.assertEqual(p.m, 3)
        self.assertEqual(p.n1, 2)
        self.assertEqual(p.scaling.shape, (1, 1, 1))
        self.assertEqual([block.shape for block in p.detail], [(7, 1, 1, 1), (7, 2, 2, 2), (7, 4, 4, 4)])
        self.assertEqual(p.coefficient_count, 8 ** 3)

    def test_single_voxel(self):
        """m = 0: the pyramid is the sample itself."""
        p = forward(Volume(np.array([[4.0]])))
        self.assertEqual(p.detail, ())
        self.assertEqual(p.scaling_value, 4.0)
        self.assertEqual(inverse(p).data[0, 0], 4.0)

    def test_not_dyadic_rejected(self):
        with self.assertRaises(NotDyadicError):
            forward(Volume(np.zeros((4, 8))))
        with self.assertRaises(NotDyadicError):
            forward(Volume(np.zeros(6)))

    def test_level_out_of_range(self):
        p = forward(random_volume(2, 2))
        with self.assertRaises(LevelRangeError):
            p.coefficient(2, (1, 0), (0, 0))
        with self.assertRaises(LevelRangeError):
            gradient_coefficients(p, -1)
        with self.assertRaises(PyramidStructureError):
            p.coefficient(0, (0, 0), (0, 0))

    def test_gradient_coefficients_stack_unit_types(self):
        p = forward(random_volume(3, 2, seed=3))
        vecs = gradient_coefficients(p, 1)
        self.assertEqual(vecs.shape, (2, 2, 2, 3))
        self.assertEqual(vecs[1, 0, 1, 2], p.coefficient(1, (0, 0, 1), (1, 0, 1)))
        self.assertEqual(vecs[0, 1, 0, 0], p.coefficient(1, (1, 0, 0), (0, 1, 0)))

    def test_level_alphas_lexicographic(self):
        self.assertEqual(list(level_alphas(2, 1)), [(0, 0), (0, 1), (1, 0), (1, 1)])

    def test_linear_function_coefficients_match_moments(self):
        """For f = x_1 the eps_1 coefficient is the first moment of the wavelet everywhere."""
        s, m = 2, 4
        p = forward(phantom('linear', (2 ** m,) * s, continuum=True, slope=(1.0, 0.0)))
        for n in range(m):
            expected = closed_form_moment(s, n, (1, 0), (1, 0))
            np.testing.assert_allclose(p.detail[n][0], expected, rtol=1e-9)
            np.testing.assert_allclose(p.detail[n][1], 0.0, atol=1e-12)
            np.testing.assert_allclose(p.detail[n][2], 0.0, atol=1e-12)

    def test_mixed_coefficient_matches_moment(self):
        """For f = x_1 x_2 the (1, 1) coefficient equals the (1, 1) moment."""
        s, m = 2, 4
        side = 2 ** m
        x = (np.arange(side) + 0.5) / side
        data = np.outer(x, x) * 2.0 ** (-m * s / 2)
        p = forward(Volume(data))
        for n in range(m):
            expected = closed_form_moment(s, n, (1, 1), (1, 1))
            np.testing.assert_allclose(p.detail[n][2], expected, rtol=1e-9)


class TestPerfectReconstruction(unittest.TestCase):

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=4),
           st.integers(min_value=0, max_value=1000))
    def test_inverse_of_forward_is_identity(self, s, m, seed):
        """inverse(forward(v)) reproduces v to rounding."""
        if s == 3:
            m = min(m, 3)
        v = random_volume(s, m, seed)
        np.testing.assert_allclose(inverse(forward(v)).data, v.data, atol=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=1, max_value=3), st.integers(min_value=1, max_value=3),
           st.integers(min_value=0, max_value=1000))
    def test_transform_preserves_energy(self, s, m, seed):
        """The transform is orthonormal, so the coefficient norm equals the sample norm."""
        v = random_volume(s, m, seed)
        p = forward(v)
        energy = np.sum(v.data ** 2)
        self.assertLessEqual(abs(np.sum(p.to_vector() ** 2) - energy), 1e-12 * energy)

    def test_random_volumes_reconstruct_and_keep_energy(self):
        """200 volumes over s = 1..3 and m = 1..5: relative errors 1e-10 (samples) and 1e-12 (energy)."""
        shapes = [(s, m) for s in (1, 2, 3) for m in range(1, 6)]
        for trial in range(200):
            s, m = shapes[trial % len(shapes)]
            v = random_volume(s, m, seed=trial)
            p = forward(v)
            restored = inverse(p).data
            norm = np.linalg.norm(v.data)
            self.assertLessEqual(np.linalg.norm(restored - v.data), 1e-10 * norm, msg=f"s={s} m={m}")
            energy = np.sum(v.data ** 2)
            self.assertLessEqual(abs(np.sum(p.to_vector() ** 2) - energy), 1e-12 * energy, msg=f"s={s} m={m}")

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=1, max_value=3), st.floats(-10, 10), st.floats(-10, 10),
           st.integers(min_value=0, max_value=1000))
    def test_transform_is_linear(self, s, a, b, seed):
        u, v = random_volume(s, 2, seed), random_volume(s, 2, seed + 1)
        combined = forward(Volume(a * u.data + b * v.data)).to_vector()
        separate = a * forward(u).to_vector() + b * forward(v).to_vector()
        np.testing.assert_allclose(combined, separate, atol=1e-10)

    def test_vector_round_trip_keeps_layout(self):
        p = forward(random_volume(2, 3, seed=7))
        values = p.to_vector()
        self.assertEqual(values[0], p.scaling_value)
        np.testing.assert_array_equal(values[1:4], p.detail[0].ravel())
        q = WaveletPyramid.from_vector(2, 3, values)
        np.testing.assert_array_equal(inverse(q).data, inverse(p).data)

    def test_from_vector_rejects_wrong_size(self):
        with self.assertRaises(PyramidStructureError):
            WaveletPyramid.from_vector(2, 3, np.zeros(10))

    def test_padding_metadata_travels_through_pyramid(self):
        v = Volume(np.ones((4, 4)), origin_extent=(3, 2))
        self.assertEqual(inverse(forward(v)).origin_extent, (3, 2))


if __name__ == '__main__':
    unittest.main()
