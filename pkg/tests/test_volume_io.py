import json
import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from errors import HeaderFormatError, PayloadSizeError, SampleTypeError, SliceRangeError
from gradient_tv import gradient_field
from haar_transform import forward
from phantoms import phantom
from volume_grid import Volume, pad_to_dyadic
from volume_io import (VolumeHeader, export_gradients, export_slice, gradient_frame, load_pyramid, load_volume,
                       read_header, save_pyramid, save_volume, slice_image, to_gray)


class VolumeFileTestCase(unittest.TestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp, name)

    def write_raw(self, name, header, payload):
        with open(self.path(f'{name}.json'), 'w') as fh:
            json.dump(header, fh)
        with open(self.path(f'{name}.raw'), 'wb') as fh:
            fh.write(payload)
        return self.path(f'{name}.json'), self.path(f'{name}.raw')


class TestVolumeFiles(VolumeFileTestCase):

    def test_float_volume_survives_save_and_load(self):
        v = Volume(np.random.default_rng(0).standard_normal((3, 4, 5)))
        save_volume(v, self.path('v.json'), self.path('v.raw'))
        loaded = load_volume(self.path('v.json'), self.path('v.raw'))
        np.testing.assert_array_equal(loaded.data, v.data)
        self.assertEqual(os.path.getsize(self.path('v.raw')), 3 * 4 * 5 * 8)

    def test_payload_is_row_major_little_endian(self):
        v = Volume(np.array([[1.0, 2.0], [3.0, 4.0]]))
        save_volume(v, self.path('v.json'), self.path('v.raw'), sample_type='u16')
        with open(self.path('v.raw'), 'rb') as fh:
            self.assertEqual(fh.read(), b'\x01\x00\x02\x00\x03\x00\x04\x00')

    def test_integer_samples_round_half_even_and_clamp(self):
        v = Volume(np.array([-3.0, 0.5, 1.5, 2.4, 300.0]))
        save_volume(v, self.path('v.json'), self.path('v.raw'), sample_type='u8')
        loaded = load_volume(self.path('v.json'), self.path('v.raw'))
        np.testing.assert_array_equal(loaded.data, [0.0, 0.0, 2.0, 2.0, 255.0])

    def test_affine_value_map(self):
        header = {'shape': [3], 'sample_type': 'u8', 'value_offset': -1.0, 'value_scale': 0.5}
        loaded = load_volume(*self.write_raw('a', header, bytes([0, 2, 10])))
        np.testing.assert_allclose(loaded.data, [-1.0, 0.0, 4.0])

    def test_padding_extent_is_kept(self):
        padded = pad_to_dyadic(Volume(np.ones((3, 3))))
        save_volume(padded, self.path('p.json'), self.path('p.raw'))
        self.assertEqual(load_volume(self.path('p.json'), self.path('p.raw')).origin_extent, (3, 3))

    def test_short_payload(self):
        with self.assertRaisesRegex(PayloadSizeError, 'needs 32'):
            load_volume(*self.write_raw('s', {'shape': [2, 2]}, b'\x00' * 24))

    def test_unknown_sample_type(self):
        with self.assertRaises(SampleTypeError):
            load_volume(*self.write_raw('t', {'shape': [2], 'sample_type': 'i32'}, b'\x00' * 8))

    def test_malformed_header(self):
        with open(self.path('bad.json'), 'w') as fh:
            fh.write('{"shape": [2, 2],')
        with self.assertRaisesRegex(HeaderFormatError, 'offset'):
            read_header(self.path('bad.json'))

    def test_unknown_header_key(self):
        with self.assertRaises(HeaderFormatError):
            load_volume(*self.write_raw('k', {'shape': [1], 'colour': 'red'}, b'\x00' * 8))

    def test_origin_extent_must_fit_shape(self):
        for extent in ([3, 9], [0, 2], [2]):
            with self.assertRaises(HeaderFormatError, msg=str(extent)):
                load_volume(*self.write_raw(f'o{len(extent)}{extent[0]}',
                                            {'shape': [4, 4], 'origin_extent': extent}, b'\x00' * 128))
        v = load_volume(*self.write_raw('fits', {'shape': [4, 4], 'origin_extent': [3, 4]}, b'\x00' * 128))
        self.assertEqual(v.origin_extent, (3, 4))

    def test_big_endian_rejected(self):
        with self.assertRaises(HeaderFormatError):
            VolumeHeader(shape=(2,), byte_order='big')


class TestPyramidFiles(VolumeFileTestCase):

    def test_pyramid_survives_save_and_load(self):
        p = forward(pad_to_dyadic(phantom('sphere', (6, 6, 6))))
        save_pyramid(p, self.path('p.json'), self.path('p.raw'))
        q = load_pyramid(self.path('p.json'), self.path('p.raw'))
        self.assertEqual((q.s, q.m, q.origin_extent), (3, 3, (6, 6, 6)))
        np.testing.assert_array_equal(q.to_vector(), p.to_vector())

    def test_volume_header_is_not_a_pyramid(self):
        save_volume(phantom('constant', (4,)), self.path('v.json'), self.path('v.raw'))
        with self.assertRaises(HeaderFormatError):
            load_pyramid(self.path('v.json'), self.path('v.raw'))


class TestExports(VolumeFileTestCase):

    def test_gray_mapping(self):
        gray = to_gray(np.array([[0.0, 1.0], [2.0, 4.0]]))
        np.testing.assert_array_equal(gray, [[0, 64], [128, 255]])
        np.testing.assert_array_equal(to_gray(np.ones((2, 2))), 128)
        self.assertEqual(to_gray(np.array([[0.0, 1.0, 4.0]]), gamma=2.0)[0, 1], 128)

    def test_slice_selection(self):
        v = Volume(np.arange(24.0).reshape(2, 3, 4))
        np.testing.assert_array_equal(slice_image(v, 0, 1), v.data[1])
        np.testing.assert_array_equal(slice_image(v), v.data[:, :, 2])
        with self.assertRaises(SliceRangeError):
            slice_image(v, 1, 3)
        with self.assertRaises(SliceRangeError):
            slice_image(v, 3, 0)

    def test_pgm_export(self):
        v = phantom('sphere', (8, 8, 8))
        export_slice(v, 0, 4, self.path('s.pgm'))
        with open(self.path('s.pgm'), 'rb') as fh:
            data = fh.read()
        self.assertTrue(data.startswith(b'P5\n8 8\n255\n'))
        self.assertEqual(len(data), len(b'P5\n8 8\n255\n') + 64)

    def test_gradient_csv(self):
        p = forward(phantom('linear', (8, 8), continuum=True, slope=(1.0, -1.0)))
        field = gradient_field(p, [0, 1])
        frame = gradient_frame(field)
        self.assertEqual(list(frame.columns), ['level', 'alpha_1', 'alpha_2', 'x_1', 'x_2', 'v_1', 'v_2'])
        self.assertEqual(len(frame), 1 + 4)
        self.assertEqual(frame['level'].tolist(), [0, 1, 1, 1, 1])
        self.assertEqual(frame[['alpha_1', 'alpha_2']].values.tolist()[1:], [[0, 0], [0, 1], [1, 0], [1, 1]])

        export_gradients(field, self.path('g.csv'))
        loaded = pd.read_csv(self.path('g.csv'))
        np.testing.assert_allclose(loaded[['v_1', 'v_2']].values, np.tile([1.0, -1.0], (5, 1)), atol=1e-12)

    def test_empty_gradient_field_writes_header_only(self):
        export_gradients({}, self.path('empty.csv'), s=2)
        with open(self.path('empty.csv')) as fh:
            self.assertEqual(fh.read().strip(), 'level,alpha_1,alpha_2,x_1,x_2,v_1,v_2')

    def test_u8_payload_loads_as_float(self):
        loaded = load_volume(*self.write_raw('b', {'shape': [2, 2], 'sample_type': 'u8'}, bytes([1, 2, 3, 4])))
        np.testing.assert_array_equal(loaded.data, [[1.0, 2.0], [3.0, 4.0]])


if __name__ == '__main__':
    unittest.main()
