import json
import os
import tempfile
import unittest

from metrics_oracle import TABLE_ROWS
from phantoms import add_noise, phantom
from shrink import HARD, LIVE, SPARSE
from sweep_report import SweepReporter, run_sweep
from utils.plot_sweep import plot_gradients, plot_sweep


class TestSweep(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.clean = phantom('sphere', (16, 16, 16), radius=0.3)
        cls.noisy = add_noise(cls.clean, 0.2, seed=1)
        cls.lambdas = [0.01, 0.1, 1.0, 10.0, 100.0]
        cls.reporter = run_sweep(cls.noisy, cls.lambdas, reference=cls.clean, progress=False)

    def test_one_run_per_mode_and_lambda(self):
        self.assertEqual(len(self.reporter.reports), 2 * len(self.lambdas))
        self.assertEqual(self.reporter.modes(), [LIVE, SPARSE])
        self.assertEqual(self.reporter.sweep_results['window'], [0, 3])
        self.assertEqual(self.reporter.sweep_results['psnr_reference'], 'clean')

    def test_metrics_are_monotone_in_lambda(self):
        summary = self.reporter.sweep_results['summary']
        for mode in (LIVE, SPARSE):
            self.assertTrue(summary['modes'][mode]['wavelet_tv_nonincreasing'], msg=mode)
            self.assertTrue(summary['modes'][mode]['sparsity_nondecreasing'], msg=mode)
        self.assertTrue(summary['modes'][SPARSE]['discrete_tv_nonincreasing'])
        tvs = [r.discrete_tv_out for r in self.reporter.reports_for(SPARSE)]
        self.assertLess(tvs[-1], tvs[0])
        self.assertTrue(summary['sparse_at_least_live_sparsity'])

    def test_table_layout(self):
        frame = self.reporter.to_frame(SPARSE)
        self.assertEqual(list(frame.index), [label for _, label in TABLE_ROWS])
        self.assertEqual(list(frame.columns), self.lambdas)
        text = self.reporter.render_text()
        self.assertIn('Wavelet Coefficient Sparsity', text)
        self.assertIn('live', text)

    def test_save_writes_json_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = self.reporter.save(tmp, 'sweep_report_test.json')
            with open(path) as fh:
                data = json.load(fh)
        self.assertEqual(len(data['runs']), 2 * len(self.lambdas))
        self.assertIn('summary', data)
        self.assertEqual(data['volume_shape'], [16, 16, 16])

    def test_errors_are_recorded(self):
        reporter = run_sweep(self.noisy, [1.0], modes=[HARD], window=(0, 9), progress=False)
        self.assertEqual(reporter.reports, [])
        self.assertEqual(len(reporter.sweep_results['errors']), 1)
        self.assertTrue(reporter.sweep_results['summary']['has_errors'])

    def test_empty_reporter_summary(self):
        reporter = SweepReporter((4, 4))
        self.assertEqual(reporter.generate_summary(), {'has_errors': False, 'modes': {}})


class TestCharts(unittest.TestCase):

    def test_sweep_chart_written(self):
        reporter = run_sweep(phantom('gaussian_bump', (16, 16)), [0.1, 1.0], progress=False)
        with tempfile.TemporaryDirectory() as tmp:
            path = plot_sweep(reporter.sweep_results, output_dir=tmp, filename='chart.png')
            self.assertTrue(os.path.exists(path))

    def test_gradient_quiver_written(self):
        from gradient_tv import renormalized_gradients
        from haar_transform import forward
        level = renormalized_gradients(forward(phantom('gaussian_bump', (16, 16))), 2)
        with tempfile.TemporaryDirectory() as tmp:
            path = plot_gradients(level, os.path.join(tmp, 'quiver.png'), voxel_side=16)
            self.assertTrue(os.path.exists(path))

    def test_no_runs_no_chart(self):
        self.assertIsNone(plot_sweep({'runs': []}))


if __name__ == '__main__':
    unittest.main()
