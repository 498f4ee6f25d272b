"""Lambda sweeps over shrink modes and the reports built from them.

A sweep runs the denoising pipeline once per (mode, lambda) pair and lays the
metrics out the way the published result tables do: one row per metric, one
column per threshold.
"""
import json
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

from metrics_oracle import TABLE_ROWS, TvReport
from shrink import LIVE, SPARSE, ShrinkConfig, denoise
from volume_grid import Volume

logger = logging.getLogger(__name__)

DEFAULT_LAMBDAS = (1e-2, 1e-1, 1e0, 1e1, 1e2)
MONOTONE_TOLERANCE = 1e-9


class SweepReporter:
    """Collects sweep results and generates summaries and report files."""

    def __init__(self, volume_shape: Sequence[int] = (), window: Optional[Tuple[int, int]] = None,
                 psnr_reference: str = 'input'):
        self.sweep_results = {
            'timestamp': datetime.now().isoformat(),
            'volume_shape': list(volume_shape),
            'window': list(window) if window is not None else None,
            'psnr_reference': psnr_reference,
            'runs': [],
            'errors': [],
            'summary': {},
        }
        self._reports = []

    @property
    def reports(self):
        return list(self._reports)

    def add_result(self, report: TvReport):
        self._reports.append(report)
        self.sweep_results['runs'].append(report.to_dict())

    def add_error(self, mode: str, lam: float, error_message: str):
        self.sweep_results['errors'].append({'mode': mode, 'lambda': lam, 'error': error_message})

    def modes(self):
        return sorted({r.mode for r in self._reports})

    def reports_for(self, mode: str):
        return sorted((r for r in self._reports if r.mode == mode), key=lambda r: r.lam)

    def generate_summary(self):
        """Monotonicity checks per mode and the SparseTV/LiveTV sparsity ordering."""
        summary = {'has_errors': bool(self.sweep_results['errors']), 'modes': {}}
        for mode in self.modes():
            runs = self.reports_for(mode)
            finite_psnr = [r for r in runs if not math.isinf(r.psnr)]
            best = max(finite_psnr, key=lambda r: r.psnr) if finite_psnr else None
            summary['modes'][mode] = {
                'lambdas': [r.lam for r in runs],
                'wavelet_tv_nonincreasing': _nonincreasing([r.wavelet_tv_out for r in runs]),
                'discrete_tv_nonincreasing': _nonincreasing([r.discrete_tv_out for r in runs]),
                'sparsity_nondecreasing': _nonincreasing([-r.sparsity for r in runs]),
                'best_psnr_lambda': best.lam if best else None,
                'best_psnr': best.psnr if best else None,
            }
        if LIVE in summary['modes'] and SPARSE in summary['modes']:
            live = {r.lam: r.sparsity for r in self.reports_for(LIVE)}
            sparse = {r.lam: r.sparsity for r in self.reports_for(SPARSE)}
            shared = sorted(set(live) & set(sparse))
            summary['sparse_at_least_live_sparsity'] = all(sparse[lam] >= live[lam] for lam in shared)
        self.sweep_results['summary'] = summary
        return summary

    def to_frame(self, mode: str) -> pd.DataFrame:
        """Metrics table of one mode: rows are metrics, columns thresholds."""
        runs = self.reports_for(mode)
        frame = pd.DataFrame({r.lam: r.table_column() for r in runs})
        frame = frame.reindex([label for _, label in TABLE_ROWS])
        frame.columns.name = 'lambda'
        return frame

    def render_text(self) -> str:
        sections = []
        for mode in self.modes():
            frame = self.to_frame(mode)
            sections.append(f"{mode} (window {self.sweep_results['window']}, "
                            f"PSNR against {self.sweep_results['psnr_reference']})\n{frame.to_string(float_format=_fmt)}")
        return '\n\n'.join(sections)

    def save(self, output_dir='.', filename: Optional[str] = None) -> Path:
        if not self.sweep_results['summary']:
            self.generate_summary()
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        filename = filename or f"sweep_report_{datetime.now().strftime('%Y%m%d_%H%M%S')}.json"
        report_file = output_dir / filename
        with open(report_file, 'w') as f:
            json.dump(self.sweep_results, f, indent=2)
        logger.info(f"Report saved to {report_file}")
        return report_file


def _nonincreasing(values) -> bool:
    return all(b <= a + MONOTONE_TOLERANCE * max(1.0, abs(a)) for a, b in zip(values, values[1:]))


def _fmt(value: float) -> str:
    return f"{value:.4g}"


def run_sweep(volume: Volume, lambdas: Iterable[float] = DEFAULT_LAMBDAS,
              modes: Iterable[str] = (LIVE, SPARSE), window: Optional[Tuple[int, int]] = None,
              reference: Optional[Volume] = None, fill: float = 0.0,
              progress: bool = True) -> SweepReporter:
    """Denoise ``volume`` once per (mode, lambda) and collect the reports."""
    lambdas = sorted(float(lam) for lam in lambdas)
    modes = list(modes)
    n0, n1 = window if window is not None else (None, None)
    reporter = SweepReporter(volume.dims, window, 'clean' if reference is not None else 'input')

    pbar = tqdm(total=len(lambdas) * len(modes), desc="Lambda sweep", unit="run", disable=not progress)
    for mode in modes:
        for lam in lambdas:
            try:
                _, report = denoise(volume, ShrinkConfig(lam, mode, n0, n1), fill=fill, reference=reference)
                reporter.add_result(report)
                if reporter.sweep_results['window'] is None:
                    reporter.sweep_results['window'] = list(report.window)
            except ValueError as e:
                logger.error(f"Sweep run mode={mode} lambda={lam:g} failed: {e}")
                reporter.add_error(mode, lam, str(e))
            pbar.update(1)
    pbar.close()

    reporter.generate_summary()
    return reporter
