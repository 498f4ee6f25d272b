#!/usr/bin/env python3
"""
Sweep and gradient charts

Plots the metric curves of a saved sweep report and quiver plots of
gradient samples.
"""

import json
import logging
import sys
from datetime import datetime
from pathlib import Path

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

# Define project root (assuming script is in utils/ or project root)
PROJECT_ROOT = Path(__file__).resolve().parents[1] if Path(__file__).resolve().parent.name == 'utils' else Path(__file__).resolve().parent

logger = logging.getLogger(__name__)
logging.getLogger('matplotlib').setLevel(logging.WARNING)
logging.getLogger('PIL').setLevel(logging.WARNING)

PANELS = (
    ('relative_wavelet_tv', 'Relative Approx. Wavelet TV Norm'),
    ('relative_discrete_tv', 'Relative Discrete TV Norm'),
    ('psnr', 'PSNR (dB)'),
    ('sparsity', 'Wavelet Coefficient Sparsity'),
)


def plot_sweep(sweep_results, output_dir=PROJECT_ROOT / 'charts', filename=None):
    """Plot every table metric against lambda, one line per mode."""
    runs = sweep_results.get('runs', [])
    if not runs:
        logger.warning("No runs available for charts")
        return None

    df = pd.DataFrame(runs)
    Path(output_dir).mkdir(parents=True, exist_ok=True)

    fig, axes = plt.subplots(2, 2, figsize=(12, 8))
    fig.suptitle(f"Lambda sweep on volume {tuple(sweep_results.get('volume_shape', []))}", fontsize=14)

    for ax, (column, title) in zip(axes.flat, PANELS):
        for mode, group in df.groupby('mode'):
            group = group.sort_values('lam')
            ax.plot(group['lam'], group[column], marker='o', label=mode)
        ax.set_xscale('log')
        ax.set_title(title)
        ax.set_xlabel('lambda')
        ax.legend()

    plt.tight_layout()
    filename = filename or f"sweep_charts_{datetime.now().strftime('%Y%m%d_%H%M%S')}.png"
    chart_path = Path(output_dir) / filename
    plt.savefig(chart_path, dpi=150, bbox_inches='tight')
    plt.close(fig)

    logger.info(f"Charts saved to: {chart_path}")
    return chart_path


def plot_gradients(level_gradients, path, voxel_side=None):
    """Quiver plot of one level of two-dimensional gradient samples."""
    if level_gradients.s != 2:
        raise ValueError(f"Quiver plots need two-dimensional gradients, got s={level_gradients.s}")
    positions = level_gradients.positions.reshape(-1, 2)
    vecs = level_gradients.vecs.reshape(-1, 2)
    if voxel_side:
        positions = positions * voxel_side

    fig, ax = plt.subplots(figsize=(8, 8))
    ax.quiver(positions[:, 0], positions[:, 1], vecs[:, 0], vecs[:, 1], np.linalg.norm(vecs, axis=1),
              angles='xy', pivot='mid', cmap='viridis')
    ax.set_aspect('equal')
    ax.invert_yaxis()
    ax.set_title(f"Level {level_gradients.level} gradients ({level_gradients.mode} mode)")
    ax.set_xlabel('x_1')
    ax.set_ylabel('x_2')
    plt.savefig(path, dpi=150, bbox_inches='tight')
    plt.close(fig)
    logger.info(f"Gradient plot saved to: {path}")
    return Path(path)


def main():
    """Plot the most recent sweep report in the project root or the given directory."""
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
    search_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else PROJECT_ROOT
    report_files = sorted(search_dir.glob('sweep_report_*.json'), reverse=True)
    if not report_files:
        logger.error(f"No sweep reports found in {search_dir}")
        return 1

    with open(report_files[0], 'r') as f:
        sweep_results = json.load(f)

    chart_path = plot_sweep(sweep_results, output_dir=search_dir / 'charts')
    print(f"\nCharts saved to: {chart_path}")
    return 0


if __name__ == '__main__':
    sys.exit(main())
