#!/usr/bin/env python3
"""Command-line interface for Haar wavelet TV estimation and denoising.

Volumes are addressed by a base path: ``BASE.json`` is the header sidecar and
``BASE.raw`` the payload. Every command prints a human-readable table followed
by one line of JSON.
"""
import argparse
import json
import logging
import math
import os
import sys
import traceback
from typing import List, Optional

import pandas as pd
from dotenv import load_dotenv

from errors import LiveTVError
from gradient_tv import (GRADIENT_MODES, SMOOTH, default_window, gradient_field, gradient_magnitude_volume,
                         make_level_weights, tv_estimate_averaged, tv_estimate_level)
from haar_transform import forward, inverse
from metrics_oracle import coefficient_sparsity, discrete_tv, psnr, relative_l2_error
from phantoms import PHANTOM_KINDS, add_noise, phantom
from shrink import MODES, ShrinkConfig, denoise
from sweep_report import DEFAULT_LAMBDAS, run_sweep
from volume_grid import crop_to_origin, pad_to_dyadic
from volume_io import (SAMPLE_TYPES, export_gradients, export_slice, load_pyramid,
                       load_volume, read_header, save_pyramid, save_volume)

# Load environment variables
load_dotenv()

logger = logging.getLogger('livetv')

# Default values from environment variables
DEFAULT_LOG_LEVEL = os.getenv('LIVETV_LOG_LEVEL', 'INFO')
DEFAULT_LOG_FILE = os.getenv('LIVETV_LOG_FILE')
DEFAULT_SEED = int(os.getenv('LIVETV_SEED', '0'))
DEFAULT_PAD_FILL = float(os.getenv('LIVETV_PAD_FILL', '0.0'))
DEFAULT_SAMPLE_TYPE = os.getenv('LIVETV_SAMPLE_TYPE', 'f64')
DEFAULT_REPORT_DIR = os.getenv('LIVETV_REPORT_DIR', '.')

# CLI mode names for the shrink modes
MODE_ALIASES = {'livetv': 'live', 'sparsetv': 'sparse'}


def configure_logging(level: str = DEFAULT_LOG_LEVEL, log_file: Optional[str] = DEFAULT_LOG_FILE):
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )
    logging.getLogger('matplotlib').setLevel(logging.WARNING)
    logging.getLogger('PIL').setLevel(logging.WARNING)


def volume_paths(base: str):
    return f"{base}.json", f"{base}.raw"


def emit(title: str, result: dict):
    """Print a table for people and a JSON line for scripts."""
    table = pd.Series({k: v for k, v in result.items() if not isinstance(v, (list, dict))}, dtype=object)
    print(f"=== {title} ===")
    print(table.to_string())
    print(json.dumps(_json_safe(result), sort_keys=True))


def _json_safe(value):
    if isinstance(value, float) and math.isinf(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _parse_param(text: str):
    key, _, raw = text.partition('=')
    if not key or not raw:
        raise argparse.ArgumentTypeError(f"Expected key=value, got '{text}'")
    values = [float(part) for part in raw.split(',')]
    return key, values[0] if len(values) == 1 else values


def _mode(text: str) -> str:
    mode = MODE_ALIASES.get(text.lower(), text.lower())
    if mode not in MODES:
        raise argparse.ArgumentTypeError(f"Unknown mode '{text}', expected one of {MODES}")
    return mode


def cmd_phantom(args):
    params = dict(args.param or [])
    if 'axis' in params:
        params['axis'] = int(params['axis'])
    if 'index' in params:
        params['index'] = int(params['index'])
    volume = phantom(args.kind, args.dims, continuum=args.continuum, **params)
    if args.sigma:
        volume = add_noise(volume, args.sigma, args.seed)
    save_volume(volume, *volume_paths(args.output), sample_type=args.sample_type)
    emit('phantom', {'kind': args.kind, 'dims': list(volume.dims), 'sigma': args.sigma,
                     'seed': args.seed, 'discrete_tv': discrete_tv(volume)})


def cmd_add_noise(args):
    volume = add_noise(load_volume(*volume_paths(args.input)), args.sigma, args.seed)
    save_volume(volume, *volume_paths(args.output), sample_type=args.sample_type)
    emit('add-noise', {'sigma': args.sigma, 'seed': args.seed, 'dims': list(volume.dims)})


def cmd_decompose(args):
    volume = pad_to_dyadic(load_volume(*volume_paths(args.input)), args.fill)
    pyramid = forward(volume)
    save_pyramid(pyramid, *volume_paths(args.output))
    emit('decompose', {'s': pyramid.s, 'm': pyramid.m, 'coefficients': pyramid.coefficient_count,
                       'sparsity': coefficient_sparsity(pyramid)})


def cmd_reconstruct(args):
    pyramid = load_pyramid(*volume_paths(args.input))
    volume = inverse(pyramid)
    if not args.keep_padding and volume.origin_extent is not None:
        volume = crop_to_origin(volume)
    save_volume(volume, *volume_paths(args.output), sample_type=args.sample_type)
    emit('reconstruct', {'dims': list(volume.dims)})


def _pyramid_from_input(path: str, fill: float):
    header_path, data_path = volume_paths(path)
    if read_header(header_path).kind == 'pyramid':
        return load_pyramid(header_path, data_path)
    return forward(pad_to_dyadic(load_volume(header_path, data_path), fill))


def cmd_tv_estimate(args):
    pyramid = _pyramid_from_input(args.input, args.fill)
    if args.level is not None:
        value = tv_estimate_level(pyramid, args.level)
        result = {'level': args.level, 'wavelet_tv': value}
    else:
        weights = make_level_weights(*args.window) if args.window else default_window(pyramid)
        value = tv_estimate_averaged(pyramid, weights)
        result = {'window': [weights.n0, weights.n1], 'weights': list(weights.mu), 'wavelet_tv': value}
    emit('tv-estimate', result)


def cmd_gradients(args):
    pyramid = _pyramid_from_input(args.input, args.fill)
    levels = [args.level] if args.level is not None else range(pyramid.m)
    field = gradient_field(pyramid, levels, args.mode)
    export_gradients(field, args.output, s=pyramid.s)
    if args.plot:
        from utils.plot_sweep import plot_gradients
        level = max(field)
        plot_gradients(field[level], args.plot, voxel_side=2 ** pyramid.m)
    if args.magnitude and field:
        magnitude = gradient_magnitude_volume(pyramid, max(field), args.mode)
        if magnitude.origin_extent is not None:
            magnitude = crop_to_origin(magnitude)
        save_volume(magnitude, *volume_paths(args.magnitude))
    emit('gradients', {'mode': args.mode, 'levels': list(levels),
                       'samples': sum(g.vecs.size // pyramid.s for g in field.values())})


def cmd_denoise(args):
    volume = load_volume(*volume_paths(args.input))
    reference = load_volume(*volume_paths(args.reference)) if args.reference else None
    n0, n1 = args.window if args.window else (None, None)
    cfg = ShrinkConfig(args.lam, args.mode, n0, n1)
    denoised, report = denoise(volume, cfg, fill=args.fill, reference=reference)
    save_volume(denoised, *volume_paths(args.output), sample_type=args.sample_type)
    if args.report:
        with open(args.report, 'w') as fh:
            json.dump(_json_safe(report.to_dict()), fh, indent=2, sort_keys=True)
        logger.info(f"Report saved to {args.report}")
    emit('denoise', report.to_dict())


def cmd_metrics(args):
    reference = load_volume(*volume_paths(args.reference))
    test = load_volume(*volume_paths(args.test))
    ref_pyr = forward(pad_to_dyadic(reference, args.fill))
    test_pyr = forward(pad_to_dyadic(test, args.fill))
    weights = default_window(ref_pyr)
    tv_in, tv_out = discrete_tv(reference), discrete_tv(test)
    wtv_in, wtv_out = tv_estimate_averaged(ref_pyr, weights), tv_estimate_averaged(test_pyr, weights)
    emit('metrics', {
        'relative_discrete_tv': tv_out / tv_in if tv_in else None,
        'relative_wavelet_tv': wtv_out / wtv_in if wtv_in else None,
        'rel_l2_error': relative_l2_error(reference, test),
        'psnr': psnr(reference, test),
        'sparsity': coefficient_sparsity(test_pyr),
        'discrete_tv_reference': tv_in,
        'discrete_tv_test': tv_out,
        'wavelet_tv_reference': wtv_in,
        'wavelet_tv_test': wtv_out,
        'window': [weights.n0, weights.n1],
    })


def cmd_slice(args):
    volume = load_volume(*volume_paths(args.input))
    export_slice(volume, args.axis, args.index, args.output, gamma=args.gamma, log_scale=args.log)
    emit('slice', {'axis': args.axis, 'index': args.index, 'output': args.output})


def cmd_sweep(args):
    volume = load_volume(*volume_paths(args.input))
    reference = load_volume(*volume_paths(args.reference)) if args.reference else None
    reporter = run_sweep(volume, args.lambdas, args.modes, window=tuple(args.window) if args.window else None,
                         reference=reference, fill=args.fill, progress=not args.no_progress)
    print(reporter.render_text())
    report_file = reporter.save(args.report_dir, args.report_name)
    if args.plot:
        from utils.plot_sweep import plot_sweep
        plot_sweep(reporter.sweep_results, output_dir=args.report_dir)
    emit('sweep', {'report': str(report_file), 'runs': len(reporter.reports),
                   'summary': reporter.sweep_results['summary']})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Haar wavelet TV estimation and LiveTV/SparseTV denoising')
    parser.add_argument('--verbose', action='store_true', help='Enable debug logging')
    parser.add_argument('--log-file', default=DEFAULT_LOG_FILE, help='Also log to this file')
    sub = parser.add_subparsers(dest='command', required=True)

    def add_output_type(p):
        p.add_argument('--sample-type', default=DEFAULT_SAMPLE_TYPE, choices=sorted(SAMPLE_TYPES),
                       help=f'Sample type of written volumes (default: {DEFAULT_SAMPLE_TYPE})')

    def add_fill(p):
        p.add_argument('--fill', type=float, default=DEFAULT_PAD_FILL,
                       help=f'Value used when padding to a dyadic cube (default: {DEFAULT_PAD_FILL})')

    p = sub.add_parser('phantom', help='Generate a synthetic volume')
    p.add_argument('--kind', required=True, choices=PHANTOM_KINDS)
    p.add_argument('--dims', required=True, type=int, nargs='+')
    p.add_argument('--param', type=_parse_param, action='append', help='Phantom parameter key=value[,value...]')
    p.add_argument('--continuum', action='store_true', help='Scale samples to the unit-cube model')
    p.add_argument('--sigma', type=float, default=0.0, help='Gaussian noise level (default: 0)')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED)
    p.add_argument('--output', required=True)
    add_output_type(p)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser('add-noise', help='Add seeded Gaussian noise')
    p.add_argument('--input', required=True)
    p.add_argument('--sigma', type=float, required=True)
    p.add_argument('--seed', type=int, default=DEFAULT_SEED)
    p.add_argument('--output', required=True)
    add_output_type(p)
    p.set_defaults(func=cmd_add_noise)

    p = sub.add_parser('decompose', help='Write the Haar pyramid of a volume')
    p.add_argument('--input', required=True)
    p.add_argument('--output', required=True)
    add_fill(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser('reconstruct', help='Rebuild a volume from a pyramid')
    p.add_argument('--input', required=True)
    p.add_argument('--output', required=True)
    p.add_argument('--keep-padding', action='store_true', help='Do not crop to the original extents')
    add_output_type(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser('tv-estimate', help='Wavelet TV estimate of a volume or pyramid')
    p.add_argument('--input', required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument('--level', type=int)
    group.add_argument('--window', type=int, nargs=2, metavar=('N0', 'N1'))
    add_fill(p)
    p.set_defaults(func=cmd_tv_estimate)

    p = sub.add_parser('gradients', help='Export renormalised gradient samples as CSV')
    p.add_argument('--input', required=True)
    p.add_argument('--mode', default=SMOOTH, choices=GRADIENT_MODES)
    p.add_argument('--level', type=int)
    p.add_argument('--output', required=True)
    p.add_argument('--plot', help='Also write a quiver plot of the finest exported level (2-D only)')
    p.add_argument('--magnitude', metavar='BASE',
                   help='Also save the gradient lengths of the finest exported level as a volume')
    add_fill(p)
    p.set_defaults(func=cmd_gradients)

    p = sub.add_parser('denoise', help='Shrink wavelet coefficients and reconstruct')
    p.add_argument('--input', required=True)
    p.add_argument('--lambda', dest='lam', type=float, required=True)
    p.add_argument('--mode', type=_mode, default='live', help=f'One of {MODES} (default: live)')
    p.add_argument('--window', type=int, nargs=2, metavar=('N0', 'N1'))
    p.add_argument('--reference', help='Clean volume for PSNR')
    p.add_argument('--report', help='Write the metric report as JSON')
    p.add_argument('--output', required=True)
    add_fill(p)
    add_output_type(p)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser('metrics', help='Compare a test volume with a reference')
    p.add_argument('--reference', required=True)
    p.add_argument('--test', required=True)
    add_fill(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser('slice', help='Export a slice as 8-bit PGM')
    p.add_argument('--input', required=True)
    p.add_argument('--axis', type=int)
    p.add_argument('--index', type=int)
    p.add_argument('--gamma', type=float, default=1.0)
    p.add_argument('--log', action='store_true', help='Logarithmic scaling before gamma')
    p.add_argument('--output', required=True)
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser('sweep', help='Denoise over a range of lambdas and tabulate the metrics')
    p.add_argument('--input', required=True)
    p.add_argument('--lambdas', type=float, nargs='+', default=list(DEFAULT_LAMBDAS))
    p.add_argument('--modes', type=_mode, nargs='+', default=['live', 'sparse'])
    p.add_argument('--window', type=int, nargs=2, metavar=('N0', 'N1'))
    p.add_argument('--reference', help='Clean volume for PSNR')
    p.add_argument('--report-dir', default=DEFAULT_REPORT_DIR)
    p.add_argument('--report-name', help='File name of the JSON report')
    p.add_argument('--plot', action='store_true', help='Also write metric charts')
    p.add_argument('--no-progress', action='store_true')
    add_fill(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging('DEBUG' if args.verbose else DEFAULT_LOG_LEVEL, args.log_file)

    logger.debug(f"Running command {args.command} with {vars(args)}")
    try:
        args.func(args)
    except LiveTVError as e:
        logger.error(f"{e.category} error: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return 3
    except Exception as e:
        logger.error(f"Error in {args.command}: {e}")
        logger.error(traceback.format_exc())
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
