"""Synthetic test volumes and their analytic oracles.

Coordinates are voxel centres in the unit cube, listed in coordinate order
(x_1 is the last array axis, matching the pyramid convention). Parameters such
as ``center`` and ``slope`` are given in that order too.
"""
import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from errors import NotDyadicError, PhantomKindError
from volume_grid import Volume

logger = logging.getLogger(__name__)

PHANTOM_KINDS = ('constant', 'linear', 'quadratic', 'gaussian_bump', 'sphere', 'step')


def unit_coordinates(dims: Sequence[int]) -> List[np.ndarray]:
    """Voxel-centre coordinates x_1..x_s, each broadcast to ``dims``."""
    s = len(dims)
    grids = np.meshgrid(*[(np.arange(extent) + 0.5) / extent for extent in dims], indexing='ij')
    return [grids[s - 1 - j] for j in range(s)]


def _coord_param(value, s: int, default: float) -> np.ndarray:
    if value is None:
        return np.full(s, default)
    arr = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if arr.size == 1:
        return np.full(s, float(arr[0]))
    if arr.size != s:
        raise ValueError(f"Expected {s} coordinates, got {arr.size}")
    return arr


def continuum_scale(dims: Sequence[int]) -> float:
    """2**(-ms/2): maps samples of a unit-cube function to the isometric grid scale."""
    side = dims[0]
    if any(extent != side for extent in dims) or side & (side - 1):
        raise NotDyadicError(f"Continuum sampling needs a dyadic cube, got {tuple(dims)}")
    m = side.bit_length() - 1
    return 2.0 ** (-m * len(dims) / 2)


def sample_continuum(func: Callable[..., np.ndarray], dims: Sequence[int]) -> Volume:
    """Sample ``func(x_1, ..., x_s)`` at voxel centres, scaled so that the
    Haar coefficients of the result are those of ``func`` on the unit cube."""
    values = np.asarray(func(*unit_coordinates(dims)), dtype=np.float64)
    return Volume(np.broadcast_to(values, tuple(dims)) * continuum_scale(dims))


def gaussian_bump_values(coords: Sequence[np.ndarray], center, sigma: float,
                         amplitude: float = 1.0) -> np.ndarray:
    center = _coord_param(center, len(coords), 0.5)
    r2 = sum((x - c) ** 2 for x, c in zip(coords, center))
    return amplitude * np.exp(-r2 / (2.0 * sigma ** 2))


def gaussian_bump_gradient(positions: np.ndarray, center=None, sigma: float = 0.1,
                           amplitude: float = 1.0) -> np.ndarray:
    """Analytic gradient at ``positions`` (shape (..., s), coordinate order)."""
    positions = np.asarray(positions, dtype=np.float64)
    center = _coord_param(center, positions.shape[-1], 0.5)
    offset = positions - center
    value = amplitude * np.exp(-np.sum(offset ** 2, axis=-1) / (2.0 * sigma ** 2))
    return -offset / sigma ** 2 * value[..., np.newaxis]


def gaussian_bump_total_variation(s: int, sigma: float, amplitude: float = 1.0) -> float:
    """TV of the bump over all of R^s; a bump well inside the cube loses
    only an exponentially small tail."""
    sphere_area = 2.0 * math.pi ** (s / 2) / math.gamma(s / 2)
    radial = 2.0 ** ((s - 1) / 2) * math.gamma((s + 1) / 2) * sigma ** (s - 1)
    return abs(amplitude) * sphere_area * radial


def phantom(kind: str, dims: Sequence[int], continuum: bool = False, **params) -> Volume:
    """Deterministic synthetic volume.

    kinds:
      constant       value
      linear         slope (per coordinate), offset
      quadratic      sum of x_j**2 (scale)
      gaussian_bump  center, sigma, amplitude
      sphere         center, radius, inside, outside (binary)
      step           axis (array axis), index (first voxel of the high side), low, high
    With ``continuum=True`` the samples are scaled as in :func:`sample_continuum`.
    """
    dims = tuple(int(extent) for extent in dims)
    s = len(dims)
    if kind == 'constant':
        value = float(params.get('value', 1.0))

        def func(*x):
            return np.full(np.broadcast(*x).shape, value)
    elif kind == 'linear':
        slope = _coord_param(params.get('slope'), s, 1.0)
        offset = params.get('offset', 0.0)

        def func(*x):
            return offset + sum(g * xj for g, xj in zip(slope, x))
    elif kind == 'quadratic':
        scale = params.get('scale', 1.0)

        def func(*x):
            return scale * sum(xj ** 2 for xj in x)
    elif kind == 'gaussian_bump':
        def func(*x):
            return gaussian_bump_values(x, params.get('center'), params.get('sigma', 0.1),
                                        params.get('amplitude', 1.0))
    elif kind == 'sphere':
        center = _coord_param(params.get('center'), s, 0.5)
        radius = params.get('radius', 0.3)

        def func(*x):
            inside = sum((xj - c) ** 2 for xj, c in zip(x, center)) <= radius ** 2
            return np.where(inside, params.get('inside', 1.0), params.get('outside', 0.0))
    elif kind == 'step':
        axis = params.get('axis', 0)
        index = params.get('index', dims[axis] // 2)

        def func(*x):
            # array axis a is coordinate x_{s-a}
            position = np.floor(x[s - 1 - axis] * dims[axis])
            return np.where(position >= index, params.get('high', 1.0), params.get('low', 0.0))
    else:
        raise PhantomKindError(f"Unknown phantom kind '{kind}', expected one of {PHANTOM_KINDS}")

    logger.debug(f"Generated {kind} phantom {dims}")
    if continuum:
        return sample_continuum(func, dims)
    values = np.asarray(func(*unit_coordinates(dims)), dtype=np.float64)
    return Volume(np.broadcast_to(values, dims))


def add_noise(v: Volume, sigma: float, seed: Optional[int] = 0) -> Volume:
    """Additive Gaussian noise from a seeded generator."""
    if sigma < 0:
        raise ValueError(f"Noise level must be non-negative, got {sigma}")
    if sigma == 0:
        return v.with_data(v.data)
    rng = np.random.default_rng(seed)
    return v.with_data(v.data + sigma * rng.standard_normal(v.dims))
