"""Gradient and total-variation estimates read off Haar coefficients.

The single-component coefficient vector d^n_alpha, renormalised, approximates
the gradient at the cell centre x^n_alpha = 2**-n (alpha + 1/2). Summing the
lengths of those vectors gives a TV estimate per level; a geometric weighting
over a window of levels gives the averaged estimate.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Optional, Tuple

import numpy as np

from errors import LevelRangeError, WindowError
from haar_transform import WaveletPyramid, gradient_coefficients, level_alphas
from volume_grid import Volume

logger = logging.getLogger(__name__)

SMOOTH = 'smooth'
EDGE = 'edge'
GRADIENT_MODES = (SMOOTH, EDGE)


@dataclass(frozen=True)
class GradientSample:
    level: int
    alpha: Tuple[int, ...]
    position: Tuple[float, ...]
    vec: Tuple[float, ...]


@dataclass(frozen=True, eq=False)
class LevelGradients:
    """All gradient samples of one level, stored as arrays.

    ``positions`` and ``vecs`` have shape ``(2**n,) * s + (s,)`` and are in
    coordinate order, like the pyramid blocks.
    """
    level: int
    mode: str
    positions: np.ndarray
    vecs: np.ndarray

    @property
    def s(self) -> int:
        return self.vecs.shape[-1]

    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.vecs, axis=-1)

    def samples(self) -> Iterator[GradientSample]:
        """Samples in lexicographic alpha order."""
        for alpha in level_alphas(self.s, self.level):
            yield GradientSample(
                level=self.level,
                alpha=alpha,
                position=tuple(float(x) for x in self.positions[alpha]),
                vec=tuple(float(x) for x in self.vecs[alpha]),
            )


GradientField = Dict[int, LevelGradients]


@dataclass(frozen=True)
class LevelWeights:
    n0: int
    n1: int
    mu: Tuple[float, ...]

    def __post_init__(self):
        if self.n0 < 0 or self.n0 > self.n1:
            raise WindowError(f"Invalid level window [{self.n0}, {self.n1}]")
        if len(self.mu) != self.n1 - self.n0 + 1:
            raise WindowError(
                f"Window [{self.n0}, {self.n1}] needs {self.n1 - self.n0 + 1} weights, got {len(self.mu)}")

    def levels(self) -> range:
        return range(self.n0, self.n1 + 1)

    def weight(self, n: int) -> float:
        if n not in self.levels():
            raise LevelRangeError(f"Level {n} outside window [{self.n0}, {self.n1}]")
        return self.mu[n - self.n0]

    def check_against(self, p: WaveletPyramid) -> None:
        if self.n1 > p.n1:
            raise WindowError(f"Window [{self.n0}, {self.n1}] exceeds finest level {p.n1}")


def make_level_weights(n0: int, n1: int) -> LevelWeights:
    """mu_n = 2**(n - n1) / (2 - 2**(n0 - n1)) for n0 <= n <= n1."""
    if n0 > n1:
        raise WindowError(f"Window start {n0} exceeds window end {n1}")
    norm = 2.0 - 2.0 ** (n0 - n1)
    mu = tuple(2.0 ** (n - n1) / norm for n in range(n0, n1 + 1))
    return LevelWeights(n0, n1, mu)


def default_window(p: WaveletPyramid) -> LevelWeights:
    """The top four levels, or all of them for small pyramids."""
    if p.n1 < 0:
        raise WindowError("Pyramid has no detail levels")
    return make_level_weights(max(0, p.n1 - 3), p.n1)


def level_positions(s: int, n: int) -> np.ndarray:
    """Cell centres x^n_alpha in unit-cube coordinates, shape (2**n,)*s + (s,)."""
    grid = np.indices((2 ** n,) * s, dtype=np.float64)
    return np.moveaxis((grid + 0.5) / 2.0 ** n, 0, -1)


def to_voxel_coordinates(positions: np.ndarray, m: int) -> np.ndarray:
    return np.asarray(positions) * 2.0 ** m


def gradient_scale(s: int, n: int, mode: str = SMOOTH) -> float:
    """Factor turning d^n_alpha into a gradient sample.

    Smooth mode approximates the gradient itself; edge mode drops the extra
    2**n so jump discontinuities keep the same length on every level.
    """
    if mode == SMOOTH:
        return -(2.0 ** (n * (1 + s / 2) + 2))
    if mode == EDGE:
        return -(2.0 ** (n * s / 2 + 2))
    raise ValueError(f"Unknown gradient mode '{mode}', expected one of {GRADIENT_MODES}")


def renormalized_gradients(p: WaveletPyramid, n: int, mode: str = SMOOTH) -> LevelGradients:
    p.check_level(n)
    vecs = gradient_scale(p.s, n, mode) * gradient_coefficients(p, n)
    return LevelGradients(level=n, mode=mode, positions=level_positions(p.s, n), vecs=vecs)


def gradient_field(p: WaveletPyramid, levels: Optional[Iterable[int]] = None,
                   mode: str = SMOOTH) -> GradientField:
    levels = range(p.m) if levels is None else levels
    return {n: renormalized_gradients(p, n, mode) for n in levels}


def tv_estimate_level(p: WaveletPyramid, n: int) -> float:
    """2**(n(1 - s/2) + 2) * sum over alpha of |d^n_alpha|_2."""
    p.check_level(n)
    lengths = np.linalg.norm(gradient_coefficients(p, n), axis=-1)
    return float(2.0 ** (n * (1 - p.s / 2) + 2) * lengths.sum())


def tv_estimate_averaged(p: WaveletPyramid, w: Optional[LevelWeights] = None) -> float:
    """Convex combination of the per-level estimates over the window."""
    w = default_window(p) if w is None else w
    w.check_against(p)
    total = 0.0
    for n, mu in zip(w.levels(), w.mu):
        estimate = tv_estimate_level(p, n)
        logger.debug(f"Level {n}: TV estimate {estimate:.6g} (weight {mu:.4f})")
        total += mu * estimate
    return total


def gradient_magnitude_volume(p: WaveletPyramid, n: int, mode: str = EDGE) -> Volume:
    """Gradient lengths of level n spread over the voxel grid."""
    lengths = renormalized_gradients(p, n, mode).lengths()
    factor = 2 ** (p.m - n)
    for axis in range(p.s):
        lengths = np.repeat(lengths, factor, axis=axis)
    return Volume(lengths.transpose(), origin_extent=p.origin_extent)
