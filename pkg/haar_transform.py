"""Orthonormal tensor-product Haar decomposition of dyadic volumes.

Conventions used throughout the project:

* Level ``n`` has ``2**n`` coefficients per axis; for a volume of side ``2**m``
  the finest detail level is ``n1 = m - 1`` and the decomposition always runs
  down to a single scaling coefficient.
* Pyramid blocks are indexed in *coordinate order*: coordinate ``x_1`` is the
  fastest (last) array axis of the volume. The transform reverses the array
  axes once on the way in and once on the way out.
* A wavelet type ``theta`` is a bit tuple ``(theta_1, ..., theta_s)``; it is
  stored at integer index ``sum(theta_j << (j - 1))`` so the single-component
  type ``eps_j`` lives at ``1 << (j - 1)``.
* Each axis sweep applies ``H = 2**-0.5 [[1, 1], [1, -1]]`` to neighbouring
  pairs, so the discrete coefficients are used as they are, without any
  rescaling to the unit cube.
"""
import logging
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from errors import LevelRangeError, NotDyadicError, PyramidStructureError
from volume_grid import Volume

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class WaveletType:
    theta: Tuple[int, ...]

    @property
    def s(self) -> int:
        return len(self.theta)

    @property
    def order(self) -> int:
        """|theta|, the number of wavelet factors."""
        return sum(self.theta)

    @property
    def index(self) -> int:
        return sum(bit << j for j, bit in enumerate(self.theta))

    @classmethod
    def from_index(cls, index: int, s: int) -> 'WaveletType':
        return cls(tuple((index >> j) & 1 for j in range(s)))

    @classmethod
    def unit(cls, j: int, s: int) -> 'WaveletType':
        """eps_j for zero-based coordinate j."""
        return cls.from_index(1 << j, s)


def detail_types(s: int) -> Iterator[WaveletType]:
    """All theta != 0 in ascending bit-pattern order."""
    for index in range(1, 2 ** s):
        yield WaveletType.from_index(index, s)


def higher_order_indices(s: int) -> Tuple[int, ...]:
    """Type indices with |theta| >= 2."""
    return tuple(t.index for t in detail_types(s) if t.order >= 2)


@dataclass(frozen=True, eq=False)
class WaveletPyramid:
    """Complete Haar coefficient set of a dyadic volume.

    ``detail[n]`` has shape ``(2**s - 1,) + (2**n,) * s``; block ``k`` holds
    the type with index ``k + 1``. ``scaling`` has shape ``(1,) * s``.
    """
    s: int
    m: int
    scaling: np.ndarray
    detail: Tuple[np.ndarray, ...]
    origin_extent: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        scaling = np.array(self.scaling, dtype=np.float64).reshape((1,) * self.s)
        scaling.setflags(write=False)
        object.__setattr__(self, 'scaling', scaling)
        blocks = []
        for block in self.detail:
            block = np.array(block, dtype=np.float64)
            block.setflags(write=False)
            blocks.append(block)
        object.__setattr__(self, 'detail', tuple(blocks))
        validate_structure(self)

    @property
    def n1(self) -> int:
        return self.m - 1

    @property
    def scaling_value(self) -> float:
        return float(self.scaling.reshape(()))

    @property
    def coefficient_count(self) -> int:
        return self.scaling.size + sum(block.size for block in self.detail)

    def check_level(self, n: int) -> None:
        if not 0 <= n <= self.n1:
            raise LevelRangeError(f"Level {n} outside [0, {self.n1}]")

    def coefficient(self, n: int, theta: Sequence[int], alpha: Sequence[int]) -> float:
        """d^n_{theta, alpha}, with theta and alpha in coordinate order."""
        self.check_level(n)
        wtype = WaveletType(tuple(theta))
        if wtype.index == 0:
            raise PyramidStructureError("theta = 0 addresses the scaling block, not a detail block")
        return float(self.detail[n][(wtype.index - 1,) + tuple(alpha)])

    def with_details(self, detail: Sequence[np.ndarray]) -> 'WaveletPyramid':
        return WaveletPyramid(self.s, self.m, self.scaling, tuple(detail), self.origin_extent)

    def to_vector(self) -> np.ndarray:
        """All coefficients, scaling first, then levels coarse to fine,
        types ascending, alpha row-major."""
        parts = [self.scaling.ravel()] + [block.ravel() for block in self.detail]
        return np.concatenate(parts)

    @classmethod
    def from_vector(cls, s: int, m: int, values: np.ndarray,
                    origin_extent: Optional[Tuple[int, ...]] = None) -> 'WaveletPyramid':
        values = np.asarray(values, dtype=np.float64).ravel()
        expected = 2 ** (m * s)
        if values.size != expected:
            raise PyramidStructureError(
                f"Expected {expected} coefficients for s={s}, m={m}, got {values.size}")
        offset = 1
        blocks = []
        for n in range(m):
            shape = (2 ** s - 1,) + (2 ** n,) * s
            size = int(np.prod(shape))
            blocks.append(values[offset:offset + size].reshape(shape))
            offset += size
        return cls(s, m, values[:1], tuple(blocks), origin_extent)


def validate_structure(p: WaveletPyramid) -> None:
    if p.m < 0:
        raise PyramidStructureError(f"Negative dyadic exponent m={p.m}")
    if len(p.detail) != p.m:
        raise PyramidStructureError(
            f"Pyramid with m={p.m} needs {p.m} detail levels, found {len(p.detail)}")
    for n, block in enumerate(p.detail):
        expected = (2 ** p.s - 1,) + (2 ** n,) * p.s
        if block.shape != expected:
            raise PyramidStructureError(
                f"Level {n} block has shape {block.shape}, expected {expected}")


def _axis_slices(ndim: int, axis: int):
    even = [slice(None)] * ndim
    odd = [slice(None)] * ndim
    even[axis] = slice(0, None, 2)
    odd[axis] = slice(1, None, 2)
    return tuple(even), tuple(odd)


def _analysis_step(a: np.ndarray) -> np.ndarray:
    """One filter-bank pass: returns all 2**s sub-bands stacked on axis 0."""
    bands = a[np.newaxis]
    for axis in range(1, bands.ndim):
        even, odd = _axis_slices(bands.ndim, axis)
        low = (bands[even] + bands[odd]) / SQRT2
        high = (bands[even] - bands[odd]) / SQRT2
        bands = np.concatenate([low, high], axis=0)
    return bands


def _synthesis_step(bands: np.ndarray) -> np.ndarray:
    for axis in range(bands.ndim - 1, 0, -1):
        half = bands.shape[0] // 2
        low, high = bands[:half], bands[half:]
        shape = list(low.shape)
        shape[axis] *= 2
        out = np.empty(shape, dtype=np.float64)
        even, odd = _axis_slices(out.ndim, axis)
        out[even] = (low + high) / SQRT2
        out[odd] = (low - high) / SQRT2
        bands = out
    return bands[0]


def forward(v: Volume) -> WaveletPyramid:
    """Full Haar decomposition of a dyadic volume."""
    if not v.is_dyadic:
        raise NotDyadicError(
            f"Volume extents {v.dims} are not a common power of two; call pad_to_dyadic first")
    s, m = v.s, v.m
    a = np.ascontiguousarray(v.data.transpose())
    details = []
    for _ in range(m):
        bands = _analysis_step(a)
        a = bands[0]
        details.append(bands[1:])
    details.reverse()
    logger.debug(f"Decomposed volume {v.dims} into {m} detail levels (s={s})")
    return WaveletPyramid(s, m, a, tuple(details), v.origin_extent)


def inverse(p: WaveletPyramid) -> Volume:
    """Exact synthesis from a complete pyramid."""
    validate_structure(p)
    a = np.array(p.scaling)
    for block in p.detail:
        a = _synthesis_step(np.concatenate([a[np.newaxis], block], axis=0))
    return Volume(a.transpose(), origin_extent=p.origin_extent)


def gradient_coefficients(p: WaveletPyramid, n: int) -> np.ndarray:
    """The s-vectors d^n_alpha of single-component coefficients at level n.

    Shape ``(2**n,) * s + (s,)``; component j is the eps_{j+1} block.
    """
    p.check_level(n)
    block = p.detail[n]
    return np.stack([block[(1 << j) - 1] for j in range(p.s)], axis=-1)


def level_alphas(s: int, n: int) -> Iterator[Tuple[int, ...]]:
    """Lexicographic alpha tuples of level n."""
    return product(range(2 ** n), repeat=s)
