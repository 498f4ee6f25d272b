"""Dense N-dimensional scalar volumes with dyadic padding.

A :class:`Volume` is the piecewise-constant image every other module works on.
Samples are stored as float64 in row-major order (last axis fastest), which is
also the byte order of the raw payloads written by ``volume_io``.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from errors import DimensionalityError, UnpaddedVolumeError

logger = logging.getLogger(__name__)

MAX_DIMENSIONS = 3


@dataclass(frozen=True)
class VoxelIndex:
    """Integer voxel coordinates in array-axis order."""
    coords: Tuple[int, ...]

    def validate(self, dims: Sequence[int]) -> None:
        if len(self.coords) != len(dims):
            raise DimensionalityError(
                f"Index {self.coords} has {len(self.coords)} coordinates, volume has {len(dims)} axes")
        for axis, (c, extent) in enumerate(zip(self.coords, dims)):
            if not 0 <= c < extent:
                raise IndexError(f"Coordinate {c} out of range [0, {extent}) on axis {axis}")


@dataclass(frozen=True, eq=False)
class Volume:
    """Immutable float64 sample grid.

    ``origin_extent`` is set by :func:`pad_to_dyadic` and records the extents of
    the data before padding; it is ``None`` for volumes that were never padded.
    """
    data: np.ndarray
    origin_extent: Optional[Tuple[int, ...]] = None
    _dyadic_exponent: Optional[int] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, order='C', copy=True)
        if data.ndim < 1 or data.ndim > MAX_DIMENSIONS:
            raise DimensionalityError(
                f"Volumes must have 1 to {MAX_DIMENSIONS} axes, got {data.ndim}")
        if data.size == 0:
            raise DimensionalityError("Volumes must not be empty")
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)
        if self.origin_extent is not None:
            origin = tuple(int(e) for e in self.origin_extent)
            if len(origin) != data.ndim:
                raise DimensionalityError(
                    f"origin_extent {origin} does not match {data.ndim} axes")
            object.__setattr__(self, 'origin_extent', origin)
        object.__setattr__(self, '_dyadic_exponent', _common_dyadic_exponent(data.shape))

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def s(self) -> int:
        return self.data.ndim

    @property
    def is_dyadic(self) -> bool:
        return self._dyadic_exponent is not None

    @property
    def m(self) -> Optional[int]:
        """Exponent with every extent equal to 2**m, or None if not dyadic."""
        return self._dyadic_exponent

    def __getitem__(self, index: VoxelIndex) -> float:
        index.validate(self.dims)
        return float(self.data[index.coords])

    def with_data(self, data: np.ndarray) -> 'Volume':
        """New volume with the same padding metadata and different samples."""
        return Volume(data, origin_extent=self.origin_extent)


def _common_dyadic_exponent(shape: Sequence[int]) -> Optional[int]:
    first = shape[0]
    if any(extent != first for extent in shape):
        return None
    if first & (first - 1):
        return None
    return first.bit_length() - 1


def dyadic_exponent_for(extent: int) -> int:
    """Smallest m with 2**m >= extent."""
    return max(0, int(extent - 1).bit_length())


def pad_to_dyadic(v: Volume, fill: float = 0.0) -> Volume:
    """Embed ``v`` in the low-index corner of a cube of side 2**m.

    m is the smallest exponent covering the largest extent. Already dyadic
    volumes come back with identical samples and keep their padding metadata;
    any other volume is its own origin, whatever extent it carried before.
    """
    m = dyadic_exponent_for(max(v.dims))
    side = 2 ** m
    if v.is_dyadic and v.dims[0] == side:
        origin = v.origin_extent if v.origin_extent is not None else v.dims
        return Volume(v.data, origin_extent=origin)

    origin = v.dims
    if v.origin_extent is not None and v.origin_extent != v.dims:
        logger.warning(f"Ignoring origin_extent {v.origin_extent} of non-dyadic volume {v.dims}")

    padded = np.full((side,) * v.s, fill, dtype=np.float64)
    padded[tuple(slice(0, extent) for extent in v.dims)] = v.data
    logger.debug(f"Padded volume {v.dims} to {padded.shape} (m={m}, fill={fill})")
    return Volume(padded, origin_extent=origin)


def crop_to_origin(v: Volume) -> Volume:
    """Undo :func:`pad_to_dyadic` by cutting out the original corner."""
    if v.origin_extent is None:
        raise UnpaddedVolumeError(
            "Volume carries no origin_extent metadata; it was not produced by pad_to_dyadic")
    for axis, (orig, extent) in enumerate(zip(v.origin_extent, v.dims)):
        if orig > extent:
            raise UnpaddedVolumeError(
                f"origin_extent {v.origin_extent} exceeds extents {v.dims} on axis {axis}")
    corner = v.data[tuple(slice(0, extent) for extent in v.origin_extent)]
    return Volume(corner)
