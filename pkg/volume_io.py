"""Raw volume files, pyramid files and image/CSV exports.

A volume on disk is a pair: a JSON header sidecar and a raw little-endian
payload in row-major order (last axis fastest). Pyramids use the same scheme
with float64 coefficients, scaling first, then levels coarse to fine, types in
ascending bit-pattern order, alpha row-major in coordinate order.
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from errors import HeaderFormatError, LiveTVError, PayloadSizeError, SampleTypeError, SliceRangeError
from gradient_tv import GradientField
from haar_transform import WaveletPyramid
from volume_grid import Volume

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SAMPLE_TYPES = {
    'u8': np.dtype('<u1'),
    'u16': np.dtype('<u2'),
    'f32': np.dtype('<f4'),
    'f64': np.dtype('<f8'),
}
FORMAT_VERSION = 1


@dataclass
class VolumeHeader:
    shape: Tuple[int, ...]
    sample_type: str = 'f64'
    byte_order: str = 'little'
    layout: str = 'row-major'
    value_offset: float = 0.0
    value_scale: float = 1.0
    kind: str = 'volume'
    origin_extent: Optional[Tuple[int, ...]] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sample_type not in SAMPLE_TYPES:
            raise SampleTypeError(
                f"Unknown sample_type '{self.sample_type}', expected one of {sorted(SAMPLE_TYPES)}")
        if self.byte_order != 'little':
            raise HeaderFormatError(f"Only little-endian payloads are supported, got '{self.byte_order}'")
        if self.layout != 'row-major':
            raise HeaderFormatError(f"Only row-major layout is supported, got '{self.layout}'")
        self.shape = tuple(int(e) for e in self.shape)
        if self.origin_extent is not None:
            self.origin_extent = tuple(int(e) for e in self.origin_extent)

    @property
    def dtype(self) -> np.dtype:
        return SAMPLE_TYPES[self.sample_type]

    @property
    def payload_bytes(self) -> int:
        return int(np.prod(self.shape)) * self.dtype.itemsize

    def to_dict(self) -> dict:
        data = asdict(self)
        data['version'] = FORMAT_VERSION
        data['shape'] = list(self.shape)
        if self.origin_extent is not None:
            data['origin_extent'] = list(self.origin_extent)
        return data


def read_header(header_path: PathLike) -> VolumeHeader:
    text = Path(header_path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise HeaderFormatError(f"Malformed header {header_path} at byte offset {e.pos}: {e.msg}") from e
    if not isinstance(data, dict) or 'shape' not in data:
        raise HeaderFormatError(f"Header {header_path} has no 'shape' entry")
    data.pop('version', None)
    known = {name for name in VolumeHeader.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise HeaderFormatError(f"Header {header_path} has unknown keys {sorted(unknown)}")
    try:
        return VolumeHeader(**data)
    except LiveTVError:
        raise
    except (TypeError, ValueError) as e:
        raise HeaderFormatError(f"Header {header_path} has invalid values: {e}") from e


def write_header(header: VolumeHeader, header_path: PathLike) -> None:
    Path(header_path).write_text(json.dumps(header.to_dict(), indent=2) + '\n')


def _read_payload(header: VolumeHeader, data_path: PathLike) -> np.ndarray:
    raw = Path(data_path).read_bytes()
    expected = header.payload_bytes
    if len(raw) != expected:
        raise PayloadSizeError(
            f"Payload {data_path} has {len(raw)} bytes, shape {header.shape} of "
            f"{header.sample_type} needs {expected}; mismatch starts at byte offset {min(len(raw), expected)}")
    return np.frombuffer(raw, dtype=header.dtype).reshape(header.shape)


def load_volume(header_path: PathLike, data_path: PathLike) -> Volume:
    """Load a raw volume, widen to float64 and apply the header's affine map."""
    header = read_header(header_path)
    if header.kind != 'volume':
        raise HeaderFormatError(f"Header {header_path} describes a {header.kind}, not a volume")
    if header.origin_extent is not None:
        if len(header.origin_extent) != len(header.shape) or any(
                o < 1 or o > e for o, e in zip(header.origin_extent, header.shape)):
            raise HeaderFormatError(
                f"Header {header_path} has origin_extent {header.origin_extent} outside shape {header.shape}")
    samples = _read_payload(header, data_path).astype(np.float64)
    if header.value_offset != 0.0 or header.value_scale != 1.0:
        samples = header.value_offset + header.value_scale * samples
    logger.info(f"Loaded {header.sample_type} volume {header.shape} from {data_path}")
    return Volume(samples, origin_extent=header.origin_extent)


def _encode_samples(data: np.ndarray, sample_type: str) -> np.ndarray:
    dtype = SAMPLE_TYPES[sample_type]
    if dtype.kind == 'u':
        info = np.iinfo(dtype)
        return np.clip(np.rint(data), info.min, info.max).astype(dtype)
    return data.astype(dtype)


def save_volume(v: Volume, header_path: PathLike, data_path: PathLike, sample_type: str = 'f64') -> None:
    """Write header and payload; integer types round half to even and clamp."""
    header = VolumeHeader(shape=v.dims, sample_type=sample_type, origin_extent=v.origin_extent)
    payload = _encode_samples(v.data, sample_type)
    Path(data_path).write_bytes(payload.tobytes(order='C'))
    write_header(header, header_path)
    logger.info(f"Saved {sample_type} volume {v.dims} to {data_path}")


def save_pyramid(p: WaveletPyramid, header_path: PathLike, data_path: PathLike) -> None:
    values = p.to_vector()
    header = VolumeHeader(shape=(values.size,), kind='pyramid', origin_extent=p.origin_extent,
                          extra={'s': p.s, 'm': p.m})
    Path(data_path).write_bytes(values.astype('<f8').tobytes())
    write_header(header, header_path)
    logger.info(f"Saved pyramid (s={p.s}, m={p.m}, {values.size} coefficients) to {data_path}")


def load_pyramid(header_path: PathLike, data_path: PathLike) -> WaveletPyramid:
    header = read_header(header_path)
    if header.kind != 'pyramid':
        raise HeaderFormatError(f"Header {header_path} describes a {header.kind}, not a pyramid")
    try:
        s, m = int(header.extra['s']), int(header.extra['m'])
    except (KeyError, TypeError, ValueError) as e:
        raise HeaderFormatError(f"Pyramid header {header_path} lacks integer 's' and 'm'") from e
    values = _read_payload(header, data_path).astype(np.float64)
    return WaveletPyramid.from_vector(s, m, values, header.origin_extent)


def slice_image(v: Volume, axis: Optional[int] = None, index: Optional[int] = None) -> np.ndarray:
    """The 2-D image shown by :func:`export_slice`."""
    if v.s == 1:
        return v.data[np.newaxis, :]
    if v.s == 2 and axis is None:
        return v.data
    axis = v.s - 1 if axis is None else axis
    if not 0 <= axis < v.s:
        raise SliceRangeError(f"Axis {axis} outside [0, {v.s})")
    index = v.dims[axis] // 2 if index is None else index
    if not 0 <= index < v.dims[axis]:
        raise SliceRangeError(f"Slice index {index} outside [0, {v.dims[axis]}) on axis {axis}")
    image = np.take(v.data, index, axis=axis)
    return image if image.ndim == 2 else image[np.newaxis, :]


def to_gray(image: np.ndarray, gamma: float = 1.0, log_scale: bool = False) -> np.ndarray:
    """Min-max normalise to 8 bit, optionally after log1p and with gamma."""
    lo, hi = float(image.min()), float(image.max())
    if hi == lo:
        logger.warning("Slice is constant; exporting uniform gray")
        return np.full(image.shape, 128, dtype=np.uint8)
    norm = image - lo
    if log_scale:
        norm = np.log1p(norm)
    norm = norm / norm.max()
    if gamma != 1.0:
        norm = norm ** (1.0 / gamma)
    return np.rint(norm * 255.0).astype(np.uint8)


def export_slice(v: Volume, axis: Optional[int], index: Optional[int], path: PathLike,
                 gamma: float = 1.0, log_scale: bool = False) -> None:
    """Write one slice as binary 8-bit PGM (P5)."""
    gray = to_gray(slice_image(v, axis, index), gamma, log_scale)
    rows, cols = gray.shape
    with open(path, 'wb') as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode('ascii'))
        fh.write(gray.tobytes())
    logger.info(f"Exported {rows}x{cols} slice to {path}")


def gradient_columns(s: Optional[int]) -> list:
    if s is None:
        return ['level']
    return (['level'] + [f'alpha_{j + 1}' for j in range(s)]
            + [f'x_{j + 1}' for j in range(s)] + [f'v_{j + 1}' for j in range(s)])


def gradient_frame(gradients: GradientField, s: Optional[int] = None) -> pd.DataFrame:
    """One row per sample, ordered by level then lexicographic alpha."""
    frames = []
    for n in sorted(gradients):
        level = gradients[n]
        s = level.s
        count = level.vecs.size // s
        alphas = np.indices(level.vecs.shape[:-1]).reshape(s, -1).T
        columns = np.hstack([
            np.full((count, 1), n),
            alphas,
            level.positions.reshape(count, s),
            level.vecs.reshape(count, s),
        ])
        frame = pd.DataFrame(columns, columns=gradient_columns(s))
        frame = frame.astype({name: 'int64' for name in gradient_columns(s)[:s + 1]})
        frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=gradient_columns(s))
    return pd.concat(frames, ignore_index=True)


def export_gradients(gradients: GradientField, path: PathLike, s: Optional[int] = None) -> None:
    frame = gradient_frame(gradients, s)
    frame.to_csv(path, index=False, float_format='%.17g')
    logger.info(f"Exported {len(frame)} gradient samples to {path}")
