__module_name__ = "storage"

"""
Flat binary array files for reference caches and nodal-value dumps.

Layout (all integers little-endian):

    magic        8 bytes   b"KRONSOLV"
    version      uint32
    ndim         uint32
    shape        ndim x uint64
    nparams      uint32
    params       nparams x (uint16 name length, UTF-8 name, float64 value)
    checksum     32 bytes  SHA-256 of the payload
    payload      float64 little-endian, row-major
"""

import hashlib
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Mapping, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import StorageError

logger = logging.getLogger(__name__)

MAGIC = b"KRONSOLV"
FORMAT_VERSION = 1
PARAM_TOLERANCE = 1e-12

_write_lock = threading.Lock()


@dataclass(frozen=True, eq=False)
class StoredArray:
    values: NDArray[np.float64]
    params: Dict[str, float] = field(default_factory=dict)

    def matches(self, params: Mapping[str, float]) -> bool:
        """True when every requested parameter is stored with the same value."""
        for name, value in params.items():
            stored = self.params.get(name)
            if stored is None or not np.isclose(
                stored, value, rtol=PARAM_TOLERANCE, atol=0.0
            ):
                return False
        return True


def _encode(array: NDArray[np.float64], params: Mapping[str, float]) -> bytes:
    payload = np.ascontiguousarray(array, dtype="<f8").tobytes()
    parts = [
        MAGIC,
        np.array([FORMAT_VERSION, array.ndim], dtype="<u4").tobytes(),
        np.array(array.shape, dtype="<u8").tobytes(),
        np.array([len(params)], dtype="<u4").tobytes(),
    ]
    for name, value in params.items():
        encoded = name.encode("utf-8")
        parts.append(np.array([len(encoded)], dtype="<u2").tobytes())
        parts.append(encoded)
        parts.append(np.array([float(value)], dtype="<f8").tobytes())
    parts.append(hashlib.sha256(payload).digest())
    parts.append(payload)
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.path = path
        self.offset = 0

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.data):
            raise StorageError(f"{self.path}: file is truncated")
        chunk = self.data[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def numbers(self, dtype: str, count: int) -> NDArray:
        width = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(width * count), dtype=dtype)


def write_array(
    path: Union[str, Path],
    array: ArrayLike,
    params: Optional[Mapping[str, float]] = None,
) -> Path:
    """
    Write ``array`` with named float parameters.

    The file is written next to its destination and moved into place, so a
    reader never sees a partial file.
    """
    path = Path(path)
    values = np.asarray(array, dtype=np.float64)
    blob = _encode(values, dict(params or {}))
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{threading.get_ident()}.tmp")
    with _write_lock:
        tmp.write_bytes(blob)
        tmp.replace(path)
    logger.debug(
        f"{__module_name__} - Wrote {values.shape} array to {path} ({len(blob)} bytes)"
    )
    return path


def read_array(path: Union[str, Path]) -> StoredArray:
    """
    Read a file written by ``write_array``.

    Raises:
        StorageError: bad magic, unsupported version, truncation or checksum
            mismatch
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise StorageError(f"{path}: cannot read ({e})") from e

    reader = _Reader(data, path)
    if reader.take(len(MAGIC)) != MAGIC:
        raise StorageError(f"{path}: not a kronsolve array file")
    version, ndim = (int(v) for v in reader.numbers("<u4", 2))
    if version != FORMAT_VERSION:
        raise StorageError(f"{path}: unsupported format version {version}")
    shape = tuple(int(n) for n in reader.numbers("<u8", ndim))
    (nparams,) = reader.numbers("<u4", 1)
    params: Dict[str, float] = {}
    for _ in range(int(nparams)):
        (length,) = reader.numbers("<u2", 1)
        name = reader.take(int(length)).decode("utf-8")
        params[name] = float(reader.numbers("<f8", 1)[0])
    checksum = reader.take(32)
    payload = data[reader.offset :]

    expected = 8 * int(np.prod(shape, dtype=np.int64))
    if len(payload) != expected:
        raise StorageError(
            f"{path}: payload has {len(payload)} bytes, shape {shape} needs {expected}"
        )
    if hashlib.sha256(payload).digest() != checksum:
        raise StorageError(f"{path}: checksum mismatch")
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(shape)
    return StoredArray(values=values, params=params)


def cached_array(
    path: Union[str, Path],
    params: Mapping[str, float],
    compute: Callable[[], ArrayLike],
) -> NDArray[np.float64]:
    """
    Load ``path`` if it holds an array computed with ``params``; otherwise
    compute, store and return it.
    """
    path = Path(path)
    if path.exists():
        try:
            stored = read_array(path)
            if stored.matches(params):
                logger.info(f"{__module_name__} - Cache hit: {path}")
                return stored.values
            logger.info(f"{__module_name__} - Cache parameters differ: {path}")
        except StorageError as e:
            logger.warning(f"{__module_name__} - Ignoring unreadable cache: {e}")
    else:
        logger.info(f"{__module_name__} - Cache miss: {path}")

    values = np.asarray(compute(), dtype=np.float64)
    write_array(path, values, params)
    return values


__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "StoredArray",
    "write_array",
    "read_array",
    "cached_array",
]
