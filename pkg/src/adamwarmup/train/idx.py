"""Reader and writer for the IDX container used by MNIST-family datasets.

Layout (big endian): two zero bytes, a type byte (0x08 = unsigned byte), a
dimension count byte, one uint32 per dimension, then the payload.  Files
starting with the gzip magic ``1F 8B`` are decompressed transparently.
"""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import BadMagicError, CountMismatchError, TruncatedPayloadError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


@dataclass
class IdxDataset:
    images: np.ndarray  # (n, h, w) uint8
    labels: np.ndarray  # (n,) int64
    n_classes: int

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise CountMismatchError(
                f"{len(self.images)} images but {len(self.labels)} labels"
            )
        if self.labels.size and int(self.labels.max()) >= self.n_classes:
            raise ValueError(f"label {int(self.labels.max())} >= n_classes {self.n_classes}")

    def __len__(self):
        return len(self.labels)

    @property
    def input_dim(self) -> int:
        return int(np.prod(self.images.shape[1:]))

    def features(self, idx=None) -> np.ndarray:
        """Flattened pixels scaled to [0, 1]."""
        imgs = self.images if idx is None else self.images[idx]
        return imgs.reshape(len(imgs), -1).astype(np.float64) / 255.0


def _read_bytes(path):
    data = Path(path).read_bytes()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def read_idx(path, expected_magic: int) -> np.ndarray:
    data = _read_bytes(path)
    if len(data) < 4:
        raise TruncatedPayloadError("file shorter than the magic number", path, len(data))
    (magic,) = struct.unpack(">I", data[:4])
    if magic != expected_magic:
        raise BadMagicError(f"magic 0x{magic:08x}, expected 0x{expected_magic:08x}", path, 0)
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(data) < header:
        raise TruncatedPayloadError("header cut short", path, len(data))
    dims = struct.unpack(f">{ndim}I", data[4:header])
    n = int(np.prod(dims))
    if len(data) - header < n:
        raise TruncatedPayloadError(
            f"payload has {len(data) - header} bytes, dims {dims} need {n}", path, len(data)
        )
    return np.frombuffer(data, dtype=np.uint8, count=n, offset=header).reshape(dims)


def write_idx(path, array: np.ndarray, compress: bool = False) -> None:
    arr = np.ascontiguousarray(array, dtype=np.uint8)
    header = struct.pack(">I", 0x0800 | arr.ndim) + struct.pack(f">{arr.ndim}I", *arr.shape)
    payload = header + arr.tobytes()
    if compress:
        payload = gzip.compress(payload, mtime=0)
    Path(path).write_bytes(payload)


def load_idx(images_path, labels_path, n_classes: Optional[int] = None) -> IdxDataset:
    images = read_idx(images_path, IMAGE_MAGIC)
    labels = read_idx(labels_path, LABEL_MAGIC)
    if len(images) != len(labels):
        raise CountMismatchError(
            f"{len(labels)} labels but {images_path} holds {len(images)} images", labels_path
        )
    labels = labels.astype(np.int64)
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 1
    return IdxDataset(images, labels, n_classes)
