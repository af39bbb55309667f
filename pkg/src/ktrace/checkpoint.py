"""Versioned binary checkpoint container.

Byte layout (all integers little-endian):

    offset  size  field
    0       6     magic ``b"KTCKPT"``
    6       4     format_version (uint32), currently 1
    10      4     header_length (uint32)
    14      n     header: UTF-8 JSON object with keys
                  ``model_kind`` (str), ``config`` (object) and ``tensors``
                  (list of ``{"name": str, "shape": [int, ...]}``)
    14+n    ...   tensor payloads, concatenated in header order: float64
                  little-endian values, row-major, ``prod(shape)`` each

Round-trips are lossless: values are written bit-for-bit as float64.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autodiff import Tensor
from .errors import CheckpointError

MAGIC = b"KTCKPT"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    model_kind: str
    config: dict
    tensors: dict[str, np.ndarray]


def save_checkpoint(path, model_kind: str, config: dict, params: dict) -> None:
    """Write ``params`` (name -> Tensor or ndarray) to ``path``."""
    entries = []
    payloads = []
    for name, value in params.items():
        arr = np.asarray(value.data if isinstance(value, Tensor) else value, dtype=np.float64)
        entries.append({"name": name, "shape": list(arr.shape)})
        payloads.append(arr.astype("<f8").tobytes(order="C"))
    header = json.dumps(
        {"model_kind": model_kind, "config": config, "tensors": entries},
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for blob in payloads:
            fh.write(blob)


def load_checkpoint(path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if raw[:6] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
    version = struct.unpack("<I", raw[6:10])[0]
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    header_len = struct.unpack("<I", raw[10:14])[0]
    try:
        header = json.loads(raw[14 : 14 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt header: {exc}") from exc
    offset = 14 + header_len
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(raw):
            raise CheckpointError(f"{path}: truncated payload for tensor '{entry['name']}'")
        tensors[entry["name"]] = np.frombuffer(raw[offset:end], dtype="<f8").reshape(shape).copy()
        offset = end
    if offset != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes after payload")
    return Checkpoint(model_kind=header["model_kind"], config=header["config"], tensors=tensors)
