"""Named-tensor container ("ICTG0001").

Layout::

    8 bytes   magic b"ICTG0001"
    8 bytes   little-endian uint64, length of the JSON manifest
    manifest  UTF-8 JSON: {"metadata": {...}, "tensors": [{name, shape, dtype, offset, nbytes}]}
    payload   concatenated little-endian IEEE-754 arrays; offsets are relative to payload start
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..errors import FormatError, UnsupportedVersionError

MAGIC = b"ICTG0001"
_DTYPES = {"f4": "<f4", "f8": "<f8", "i8": "<i8"}


def _dtype_code(arr: np.ndarray) -> str:
    for code, spec in _DTYPES.items():
        if arr.dtype == np.dtype(spec):
            return code
    raise FormatError(f"unsupported dtype {arr.dtype}")


def dumps(tensors: Mapping[str, np.ndarray], metadata: Mapping[str, Any] | None = None) -> bytes:
    entries = []
    chunks = []
    offset = 0
    for name, arr in tensors.items():
        arr = np.asarray(arr)
        if arr.dtype.kind == "f":
            arr = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        elif arr.dtype.kind in "iu":
            arr = arr.astype("<i8")
        code = _dtype_code(arr)
        raw = np.ascontiguousarray(arr).tobytes()
        entries.append({"name": name, "shape": list(arr.shape), "dtype": code,
                        "offset": offset, "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    manifest = json.dumps({"metadata": dict(metadata or {}), "tensors": entries},
                          sort_keys=True).encode()
    return MAGIC + struct.pack("<Q", len(manifest)) + manifest + b"".join(chunks)


def loads(blob: bytes) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    if len(blob) < 16:
        raise FormatError("checkpoint truncated before manifest")
    magic = blob[:8]
    if magic[:4] != MAGIC[:4]:
        raise FormatError(f"bad magic {magic!r}")
    if magic != MAGIC:
        raise UnsupportedVersionError(f"unsupported checkpoint version {magic[4:]!r}")
    (mlen,) = struct.unpack("<Q", blob[8:16])
    if 16 + mlen > len(blob):
        raise FormatError("checkpoint manifest truncated")
    try:
        manifest = json.loads(blob[16:16 + mlen])
    except ValueError as exc:
        raise FormatError(f"malformed manifest: {exc}") from exc
    payload = memoryview(blob)[16 + mlen:]
    tensors = {}
    for e in manifest["tensors"]:
        end = e["offset"] + e["nbytes"]
        if end > len(payload):
            raise FormatError(f"payload truncated in tensor {e['name']!r}")
        arr = np.frombuffer(payload[e["offset"]:end], dtype=_DTYPES[e["dtype"]])
        tensors[e["name"]] = arr.reshape(e["shape"]).astype(arr.dtype.newbyteorder("="))
    return tensors, manifest["metadata"]


def save(path, tensors: Mapping[str, np.ndarray], metadata: Mapping[str, Any] | None = None) -> None:
    Path(path).write_bytes(dumps(tensors, metadata))


def load(path) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    return loads(Path(path).read_bytes())
