"""Binary checkpoint format.

Layout (all integers little-endian):

    magic   4 bytes  b"SKEX"
    u32     format version (currently 1)
    u32     manifest length in bytes
    bytes   manifest, UTF-8 JSON
    u32     number of arrays
    per array:
        u16     name length, then name bytes (UTF-8)
        u8      ndim, then ndim u64 dimensions
        f64[]   row-major data, little-endian

The manifest carries everything needed to rebuild the module before loading
weights: architecture sizes, class-layout version, training config.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"SKEX"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    pass


def save_checkpoint(path, manifest: dict, arrays: dict[str, np.ndarray]) -> None:
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", FORMAT_VERSION)
    mbytes = json.dumps(manifest, sort_keys=True).encode("utf-8")
    blob += struct.pack("<I", len(mbytes))
    blob += mbytes
    blob += struct.pack("<I", len(arrays))
    for name, arr in arrays.items():
        nbytes = name.encode("utf-8")
        if len(nbytes) > 0xFFFF:
            raise CheckpointError(f"array name too long: {name[:40]}...")
        # note: ascontiguousarray would promote 0-d arrays to 1-d
        arr = np.asarray(arr, dtype=np.float64, order="C")
        blob += struct.pack("<H", len(nbytes))
        blob += nbytes
        blob += struct.pack("<B", arr.ndim)
        for d in arr.shape:
            blob += struct.pack("<Q", d)
        blob += arr.astype("<f8").tobytes()
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(bytes(blob))


def load_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    off = 0

    def take(n):
        nonlocal off
        if off + n > len(raw):
            raise CheckpointError("checkpoint file truncated")
        chunk = raw[off : off + n]
        off += n
        return chunk

    if take(4) != MAGIC:
        raise CheckpointError("bad magic; not a checkpoint file")
    (version,) = struct.unpack("<I", take(4))
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format version {version}")
    (mlen,) = struct.unpack("<I", take(4))
    manifest = json.loads(take(mlen).decode("utf-8"))
    (count,) = struct.unpack("<I", take(4))
    arrays: dict[str, np.ndarray] = {}
    for _ in range(count):
        (nlen,) = struct.unpack("<H", take(2))
        name = take(nlen).decode("utf-8")
        (ndim,) = struct.unpack("<B", take(1))
        shape = tuple(struct.unpack("<Q", take(8))[0] for _ in range(ndim))
        n = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(take(8 * n), dtype="<f8").reshape(shape).copy()
        arrays[name] = data
    if off != len(raw):
        raise CheckpointError("trailing bytes after the last array")
    return manifest, arrays
