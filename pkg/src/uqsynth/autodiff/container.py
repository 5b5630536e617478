"""Binary container for named float32 arrays with a JSON header.

Layout (all little-endian):

    bytes 0..7    magic b"UQTNSR01"
    bytes 8..15   uint64 header length in bytes
    header        UTF-8 JSON: {"dtype": "f32", "arrays": [{"name", "shape",
                  "offset"}...], ...user fields...}; offsets count float32
                  elements from the start of the payload
    payload       the arrays' raw f32 data, C order, concatenated

Round-trips are bit-exact. Used for model checkpoints, dataset image
blobs and sweep records.
"""

import json
from pathlib import Path

import numpy as np

MAGIC = b"UQTNSR01"


class ContainerError(IOError):
    """Corrupt or truncated container file."""


def write_container(path, arrays: dict[str, np.ndarray], header: dict | None = None) -> None:
    meta = dict(header or {})
    index = []
    offset = 0
    blobs = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr, dtype="<f4")
        index.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size
        blobs.append(arr)
    meta["dtype"] = "f32"
    meta["arrays"] = index
    raw = json.dumps(meta, sort_keys=True).encode("utf-8")
    path = Path(path)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(np.array(len(raw), dtype="<u8").tobytes())
        f.write(raw)
        for blob in blobs:
            f.write(blob.tobytes())


def read_container(path) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != MAGIC:
            raise ContainerError(f"{path}: bad magic {magic!r}")
        hlen_raw = f.read(8)
        if len(hlen_raw) != 8:
            raise ContainerError(f"{path}: truncated header length")
        hlen = int(np.frombuffer(hlen_raw, dtype="<u8")[0])
        raw = f.read(hlen)
        if len(raw) != hlen:
            raise ContainerError(f"{path}: truncated header")
        try:
            meta = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ContainerError(f"{path}: corrupt header: {e}") from e
        payload = f.read()
    total = sum(int(np.prod(a["shape"])) for a in meta.get("arrays", []))
    expected = total * 4
    if len(payload) != expected:
        raise ContainerError(
            f"{path}: payload is {len(payload)} bytes, header expects {expected}"
        )
    flat = np.frombuffer(payload, dtype="<f4")
    arrays = {}
    for entry in meta["arrays"]:
        n = int(np.prod(entry["shape"]))
        start = entry["offset"]
        arrays[entry["name"]] = (
            flat[start : start + n].reshape(entry["shape"]).astype(np.float32)
        )
    return meta, arrays
