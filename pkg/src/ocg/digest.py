"""64-bit FNV-1a, the content hash used for changesets, snapshots and the changelog chain."""

from __future__ import annotations

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK
    return h


def hexdigest(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return f"{fnv1a64(data):016x}"
