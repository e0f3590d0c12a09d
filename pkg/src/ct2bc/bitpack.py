"""Bit/byte packing helpers. All bitmaps are MSB-first, zero-padded."""

from __future__ import annotations

from typing import Sequence


def pack_bits(bits: Sequence[int]) -> bytes:
    out = bytearray((len(bits) + 7) // 8)
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"bit {i} is {b!r}, expected 0 or 1")
        if b:
            out[i >> 3] |= 0x80 >> (i & 7)
    return bytes(out)


def unpack_bits(data: bytes, count: int) -> tuple[int, ...]:
    if len(data) != (count + 7) // 8:
        raise ValueError(f"expected {(count + 7) // 8} bytes for {count} bits, got {len(data)}")
    bits = tuple((data[i >> 3] >> (7 - (i & 7))) & 1 for i in range(count))
    # reject non-canonical padding so encodings stay bijective
    if count % 8 and data[-1] & ((1 << (8 - count % 8)) - 1):
        raise ValueError("nonzero padding bits")
    return bits


def bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | (b & 1)
    return value


def int_to_bits(value: int, width: int) -> tuple[int, ...]:
    if value < 0 or value >= 1 << width:
        raise ValueError(f"{value} does not fit {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))
