"""Raw-bit plumbing: bit buffers, uniform decoding, Von Neumann de-biasing.

Bit order is MSB-first everywhere: the first bit of a group is its most
significant digit. Uniforms are decoded from fixed 53-bit groups (the full
double mantissa), u = m / 2**53.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientEntropyError

MANTISSA_BITS = 53
_SCALE = float(2**-53)


@dataclass
class BitBuffer:
    """An ordered sequence of bits tagged with the source that produced them."""

    bits: np.ndarray  # uint8, each element 0 or 1
    origin: str

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if self.bits.size and self.bits.max() > 1:
            raise ValueError("bits must contain only 0 and 1")
        if not self.origin:
            raise ValueError("origin must be non-empty")

    def __len__(self) -> int:
        return int(self.bits.size)

    @classmethod
    def from_bytes(cls, payload: bytes, origin: str) -> "BitBuffer":
        """Expand bytes to bits, most significant bit of each byte first."""
        return cls(np.unpackbits(np.frombuffer(payload, dtype=np.uint8)), origin)

    def to_bytes(self) -> bytes:
        """Pack to bytes (MSB-first); a trailing partial byte is zero-padded."""
        return np.packbits(self.bits).tobytes()


@dataclass
class UniformBatch:
    """Uniform [0, 1) variates plus an accounting of the bits they cost."""

    values: np.ndarray
    source: str
    bits_consumed: int
    remainder_bits: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass
class NormalBatch:
    """Standard-normal variates produced by inverse-transform sampling."""

    values: np.ndarray
    source: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return int(self.values.size)


def bits_to_uniform(buf: BitBuffer) -> UniformBatch:
    """Decode consecutive 53-bit groups (MSB first) into uniforms in [0, 1).

    Leftover bits that do not fill a group are reported in
    ``remainder_bits`` and not consumed.
    """
    n_bits = len(buf)
    if n_bits < MANTISSA_BITS:
        raise InsufficientEntropyError(MANTISSA_BITS, n_bits)
    n = n_bits // MANTISSA_BITS
    remainder = n_bits - n * MANTISSA_BITS
    groups = buf.bits[: n * MANTISSA_BITS].reshape(n, MANTISSA_BITS)
    # Pad each group to 64 bits, pack to 8 bytes, read as big-endian uint64.
    padded = np.zeros((n, 64), dtype=np.uint8)
    padded[:, :MANTISSA_BITS] = groups
    mantissa = (
        np.packbits(padded, axis=1)
        .view(">u8")
        .reshape(n)
        .astype(np.uint64)
        >> np.uint64(64 - MANTISSA_BITS)
    )
    values = mantissa.astype(np.float64) * _SCALE
    return UniformBatch(
        values=values,
        source=buf.origin,
        bits_consumed=n * MANTISSA_BITS,
        remainder_bits=remainder,
    )


# 8 mantissas fit exactly in 53 bytes (lcm(53, 8) = 424 bits).
_BLOCK_BYTES = 53
_BLOCK_VALUES = 8
_MASK = np.uint64(2**MANTISSA_BITS - 1)


def bytes_to_uniform_blocks(payload: bytes | np.ndarray, source: str) -> UniformBatch:
    """Decode whole 53-byte blocks of entropy into 8 uniforms each.

    Fast path equivalent to ``bits_to_uniform(BitBuffer.from_bytes(...))``
    for payloads that are a multiple of 53 bytes; avoids materialising the
    bit expansion.
    """
    raw = np.frombuffer(payload, dtype=np.uint8) if isinstance(payload, bytes) else payload
    if raw.size % _BLOCK_BYTES:
        raise ValueError("payload must be a multiple of 53 bytes")
    k = raw.size // _BLOCK_BYTES
    blocks = raw.reshape(k, _BLOCK_BYTES)
    values = np.empty((k, _BLOCK_VALUES), dtype=np.float64)
    for j in range(_BLOCK_VALUES):
        bit_off = j * MANTISSA_BITS
        # Clamp the 8-byte window inside the block; shift <= 11 keeps the
        # 53 target bits within the window's 64 bits.
        byte_off = min(bit_off // 8, _BLOCK_BYTES - 8)
        shift = bit_off - 8 * byte_off
        window = (
            np.ascontiguousarray(blocks[:, byte_off : byte_off + 8])
            .view(">u8")
            .reshape(k)
        )
        mantissa = (window >> np.uint64(64 - shift - MANTISSA_BITS)) & _MASK
        values[:, j] = mantissa.astype(np.float64)
    return UniformBatch(
        values=values.reshape(-1) * _SCALE,
        source=source,
        bits_consumed=k * _BLOCK_BYTES * 8,
        remainder_bits=0,
    )


def von_neumann_extract(buf: BitBuffer) -> BitBuffer:
    """De-bias an i.i.d. bitstream by the Von Neumann pairing rule.

    Non-overlapping pairs: (0,1) emits 0, (1,0) emits 1, equal pairs emit
    nothing. A trailing odd bit is dropped.
    """
    n_pairs = len(buf) // 2
    pairs = buf.bits[: n_pairs * 2].reshape(n_pairs, 2)
    keep = pairs[:, 0] != pairs[:, 1]
    return BitBuffer(pairs[keep, 0], origin=buf.origin + "+vn")
