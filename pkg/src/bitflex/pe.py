"""The processing element: a 1-bit x 2/3-bit multiplier giving a 3-bit signed product."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OutOfRange
from .numeric import Mode, WeightChunk


@dataclass(frozen=True)
class Product3:
    """3-bit two's-complement product of one PE."""

    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < 8:
            raise OutOfRange(f"not a 3-bit pattern: {self.bits}")

    @property
    def value(self) -> int:
        return self.bits - 8 if self.bits & 4 else self.bits


def multiplier_input(chunk: WeightChunk) -> int:
    """3-bit pattern presented to the PE's AND gates.

    In 2-bit mode the top input bit is the extended sign bit, S AND msb;
    3-bit mode passes the chunk bits straight through.
    """
    if chunk.mode is Mode.THREE_BIT:
        return chunk.bits
    msb = (chunk.bits >> 1) & 1
    ext = msb if chunk.s_flag else 0
    return (ext << 2) | chunk.bits


def multiply_bit(act_bit: int, chunk: WeightChunk) -> Product3:
    """AND a single activation bit with the preloaded chunk's input pattern."""
    if act_bit not in (0, 1):
        raise OutOfRange(f"activation bit must be 0 or 1, got {act_bit}")
    return Product3(multiplier_input(chunk) if act_bit else 0)
