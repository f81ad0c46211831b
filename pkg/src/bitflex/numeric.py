"""Two's-complement codecs, weight chunk decomposition, and group configuration.

Weights of 2..8 bits are split into 2-bit and 3-bit chunks, one chunk per
array column, least significant chunk first.  Only the most significant
chunk of a weight may carry its sign: either as a 3-bit chunk (which always
holds the original sign bit) or as a 2-bit chunk whose column-level S signal
is asserted.  Every lower chunk is an unsigned 2-bit slice.  Four adjacent
columns form a group that shares the configurable shift-add logic; the
per-precision shifter settings live in `group_config`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import MalformedChunkVector, OutOfRange, UnsupportedPrecision

MIN_PRECISION = 2
MAX_PRECISION = 8

GROUP_COLUMNS = 4


class Mode(enum.Enum):
    """Loading mode of one array column."""

    TWO_BIT = "2b"
    THREE_BIT = "3b"
    IDLE = "idle"


def check_precision(bits: int) -> int:
    if not MIN_PRECISION <= bits <= MAX_PRECISION:
        raise UnsupportedPrecision(
            f"precision must be in {MIN_PRECISION}..{MAX_PRECISION}, got {bits}"
        )
    return bits


def value_range(precision: int, signed: bool) -> tuple[int, int]:
    """Inclusive (lo, hi) range of representable values."""
    check_precision(precision)
    if signed:
        return -(1 << (precision - 1)), (1 << (precision - 1)) - 1
    return 0, (1 << precision) - 1


def check_value(value: int, precision: int, signed: bool) -> int:
    lo, hi = value_range(precision, signed)
    if not lo <= value <= hi:
        kind = "signed" if signed else "unsigned"
        raise OutOfRange(f"{value} is not representable as {precision}-bit {kind}")
    return value


def encode_value(value: int, precision: int, signed: bool) -> int:
    """Return the p-bit two's-complement (or plain binary) pattern of `value`."""
    check_value(value, precision, signed)
    return value & ((1 << precision) - 1)


def decode_value(bits: int, precision: int, signed: bool) -> int:
    """Exact inverse of `encode_value`."""
    check_precision(precision)
    if not 0 <= bits < (1 << precision):
        raise OutOfRange(f"{bits:#x} is not a {precision}-bit pattern")
    if signed and bits & (1 << (precision - 1)):
        return bits - (1 << precision)
    return bits


@dataclass(frozen=True)
class WeightChunk:
    """One 2- or 3-bit slice of a weight, preloaded into a single column.

    `significance` is the bit position of the slice within the source weight.
    `s_flag` is the column-level S signal marking a 2-bit chunk as signed; it
    is meaningless in 3-bit mode, which always carries the original sign bit.
    """

    bits: int
    mode: Mode
    s_flag: bool = False
    significance: int = 0

    def __post_init__(self):
        if self.mode is Mode.IDLE:
            raise MalformedChunkVector("a chunk cannot use the idle mode")
        if not 0 <= self.bits < (1 << self.width):
            raise MalformedChunkVector(
                f"{self.bits:#b} does not fit a {self.width}-bit chunk"
            )
        if self.significance not in (0, 2, 4, 6):
            raise MalformedChunkVector(f"bad chunk significance {self.significance}")

    @property
    def width(self) -> int:
        return 3 if self.mode is Mode.THREE_BIT else 2

    @property
    def value(self) -> int:
        if self.mode is Mode.THREE_BIT:
            return self.bits - 8 if self.bits & 4 else self.bits
        if self.s_flag and self.bits & 2:
            return self.bits - 4
        return self.bits


@dataclass(frozen=True)
class ChunkVector:
    """A decomposed weight: chunks ordered least significant first."""

    chunks: tuple[WeightChunk, ...]
    source_precision: int
    source_signed: bool


# Chunk widths per weight precision, least significant chunk first.  Odd
# precisions put their top three bits, sign included, into one 3-bit chunk.
DECOMPOSED_WIDTHS = {
    2: (2,),
    3: (3,),
    4: (2, 2),
    5: (2, 3),
    6: (2, 2, 2),
    7: (2, 2, 3),
    8: (2, 2, 2, 2),
}

# Shift amounts in bits of the three group shifters, per weight precision.
_SHIFTERS = {
    8: (2, 2, 4),
    7: (0, 2, 4),
    6: (0, 2, 4),
    5: (2, 2, 0),
    4: (2, 2, 0),
    3: (0, 0, 0),
    2: (0, 0, 0),
}


def effective_weight_precision(precision: int, signed: bool) -> int:
    """Precision that drives column occupancy.

    3-bit mode hardwires a sign interpretation of its top bit, so unsigned
    weights at odd precisions are zero-extended by one bit and decomposed
    with unsigned 2-bit chunks only.  This costs one extra column for
    unsigned 3- and 7-bit weights (5-bit lands on the 6-bit layout).
    """
    check_precision(precision)
    if not signed and precision % 2 == 1:
        return precision + 1
    return precision


def decompose_weight(value: int, precision: int, signed: bool) -> ChunkVector:
    """Split `value` into per-column chunks; see `DECOMPOSED_WIDTHS`."""
    check_value(value, precision, signed)
    eff = effective_weight_precision(precision, signed)
    widths = DECOMPOSED_WIDTHS[eff]
    pattern = value & ((1 << eff) - 1)
    chunks = []
    for i, width in enumerate(widths):
        top = i == len(widths) - 1
        bits = (pattern >> (2 * i)) & ((1 << width) - 1)
        if width == 3:
            chunks.append(WeightChunk(bits, Mode.THREE_BIT, False, 2 * i))
        else:
            chunks.append(WeightChunk(bits, Mode.TWO_BIT, signed and top, 2 * i))
    return ChunkVector(tuple(chunks), precision, signed)


def reconstruct_weight(cv: ChunkVector) -> int:
    """Inverse of `decompose_weight`: sum of chunk values at their significances."""
    if not isinstance(cv, ChunkVector) or not cv.chunks:
        raise MalformedChunkVector("empty chunk vector")
    eff = effective_weight_precision(cv.source_precision, cv.source_signed)
    widths = DECOMPOSED_WIDTHS[eff]
    if len(cv.chunks) != len(widths):
        raise MalformedChunkVector(
            f"expected {len(widths)} chunks for {cv.source_precision}-bit, "
            f"got {len(cv.chunks)}"
        )
    total = 0
    for i, (chunk, width) in enumerate(zip(cv.chunks, widths)):
        top = i == len(widths) - 1
        if chunk.significance != 2 * i:
            raise MalformedChunkVector(
                f"chunk {i} has significance {chunk.significance}, expected {2 * i}"
            )
        if chunk.width != width:
            raise MalformedChunkVector(f"chunk {i} should be {width} bits wide")
        if not top and (chunk.mode is not Mode.TWO_BIT or chunk.s_flag):
            raise MalformedChunkVector("only the most significant chunk may carry a sign")
        total += chunk.value << chunk.significance
    return total


@dataclass(frozen=True)
class GroupConfig:
    """Shift-add configuration of one four-column group at one weight precision.

    `column_s` marks the columns that hold the sign-carrying 2-bit chunk when
    the weights are signed; actual sign behaviour at run time comes from each
    loaded chunk's own `s_flag`.
    """

    weight_precision: int
    column_modes: tuple[Mode, Mode, Mode, Mode]
    column_s: tuple[bool, bool, bool, bool]
    shifter0: int
    shifter1: int
    shifter2: int
    columns_per_weight: int
    outputs_per_group: int


def group_config(weight_precision: int) -> GroupConfig:
    """Column modes and shifter settings for a group at `weight_precision`."""
    check_precision(weight_precision)
    widths = DECOMPOSED_WIDTHS[weight_precision]
    cpw = len(widths)
    slots = GROUP_COLUMNS // cpw  # weights per group; 6/7-bit leave one column over
    modes: list[Mode] = []
    s_cols: list[bool] = []
    for _ in range(slots):
        for i, width in enumerate(widths):
            modes.append(Mode.THREE_BIT if width == 3 else Mode.TWO_BIT)
            s_cols.append(width == 2 and i == cpw - 1)
    while len(modes) < GROUP_COLUMNS:
        modes.append(Mode.IDLE)
        s_cols.append(False)
    s0, s1, s2 = _SHIFTERS[weight_precision]
    return GroupConfig(
        weight_precision=weight_precision,
        column_modes=tuple(modes),
        column_s=tuple(s_cols),
        shifter0=s0,
        shifter1=s1,
        shifter2=s2,
        columns_per_weight=cpw,
        outputs_per_group=slots,
    )


@dataclass
class ActivationStream:
    """LSB-first bit-planes of one activation sample (one value per row).

    `bits[t, r]` is bit t of row r's value.  `sf[t]` marks the sign-bit
    cycle, at which the column sum must be negated before accumulation;
    unsigned streams never assert it.
    """

    bits: np.ndarray  # (precision, rows) uint8 of 0/1
    sf: tuple[bool, ...]
    precision: int
    signed: bool

    @property
    def rows(self) -> int:
        return int(self.bits.shape[1])


def activation_bitplanes(
    values: Sequence[int], precision: int, signed: bool
) -> ActivationStream:
    """Serialize `values` into LSB-first bit-planes plus the SF schedule."""
    check_precision(precision)
    vals = np.asarray(list(values), dtype=np.int64)
    lo, hi = value_range(precision, signed)
    if vals.size and (vals.min() < lo or vals.max() > hi):
        bad = vals[(vals < lo) | (vals > hi)][0]
        raise OutOfRange(
            f"activation {bad} is not representable as {precision}-bit "
            f"{'signed' if signed else 'unsigned'}"
        )
    pattern = vals & ((1 << precision) - 1)
    planes = np.stack([(pattern >> t) & 1 for t in range(precision)]).astype(np.uint8)
    sf = tuple(signed and t == precision - 1 for t in range(precision))
    return ActivationStream(planes, sf, precision, signed)
