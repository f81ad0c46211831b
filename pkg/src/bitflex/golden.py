"""Exact integer reference for dot products and GEMM.

Deliberately independent of the simulator modules: no chunk decomposition,
no bit-plane code, just unbounded integer arithmetic, so agreement with the
simulator is meaningful evidence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import OutOfRange, ShapeMismatch


@dataclass(frozen=True)
class GemmSpec:
    """Shape and operand format of one integer matrix product."""

    rows_out: int
    inner: int
    cols_in: int
    w_precision: int
    a_precision: int
    w_signed: bool = True
    a_signed: bool = True

    def __post_init__(self):
        if min(self.rows_out, self.inner, self.cols_in) < 1:
            raise ShapeMismatch("all GEMM dimensions must be >= 1")


def _check_range(values: np.ndarray, precision: int, signed: bool, what: str) -> None:
    if signed:
        lo, hi = -(1 << (precision - 1)), (1 << (precision - 1)) - 1
    else:
        lo, hi = 0, (1 << precision) - 1
    if values.size and (values.min() < lo or values.max() > hi):
        raise OutOfRange(f"{what} outside {precision}-bit {'signed' if signed else 'unsigned'} range")


def dot_reference(w: Sequence[int], a: Sequence[int]) -> int:
    """Exact dot product with unbounded integers."""
    if len(w) != len(a):
        raise ShapeMismatch(f"dot of length {len(w)} against {len(a)}")
    return sum(int(x) * int(y) for x, y in zip(w, a))


def gemm_reference(spec: GemmSpec, w, a) -> np.ndarray:
    """Exact integer matrix product W @ A with operand range checks."""
    w = np.asarray(w, dtype=np.int64)
    a = np.asarray(a, dtype=np.int64)
    if w.shape != (spec.rows_out, spec.inner):
        raise ShapeMismatch(f"W is {w.shape}, expected {(spec.rows_out, spec.inner)}")
    if a.shape != (spec.inner, spec.cols_in):
        raise ShapeMismatch(f"A is {a.shape}, expected {(spec.inner, spec.cols_in)}")
    _check_range(w, spec.w_precision, spec.w_signed, "weights")
    _check_range(a, spec.a_precision, spec.a_signed, "activations")
    # 8-bit operands over a 64-deep reduction stay far inside int64.
    return w @ a
