"""Analytical performance model: throughput, utilization, clock domains, energy proxy.

Throughput counts one MAC as two operations.  The energy proxy is a plain
weighted toggle count and is unitless; it tracks trends only and never
claims absolute power.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import numeric
from .adder_tree import ToggleStats

DEFAULT_ROWS = 64
DEFAULT_COLUMNS = 64

OPS_PER_MAC = 2

# Proxy weights: adder-output toggles and accumulator bit flips count one
# each; a group shift-add evaluation is charged a flat width-like cost.
COMBINE_OP_COST = 8.0


@dataclass(frozen=True)
class PerfConfig:
    clk_mhz: float
    w_precision: int
    a_precision: int
    independent_paths: bool = True
    rows: int = DEFAULT_ROWS
    columns: int = DEFAULT_COLUMNS

    def __post_init__(self):
        if self.clk_mhz <= 0:
            raise ValueError("clk_mhz must be positive")
        numeric.check_precision(self.w_precision)
        numeric.check_precision(self.a_precision)


@dataclass(frozen=True)
class PerfReport:
    macs_per_cycle: Fraction
    tops: float
    utilization: Fraction
    clk_sa_ratio: Fraction


def columns_effective(
    w_precision: int, independent_paths: bool, columns: int = DEFAULT_COLUMNS
) -> int:
    """Columns carrying live chunks at this weight precision."""
    numeric.check_precision(w_precision)
    groups = columns // numeric.GROUP_COLUMNS
    if w_precision in (6, 7):
        if independent_paths:
            return columns - 1  # a single fourth column stays idle
        return columns - groups  # one idle column per group
    return columns


def utilization(w_precision: int, independent_paths: bool) -> Fraction:
    """Fraction of array columns holding live weight chunks."""
    return Fraction(
        columns_effective(w_precision, independent_paths), DEFAULT_COLUMNS
    )


def weight_capacity(
    w_precision: int, independent_paths: bool, columns: int = DEFAULT_COLUMNS
) -> int:
    """Concurrent weights per `columns` array columns."""
    cfg = numeric.group_config(w_precision)
    eff = columns_effective(w_precision, independent_paths, columns)
    return eff // cfg.columns_per_weight


def clock_domain_ratio(a_precision: int) -> Fraction:
    """Shift-add clock rate relative to the bit clock: 1/N for N-bit activations."""
    numeric.check_precision(a_precision)
    return Fraction(1, a_precision)


def throughput(cfg: PerfConfig) -> PerfReport:
    """Peak MAC rate and TOPS for a fully occupied array."""
    group_cfg = numeric.group_config(cfg.w_precision)
    eff = columns_effective(cfg.w_precision, cfg.independent_paths, cfg.columns)
    weights = Fraction(eff, group_cfg.columns_per_weight)
    macs_per_cycle = cfg.rows * weights / cfg.a_precision
    tops = float(OPS_PER_MAC * macs_per_cycle * cfg.clk_mhz * 1e-6)
    return PerfReport(
        macs_per_cycle=macs_per_cycle,
        tops=tops,
        utilization=Fraction(eff, cfg.columns),
        clk_sa_ratio=clock_domain_ratio(cfg.a_precision),
    )


def energy_proxy(
    clk_sa_ops: int,
    tree_toggles: ToggleStats | None,
    acc_bit_toggles: int | None,
) -> float:
    """Unitless activity proxy for one run: toggles plus combine-op cost."""
    total = COMBINE_OP_COST * clk_sa_ops
    if tree_toggles is not None:
        total += tree_toggles.carry_toggles + tree_toggles.sum_toggles
    if acc_bit_toggles is not None:
        total += acc_bit_toggles
    return float(total)
