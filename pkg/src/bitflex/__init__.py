"""Bit-accurate model of a precision-scalable bit-serial systolic MAC array.

The array holds 64x64 one-bit multipliers.  Weights of 2..8 bits are
decomposed into 2-/3-bit column chunks and preloaded; activations of 2..8
bits stream in LSB first, one bit per cycle.  Column sums come from a
dual-path carry-save tree, are accumulated over the activation cycles, and
are recombined across columns by configurable shift-add logic running in a
slower clock domain.  Everything is integer-exact and checked against an
independent reference GEMM.
"""

from .adder_tree import (
    BatTree,
    CsaTree,
    ToggleStats,
    TreeSum,
    bat_tree_sum,
    compare_trees,
    csa_tree_sum,
)
from .array import (
    CycleStats,
    PEArrayState,
    TileResult,
    capacity,
    map_weights,
    preload,
    run_tile,
)
from .combine import (
    ColumnResult,
    GroupResult,
    accumulate_serial,
    combine_group,
    combine_independent,
)
from .golden import GemmSpec, dot_reference, gemm_reference
from .harness import LayerSpec, parse_workload, run_workload, tile_layer
from .numeric import (
    ActivationStream,
    ChunkVector,
    GroupConfig,
    Mode,
    WeightChunk,
    activation_bitplanes,
    decompose_weight,
    decode_value,
    encode_value,
    group_config,
    reconstruct_weight,
)
from .pe import Product3, multiply_bit
from .perf import PerfConfig, PerfReport, clock_domain_ratio, throughput, utilization

__version__ = "0.1.0"

__all__ = [
    "ActivationStream",
    "BatTree",
    "ChunkVector",
    "ColumnResult",
    "CsaTree",
    "CycleStats",
    "GemmSpec",
    "GroupConfig",
    "GroupResult",
    "LayerSpec",
    "Mode",
    "PEArrayState",
    "PerfConfig",
    "PerfReport",
    "Product3",
    "TileResult",
    "ToggleStats",
    "TreeSum",
    "WeightChunk",
    "accumulate_serial",
    "activation_bitplanes",
    "bat_tree_sum",
    "capacity",
    "clock_domain_ratio",
    "combine_group",
    "combine_independent",
    "compare_trees",
    "csa_tree_sum",
    "decode_value",
    "decompose_weight",
    "dot_reference",
    "encode_value",
    "gemm_reference",
    "group_config",
    "map_weights",
    "multiply_bit",
    "parse_workload",
    "preload",
    "reconstruct_weight",
    "run_tile",
    "run_workload",
    "throughput",
    "tile_layer",
    "utilization",
]
