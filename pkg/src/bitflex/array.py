"""The 64x64 weight-stationary systolic array: mapping, preload, tile execution.

Weights are preloaded top to bottom, one row per cycle; activations stream in
bit-serially and reach each four-column group one register stage later than
the previous group.  The skew moves timing only, never values, so results are
computed unskewed and the trace applies the per-group offset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Optional, Sequence

import numpy as np

from . import combine, numeric
from .adder_tree import CsaTree, ToggleStats
from .errors import (
    CapacityExceeded,
    OutOfRange,
    PrecisionMismatch,
    ShapeMismatch,
)
from .numeric import ActivationStream, GroupConfig, Mode, WeightChunk

ROWS = 64
COLUMNS = 64
GROUPS = COLUMNS // numeric.GROUP_COLUMNS
SKEW_CYCLES = GROUPS - 1  # one register stage per group boundary
DEFAULT_PIPELINE_LATENCY = 2  # tree output register + accumulator register

# Independent-path wiring for 6/7-bit weights: path p taps the fourth column
# of three consecutive groups; the last group's fourth column stays idle.
INDEPENDENT_PATH_GROUPS = tuple((3 * p, 3 * p + 1, 3 * p + 2) for p in range(5))


@dataclass(frozen=True)
class CycleStats:
    clk_cycles: int
    clk_sa_ops: int
    preload_cycles: int
    active_columns: int
    skew_cycles: int


@dataclass
class TileResult:
    """Per-weight, per-sample MAC values plus cycle accounting.

    `tree_toggles` and `acc_bit_toggles` are filled only when the tile ran
    with toggle collection enabled.
    """

    outputs: np.ndarray  # (num_weights, samples) int64
    stats: CycleStats
    hw_width_ok: bool
    tree_toggles: Optional[ToggleStats] = None
    acc_bit_toggles: Optional[int] = None


@dataclass
class PEArrayState:
    """Routing plan plus (after preload) the per-PE multiplier input patterns."""

    w_precision: int
    w_signed: bool
    independent_paths: bool
    effective_precision: int
    group_configs: tuple[GroupConfig, ...]
    routing: dict[int, tuple[int, ...]]  # weight id -> columns, LSB chunk first
    independent_routing: dict[int, int]  # weight id -> independent path id
    col_weight: np.ndarray  # (COLUMNS,) int16, -1 when idle
    col_chunk: np.ndarray  # chunk index within the weight
    col_width: np.ndarray  # 2 or 3 bits, 0 when idle
    col_sflag: np.ndarray  # column S signal (signed 2-bit top chunk)
    mult_inputs: Optional[np.ndarray] = None  # (ROWS, COLUMNS) uint8, 3-bit patterns
    preload_cycles: int = 0

    @property
    def num_weights(self) -> int:
        return len(self.routing)

    @property
    def active_columns(self) -> int:
        return int((self.col_weight >= 0).sum())

    @property
    def chunk_values(self) -> np.ndarray:
        """Signed 3-bit decode of every PE's multiplier input pattern."""
        if self.mult_inputs is None:
            raise ShapeMismatch("array not preloaded")
        m = self.mult_inputs.astype(np.int32)
        return m - ((m & 4) << 1)

    def chunk_at(self, row: int, col: int) -> Optional[WeightChunk]:
        """Reconstruct the chunk loaded at one PE, for inspection and tests."""
        if self.mult_inputs is None or self.col_weight[col] < 0:
            return None
        width = int(self.col_width[col])
        bits = int(self.mult_inputs[row, col]) & ((1 << width) - 1)
        mode = Mode.THREE_BIT if width == 3 else Mode.TWO_BIT
        return WeightChunk(bits, mode, bool(self.col_sflag[col]), 2 * int(self.col_chunk[col]))


def capacity(precision: int, signed: bool, independent_paths: bool) -> int:
    """Concurrent weights per tile at this precision/signedness."""
    eff = numeric.effective_weight_precision(precision, signed)
    cfg = numeric.group_config(eff)
    if eff in (6, 7):
        return GROUPS + (len(INDEPENDENT_PATH_GROUPS) if independent_paths else 0)
    return (numeric.GROUP_COLUMNS // cfg.columns_per_weight) * GROUPS


def map_weights(
    weights: Sequence,
    precision: int,
    signed: bool,
    independent_paths: bool = True,
) -> PEArrayState:
    """Build the column routing for `len(weights)` logical weights.

    Routing depends only on the weight count; values arrive with `preload`.
    6/7-bit weights use three columns per group, and ids past the 16 in-group
    slots ride the independent paths over the reclaimed fourth columns.
    """
    numeric.check_precision(precision)
    n = len(weights)
    eff = numeric.effective_weight_precision(precision, signed)
    cfg = numeric.group_config(eff)
    cap = capacity(precision, signed, independent_paths)
    if n > cap:
        raise CapacityExceeded(
            f"{n} weights exceed the {cap}-weight capacity at {precision}-bit"
            f"{' unsigned' if not signed else ''}"
        )
    widths = numeric.DECOMPOSED_WIDTHS[eff]
    cpw = cfg.columns_per_weight
    col_weight = np.full(COLUMNS, -1, dtype=np.int16)
    col_chunk = np.zeros(COLUMNS, dtype=np.int8)
    col_width = np.zeros(COLUMNS, dtype=np.int8)
    col_sflag = np.zeros(COLUMNS, dtype=bool)
    routing: dict[int, tuple[int, ...]] = {}
    independent_routing: dict[int, int] = {}
    for j in range(n):
        if eff in (6, 7) and j >= GROUPS:
            path = j - GROUPS
            cols = tuple(
                numeric.GROUP_COLUMNS * g + 3 for g in INDEPENDENT_PATH_GROUPS[path]
            )
            independent_routing[j] = path
        else:
            g, slot = divmod(j, cfg.outputs_per_group)
            base = numeric.GROUP_COLUMNS * g + slot * cpw
            cols = tuple(base + i for i in range(cpw))
        routing[j] = cols
        for i, c in enumerate(cols):
            col_weight[c] = j
            col_chunk[c] = i
            col_width[c] = widths[i]
            col_sflag[c] = signed and widths[i] == 2 and i == cpw - 1
    return PEArrayState(
        w_precision=precision,
        w_signed=signed,
        independent_paths=independent_paths,
        effective_precision=eff,
        group_configs=(cfg,) * GROUPS,
        routing=routing,
        independent_routing=independent_routing,
        col_weight=col_weight,
        col_chunk=col_chunk,
        col_width=col_width,
        col_sflag=col_sflag,
    )


def preload(state: PEArrayState, rows) -> PEArrayState:
    """Fill the grid row by row (64 cycles); rows[r][j] is weight j's value at row r.

    Idempotent: reloading the same rows reproduces the same grid.
    """
    w = np.asarray(rows, dtype=np.int64)
    n = state.num_weights
    if w.shape != (ROWS, n):
        raise ShapeMismatch(f"expected a {(ROWS, n)} weight-row matrix, got {w.shape}")
    lo, hi = numeric.value_range(state.w_precision, state.w_signed)
    if w.size and (w.min() < lo or w.max() > hi):
        bad = w[(w < lo) | (w > hi)].flat[0]
        raise OutOfRange(
            f"weight {bad} is not representable as {state.w_precision}-bit "
            f"{'signed' if state.w_signed else 'unsigned'}"
        )
    eff = state.effective_precision
    patterns = w & ((1 << eff) - 1)
    mult = np.zeros((ROWS, COLUMNS), dtype=np.uint8)
    for c in range(COLUMNS):
        j = int(state.col_weight[c])
        if j < 0:
            continue
        width = int(state.col_width[c])
        bits = (patterns[:, j] >> (2 * int(state.col_chunk[c]))) & ((1 << width) - 1)
        if width == 2 and state.col_sflag[c]:
            bits = bits | (((bits >> 1) & 1) << 2)  # extended sign bit
        mult[:, c] = bits
    state.mult_inputs = mult
    state.preload_cycles = ROWS
    return state


def _acc_bit_toggles(scaled: np.ndarray) -> int:
    """Bit flips of the per-column shift-accumulator registers.

    `scaled` is (samples, cycles, columns) of signed per-cycle contributions;
    the register holds the running sum in ACCUMULATOR_BITS-bit two's
    complement and clears between samples.
    """
    acc = np.cumsum(scaled, axis=1)
    mask = (1 << combine.ACCUMULATOR_BITS) - 1
    words = (acc & mask).astype(np.uint64)
    prev = np.concatenate(
        [np.zeros_like(words[:, :1, :]), words[:, :-1, :]], axis=1
    )
    return int(np.bitwise_count(words ^ prev).sum())


def _tree_toggles(state: PEArrayState, planes: np.ndarray) -> ToggleStats:
    """Drive every column's carry-save tree with its real product bit streams.

    The multiplier inputs are constant while weights stay resident, so the
    bit-sliced product stream of (row, bit) is the row's activation bit
    stream gated by that constant bit.
    """
    cycles = planes.shape[0]
    act_slices = []
    for r in range(ROWS):
        packed = np.packbits(planes[:, r].astype(np.uint8), bitorder="little")
        act_slices.append(int.from_bytes(packed.tobytes(), "little"))
    total = ToggleStats()
    tree = CsaTree()
    for c in range(COLUMNS):
        inputs = []
        pattern_col = state.mult_inputs[:, c]
        for r in range(ROWS):
            pat = int(pattern_col[r])
            for b in range(3):
                inputs.append(act_slices[r] if (pat >> b) & 1 else 0)
        tree.reset()
        total = total + tree.eval_bit_slices(inputs, cycles)
    return total


def run_tile(
    state: PEArrayState,
    acts: Sequence[ActivationStream],
    *,
    pipeline_latency: int = DEFAULT_PIPELINE_LATENCY,
    collect_toggles: bool = False,
    trace: Optional[IO[str]] = None,
) -> TileResult:
    """Stream K activation samples through the loaded array.

    outputs[j][k] is the exact dot product of logical weight j's 64-row
    column with sample k.  clk_cycles = preload + K*N + skew + latency.
    """
    if state.mult_inputs is None:
        raise ShapeMismatch("preload the array before running a tile")
    if not len(acts):
        raise ShapeMismatch("at least one activation sample is required")
    n_prec = acts[0].precision
    n_signed = acts[0].signed
    for s in acts:
        if s.precision != n_prec or s.signed != n_signed:
            raise PrecisionMismatch("all samples in a tile share one activation format")
        if s.rows != ROWS:
            raise ShapeMismatch(f"expected {ROWS} activation rows, got {s.rows}")
    samples, n = len(acts), n_prec

    planes = np.concatenate([s.bits for s in acts], axis=0).astype(np.int64)
    totals = planes @ state.chunk_values.astype(np.int64)  # (samples*n, COLUMNS)
    per_cycle = totals.reshape(samples, n, COLUMNS)
    signed_terms = per_cycle.copy()
    if n_signed:
        signed_terms[:, n - 1, :] *= -1
    cycle_weights = np.int64(1) << np.arange(n, dtype=np.int64)
    scaled = signed_terms * cycle_weights[None, :, None]
    col_values = scaled.sum(axis=1)  # (samples, COLUMNS)
    hw_ok = bool(
        np.all(np.abs(col_values) < (1 << (combine.ACCUMULATOR_BITS - 1)))
    )

    cfg = state.group_configs[0]
    per_group = cfg.outputs_per_group
    six_seven = state.effective_precision in (6, 7)
    outputs = np.zeros((state.num_weights, samples), dtype=np.int64)
    feeds = np.zeros((GROUPS, samples), dtype=np.int64)
    for g in range(GROUPS):
        base = numeric.GROUP_COLUMNS * g
        c0 = col_values[:, base]
        c1 = col_values[:, base + 1]
        c2 = col_values[:, base + 2]
        c3 = col_values[:, base + 3]
        if six_seven:
            feeds[g] = c3
            c3 = np.zeros_like(c3)
        t_low = c0 + (c1 << cfg.shifter1)
        t_high = c2 + (c3 << cfg.shifter0)
        if per_group == 1:
            slot_values = [t_low + (t_high << cfg.shifter2)]
        elif per_group == 2:
            slot_values = [t_low, t_high]
        else:
            slot_values = [c0, c1, c2, c3]
        for slot, vals in enumerate(slot_values):
            j = g * per_group + slot
            if j in state.routing and j not in state.independent_routing:
                outputs[j] = vals
    for j, path in state.independent_routing.items():
        ga, gb, gc = INDEPENDENT_PATH_GROUPS[path]
        outputs[j] = feeds[ga] + (feeds[gb] << 2) + (feeds[gc] << 4)

    compute_cycles = samples * n
    stats = CycleStats(
        clk_cycles=state.preload_cycles + compute_cycles + SKEW_CYCLES + pipeline_latency,
        clk_sa_ops=GROUPS * samples,
        preload_cycles=state.preload_cycles,
        active_columns=state.active_columns,
        skew_cycles=SKEW_CYCLES,
    )

    if trace is not None:
        for t in range(compute_cycles):
            for g in range(GROUPS):
                base = numeric.GROUP_COLUMNS * g
                record = {
                    "cycle": state.preload_cycles + t + g,
                    "group": g,
                    "totals": [int(x) for x in totals[t, base : base + 4]],
                }
                trace.write(json.dumps(record) + "\n")

    tree_toggles = None
    acc_toggles = None
    if collect_toggles:
        tree_toggles = _tree_toggles(state, planes)
        acc_toggles = _acc_bit_toggles(scaled)

    return TileResult(
        outputs=outputs,
        stats=stats,
        hw_width_ok=hw_ok,
        tree_toggles=tree_toggles,
        acc_bit_toggles=acc_toggles,
    )
