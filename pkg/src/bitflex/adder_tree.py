"""Column adder trees: dual-path carry-save reduction vs. a binary adder tree.

Both trees sum 64 3-bit signed PE products per cycle and are modeled gate by
gate so switching activity can be counted.  The carry-save tree splits each
product: the two low bits enter an unsigned 3:2 reduction, the sign bits
enter a population counter whose result is negated (weight -4) before being
merged with the upper bits of the low-path sum.  The binary adder tree is
the baseline: a balanced tree of carry-propagate adders with sign extension
at every level.

Wires are bit-sliced over time: each wire is one Python int whose bit t is
the wire's value at cycle t, so a whole multi-cycle batch evaluates with a
few hundred big-int operations.  Toggle counts compare every adder output
bit against its value in the previous cycle; the first cycle after a reset
establishes the baseline and reports zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArityMismatch, OutOfRange
from .pe import Product3

TREE_ARITY = 64

_CONST0 = 0
_CONST1 = 1  # reserved wire ids


class _NetlistBuilder:
    """Builds a static gate list once; evaluation replays it every batch."""

    def __init__(self):
        self.n_wires = 2
        self.gates: list[tuple] = []

    def wire(self) -> int:
        w = self.n_wires
        self.n_wires += 1
        return w

    def full_adder(self, a: int, b: int, c: int) -> tuple[int, int]:
        s, co = self.wire(), self.wire()
        self.gates.append(("fa", a, b, c, s, co))
        return s, co

    def half_adder(self, a: int, b: int) -> tuple[int, int]:
        s, co = self.wire(), self.wire()
        self.gates.append(("ha", a, b, s, co))
        return s, co

    def sum_cell(self, *ins: int) -> int:
        """Top position of a width-capped adder: the carry out drives nothing,
        so synthesis keeps only the sum XOR and no carry net exists."""
        s = self.wire()
        self.gates.append(("fas" if len(ins) == 3 else "has", *ins, s))
        return s

    def inverter(self, a: int) -> int:
        out = self.wire()
        self.gates.append(("inv", a, out))
        return out

    def reduce_csa(self, columns: dict[int, list[int]]) -> dict[int, list[int]]:
        """3:2-compress until every bit position holds at most two bits."""
        while any(len(col) > 2 for col in columns.values()):
            nxt: dict[int, list[int]] = {}
            for sig in sorted(columns):
                bits = columns[sig]
                i = 0
                while len(bits) - i >= 3:
                    s, co = self.full_adder(bits[i], bits[i + 1], bits[i + 2])
                    i += 3
                    nxt.setdefault(sig, []).append(s)
                    nxt.setdefault(sig + 1, []).append(co)
                nxt.setdefault(sig, []).extend(bits[i:])
            columns = {k: v for k, v in nxt.items() if v}
        return columns

    def ripple_sum(self, columns: dict[int, list[int]], width: int) -> list[int]:
        """Carry-propagate the remaining <=2 bits per position into sum wires.

        The value fits `width` bits, so the top position keeps no carry net.
        """
        out = []
        carry = _CONST0
        for sig in range(width):
            bits = [w for w in columns.get(sig, ()) if w != _CONST0]
            if carry != _CONST0:
                bits.append(carry)
            top = sig == width - 1
            if not bits:
                out.append(_CONST0)
                carry = _CONST0
            elif len(bits) == 1:
                out.append(bits[0])
                carry = _CONST0
            elif top:
                out.append(self.sum_cell(*bits))
            elif len(bits) == 2:
                s, carry = self.half_adder(bits[0], bits[1])
                out.append(s)
            else:
                s, carry = self.full_adder(bits[0], bits[1], bits[2])
                out.append(s)
        return out

    def ripple_add(self, a: list[int], b: list[int], carry_in: int) -> list[int]:
        """Equal-width carry-propagate add, modulo 2**width (no carry out net)."""
        assert len(a) == len(b)
        out = []
        carry = carry_in
        for i, (x, y) in enumerate(zip(a, b)):
            if i == len(a) - 1:
                out.append(self.sum_cell(x, y, carry) if carry != _CONST0
                           else self.sum_cell(x, y))
            elif carry == _CONST0:
                s, carry = self.half_adder(x, y)
                out.append(s)
            else:
                s, carry = self.full_adder(x, y, carry)
                out.append(s)
        return out


@dataclass(frozen=True)
class ToggleStats:
    """Adder activity of one evaluation: FA evaluations plus output-bit toggles."""

    full_adder_evals: int = 0
    carry_toggles: int = 0
    sum_toggles: int = 0

    def __add__(self, other: "ToggleStats") -> "ToggleStats":
        return ToggleStats(
            self.full_adder_evals + other.full_adder_evals,
            self.carry_toggles + other.carry_toggles,
            self.sum_toggles + other.sum_toggles,
        )


@dataclass(frozen=True)
class TreeSum:
    """One cycle's tree output.

    `msb_count` is the number of set sign bits among the 64 inputs and
    `lower_sum` the sum of their unsigned low 2-bit fields, so that
    total = lower_sum - 4 * msb_count always holds.
    """

    total: int
    msb_count: int
    lower_sum: int
    stats: ToggleStats


@dataclass
class BatchTreeResult:
    """Whole-batch tree outputs with toggle stats aggregated over the batch."""

    totals: np.ndarray
    msb_counts: np.ndarray
    lower_sums: np.ndarray
    stats: ToggleStats


def _pack_bits(column: np.ndarray) -> int:
    """Bit-slice a (T,) 0/1 array into one int, cycle 0 in bit 0."""
    packed = np.packbits(column.astype(np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def _unpack_bits(word: int, cycles: int) -> np.ndarray:
    nbytes = (cycles + 7) // 8
    raw = word.to_bytes(nbytes, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return bits[:cycles]


def _validate_batch(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    if values.ndim != 2 or values.shape[1] != TREE_ARITY:
        raise ArityMismatch(f"expected (cycles, {TREE_ARITY}) products, got {values.shape}")
    if values.size and (values.min() < -4 or values.max() > 3):
        raise OutOfRange("products must be 3-bit signed values in [-4, 3]")
    return values


class _GateLevelTree:
    """Shared netlist evaluator; subclasses provide the gate list and decode."""

    arity = TREE_ARITY

    # populated by subclasses
    _gates: list[tuple]
    _n_wires: int
    _input_wires: list[list[int]]  # [row][bit]

    def __init__(self):
        n = len(self._gates)
        self._sum_prev = [0] * n
        self._carry_prev = [0] * n
        self._has_prev = False

    def reset(self) -> None:
        """Forget previous-cycle state; the next cycle counts zero toggles."""
        self._has_prev = False

    @property
    def num_full_adders(self) -> int:
        """3-input adder cells, including carry-less top-of-word cells."""
        return sum(1 for g in self._gates if g[0] in ("fa", "fas"))

    @property
    def num_half_adders(self) -> int:
        return sum(1 for g in self._gates if g[0] in ("ha", "has"))

    def _products_to_slices(self, values: np.ndarray) -> list[int]:
        patterns = (values & 7).astype(np.uint8)
        slices = []
        for r in range(TREE_ARITY):
            col = patterns[:, r]
            for b in range(3):
                slices.append(_pack_bits((col >> b) & 1))
        return slices

    def _eval(self, input_slices: Sequence[int], cycles: int) -> tuple[list[int], ToggleStats]:
        """Replay the gate list over bit-sliced inputs, counting output toggles."""
        mask = (1 << cycles) - 1
        wires = [0] * self._n_wires
        wires[_CONST1] = mask
        flat = 0
        for row_wires in self._input_wires:
            for w in row_wires:
                wires[w] = input_slices[flat]
                flat += 1
        counted = cycles if self._has_prev else cycles - 1
        sum_prev = self._sum_prev
        carry_prev = self._carry_prev
        has_prev = self._has_prev
        top = cycles - 1
        sum_t = 0
        carry_t = 0
        fa_evals = 0
        for gi, gate in enumerate(self._gates):
            kind = gate[0]
            if kind == "inv":
                wires[gate[2]] = mask ^ wires[gate[1]]
                continue
            carry = None
            if kind == "fa":
                _, a, b, c, so, co = gate
                av, bv, cv = wires[a], wires[b], wires[c]
                x = av ^ bv
                s = x ^ cv
                carry = (av & bv) | (x & cv)
                fa_evals += 1
            elif kind == "ha":
                _, a, b, so, co = gate
                av, bv = wires[a], wires[b]
                s = av ^ bv
                carry = av & bv
            elif kind == "fas":
                _, a, b, c, so = gate
                s = wires[a] ^ wires[b] ^ wires[c]
                fa_evals += 1
            else:  # "has"
                _, a, b, so = gate
                s = wires[a] ^ wires[b]
            wires[so] = s
            first_s = sum_prev[gi] if has_prev else s & 1
            sum_t += ((s ^ ((s << 1) | first_s)) & mask).bit_count()
            sum_prev[gi] = (s >> top) & 1
            if carry is not None:
                wires[co] = carry
                first_c = carry_prev[gi] if has_prev else carry & 1
                carry_t += ((carry ^ ((carry << 1) | first_c)) & mask).bit_count()
                carry_prev[gi] = (carry >> top) & 1
        self._has_prev = True
        n_fa = fa_evals
        stats = ToggleStats(n_fa * max(counted, 0), carry_t, sum_t)
        return wires, stats

    def eval_bit_slices(self, input_slices: Sequence[int], cycles: int) -> ToggleStats:
        """Evaluate pre-sliced input bit streams and return this batch's stats.

        `input_slices` holds one bit-sliced int per input wire, three per
        product row, low bit first; useful when the caller already has the
        streams in sliced form (weight-stationary columns, for instance).
        """
        if len(input_slices) != 3 * TREE_ARITY:
            raise ArityMismatch(
                f"expected {3 * TREE_ARITY} input bit slices, got {len(input_slices)}"
            )
        _, stats = self._eval(input_slices, cycles)
        return stats

    def sum(self, products: Sequence) -> TreeSum:
        """Sum one cycle's 64 products (Product3 instances or plain ints)."""
        if len(products) != TREE_ARITY:
            raise ArityMismatch(f"expected {TREE_ARITY} products, got {len(products)}")
        values = np.asarray(
            [p.value if isinstance(p, Product3) else int(p) for p in products],
            dtype=np.int64,
        )
        batch = self.sum_batch(values.reshape(1, TREE_ARITY))
        return TreeSum(
            total=int(batch.totals[0]),
            msb_count=int(batch.msb_counts[0]),
            lower_sum=int(batch.lower_sums[0]),
            stats=batch.stats,
        )

    def sum_batch(self, values: np.ndarray) -> BatchTreeResult:
        """Sum a (cycles, 64) batch of products in one netlist replay."""
        values = _validate_batch(values)
        cycles = values.shape[0]
        if cycles == 0:
            empty = np.zeros(0, dtype=np.int64)
            return BatchTreeResult(empty, empty.copy(), empty.copy(), ToggleStats())
        wires, stats = self._eval(self._products_to_slices(values), cycles)
        totals, msb_counts, lower_sums = self._decode(wires, cycles, values)
        return BatchTreeResult(totals, msb_counts, lower_sums, stats)

    def _decode(self, wires, cycles, values):  # pragma: no cover - abstract
        raise NotImplementedError


def _weighted_field(wires: list[int], wire_ids: list[int], cycles: int) -> np.ndarray:
    """Decode an unsigned bit-sliced field into per-cycle integers."""
    out = np.zeros(cycles, dtype=np.int64)
    for i, wid in enumerate(wire_ids):
        if wid == _CONST0:
            continue
        out += _unpack_bits(wires[wid], cycles).astype(np.int64) << i
    return out


def _build_csa():
    nl = _NetlistBuilder()
    inputs = [[nl.wire() for _ in range(3)] for _ in range(TREE_ARITY)]
    low_cols = {
        0: [w[0] for w in inputs],
        1: [w[1] for w in inputs],
    }
    low_out = nl.ripple_sum(nl.reduce_csa(low_cols), 8)  # 0..192
    msb_cols = {0: [w[2] for w in inputs]}
    msb_out = nl.ripple_sum(nl.reduce_csa(msb_cols), 7)  # 0..64
    # Merge: the low-path result above its two passthrough bits, plus the
    # negated population count (invert and add one via the carry-in), in
    # 8-bit two's complement.  Result range [-64, 48] so no overflow.
    a_bits = [low_out[i + 2] if i + 2 < len(low_out) else _CONST0 for i in range(8)]
    b_bits = [
        nl.inverter(msb_out[i]) if i < len(msb_out) else _CONST1 for i in range(8)
    ]
    merge_out = nl.ripple_add(a_bits, b_bits, _CONST1)
    return nl, inputs, low_out, msb_out, merge_out


class CsaTree(_GateLevelTree):
    """Dual-path carry-save tree for 64 3-bit signed (or unsigned) products.

    An all-unsigned column drives constant zeros into the population
    counter, so the whole sign path stays quiet.
    """

    _nl, _in, _low_out, _msb_out, _merge_out = _build_csa()
    _gates = _nl.gates
    _n_wires = _nl.n_wires
    _input_wires = _in

    def _decode(self, wires, cycles, values):
        lower = _weighted_field(wires, self._low_out, cycles)
        msb = _weighted_field(wires, self._msb_out, cycles)
        upper = _weighted_field(wires, self._merge_out, cycles)
        upper -= (upper >> 7) << 8  # 8-bit two's complement
        low2 = lower & 3
        totals = (upper << 2) + low2
        return totals, msb, lower


def _build_bat():
    nl = _NetlistBuilder()
    inputs = [[nl.wire() for _ in range(3)] for _ in range(TREE_ARITY)]
    level: list[list[int]] = [list(w) for w in inputs]
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level), 2):
            a, b = level[i], level[i + 1]
            width = len(a) + 1
            a_ext = a + [a[-1]]  # sign extension
            b_ext = b + [b[-1]]
            nxt.append(nl.ripple_add(a_ext, b_ext, _CONST0))
            assert len(nxt[-1]) == width
        level = nxt
    return nl, inputs, level[0]  # 9-bit signed result


class BatTree(_GateLevelTree):
    """Balanced binary tree of sign-extending carry-propagate adders."""

    _nl, _in, _out = _build_bat()
    _gates = _nl.gates
    _n_wires = _nl.n_wires
    _input_wires = _in

    def _decode(self, wires, cycles, values):
        totals = _weighted_field(wires, self._out, cycles)
        totals -= (totals >> 8) << 9  # 9-bit two's complement
        # Input-derived bookkeeping so TreeSum's identity holds here too.
        msb = (values < 0).sum(axis=1).astype(np.int64)
        lower = (values & 3).sum(axis=1).astype(np.int64)
        return totals, msb, lower


def csa_tree_sum(products: Sequence, tree: CsaTree | None = None) -> tuple[TreeSum, CsaTree]:
    """One-cycle convenience wrapper; pass the returned tree back to chain cycles."""
    if tree is None:
        tree = CsaTree()
    return tree.sum(products), tree


def bat_tree_sum(products: Sequence, tree: BatTree | None = None) -> tuple[TreeSum, BatTree]:
    """Binary-adder-tree counterpart of `csa_tree_sum`."""
    if tree is None:
        tree = BatTree()
    return tree.sum(products), tree


@dataclass(frozen=True)
class TreeComparison:
    """Matched-stimulus activity comparison of the two tree designs.

    Toggle numbers are a topology-dependent activity proxy, not silicon
    power; only their direction is meaningful.
    """

    trials: int
    signed: bool
    seed: int
    csa_mean_toggles: float
    bat_mean_toggles: float
    toggle_ratio: float
    csa_full_adders: int
    bat_full_adders: int
    totals_match: bool


def compare_trees(trials: int, signed: bool, seed: int) -> TreeComparison:
    """Drive both trees with one random product stream and compare activity."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = (-4, 3) if signed else (0, 3)
    values = rng.integers(lo, hi + 1, size=(trials, TREE_ARITY), dtype=np.int64)
    csa = CsaTree()
    bat = BatTree()
    rc = csa.sum_batch(values)
    rb = bat.sum_batch(values)
    counted = max(trials - 1, 1)
    csa_mean = (rc.stats.carry_toggles + rc.stats.sum_toggles) / counted
    bat_mean = (rb.stats.carry_toggles + rb.stats.sum_toggles) / counted
    ratio = csa_mean / bat_mean if bat_mean else float("nan")
    return TreeComparison(
        trials=trials,
        signed=signed,
        seed=seed,
        csa_mean_toggles=csa_mean,
        bat_mean_toggles=bat_mean,
        toggle_ratio=ratio,
        csa_full_adders=csa.num_full_adders,
        bat_full_adders=bat.num_full_adders,
        totals_match=bool(np.array_equal(rc.totals, rb.totals)),
    )
