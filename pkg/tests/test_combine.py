import numpy as np
import pytest

from bitflex import numeric
from bitflex.adder_tree import CsaTree
from bitflex.combine import (
    ColumnResult,
    accumulate_serial,
    combine_group,
    combine_independent,
)
from bitflex.errors import (
    ArityMismatch,
    ConfigMismatch,
    LengthMismatch,
    UnsupportedPrecision,
)
from bitflex.numeric import activation_bitplanes, decompose_weight, group_config
from bitflex.pe import multiply_bit

ROWS = 64


def column_results_for(w_vec, a_vec, w_prec, w_signed, a_prec, a_signed):
    """Drive the real pipeline for one logical weight over 64 rows.

    decompose -> multiply_bit -> carry-save tree -> serial accumulate,
    one ColumnResult per chunk column.
    """
    chunks = [decompose_weight(int(w), w_prec, w_signed).chunks for w in w_vec]
    n_cols = len(chunks[0])
    stream = activation_bitplanes(a_vec, a_prec, a_signed)
    results = []
    for i in range(n_cols):
        products = np.empty((a_prec, ROWS), dtype=np.int64)
        for t in range(a_prec):
            for r in range(ROWS):
                products[t, r] = multiply_bit(
                    int(stream.bits[t, r]), chunks[r][i]
                ).value
        totals = CsaTree().sum_batch(products).totals
        results.append(accumulate_serial([int(x) for x in totals], stream.sf))
    return results


def pipeline_dot(w_vec, a_vec, w_prec, w_signed, a_prec, a_signed):
    """Composed pipeline result for one weight mapped into a group's low columns."""
    eff = numeric.effective_weight_precision(w_prec, w_signed)
    cfg = group_config(eff)
    cols = column_results_for(w_vec, a_vec, w_prec, w_signed, a_prec, a_signed)
    padded = cols + [ColumnResult(0)] * (4 - len(cols))
    return combine_group(padded, cfg).outputs[0]


def pipeline_dot_independent(w_vec, a_vec, w_prec, w_signed, a_prec, a_signed):
    """Same dot product computed over the reclaimed fourth columns of three groups."""
    eff = numeric.effective_weight_precision(w_prec, w_signed)
    assert eff in (6, 7)
    cfg = group_config(eff)
    cols = column_results_for(w_vec, a_vec, w_prec, w_signed, a_prec, a_signed)
    feeds = []
    for result in cols:  # one chunk in each group's fourth column
        group = [ColumnResult(0)] * 3 + [result]
        feeds.append(combine_group(group, cfg).independent_feed)
    return combine_independent(feeds, eff)


class TestAccumulateSerial:
    def test_single_row_times_minus_3(self):
        stream = activation_bitplanes([-3], 8, True)
        totals = [int(stream.bits[t, 0]) for t in range(8)]  # chunk value 1
        result = accumulate_serial(totals, stream.sf)
        assert result.value == (1 + 4 + 8 + 16 + 32 + 64) - 128 == -3
        assert result.hw_width_ok

    def test_all_zero(self):
        assert accumulate_serial([0] * 5, [False] * 5).value == 0

    def test_unsigned_activation_5_times_3(self):
        result = accumulate_serial([3, 0, 3], [False] * 3)
        assert result.value == 3 + 0 + 12 == 15 == 3 * 5

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            accumulate_serial([1, 2], [False])

    def test_width_flag(self):
        assert not accumulate_serial([1 << 17], [False]).hw_width_ok
        assert accumulate_serial([(1 << 17) - 1], [False]).hw_width_ok

    def test_width_holds_for_full_range_totals(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            totals = rng.integers(-256, 193, size=8)
            sf = [False] * 7 + [True]
            assert accumulate_serial([int(x) for x in totals], sf).hw_width_ok


class TestCombineGroup:
    def test_8_bit_recombines_minus_90(self):
        cols = [ColumnResult(v) for v in (2, 1, 2, -2)]  # chunks of -90 times a=1
        result = combine_group(cols, group_config(8))
        assert result.outputs == (-90,)
        assert result.independent_feed is None

    def test_2_bit_bypasses(self):
        cols = [ColumnResult(v) for v in (7, -3, 11, 5)]
        assert combine_group(cols, group_config(2)).outputs == (7, -3, 11, 5)

    def test_4_bit_pairs(self):
        cols = [ColumnResult(v) for v in (1, 2, 3, -1)]
        assert combine_group(cols, group_config(4)).outputs == (1 + 8, 3 - 4)

    def test_6_bit_excludes_fourth_column(self):
        cols = [ColumnResult(v) for v in (2, 1, -2, 999)]
        result = combine_group(cols, group_config(6))
        assert result.outputs == (2 + 4 - 32,)
        assert result.independent_feed == 999

    def test_rejects_wrong_arity(self):
        with pytest.raises(ConfigMismatch):
            combine_group([ColumnResult(0)] * 3, group_config(8))


class TestCombineIndependent:
    def test_zero_feeds(self):
        assert combine_independent([0, 0, 0], 6) == 0

    def test_7_bit_61(self):
        assert combine_independent([1, 3, 3], 7) == 1 + 12 + 48 == 61

    def test_rejects_bad_precision(self):
        with pytest.raises(UnsupportedPrecision):
            combine_independent([0, 0, 0], 5)

    def test_rejects_bad_arity(self):
        with pytest.raises(ArityMismatch):
            combine_independent([0, 0], 6)


def signedness_combos(w_prec):
    for w_signed in (True, False):
        for a_signed in (True, False):
            yield w_signed, a_signed


class TestMacEquivalence:
    """The composed pipeline reproduces w . a exactly for every precision pair."""

    def test_single_weight_dot_products(self):
        rng = np.random.default_rng(101)
        for w_prec in range(2, 9):
            for a_prec in range(2, 9):
                for w_signed, a_signed in signedness_combos(w_prec):
                    w_lo, w_hi = numeric.value_range(w_prec, w_signed)
                    a_lo, a_hi = numeric.value_range(a_prec, a_signed)
                    w_vec = rng.integers(w_lo, w_hi + 1, size=ROWS)
                    a_vec = rng.integers(a_lo, a_hi + 1, size=ROWS)
                    got = pipeline_dot(
                        w_vec, a_vec, w_prec, w_signed, a_prec, a_signed
                    )
                    assert got == int(np.dot(w_vec, a_vec)), (
                        w_prec, a_prec, w_signed, a_signed
                    )

    def test_independent_path_dot_products(self):
        rng = np.random.default_rng(55)
        for w_prec, w_signed in ((6, True), (7, True), (5, False)):
            for a_prec in (2, 5, 8):
                w_lo, w_hi = numeric.value_range(w_prec, w_signed)
                w_vec = rng.integers(w_lo, w_hi + 1, size=ROWS)
                a_vec = rng.integers(-(1 << (a_prec - 1)), 1 << (a_prec - 1), size=ROWS)
                got = pipeline_dot_independent(
                    w_vec, a_vec, w_prec, w_signed, a_prec, True
                )
                assert got == int(np.dot(w_vec, a_vec))

    def test_extreme_values(self):
        cases = [
            (-128, -128, 8, True, 8, True),
            (127, -128, 8, True, 8, True),
            (-64, 31, 7, True, 6, True),
            (255, 255, 8, False, 8, False),
            (-2, -2, 2, True, 2, True),
            (7, 3, 3, False, 2, False),
        ]
        for w, a, w_prec, w_signed, a_prec, a_signed in cases:
            w_vec = np.full(ROWS, w, dtype=np.int64)
            a_vec = np.full(ROWS, a, dtype=np.int64)
            got = pipeline_dot(w_vec, a_vec, w_prec, w_signed, a_prec, a_signed)
            assert got == ROWS * w * a

    def test_sign_cycle_shifts_by_msb_weight(self):
        # flipping only the activation sign bits moves the result by
        # -2**(N-1) * sum(w)
        rng = np.random.default_rng(77)
        for a_prec in (2, 4, 8):
            w_vec = rng.integers(-8, 8, size=ROWS)
            base = rng.integers(0, 1 << (a_prec - 1), size=ROWS)  # sign bits clear
            flipped = base - (1 << (a_prec - 1))  # sign bits set
            lo = pipeline_dot(w_vec, base, 4, True, a_prec, True)
            hi = pipeline_dot(w_vec, flipped, 4, True, a_prec, True)
            assert hi - lo == -(1 << (a_prec - 1)) * int(w_vec.sum())
