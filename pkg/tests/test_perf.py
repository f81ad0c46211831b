from fractions import Fraction

import numpy as np
import pytest

from bitflex import array, harness, numeric, perf
from bitflex.adder_tree import ToggleStats
from bitflex.errors import UnsupportedPrecision
from bitflex.perf import (
    PerfConfig,
    clock_domain_ratio,
    energy_proxy,
    throughput,
    utilization,
    weight_capacity,
)
from conftest import build_tile


class TestThroughput:
    def test_peak_2_bit(self):
        report = throughput(PerfConfig(1000.0, 2, 2))
        assert report.macs_per_cycle == Fraction(64 * 64, 2) == 2048
        assert report.tops == pytest.approx(4.096)
        assert report.utilization == 1

    def test_8_bit(self):
        report = throughput(PerfConfig(1000.0, 8, 8))
        assert report.macs_per_cycle == 128
        assert report.tops == pytest.approx(0.256)

    def test_6_bit_with_paths(self):
        report = throughput(PerfConfig(1000.0, 6, 6, independent_paths=True))
        assert report.macs_per_cycle == Fraction(64 * 21, 6) == 224
        assert report.tops == pytest.approx(0.448)

    def test_6_bit_without_paths(self):
        report = throughput(PerfConfig(1000.0, 6, 6, independent_paths=False))
        assert report.macs_per_cycle == Fraction(64 * 16, 6)

    def test_scales_with_frequency(self):
        assert throughput(PerfConfig(500.0, 2, 2)).tops == pytest.approx(2.048)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PerfConfig(0.0, 2, 2)
        with pytest.raises(UnsupportedPrecision):
            PerfConfig(1000.0, 9, 2)


class TestUtilization:
    def test_6_7_bit(self):
        for prec in (6, 7):
            assert utilization(prec, True) == Fraction(63, 64)
            assert utilization(prec, False) == Fraction(48, 64)

    def test_full_otherwise(self):
        for prec in (2, 3, 4, 5, 8):
            for paths in (True, False):
                assert utilization(prec, paths) == 1

    def test_capacity_matches_array_module(self):
        for prec in range(2, 9):
            for paths in (True, False):
                assert weight_capacity(prec, paths) == array.capacity(prec, True, paths)

    def test_bad_precision(self):
        with pytest.raises(UnsupportedPrecision):
            utilization(1, True)


class TestClockDomain:
    def test_ratios(self):
        assert clock_domain_ratio(8) == Fraction(1, 8)
        assert clock_domain_ratio(2) == Fraction(1, 2)
        assert clock_domain_ratio(5) == Fraction(1, 5)

    def test_bad_precision(self):
        with pytest.raises(UnsupportedPrecision):
            clock_domain_ratio(9)


class TestEnergyProxy:
    def test_zero_activity(self):
        assert energy_proxy(0, ToggleStats(0, 0, 0), 0) == 0.0

    def test_monotone_in_activity(self):
        quiet = energy_proxy(10, ToggleStats(100, 5, 5), 10)
        busy = energy_proxy(10, ToggleStats(100, 500, 500), 900)
        assert busy > quiet

    def _proxy_per_mac(self, rng, prec, seed):
        state, rows, acts_matrix, streams = build_tile(
            rng, prec, True, prec, True, samples=4
        )
        tile = array.run_tile(state, streams, collect_toggles=True)
        proxy = energy_proxy(tile.stats.clk_sa_ops, tile.tree_toggles, tile.acc_bit_toggles)
        macs = state.num_weights * array.ROWS * len(streams)
        return proxy / macs

    def test_proxy_per_mac_grows_with_precision(self, rng):
        per_mac = {p: self._proxy_per_mac(rng, p, 0) for p in (2, 4, 8)}
        assert per_mac[2] < per_mac[4] < per_mac[8]

    def test_toggling_inputs_cost_more_than_constant(self, rng):
        state = array.map_weights(range(16), 8, True)
        rows = harness.random_matrix(rng, (64, 16), 8, True)
        array.preload(state, rows)
        # 255 keeps every serial input bit constant at 1; 85 = 01010101
        # flips every input bit on every cycle
        constant = [
            numeric.activation_bitplanes([255] * 64, 8, False) for _ in range(6)
        ]
        alternating = [
            numeric.activation_bitplanes([85] * 64, 8, False) for _ in range(6)
        ]
        quiet = array.run_tile(state, constant, collect_toggles=True)
        busy = array.run_tile(state, alternating, collect_toggles=True)
        proxy_quiet = energy_proxy(quiet.stats.clk_sa_ops, quiet.tree_toggles, quiet.acc_bit_toggles)
        proxy_busy = energy_proxy(busy.stats.clk_sa_ops, busy.tree_toggles, busy.acc_bit_toggles)
        assert proxy_busy > proxy_quiet
