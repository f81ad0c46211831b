import numpy as np
import pytest

from bitflex.errors import OutOfRange, ShapeMismatch
from bitflex.golden import GemmSpec, dot_reference, gemm_reference


def triple_loop(w, a):
    """Independent second implementation for cross-checking gemm_reference."""
    rows, inner = len(w), len(w[0])
    cols = len(a[0])
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        for k in range(inner):
            for j in range(cols):
                out[i][j] += int(w[i][k]) * int(a[k][j])
    return out


class TestDot:
    def test_zeros(self):
        assert dot_reference([0] * 64, [0] * 64) == 0

    def test_unit_vector(self):
        a = list(range(64))
        for r in (0, 17, 63):
            w = [0] * 64
            w[r] = 1
            assert dot_reference(w, a) == a[r]

    def test_extreme_8_bit(self):
        assert dot_reference([-128] * 64, [-128] * 64) == 1_048_576

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatch):
            dot_reference([1, 2], [1])


class TestGemm:
    def test_one_hot_rows_gather(self):
        spec = GemmSpec(4, 8, 3, w_precision=2, a_precision=8)
        w = np.zeros((4, 8), dtype=int)
        picks = [6, 0, 3, 7]
        for i, k in enumerate(picks):
            w[i, k] = 1
        a = np.arange(24).reshape(8, 3)
        assert np.array_equal(gemm_reference(spec, w, a), a[picks])

    def test_1x64_matches_dot(self):
        rng = np.random.default_rng(8)
        w = rng.integers(-128, 128, size=(1, 64))
        a = rng.integers(-128, 128, size=(64, 1))
        spec = GemmSpec(1, 64, 1, w_precision=8, a_precision=8)
        assert gemm_reference(spec, w, a)[0, 0] == dot_reference(
            list(w[0]), list(a[:, 0])
        )

    def test_matches_triple_loop(self):
        rng = np.random.default_rng(21)
        w = rng.integers(-128, 128, size=(8, 64))
        a = rng.integers(-128, 128, size=(64, 4))
        spec = GemmSpec(8, 64, 4, w_precision=8, a_precision=8)
        assert gemm_reference(spec, w, a).tolist() == triple_loop(w, a)

    def test_shape_errors(self):
        spec = GemmSpec(2, 3, 2, w_precision=4, a_precision=4)
        with pytest.raises(ShapeMismatch):
            gemm_reference(spec, np.zeros((2, 4)), np.zeros((3, 2)))
        with pytest.raises(ShapeMismatch):
            gemm_reference(spec, np.zeros((2, 3)), np.zeros((4, 2)))
        with pytest.raises(ShapeMismatch):
            GemmSpec(0, 3, 2, w_precision=4, a_precision=4)

    def test_range_errors(self):
        spec = GemmSpec(1, 2, 1, w_precision=4, a_precision=4)
        with pytest.raises(OutOfRange):
            gemm_reference(spec, [[8, 0]], [[0], [0]])
        with pytest.raises(OutOfRange):
            gemm_reference(spec, [[0, 0]], [[0], [-9]])
