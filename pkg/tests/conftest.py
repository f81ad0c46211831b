import numpy as np
import pytest

from bitflex import array, harness, numeric


@pytest.fixture
def rng():
    return np.random.default_rng(0xBEEF)


def build_tile(rng, w_prec, w_signed, a_prec, a_signed, samples=4,
               independent_paths=True, n_weights=None):
    """Map, preload, and stream one random tile; returns (state, rows, acts_matrix, streams)."""
    if n_weights is None:
        n_weights = array.capacity(w_prec, w_signed, independent_paths)
    state = array.map_weights(range(n_weights), w_prec, w_signed, independent_paths)
    rows = harness.random_matrix(rng, (array.ROWS, n_weights), w_prec, w_signed)
    array.preload(state, rows)
    acts_matrix = harness.random_matrix(rng, (array.ROWS, samples), a_prec, a_signed)
    streams = [
        numeric.activation_bitplanes(acts_matrix[:, k], a_prec, a_signed)
        for k in range(samples)
    ]
    return state, rows, acts_matrix, streams
