"""Factorized Bernoulli energy model: exact forms vs brute-force enumeration."""

import numpy as np
import pytest

from qcflow.apps import BernoulliEBM, all_bitstrings
from qcflow.rng import substream


def _enumerated_probs(biases: np.ndarray) -> np.ndarray:
    """p(x) = exp(-E(x)) / Z by explicit sum over every bitstring."""
    bits = all_bitstrings(len(biases))
    spins = 2.0 * bits - 1.0
    weights = np.exp(spins @ biases)
    return weights / weights.sum()


def test_all_bitstrings_little_endian():
    bits = all_bitstrings(3)
    assert bits.shape == (8, 3)
    # row i holds the bits of integer i, bit j at column j
    np.testing.assert_array_equal(bits[5], [1, 0, 1])
    np.testing.assert_array_equal(bits[6], [0, 1, 1])
    ints = bits @ (1 << np.arange(3))
    np.testing.assert_array_equal(ints, np.arange(8))


def test_energy_is_negative_spin_alignment():
    ebm = BernoulliEBM(np.array([0.7, -0.2, 1.1]))
    bits = np.array([[1, 0, 1], [0, 0, 0]])
    spins = 2.0 * bits - 1.0
    np.testing.assert_allclose(ebm.energies(bits), -(spins @ ebm.biases), atol=1e-15)
    np.testing.assert_allclose(ebm.energy_gradients(bits), -spins, atol=1e-15)


def test_probabilities_match_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(5):
        biases = rng.uniform(-1.5, 1.5, 4)
        ebm = BernoulliEBM(biases)
        probs = ebm.probabilities()
        np.testing.assert_allclose(probs, _enumerated_probs(biases), atol=1e-12)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_log_partition_matches_enumeration():
    rng = np.random.default_rng(5)
    biases = rng.uniform(-2.0, 2.0, 5)
    ebm = BernoulliEBM(biases)
    bits = all_bitstrings(5)
    z_direct = np.exp(-ebm.energies(bits)).sum()
    assert ebm.log_partition() == pytest.approx(np.log(z_direct), abs=1e-12)


def test_entropy_matches_enumeration():
    rng = np.random.default_rng(6)
    biases = rng.uniform(-1.0, 1.0, 4)
    probs = _enumerated_probs(biases)
    s_direct = -(probs * np.log(probs)).sum()
    assert BernoulliEBM(biases).entropy() == pytest.approx(s_direct, abs=1e-10)


def test_spin_means_match_enumeration():
    rng = np.random.default_rng(7)
    biases = rng.uniform(-1.2, 1.2, 4)
    probs = _enumerated_probs(biases)
    spins = 2.0 * all_bitstrings(4) - 1.0
    np.testing.assert_allclose(
        BernoulliEBM(biases).spin_means(), probs @ spins, atol=1e-12
    )


def test_prob_one_is_sigmoid_of_double_bias():
    biases = np.array([-0.9, 0.0, 0.4])
    expected = 1.0 / (1.0 + np.exp(-2.0 * biases))
    np.testing.assert_allclose(BernoulliEBM(biases).prob_one(), expected, atol=1e-14)
    # marginal consistency with the full joint
    probs = _enumerated_probs(biases)
    bits = all_bitstrings(3)
    np.testing.assert_allclose(probs @ bits, expected, atol=1e-12)


def test_sampling_moments():
    biases = np.array([0.8, -0.5, 0.1])
    ebm = BernoulliEBM(biases)
    rng = substream(123, 0)
    draws = ebm.sample(20000, rng)
    assert draws.shape == (20000, 3)
    assert draws.dtype == np.uint8
    p = ebm.prob_one()
    sigma = np.sqrt(p * (1 - p) / 20000)
    np.testing.assert_array_less(np.abs(draws.mean(axis=0) - p), 4 * sigma + 1e-12)


def test_sampling_deterministic_per_stream():
    ebm = BernoulliEBM(np.array([0.3, -0.3]))
    a = ebm.sample(50, substream(9, 0))
    b = ebm.sample(50, substream(9, 0))
    c = ebm.sample(50, substream(10, 0))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_validation():
    with pytest.raises(ValueError):
        BernoulliEBM(np.array([np.inf, 0.0]))
    with pytest.raises(ValueError):
        BernoulliEBM(np.zeros((2, 2)))


def test_enumeration_cap():
    with pytest.raises(ValueError):
        BernoulliEBM(np.zeros(17)).probabilities()
