"""Factorized Bernoulli energy-based model over classical bitstrings.

Bits x_j live in {0, 1} and map to spins s_j = 2*x_j - 1 in {-1, +1}. The
energy is E(x) = -sum_j theta_j * s_j, so p(x) = e^{-E(x)} / Z factorizes into
independent per-bit Bernoulli marginals with p(x_j = 1) = sigma(2*theta_j).
Under the simulator's little-endian basis convention the spin of bit j is the
negated Z eigenvalue of qubit j (Z|0> = +|0> while x_j = 0 means s_j = -1), so
E(x) equals the eigenvalue of sum_j theta_j Z_j on the computational basis
state |x>.

Everything downstream (partition function, entropy, moments) has a closed form
because the bits are independent; enumeration is only used by tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

_ENUMERATION_CAP = 16


@dataclass
class BernoulliEBM:
    """One real bias per bit; biases are the trainable parameters."""

    biases: np.ndarray

    def __post_init__(self):
        biases = np.asarray(self.biases, dtype=np.float64)
        if biases.ndim != 1 or biases.size == 0:
            raise ValueError("biases must be a non-empty 1-D real vector")
        if not np.all(np.isfinite(biases)):
            raise ValueError("biases must be finite")
        self.biases = biases

    @property
    def num_bits(self) -> int:
        return self.biases.size

    # -- energies ------------------------------------------------------------
    def energies(self, bits: np.ndarray) -> np.ndarray:
        """E(x) = -sum_j theta_j * s_j for each row of ``bits`` ([..., n] in {0,1})."""
        spins = self._spins(bits)
        return -(spins @ self.biases)

    def energy_gradients(self, bits: np.ndarray) -> np.ndarray:
        """d E(x) / d theta_j = -s_j, rowwise."""
        return -self._spins(bits)

    def _spins(self, bits) -> np.ndarray:
        bits = np.asarray(bits)
        if bits.shape[-1] != self.num_bits:
            raise ValueError(f"bitstrings have width {bits.shape[-1]}, model has {self.num_bits}")
        return 2.0 * bits.astype(np.float64) - 1.0

    # -- closed forms ----------------------------------------------------------
    def log_partition(self) -> float:
        """log Z = sum_j log(e^{theta_j} + e^{-theta_j})."""
        return float(np.logaddexp(self.biases, -self.biases).sum())

    def entropy(self) -> float:
        """S(p) = log Z - sum_j theta_j tanh(theta_j) (factorized closed form)."""
        return self.log_partition() - float((self.biases * np.tanh(self.biases)).sum())

    def spin_means(self) -> np.ndarray:
        """E_p[s_j] = tanh(theta_j)."""
        return np.tanh(self.biases)

    def prob_one(self) -> np.ndarray:
        """p(x_j = 1) = e^{theta_j} / (e^{theta_j} + e^{-theta_j})."""
        return 1.0 / (1.0 + np.exp(-2.0 * self.biases))

    # -- enumeration -----------------------------------------------------------
    def probabilities(self) -> np.ndarray:
        """All 2^n probabilities, indexed little-endian (bit j = index bit j)."""
        if self.num_bits > _ENUMERATION_CAP:
            raise ValueError(f"enumeration over {self.num_bits} bits exceeds the cap of {_ENUMERATION_CAP}")
        ones = self.prob_one()
        columns = [np.array([1.0 - p1, p1]) for p1 in ones]
        # bit n-1 owns the largest index stride, so it is the slowest kron factor
        return reduce(np.kron, reversed(columns))

    # -- sampling ---------------------------------------------------------------
    def sample(self, num_samples: int, rng: np.random.Generator) -> np.ndarray:
        """[num_samples, n] array of bits drawn independently per column."""
        if num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        return (rng.random((num_samples, self.num_bits)) < self.prob_one()).astype(np.uint8)


def all_bitstrings(num_bits: int) -> np.ndarray:
    """[2^n, n] array of bits; row i holds the little-endian bits of i."""
    if num_bits > _ENUMERATION_CAP:
        raise ValueError(f"enumeration over {num_bits} bits exceeds the cap of {_ENUMERATION_CAP}")
    idx = np.arange(1 << num_bits)
    return ((idx[:, None] >> np.arange(num_bits)) & 1).astype(np.uint8)
