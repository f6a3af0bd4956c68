"""Expectations over weighted mixtures of fixed initial states.

The gradient engines accept any evaluator callable; this one replaces the
default all-zeros initial state with a stack of stored amplitudes and returns
the weighted sum of per-row expectations. It lets the parameter-shift and
finite-difference machinery differentiate quantities of the form
sum_k w_k <psi_k| C(params)^dag H C(params) |psi_k> without re-deriving any
chain-rule bookkeeping.
"""

from __future__ import annotations

import numpy as np

from ..pauli import as_pauli_sum
from ..sim import _resolved_ops, pauli_term_values, run_ops


def pauli_sum_values(amps: np.ndarray, observable, num_qubits: int) -> np.ndarray:
    """Per-row expectation of a Pauli sum over a [..., 2^n] amplitude stack."""
    observable = as_pauli_sum(observable)
    values = np.zeros(amps.shape[:-1])
    for term in observable:
        if term.is_identity:
            values = values + term.coefficient
        else:
            values = values + term.coefficient * pauli_term_values(amps, term, num_qubits)
    return values


def bitstring_states(bits: np.ndarray, num_qubits: int) -> np.ndarray:
    """[B, 2^n] one-hot amplitude rows for little-endian bitstrings ([B, n])."""
    bits = np.asarray(bits)
    if bits.ndim != 2 or bits.shape[1] != num_qubits:
        raise ValueError(f"bits must be [batch, {num_qubits}]")
    amps = np.zeros((bits.shape[0], 1 << num_qubits), dtype=np.complex128)
    indices = bits.astype(np.int64) @ (1 << np.arange(num_qubits, dtype=np.int64))
    amps[np.arange(bits.shape[0]), indices] = 1.0
    return amps


class MixtureEvaluator:
    """Evaluator over fixed initial rows with fixed weights.

    Satisfies the gradient-engine evaluator protocol: callable with a resolved
    circuit and an observable, tracks ``count``.
    """

    def __init__(self, initial_amps: np.ndarray, weights: np.ndarray, num_qubits: int):
        initial_amps = np.asarray(initial_amps, dtype=np.complex128)
        weights = np.asarray(weights, dtype=np.float64)
        if initial_amps.ndim != 2 or initial_amps.shape[1] != 1 << num_qubits:
            raise ValueError(f"initial amplitudes must be [rows, {1 << num_qubits}]")
        if weights.shape != (initial_amps.shape[0],):
            raise ValueError("one weight per initial row required")
        self.initial_amps = initial_amps
        self.weights = weights
        self.num_qubits = num_qubits
        self.count = 0
        # fusion's per-gate bookkeeping only pays off once each application
        # touches enough amplitudes
        self._fuse = initial_amps.size >= 4096

    def __call__(self, circuit, observable, key=None) -> float:
        self.count += 1
        out = run_ops(
            self.initial_amps, _resolved_ops(circuit), self.num_qubits, fuse_enabled=self._fuse
        )
        return float(self.weights @ pauli_sum_values(out, observable, self.num_qubits))
