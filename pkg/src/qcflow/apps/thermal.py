"""Thermal-state targets: lattice Hamiltonians, Gibbs states, and fidelity.

Dense helpers here use plain numpy eigendecompositions; they exist so the
drivers can report fidelities without simulating, and they are cross-checked
in the test suite against an independent route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..pauli import PauliSum, as_pauli_sum, pauli_x, pauli_y, pauli_z


@dataclass(frozen=True)
class ThermalTarget:
    """A Hamiltonian together with an inverse temperature beta > 0."""

    hamiltonian: PauliSum
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "hamiltonian", as_pauli_sum(self.hamiltonian))
        if not self.beta > 0:
            raise ValueError("beta must be positive")


def _bond(q0: int, q1: int, coupling: float) -> list:
    return [
        pauli_x(q0, coupling) * pauli_x(q1),
        pauli_y(q0, coupling) * pauli_y(q1),
        pauli_z(q0, coupling) * pauli_z(q1),
    ]


def heisenberg_2d(rows: int, cols: int, jh: float, jv: float) -> PauliSum:
    """Nearest-neighbor XX+YY+ZZ couplings on a rows x cols grid.

    Horizontal bonds carry ``jh``, vertical bonds ``jv``; the qubit at grid
    position (r, c) has index r*cols + c.
    """
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError("grid must contain at least two sites")

    def q(r, c):
        return r * cols + c

    terms = []
    for r in range(rows):
        for c in range(cols - 1):
            terms.extend(_bond(q(r, c), q(r, c + 1), jh))
    for r in range(rows - 1):
        for c in range(cols):
            terms.extend(_bond(q(r, c), q(r + 1, c), jv))
    return PauliSum(terms)


def dense_pauli_matrix(op, num_qubits: int) -> np.ndarray:
    """2^n x 2^n matrix of a Pauli sum under the little-endian index convention."""
    op = as_pauli_sum(op)
    dim = 1 << num_qubits
    total = np.zeros((dim, dim), dtype=np.complex128)
    # qubit n-1 is the most significant index bit, so it leads the target tuple
    order = tuple(range(num_qubits - 1, -1, -1))
    for term in op:
        total += term.matrix(order)
    return total


def gibbs_state(target: ThermalTarget, num_qubits: int | None = None) -> np.ndarray:
    """exp(-beta*H) / tr(exp(-beta*H)) via eigendecomposition."""
    if num_qubits is None:
        support = [q for term in target.hamiltonian for q in term.support]
        num_qubits = max(support) + 1 if support else 1
    h = dense_pauli_matrix(target.hamiltonian, num_qubits)
    evals, evecs = np.linalg.eigh(h)
    weights = np.exp(-target.beta * (evals - evals.min()))
    weights /= weights.sum()
    return (evecs * weights) @ evecs.conj().T


def log_partition(target: ThermalTarget, num_qubits: int | None = None) -> float:
    """log tr(exp(-beta*H)), computed stably from the spectrum."""
    if num_qubits is None:
        support = [q for term in target.hamiltonian for q in term.support]
        num_qubits = max(support) + 1 if support else 1
    h = dense_pauli_matrix(target.hamiltonian, num_qubits)
    evals = np.linalg.eigvalsh(h)
    shift = -target.beta * evals.max()
    return float(np.log(np.exp(-target.beta * evals - shift).sum()) + shift)


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for density matrices."""
    rho = np.asarray(rho, dtype=np.complex128)
    sigma = np.asarray(sigma, dtype=np.complex128)
    if rho.shape != sigma.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("fidelity needs two square matrices of equal shape")
    evals, evecs = np.linalg.eigh(rho)
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    inner = np.linalg.eigvalsh(root @ sigma @ root)
    return float(np.sqrt(np.clip(inner, 0.0, None)).sum() ** 2)
