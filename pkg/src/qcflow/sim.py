"""State-vector simulation: kernels, sampling, and expectation values.

Amplitudes live in one contiguous complex128 array indexed little-endian
(qubit q = bit q of the state index). Gate application reshapes the array to
one axis per qubit and contracts the gate matrix over the target axes, which
works identically for a single state and for a batch of states stacked along
a leading axis.
"""

from __future__ import annotations

import os
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit, gate_matrix, resolve
from .fusion import FusedCircuit, FusedGate, fuse_resolved
from .pauli import PauliString, PauliSum, as_pauli_sum
from .rng import substream
from . import gates as gate_lib

DEFAULT_MAX_QUBITS = 26
NORM_TOL = 1e-9


def max_qubits() -> int:
    """Simulation size cap; QCFLOW_MAX_QUBITS overrides the default of 26."""
    raw = os.environ.get("QCFLOW_MAX_QUBITS")
    if raw is None:
        return DEFAULT_MAX_QUBITS
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"bad QCFLOW_MAX_QUBITS value {raw!r}") from exc


class StateVector:
    """2^n complex amplitudes with unit norm."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes: np.ndarray):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (2**num_qubits,):
            raise ValueError(
                f"expected {2**num_qubits} amplitudes for {num_qubits} qubits, "
                f"got shape {amplitudes.shape}"
            )
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm^2 deviates from 1 by {abs(norm - 1.0):.2e}")
        object.__setattr__(self, "num_qubits", int(num_qubits))
        object.__setattr__(self, "amplitudes", amplitudes)

    def __setattr__(self, key, value):
        raise AttributeError("StateVector is immutable")

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        amps = np.zeros(2**num_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"


class SampleBatch:
    """shots x n array of measured bits; column q holds qubit q's bit."""

    __slots__ = ("shots", "bitstrings")

    def __init__(self, shots: int, bitstrings: np.ndarray):
        bitstrings = np.asarray(bitstrings, dtype=np.uint8)
        if bitstrings.ndim != 2 or bitstrings.shape[0] != shots:
            raise ValueError("bitstrings must be a shots x n array")
        object.__setattr__(self, "shots", int(shots))
        object.__setattr__(self, "bitstrings", bitstrings)

    def __setattr__(self, key, value):
        raise AttributeError("SampleBatch is immutable")


def apply_matrix(
    amps: np.ndarray, matrix: np.ndarray, targets: Sequence[int], num_qubits: int
) -> np.ndarray:
    """Apply a 2- or 4-dim matrix over target bit strides.

    ``amps`` has shape (..., 2**num_qubits); leading axes are a batch. Returns a
    new array. targets[0] is the most significant local bit of ``matrix``.
    """
    k = len(targets)
    batch_shape = amps.shape[:-1]
    nb = len(batch_shape)
    full = amps.reshape(batch_shape + (2,) * num_qubits)
    axes = tuple(nb + (num_qubits - 1 - q) for q in targets)
    mt = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(mt, full, axes=(tuple(range(k, 2 * k)), axes))
    # tensordot puts the new target axes first; restore original positions.
    out = np.moveaxis(out, tuple(range(k)), axes)
    return np.ascontiguousarray(out).reshape(amps.shape)


def apply_fused(state: StateVector, g: FusedGate) -> StateVector:
    """Apply one fused gate to a state, returning a new StateVector."""
    if max(g.targets) >= state.num_qubits:
        raise ValueError(f"targets {g.targets} exceed register size {state.num_qubits}")
    amps = apply_matrix(state.amplitudes, g.matrix, g.targets, state.num_qubits)
    return StateVector(state.num_qubits, amps)


def _resolved_ops(c: Circuit) -> list[tuple[np.ndarray, tuple[int, ...]]]:
    if not c.is_concrete:
        raise KeyError(f"circuit has unresolved symbols: {', '.join(c.symbols)}")
    return [(gate_matrix(g), g.targets) for g in c.gates]


def run_ops(
    amps: np.ndarray,
    ops: list[tuple[np.ndarray, tuple[int, ...]]],
    num_qubits: int,
    fuse_enabled: bool,
) -> np.ndarray:
    """Apply a resolved op list to (a batch of) raw amplitudes."""
    if fuse_enabled:
        fused = fuse_resolved(ops, num_qubits)
        for fg in fused:
            amps = apply_matrix(amps, fg.matrix, fg.targets, num_qubits)
    else:
        for mat, tg in ops:
            amps = apply_matrix(amps, mat, tg, num_qubits)
    return amps


def simulate(c: Circuit, fuse_enabled: bool = True) -> StateVector:
    """Run a concrete circuit on |0...0>. Identical result with fusion on or off."""
    cap = max_qubits()
    if c.num_qubits > cap:
        raise MemoryError(
            f"{c.num_qubits} qubits exceeds the configured cap of {cap} "
            "(set QCFLOW_MAX_QUBITS to raise it)"
        )
    amps = np.zeros(2**c.num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    amps = run_ops(amps, _resolved_ops(c), c.num_qubits, fuse_enabled)
    return StateVector(c.num_qubits, amps)


def unitary(c: Circuit, bindings: Mapping[str, float] | None = None) -> np.ndarray:
    """Dense 2^n x 2^n unitary of a circuit (intended for small n)."""
    cc = resolve(c, bindings)
    dim = 2**cc.num_qubits
    stack = np.eye(dim, dtype=np.complex128)  # row j = basis state |j>
    stack = run_ops(stack, _resolved_ops(cc), cc.num_qubits, fuse_enabled=False)
    return stack.T


def _pairwise_sum(values: list) -> float | np.ndarray:
    """Deterministic pairwise tree reduction."""
    if not values:
        return 0.0
    work = list(values)
    while len(work) > 1:
        nxt = []
        for i in range(0, len(work) - 1, 2):
            nxt.append(work[i] + work[i + 1])
        if len(work) % 2:
            nxt.append(work[-1])
        work = nxt
    return work[0]


def pauli_term_values(amps: np.ndarray, term: PauliString, num_qubits: int) -> np.ndarray:
    """<psi|P|psi> for a coefficient-1 version of ``term``; batch-aware.

    X/Y factors flip the corresponding index bit; Y and Z contribute phases.
    Returns a real array shaped like the batch (scalar array for a lone state).
    """
    idx = np.arange(2**num_qubits)
    mask = 0
    phase = np.ones(2**num_qubits, dtype=np.complex128)
    for q, letter in term.factors.items():
        bit = (idx >> q) & 1
        if letter == "Z":
            phase = phase * (1 - 2 * bit)
        elif letter == "X":
            mask |= 1 << q
        else:  # Y
            mask |= 1 << q
            phase = phase * (1j * (1 - 2 * bit))
    flipped = amps[..., idx ^ mask]
    vals = np.einsum("...i,...i->...", flipped.conj(), phase * amps)
    imag_max = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
    if imag_max > 1e-10:
        raise AssertionError(f"Pauli expectation has imaginary residue {imag_max:.2e}")
    return vals.real


def expectation(state: StateVector, obs: PauliSum | PauliString) -> float:
    """Exact <state|obs|state> as a real number."""
    obs = as_pauli_sum(obs)
    contributions = []
    for term in obs:
        if term.is_identity:
            contributions.append(term.coefficient)
        else:
            val = pauli_term_values(state.amplitudes, term, state.num_qubits)
            contributions.append(term.coefficient * float(val))
    return float(_pairwise_sum(contributions))


def _draw_bits(state: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    probs = state.probabilities()
    probs = probs / probs.sum()
    idx = rng.choice(2**state.num_qubits, size=shots, p=probs)
    return ((idx[:, None] >> np.arange(state.num_qubits)[None, :]) & 1).astype(np.uint8)


def sample(state: StateVector, shots: int, seed: int) -> SampleBatch:
    """Draw i.i.d. bitstrings from |a_x|^2; deterministic given the seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return SampleBatch(shots, _draw_bits(state, shots, substream(seed)))


def basis_change_gates(term: PauliString):
    """Gates rotating each factor's measurement basis onto Z.

    H for X; (S-dagger, H) for Y, with S-dagger realized exactly as Z**-0.5.
    """
    extra = []
    for q, letter in sorted(term.factors.items()):
        if letter == "X":
            extra.append(gate_lib.h(q))
        elif letter == "Y":
            extra.append(gate_lib.zpow(-0.5, q))
            extra.append(gate_lib.h(q))
    return extra


def sampled_expectation(
    c: Circuit,
    obs: PauliSum | PauliString,
    shots_per_term: int,
    seed: int,
    fuse_enabled: bool = True,
) -> float:
    """Unbiased shot-based estimate of <obs> after running ``c``.

    Each Pauli term gets its own basis-changed circuit, its own Z-basis draws,
    and its own RNG substream keyed by the term index.
    """
    if shots_per_term < 1:
        raise ValueError("shots_per_term must be >= 1")
    obs = as_pauli_sum(obs)
    contributions = []
    for k, term in enumerate(obs):
        if term.is_identity:
            contributions.append(term.coefficient)
            continue
        rotated = Circuit(c.num_qubits, tuple(c.gates) + tuple(basis_change_gates(term)))
        state = simulate(rotated, fuse_enabled=fuse_enabled)
        bits = _draw_bits(state, shots_per_term, substream(seed, k))
        eigs = np.ones(shots_per_term, dtype=np.float64)
        for q in term.factors:
            eigs *= 1.0 - 2.0 * bits[:, q]
        contributions.append(term.coefficient * float(eigs.mean()))
    return float(_pairwise_sum(contributions))


def batch_execute(
    circuits: Sequence[Circuit],
    bindings_matrix,
    observables: Sequence[PauliSum | PauliString],
) -> np.ndarray:
    """[batch, num_observables] matrix of exact expectations; rows independent."""
    observables = [as_pauli_sum(o) for o in observables]
    n_rows = len(circuits)
    out = np.zeros((n_rows, len(observables)), dtype=np.float64)
    for i, circ in enumerate(circuits):
        syms = circ.symbols
        row = np.atleast_1d(np.asarray(bindings_matrix[i], dtype=np.float64)) if syms else []
        if len(row) != len(syms):
            raise ValueError(
                f"row {i}: ragged symbol coverage ({len(row)} values for {len(syms)} symbols)"
            )
        state = simulate(resolve(circ, dict(zip(syms, row))))
        for k, obs in enumerate(observables):
            out[i, k] = expectation(state, obs)
    return out
