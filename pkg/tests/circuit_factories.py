"""Shared builders for randomized test circuits and matrices."""

from __future__ import annotations

import numpy as np

from qcflow import gates as qg
from qcflow.circuit import Circuit

_FIXED_1Q = (qg.x, qg.y, qg.z, qg.h, qg.s, qg.t)
_PARAM_1Q = (qg.rx, qg.ry, qg.rz, qg.xpow, qg.ypow, qg.zpow)
_FIXED_2Q = (qg.cz, qg.cnot, qg.swap)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary via QR with phase-fixed diagonal."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_concrete_circuit(
    rng: np.random.Generator, num_qubits: int, depth: int, two_qubit_prob: float = 0.35
) -> Circuit:
    """Random mix of fixed and (resolved) parameterized library gates."""
    gates = []
    for _ in range(depth):
        if num_qubits >= 2 and rng.random() < two_qubit_prob:
            a, b = (int(q) for q in rng.choice(num_qubits, size=2, replace=False))
            if rng.random() < 0.25:
                gates.append(qg.cnot_pow(float(rng.uniform(-1.5, 1.5)), a, b))
            else:
                gates.append(_FIXED_2Q[int(rng.integers(len(_FIXED_2Q)))](a, b))
        else:
            q = int(rng.integers(num_qubits))
            if rng.random() < 0.5:
                gates.append(_FIXED_1Q[int(rng.integers(len(_FIXED_1Q)))](q))
            else:
                fn = _PARAM_1Q[int(rng.integers(len(_PARAM_1Q)))]
                gates.append(fn(float(rng.uniform(-2.0, 2.0)), q))
    return Circuit(num_qubits, gates)


def random_symbolic_circuit(
    rng: np.random.Generator,
    num_qubits: int,
    num_symbols: int,
    depth: int,
    two_qubit_prob: float = 0.3,
) -> Circuit:
    """Random circuit whose rotations carry symbols s0..s{k-1}, each used >= once.

    Symbols may appear in several gates (with distinct scale factors) so that
    gradient engines must sum over occurrences.
    """
    names = [f"s{i}" for i in range(num_symbols)]
    base = random_concrete_circuit(rng, num_qubits, depth, two_qubit_prob)
    gates = list(base.gates)
    # Sprinkle one guaranteed occurrence of each symbol, then a few extras.
    extra = [names[int(rng.integers(num_symbols))] for _ in range(num_symbols // 2)]
    for sym in names + extra:
        q = int(rng.integers(num_qubits))
        fn = _PARAM_1Q[int(rng.integers(len(_PARAM_1Q)))]
        from qcflow.circuit import ParamExpr

        expr = ParamExpr(sym, float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-0.5, 0.5)))
        pos = int(rng.integers(len(gates) + 1))
        gates.insert(pos, fn(expr, q))
    return Circuit(num_qubits, gates)
