"""Gradient-variance scan over randomly initialized layered circuits.

Each layer places one rotation per qubit with an axis chosen uniformly from
{X, Y, Z} and an angle uniform in [0, 2*pi), then entangles neighbors with a
CZ ladder. The scan measures how the sample variance of a single derivative,
d<Z_0 Z_1>/d(first rotation angle), collapses as qubit count grows.
"""

from __future__ import annotations

import numpy as np

from ..circuit import Circuit
from ..gates import cz, rx, ry, rz
from ..gradients import GradRequest, parameter_shift_grad
from ..pauli import pauli_z
from ..rng import substream

_AXES = (rx, ry, rz)
_SYMBOL = "theta"


def _random_layered_circuit(num_qubits: int, depth: int, rng: np.random.Generator):
    """One random circuit; only the very first rotation keeps its symbol.

    Returns (circuit, binding value for the symbolic angle). Every other
    rotation is bound to its drawn angle at construction time, which leaves the
    derivative with respect to the first angle unchanged while keeping the
    gradient call two evaluations wide.
    """
    gates = []
    first_angle = None
    for _ in range(depth):
        for q in range(num_qubits):
            factory = _AXES[int(rng.integers(len(_AXES)))]
            angle = float(rng.uniform(0.0, 2.0 * np.pi))
            if first_angle is None:
                first_angle = angle
                gates.append(factory(_SYMBOL, q))
            else:
                gates.append(factory(angle, q))
        for control, target in zip(range(num_qubits), range(1, num_qubits)):
            gates.append(cz(control, target))
    return Circuit(num_qubits, gates), first_angle


def barren_plateau_scan(n_list, depth: int, trials: int, seed: int = 0) -> dict[int, float]:
    """Sample variance of d<Z_0 Z_1>/d(first angle) for each qubit count.

    For each n in ``n_list``, draws ``trials`` random circuits of the given
    depth, evaluates the derivative by the parameter-shift rule at the drawn
    angles, and records the sample variance. Returns {n: variance} in the
    order given.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n_list = [int(n) for n in n_list]
    if any(n < 2 for n in n_list):
        raise ValueError("qubit counts must be >= 2 (the readout acts on qubits 0 and 1)")

    variances: dict[int, float] = {}
    for n in n_list:
        observable = pauli_z(0) * pauli_z(1)
        grads = np.zeros(trials)
        for t in range(trials):
            circuit, angle = _random_layered_circuit(n, depth, substream(seed, n, t))
            req = GradRequest(circuit, observable, {_SYMBOL: angle})
            grads[t] = parameter_shift_grad(req).gradient[0]
        variances[n] = float(np.var(grads))
    return variances
