"""Gradient-variance scan over random layered circuits."""

import numpy as np
import pytest

import dense_reference as ref
from qcflow.apps import barren_plateau_scan
from qcflow.apps.barren import _random_layered_circuit
from qcflow.gradients import GradRequest, parameter_shift_grad
from qcflow.pauli import pauli_z
from qcflow.rng import substream


def test_random_layer_structure():
    circuit, angle = _random_layered_circuit(3, 2, substream(0, 3, 0))
    # per layer: 3 rotations + 2 ladder CZs
    assert len(circuit.gates) == 2 * (3 + 2)
    assert circuit.symbols == ["theta"]
    assert 0.0 <= angle < 2 * np.pi
    cz_targets = [g.targets for g in circuit.gates if g.generator is None and len(g.targets) == 2]
    assert cz_targets == [(0, 1), (1, 2)] * 2


def test_trial_gradient_matches_dense_reference():
    observable = pauli_z(0) * pauli_z(1)
    for trial in range(3):
        circuit, angle = _random_layered_circuit(3, 3, substream(7, 3, trial))
        shift = parameter_shift_grad(GradRequest(circuit, observable, {"theta": angle}))
        assert shift.evaluations == 2
        oracle = ref.dense_fd_gradient(circuit, observable, {"theta": angle})
        assert shift.gradient[0] == pytest.approx(oracle[0], abs=1e-6)


def test_scan_deterministic_and_keyed_by_qubit_count():
    a = barren_plateau_scan([2, 3], depth=2, trials=5, seed=4)
    b = barren_plateau_scan([2, 3], depth=2, trials=5, seed=4)
    c = barren_plateau_scan([2, 3], depth=2, trials=5, seed=5)
    assert list(a) == [2, 3]
    assert a == b
    assert a != c
    assert all(v >= 0.0 for v in a.values())


def test_single_trial_population_variance_is_zero():
    scan = barren_plateau_scan([2], depth=1, trials=1, seed=0)
    assert scan[2] == 0.0


def test_variance_shrinks_with_register_size():
    scan = barren_plateau_scan([2, 6], depth=20, trials=60, seed=9)
    assert scan[2] > 0.0
    assert scan[6] < scan[2]


def test_validation():
    with pytest.raises(ValueError):
        barren_plateau_scan([2], depth=0, trials=5)
    with pytest.raises(ValueError):
        barren_plateau_scan([2], depth=5, trials=0)
    with pytest.raises(ValueError):
        barren_plateau_scan([1], depth=5, trials=5)
