"""Modular-Hamiltonian learning from a mixed data state."""

import numpy as np
import pytest

import dense_reference as ref
from qcflow.apps import (
    BernoulliEBM,
    ThermalTarget,
    fidelity,
    gibbs_state,
    heisenberg_2d,
    qmhl_step,
    run_qmhl,
    vqt_ansatz,
)
from qcflow.pauli import PauliSum, pauli_z
from qcflow.sim import unitary


def _bindings(circuit, angles):
    return dict(zip(circuit.symbols, angles))


def _model_from(qnn, phi, theta):
    """W^dag diag(p_theta) W — the density the trained circuit encodes."""
    w = unitary(qnn, _bindings(qnn, phi))
    return (w.conj().T * BernoulliEBM(theta).probabilities()) @ w


# ---------------------------------------------------------------------------
# Single-step gradients and loss
# ---------------------------------------------------------------------------


def test_gradients_vanish_when_model_equals_data():
    rng = np.random.default_rng(7)
    qnn = vqt_ansatz(2, 2, prefix="w")
    phi = rng.uniform(0, 2 * np.pi, len(qnn.symbols))
    theta = rng.uniform(-0.8, 0.8, 2)
    ebm = BernoulliEBM(theta)
    data = _model_from(qnn, phi, theta)

    step = qmhl_step(data, qnn, phi, ebm)
    assert np.abs(step.grad_theta).max() < 1e-8
    assert np.abs(step.grad_phi).max() < 1e-8
    # at the optimum the cross entropy equals the data entropy
    assert step.loss == pytest.approx(ebm.entropy(), abs=1e-10)


def test_maximally_mixed_data_gradient_is_tanh():
    qnn = vqt_ansatz(2, 1, prefix="w")
    phi = np.random.default_rng(1).uniform(0, 2 * np.pi, len(qnn.symbols))
    theta = np.array([0.9, -0.4])
    ebm = BernoulliEBM(theta)
    data = np.eye(4, dtype=complex) / 4.0

    step = qmhl_step(data, qnn, phi, ebm)
    # <Z_j> under any unitary image of I/4 is zero, leaving d(log Z)/d(theta)
    np.testing.assert_allclose(step.grad_theta, np.tanh(theta), atol=1e-12)
    assert step.loss == pytest.approx(ebm.log_partition(), abs=1e-12)


def test_identity_circuit_reads_diagonal_data_directly():
    qnn = vqt_ansatz(2, 1, prefix="w")
    phi = np.zeros(len(qnn.symbols))  # every gate at exponent 0 is the identity
    ebm = BernoulliEBM(np.zeros(2))
    # pure |x> with x = (1, 0): little-endian index 1
    data = np.zeros((4, 4), dtype=complex)
    data[1, 1] = 1.0

    step = qmhl_step(data, qnn, phi, ebm)
    # E[Z_j] = (-1)^{x_j}; at theta = 0 the log-partition term contributes 0
    np.testing.assert_allclose(step.grad_theta, [-1.0, 1.0], atol=1e-12)
    assert step.loss == pytest.approx(2 * np.log(2.0), abs=1e-12)


def test_step_gradient_matches_dense_finite_difference():
    rng = np.random.default_rng(9)
    qnn = vqt_ansatz(2, 1, prefix="w")
    phi = rng.uniform(0, 2 * np.pi, len(qnn.symbols))
    theta = np.array([0.3, -0.6])
    target = ThermalTarget(heisenberg_2d(1, 2, 1.0, 1.0), 1.0)
    data = gibbs_state(target, 2)

    step = qmhl_step(data, qnn, phi, BernoulliEBM(theta))

    def loss_at(th, ph):
        w = ref.circuit_unitary(qnn, _bindings(qnn, ph))
        sigma_rotated = w @ data @ w.conj().T
        diag = np.real(np.diag(sigma_rotated))
        ebm = BernoulliEBM(th)
        bits = np.array([[(i >> q) & 1 for q in range(2)] for i in range(4)])
        return float(diag @ ebm.energies(bits)) + ebm.log_partition()

    eps = 1e-6
    fd_theta = np.array([
        (loss_at(theta + eps * e, phi) - loss_at(theta - eps * e, phi)) / (2 * eps)
        for e in np.eye(2)
    ])
    fd_phi = np.array([
        (loss_at(theta, phi + eps * e) - loss_at(theta, phi - eps * e)) / (2 * eps)
        for e in np.eye(len(phi))
    ])
    np.testing.assert_allclose(step.grad_theta, fd_theta, atol=1e-5)
    np.testing.assert_allclose(step.grad_phi, fd_phi, atol=1e-5)
    assert step.loss == pytest.approx(loss_at(theta, phi), abs=1e-10)


# ---------------------------------------------------------------------------
# Data-state validation
# ---------------------------------------------------------------------------


def test_rejects_malformed_density_matrices():
    qnn = vqt_ansatz(1, 1, prefix="w")
    phi = np.zeros(len(qnn.symbols))
    ebm = BernoulliEBM(np.zeros(1))

    with pytest.raises(ValueError, match="density matrix"):
        qmhl_step(np.eye(3, dtype=complex) / 3.0, qnn, phi, ebm)  # not 2^n
    with pytest.raises(ValueError, match="density matrix"):
        bad = np.array([[0.5, 0.5], [-0.5, 0.5]], dtype=complex)  # not Hermitian
        qmhl_step(bad, qnn, phi, ebm)
    with pytest.raises(ValueError, match="density matrix"):
        qmhl_step(np.eye(2, dtype=complex), qnn, phi, ebm)  # trace 2
    with pytest.raises(ValueError, match="density matrix"):
        bad = np.diag([1.5, -0.5]).astype(complex)  # negative eigenvalue
        qmhl_step(bad, qnn, phi, ebm)


# ---------------------------------------------------------------------------
# Full driver
# ---------------------------------------------------------------------------


def test_run_qmhl_learns_one_qubit_gibbs_data():
    target = ThermalTarget(PauliSum([pauli_z(0)]), 1.0)
    sigma = gibbs_state(target, 1)
    result = run_qmhl(sigma, layers=1, steps=60, lr=0.05, seed=3)

    assert len(result.loss_history) == 60
    assert result.loss_history[-1] < result.loss_history[0]
    assert result.fidelity >= 0.99
    # learned bias should approach beta (diagonal Gibbs data, spin convention)
    assert result.theta[0] == pytest.approx(1.0, abs=0.1)
    # dual-route fidelity check: library vs scipy sqrtm oracle
    assert result.fidelity == pytest.approx(
        ref.fidelity(result.model_density, sigma), abs=1e-8
    )
    assert fidelity(result.model_density, sigma) == pytest.approx(
        result.fidelity, abs=1e-12
    )


def test_run_qmhl_rejects_non_power_of_two_data():
    with pytest.raises(ValueError):
        run_qmhl(np.eye(3, dtype=complex) / 3.0, layers=1, steps=1)
