"""Generative learning of a mixed data state with a latent energy model.

Given copies of a data density matrix sigma_D, the model searches for biases
theta and circuit angles phi such that W(phi)^dag diag(p_theta) W(phi) matches
sigma_D, where W maps the data toward the computational basis. The loss is the
quantum cross entropy

    L(theta, phi) = E_{x ~ sigma_phi}[ E_theta(x) ] + log Z_theta,

with sigma_phi(x) = <x| W sigma_D W^dag |x> the pulled-back data distribution.
Because E_theta(x) is the eigenvalue of D_theta = sum_j theta_j Z_j on |x>,
the first term is the expectation of a diagonal operator in the evolved data
state, so the phi-gradient follows from the parameter-shift rule applied to
the data state's eigenvector mixture, and the theta-gradient is the moment gap
E_{sigma_phi}[grad E] - E_{p_theta}[grad E].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit, resolve
from ..gradients import GradRequest, parameter_shift_grad
from ..graph import AdamState, adam_step
from ..pauli import PauliSum, pauli_z
from ..rng import substream
from ..sim import _resolved_ops, pauli_term_values, run_ops, unitary
from ._mixture import MixtureEvaluator
from .ebm import BernoulliEBM
from .thermal import fidelity
from .vqt import _bind, vqt_ansatz

_EIGENVALUE_TOL = 1e-8
_WEIGHT_CUTOFF = 1e-12


def _validated_mixture(data_state: np.ndarray, num_qubits: int):
    """Eigenvalue/eigenvector mixture of a density matrix, or ValueError."""
    data_state = np.asarray(data_state, dtype=np.complex128)
    dim = 1 << num_qubits
    if data_state.shape != (dim, dim):
        raise ValueError(
            f"density matrix must be {dim}x{dim} for {num_qubits} qubits, got {data_state.shape}"
        )
    if not np.allclose(data_state, data_state.conj().T, atol=_EIGENVALUE_TOL):
        raise ValueError("density matrix must be Hermitian")
    trace = complex(np.trace(data_state))
    if abs(trace - 1.0) > 1e-6:
        raise ValueError(f"density matrix must have unit trace, got {trace:.6g}")
    evals, evecs = np.linalg.eigh(data_state)
    if evals.min() < -_EIGENVALUE_TOL:
        raise ValueError(f"density matrix must be positive semidefinite (min eigenvalue {evals.min():.3g})")
    keep = evals > _WEIGHT_CUTOFF
    return evals[keep], evecs[:, keep].T.copy()


@dataclass
class QMHLStep:
    """One evaluation of the cross-entropy loss and both gradients."""

    grad_theta: np.ndarray
    grad_phi: np.ndarray
    loss: float


def qmhl_step(data_state: np.ndarray, qnn: Circuit, phi, ebm: BernoulliEBM) -> QMHLStep:
    """Exact loss and gradients for the current (theta, phi).

    The data state's eigenvector rows are pushed through the circuit once for
    the pulled-back Z moments (theta-gradient and loss) and re-used as the
    initial mixture for the parameter-shift phi-gradient of the diagonal
    operator sum_j theta_j Z_j.
    """
    n = qnn.num_qubits
    if ebm.num_bits != n:
        raise ValueError(f"energy model has {ebm.num_bits} bits but the circuit has {n} qubits")
    weights, rows = _validated_mixture(data_state, n)
    bindings = _bind(qnn, phi)
    out = run_ops(rows, _resolved_ops(resolve(qnn, bindings)), n, fuse_enabled=True)
    z_moments = np.array(
        [weights @ pauli_term_values(out, pauli_z(j), n) for j in range(n)]
    )

    grad_theta = z_moments + np.tanh(ebm.biases)

    diagonal_energy = PauliSum([pauli_z(j, float(ebm.biases[j])) for j in range(n)])
    evaluator = MixtureEvaluator(rows, weights, n)
    grad_phi = parameter_shift_grad(
        GradRequest(qnn, diagonal_energy, bindings), evaluator=evaluator
    ).gradient

    loss = float(ebm.biases @ z_moments + ebm.log_partition())
    if not np.isfinite(loss):
        raise ValueError("non-finite cross-entropy loss")
    return QMHLStep(grad_theta, grad_phi, loss)


@dataclass
class QMHLResult:
    """Trained parameters, loss trace, and fidelity against the data state."""

    theta: np.ndarray
    phi: np.ndarray
    loss_history: list
    fidelity: float
    model_density: np.ndarray


def run_qmhl(
    data_state: np.ndarray,
    *,
    layers: int = 4,
    steps: int = 300,
    lr: float = 0.05,
    seed: int = 0,
) -> QMHLResult:
    """Fit a fresh energy model and circuit to a given density matrix.

    Gradients are deterministic (the mixture is exact), so this is plain Adam
    descent on the cross entropy. The returned fidelity compares
    W^dag diag(p_theta) W with the data state.
    """
    data_state = np.asarray(data_state, dtype=np.complex128)
    dim = data_state.shape[0] if data_state.ndim == 2 else 0
    num_qubits = max(dim.bit_length() - 1, 0)
    if dim == 0 or (1 << num_qubits) != dim:
        raise ValueError("density matrix dimension must be a power of two")
    qnn = vqt_ansatz(num_qubits, layers, prefix="w")
    theta = np.zeros(num_qubits)
    phi = substream(seed, 0).uniform(0.0, 2.0 * np.pi, len(qnn.symbols))
    adam_theta = AdamState(lr=lr)
    adam_phi = AdamState(lr=lr)
    history: list[float] = []
    for _ in range(steps):
        step = qmhl_step(data_state, qnn, phi, BernoulliEBM(theta))
        history.append(step.loss)
        (theta,), adam_theta = adam_step(adam_theta, [theta], [step.grad_theta])
        (phi,), adam_phi = adam_step(adam_phi, [phi], [step.grad_phi])

    w = unitary(resolve(qnn, _bind(qnn, phi)))
    probs = BernoulliEBM(theta).probabilities()
    model = (w.conj().T * probs) @ w
    return QMHLResult(theta, phi, history, fidelity(model, data_state), model)
