"""Variational free-energy training of thermal states.

The model is a classical latent distribution (factorized Bernoulli energy
model with biases theta) pushed through a parameterized circuit with angles
phi: rho(theta, phi) = U(phi) diag(p_theta) U(phi)^dag. Training minimizes the
(beta-scaled) free energy

    L(theta, phi) = beta * E_{x ~ p_theta}[ H_phi(x) ] - S(p_theta),

where H_phi(x) = <x| U^dag H U |x> and S is the latent entropy (equal to the
model-state entropy because the circuit is unitary). The theta-gradient is the
covariance Cov(E_theta(x) - beta*H_phi(x), grad_theta E_theta(x)) under
p_theta; the phi-gradient is beta times the gradient of a plain expectation
value, estimated with the parameter-shift rule over the sampled bitstring
batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit, resolve
from ..gates import cnot_pow, xpow, ypow, zpow
from ..gradients import GradRequest, parameter_shift_grad
from ..graph import AdamState, adam_step
from ..rng import substream
from ..sim import _resolved_ops, run_ops, unitary
from ._mixture import MixtureEvaluator, bitstring_states, pauli_sum_values
from .ebm import BernoulliEBM
from .thermal import ThermalTarget, fidelity, gibbs_state, heisenberg_2d, log_partition

_EXACT_CAP = 10


def vqt_ansatz(num_qubits: int, layers: int, prefix: str = "v") -> Circuit:
    """Layers of per-qubit X/Y/Z power rotations plus CNOT-power entanglers.

    Entangler pairing alternates between (0,1),(2,3),... on even layers and
    the ring-shifted (1,2),(3,4),...,(n-1,0) on odd layers so correlations can
    spread across the whole register.
    """
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    gates = []
    for layer in range(layers):
        for q in range(num_qubits):
            tag = f"{prefix}{layer}_q{q}"
            gates += [xpow(f"{tag}x", q), ypow(f"{tag}y", q), zpow(f"{tag}z", q)]
        if num_qubits < 2:
            continue
        if layer % 2 == 0:
            pairs = [(q, q + 1) for q in range(0, num_qubits - 1, 2)]
        else:
            pairs = [(q, (q + 1) % num_qubits) for q in range(1, num_qubits, 2)]
        for k, (a, b) in enumerate(pairs):
            gates.append(cnot_pow(f"{prefix}{layer}_e{k}", a, b))
    return Circuit(num_qubits, gates)


def _bind(circuit: Circuit, phi) -> dict:
    symbols = circuit.symbols
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (len(symbols),):
        raise ValueError(f"circuit has {len(symbols)} symbols, got {phi.size} angles")
    return dict(zip(symbols, phi))


def model_density(qnn: Circuit, phi, theta) -> np.ndarray:
    """rho = U(phi) diag(p_theta) U(phi)^dag as a dense matrix."""
    u = unitary(resolve(qnn, _bind(qnn, phi)))
    probs = BernoulliEBM(np.asarray(theta, dtype=np.float64)).probabilities()
    return (u * probs) @ u.conj().T


def vqt_free_energy_exact(theta, phi, target: ThermalTarget, qnn: Circuit) -> float:
    """Exact free-energy loss by enumerating every computational basis state.

    Capped at 10 qubits: all 2^n basis states run through the circuit as one
    batch, H_phi(x) is read off exactly, and the latent entropy uses the
    Bernoulli closed form.
    """
    n = qnn.num_qubits
    if n > _EXACT_CAP:
        raise ValueError(f"exact enumeration is capped at {_EXACT_CAP} qubits, got {n}")
    ebm = BernoulliEBM(np.asarray(theta, dtype=np.float64))
    if ebm.num_bits != n:
        raise ValueError(f"{ebm.num_bits} biases for a {n}-qubit circuit")
    rows = np.eye(1 << n, dtype=np.complex128)
    out = run_ops(rows, _resolved_ops(resolve(qnn, _bind(qnn, phi))), n, fuse_enabled=True)
    h_values = pauli_sum_values(out, target.hamiltonian, n)
    probs = ebm.probabilities()
    return float(target.beta * (probs @ h_values) - ebm.entropy())


@dataclass
class VQTResult:
    """Trained parameters plus the per-step sampled free-energy trace."""

    theta: np.ndarray
    phi: np.ndarray
    free_energy_history: list


def vqt_train(
    target: ThermalTarget,
    qnn: Circuit,
    ebm: BernoulliEBM,
    steps: int,
    lr: float,
    samples_per_step: int,
    seed: int = 0,
) -> VQTResult:
    """Alternating sampled updates of the latent biases and circuit angles.

    Per step: draw a bitstring batch from the current Bernoulli model, push the
    batch through the circuit to estimate H_phi(x), update theta by the
    covariance estimator and phi by beta times the batch parameter-shift
    gradient, both through Adam. The recorded loss is the sampled free energy
    beta*mean(H_phi) - S(theta).
    """
    n = qnn.num_qubits
    if ebm.num_bits != n:
        raise ValueError(f"energy model has {ebm.num_bits} bits but the circuit has {n} qubits")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if samples_per_step < 1:
        raise ValueError("samples_per_step must be >= 1")
    beta = target.beta
    hamiltonian = target.hamiltonian
    theta = ebm.biases.copy()
    phi = substream(seed, 0).uniform(0.0, 2.0 * np.pi, len(qnn.symbols))
    adam_theta = AdamState(lr=lr)
    adam_phi = AdamState(lr=lr)
    history: list[float] = []

    for step in range(steps):
        rng = substream(seed, step + 1)
        current = BernoulliEBM(theta)
        bits = current.sample(samples_per_step, rng)
        # collapse repeated bitstrings into weighted unique rows — identical
        # estimates, far fewer simulated rows on small registers
        unique_bits, inverse, counts = np.unique(
            bits, axis=0, return_inverse=True, return_counts=True
        )
        amps = bitstring_states(unique_bits, n)
        batch_weights = counts / counts.sum()
        bindings = _bind(qnn, phi)
        out = run_ops(amps, _resolved_ops(resolve(qnn, bindings)), n, fuse_enabled=True)
        h_values = pauli_sum_values(out, hamiltonian, n)[inverse]

        energies = current.energies(bits)
        weights = energies - beta * h_values
        denergy = current.energy_gradients(bits)
        grad_theta = (weights[:, None] * denergy).mean(axis=0) - weights.mean() * denergy.mean(
            axis=0
        )

        evaluator = MixtureEvaluator(amps, batch_weights, n)
        shift = parameter_shift_grad(
            GradRequest(qnn, hamiltonian, bindings), evaluator=evaluator
        )
        grad_phi = beta * shift.gradient

        loss = float(beta * h_values.mean() - current.entropy())
        if not np.isfinite(loss):
            raise ValueError(f"non-finite free energy at step {step}")
        history.append(loss)

        (theta,), adam_theta = adam_step(adam_theta, [theta], [grad_theta])
        (phi,), adam_phi = adam_step(adam_phi, [phi], [grad_phi])
    return VQTResult(theta, phi, history)


def run_vqt(
    target: ThermalTarget | None = None,
    *,
    layers: int = 4,
    steps: int = 250,
    lr: float = 0.05,
    samples_per_step: int = 128,
    seed: int = 0,
) -> dict:
    """Train against a thermal target (default: 2x2 Heisenberg grid, beta=1).

    Returns the trained parameters, the sampled loss trace, the exact final
    free energy with its theoretical floor -log(Z_beta), and the fidelity of
    the model density matrix against the exact Gibbs state.
    """
    if target is None:
        target = ThermalTarget(heisenberg_2d(2, 2, 1.0, 1.0), 1.0)
    support = [q for term in target.hamiltonian for q in term.support]
    num_qubits = max(support) + 1 if support else 1
    qnn = vqt_ansatz(num_qubits, layers)
    ebm = BernoulliEBM(np.zeros(num_qubits))
    result = vqt_train(target, qnn, ebm, steps, lr, samples_per_step, seed)

    rho = model_density(qnn, result.phi, result.theta)
    sigma = gibbs_state(target, num_qubits)
    exact_loss = vqt_free_energy_exact(result.theta, result.phi, target, qnn)
    return {
        "theta": result.theta,
        "phi": result.phi,
        "free_energy_history": result.free_energy_history,
        "free_energy": exact_loss,
        "free_energy_floor": -log_partition(target, num_qubits),
        "fidelity": fidelity(rho, sigma),
        "model_density": rho,
        "qnn": qnn,
        "target": target,
        "seed": seed,
    }
