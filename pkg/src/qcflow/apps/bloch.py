"""Single-qubit binary classification of two angular blobs on the Bloch sphere.

Samples come from two classes centered at polar angles theta_a and theta_b.
Each example perturbs its class center by uniform spreads and is encoded as a
one-qubit state-preparation circuit Ry(-angle), Rx(-spread_x). A trainable
rotation plus a Z readout feeds a two-way softmax head.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..circuit import Circuit
from ..gates import rx, ry
from ..graph import (
    CATEGORICAL_CROSSENTROPY,
    AdamState,
    CircuitInput,
    Dense,
    Network,
    PQC,
    categorical_accuracy,
    fit,
)
from ..pauli import pauli_z
from ..rng import derive_seed, substream


@dataclass(frozen=True)
class BlochDatasetSpec:
    """Two class-center angles, a sample count, and a seed."""

    theta_a: float
    theta_b: float
    num_samples: int
    seed: int = 0

    def __post_init__(self):
        if self.num_samples < 2:
            raise ValueError("num_samples must be >= 2")

    @property
    def blob_size(self) -> float:
        return abs(self.theta_a - self.theta_b) / 5.0


def generate_bloch_dataset(spec: BlochDatasetSpec) -> tuple[list[Circuit], np.ndarray]:
    """Seeded draw of (circuits, one-hot labels).

    Per sample: a fair coin picks the class, spread_x and spread_y are uniform
    in +-blob_size, the encoded angle is the class center plus spread_y, and
    the circuit is Ry(-angle) followed by Rx(-spread_x).
    """
    rng = substream(spec.seed, 0)
    blob = spec.blob_size
    circuits: list[Circuit] = []
    labels = np.zeros((spec.num_samples, 2))
    for i in range(spec.num_samples):
        coin = rng.random()
        spread_x, spread_y = rng.uniform(-blob, blob, 2)
        if coin < 0.5:
            labels[i] = (1.0, 0.0)
            angle = spec.theta_a + spread_y
        else:
            labels[i] = (0.0, 1.0)
            angle = spec.theta_b + spread_y
        circuits.append(Circuit(1, [ry(-angle, 0), rx(-spread_x, 0)]))
    return circuits, labels


@dataclass
class ClassifierRun:
    """Trained network, per-epoch history, and held-out accuracy."""

    network: Network
    history: dict
    accuracy: float


def run_binary_classifier(
    spec: BlochDatasetSpec, epochs: int = 50, lr: float = 0.1
) -> ClassifierRun:
    """Train rotation + softmax head on a seeded draw; score a fresh test draw.

    Pipeline: per-example state preparation -> trainable Ry -> <Z> -> Dense(2,
    softmax), categorical cross-entropy, Adam. The test set is an independent
    draw of the same spec under a derived seed.
    """
    train_circuits, train_labels = generate_bloch_dataset(spec)
    test_spec = replace(spec, seed=derive_seed(spec.seed, 1))
    test_circuits, test_labels = generate_bloch_dataset(test_spec)

    data = CircuitInput()
    quantum = PQC(
        Circuit(1, [ry("theta", 0)]),
        [pauli_z(0)],
        seed=derive_seed(spec.seed, 2),
    )(data)
    head = Dense(2, activation="softmax", seed=derive_seed(spec.seed, 3))(quantum)
    network = Network([data], head)

    history = fit(
        network,
        train_circuits,
        train_labels,
        CATEGORICAL_CROSSENTROPY,
        AdamState(lr=lr),
        epochs,
        seed=derive_seed(spec.seed, 4),
        metric=categorical_accuracy,
    )
    predictions = network.predict(test_circuits)
    accuracy = categorical_accuracy(predictions, test_labels)
    return ClassifierRun(network, history, float(accuracy))
