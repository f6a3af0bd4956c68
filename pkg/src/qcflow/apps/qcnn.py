"""Cluster-state excitation detection with a quantum convolutional network.

The data register is a ring cluster state with a single-qubit Rx excitation of
random angle; the label is +1 when the excitation angle exceeds a threshold in
magnitude and -1 otherwise. Three classifiers share the convolution/pooling
vocabulary:

* ``pure``: three conv+pool stages down to one readout qubit, <Z> output;
* ``single_filter``: one conv+pool stage, four <Z> readouts into dense layers;
* ``multi_filter``: three independently seeded truncated stages concatenated
  (12 readouts) into the same dense head.

Convolutions apply one shared 15-parameter two-qubit unitary to every
nearest-neighbor pair at stride 1 (both offsets, ring-closed); pooling maps
each source qubit onto a sink through single-qubit basis selectors followed by
a CNOT, halving the active register.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit, Gate, as_param_expr, compose
from ..gates import cnot, cz, h, rx, xpow, ypow, zpow
from ..graph import (
    MSE,
    AdamState,
    CircuitInput,
    Concat,
    Dense,
    FiniteDifference,
    Network,
    PQC,
    fit,
    loss_forward,
)
from ..pauli import PauliString, PauliSum, identity, pauli_z
from ..rng import derive_seed, substream

_PAIR_LETTERS = ("Z", "Y", "X")


def cluster_state_circuit(n: int) -> Circuit:
    """Hadamard on every qubit, then CZ around the ring (wrap pair included)."""
    if n < 3:
        raise ValueError("a ring cluster state needs at least 3 qubits")
    gates = [h(q) for q in range(n)]
    gates.extend(cz(q, (q + 1) % n) for q in range(n))
    return Circuit(n, gates)


def pauli_pair_pow(letter: str, exponent, q0: int, q1: int) -> Gate:
    """(P x P)**t for P in {X, Y, Z} with the same phase convention as X**t."""
    expr = as_param_expr(exponent)
    generator = PauliSum(
        [PauliString(1.0, {q0: letter, q1: letter}), identity(-1.0)]
    )
    return Gate((q0, q1), exponent=expr.scaled(math.pi / 2.0), generator=generator)


def _one_qubit_unitary(q: int, symbols) -> list[Gate]:
    a, b, c = symbols
    return [xpow(a, q), ypow(b, q), zpow(c, q)]


def two_qubit_unitary(q0: int, q1: int, symbols) -> list[Gate]:
    """General two-qubit block: 3+3 pre-rotations, ZZ/YY/XX powers, 3+3 post."""
    symbols = list(symbols)
    if len(symbols) != 15:
        raise ValueError(f"two_qubit_unitary takes 15 parameters, got {len(symbols)}")
    gates = _one_qubit_unitary(q0, symbols[0:3])
    gates += _one_qubit_unitary(q1, symbols[3:6])
    gates += [
        pauli_pair_pow(letter, symbols[6 + k], q0, q1)
        for k, letter in enumerate(_PAIR_LETTERS)
    ]
    gates += _one_qubit_unitary(q0, symbols[9:12])
    gates += _one_qubit_unitary(q1, symbols[12:15])
    return gates


def two_qubit_pool(source: int, sink: int, symbols) -> list[Gate]:
    """Basis selectors on sink then source, then CNOT(source -> sink)."""
    symbols = list(symbols)
    if len(symbols) != 6:
        raise ValueError(f"two_qubit_pool takes 6 parameters, got {len(symbols)}")
    gates = _one_qubit_unitary(sink, symbols[0:3])
    gates += _one_qubit_unitary(source, symbols[3:6])
    gates.append(cnot(source, sink))
    return gates


def conv_circuit(bits, symbols) -> list[Gate]:
    """Shared two-qubit unitary on every stride-1 pair: both offsets, ring-closed."""
    bits = list(bits)
    gates = []
    for first, second in zip(bits[0::2], bits[1::2]):
        gates += two_qubit_unitary(first, second, symbols)
    for first, second in zip(bits[1::2], bits[2::2] + [bits[0]]):
        gates += two_qubit_unitary(first, second, symbols)
    return gates


def pool_circuit(sources, sinks, symbols) -> list[Gate]:
    """Shared pool block mapping each source onto its sink."""
    sources, sinks = list(sources), list(sinks)
    if len(sources) != len(sinks):
        raise ValueError(f"{len(sources)} sources cannot pool into {len(sinks)} sinks")
    gates = []
    for source, sink in zip(sources, sinks):
        gates += two_qubit_pool(source, sink, symbols)
    return gates


def qcnn_layers(qubits, params) -> Circuit:
    """One convolution plus one pooling stage over ``qubits``.

    ``params`` supplies exactly 21 parameter names/expressions: the first 15
    are shared by every convolution pair, the last 6 by every pool block. The
    first half of the register pools into the second half, so the qubit count
    must be even.
    """
    qubits = list(qubits)
    params = list(params)
    if len(params) != 21:
        raise ValueError(f"qcnn_layers takes 21 parameters, got {len(params)}")
    if len(qubits) % 2 != 0:
        raise ValueError(f"cannot pool an odd register of {len(qubits)} qubits")
    half = len(qubits) // 2
    gates = conv_circuit(qubits, params[:15])
    gates += pool_circuit(qubits[:half], qubits[half:], params[15:])
    return Circuit(max(qubits) + 1, gates)


def _stage_symbols(prefix: str, start: int, count: int) -> list[str]:
    return [f"{prefix}{k}" for k in range(start, start + count)]


def qcnn_pure_circuit(n: int = 8, prefix: str = "qconv") -> Circuit:
    """Three conv+pool stages from n qubits down to a single readout qubit.

    Each stage has fresh parameters (15 conv + 6 pool); with n=8 that is 63
    symbols and the surviving qubit is the last one.
    """
    if n != 8:
        raise ValueError("the pure model is defined on 8 qubits")
    bits = list(range(n))
    gates = conv_circuit(bits, _stage_symbols(prefix, 0, 15))
    gates += pool_circuit(bits[:4], bits[4:], _stage_symbols(prefix, 15, 6))
    gates += conv_circuit(bits[4:], _stage_symbols(prefix, 21, 15))
    gates += pool_circuit(bits[4:6], bits[6:], _stage_symbols(prefix, 36, 6))
    gates += conv_circuit(bits[6:], _stage_symbols(prefix, 42, 15))
    gates += pool_circuit([bits[6]], [bits[7]], _stage_symbols(prefix, 57, 6))
    return Circuit(n, gates)


def qcnn_truncated_circuit(n: int = 8, prefix: str = "qconv") -> Circuit:
    """A single conv+pool stage; qubits n/2..n-1 survive for readout."""
    if n % 2 != 0 or n < 4:
        raise ValueError("the truncated model needs an even register of at least 4 qubits")
    bits = list(range(n))
    half = n // 2
    gates = conv_circuit(bits, _stage_symbols(prefix, 0, 15))
    gates += pool_circuit(bits[:half], bits[half:], _stage_symbols(prefix, 15, 6))
    return Circuit(n, gates)


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClusterStateTask:
    """Ring size, labeling threshold, and the excitation dataset."""

    n_qubits: int
    rotation_threshold: float
    angles: np.ndarray
    excited_qubits: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=np.float64)
        qubits = np.asarray(self.excited_qubits, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.float64)
        if not (angles.shape == qubits.shape == labels.shape) or angles.ndim != 1:
            raise ValueError("angles, excited_qubits, labels must be equal-length vectors")
        expected = np.where(np.abs(angles) > self.rotation_threshold, 1.0, -1.0)
        if not np.array_equal(labels, expected):
            raise ValueError("labels are inconsistent with the threshold rule")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "excited_qubits", qubits)
        object.__setattr__(self, "labels", labels)


def make_cluster_task(
    n_qubits: int = 8,
    rounds: int = 14,
    threshold: float = math.pi / 2.0,
    seed: int = 0,
) -> ClusterStateTask:
    """rounds*n_qubits samples; round-robin excitation qubit, uniform angle.

    Angles are uniform in (-pi, pi); the label is +1 when |angle| exceeds the
    threshold and -1 otherwise.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    rng = substream(seed, 0)
    count = rounds * n_qubits
    angles = rng.uniform(-math.pi, math.pi, count)
    qubits = np.arange(count) % n_qubits
    labels = np.where(np.abs(angles) > threshold, 1.0, -1.0)
    return ClusterStateTask(n_qubits, threshold, angles, qubits, labels)


def task_circuits(task: ClusterStateTask) -> list[Circuit]:
    """Cluster-state preparation followed by each sample's Rx excitation."""
    base = cluster_state_circuit(task.n_qubits)
    return [
        compose(base, Circuit(task.n_qubits, [rx(angle, int(q))]))
        for angle, q in zip(task.angles, task.excited_qubits)
    ]


# ---------------------------------------------------------------------------
# Training driver
# ---------------------------------------------------------------------------


def _sign_accuracy(pred: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.sign(pred) == np.sign(y)))


def _build_variant(name: str, n: int, seed: int):
    data = CircuitInput()
    if name == "pure":
        node = PQC(
            qcnn_pure_circuit(n),
            [pauli_z(n - 1)],
            differentiator=FiniteDifference(),
            seed=derive_seed(seed, 10),
        )(data)
        return Network([data], node)
    half = n // 2
    readouts = [pauli_z(q) for q in range(half, n)]
    if name == "single_filter":
        node = PQC(
            qcnn_truncated_circuit(n),
            readouts,
            differentiator=FiniteDifference(),
            seed=derive_seed(seed, 11),
        )(data)
        features = node
    elif name == "multi_filter":
        filters = [
            PQC(
                qcnn_truncated_circuit(n, prefix=f"filter{k}_"),
                readouts,
                differentiator=FiniteDifference(),
                seed=derive_seed(seed, 12 + k),
            )(data)
            for k in range(3)
        ]
        features = Concat()(*filters)
    else:
        raise ValueError(f"unknown variant {name!r}")
    hidden = Dense(8, seed=derive_seed(seed, 20))(features)
    out = Dense(1, seed=derive_seed(seed, 21))(hidden)
    return Network([data], out)


VARIANTS = ("pure", "single_filter", "multi_filter")


def run_qcnn_variants(
    task: ClusterStateTask,
    *,
    epochs: int = 25,
    lr: float = 0.02,
    batch_size: int = 16,
    seed: int = 0,
) -> dict:
    """Train all three variants on a 70/30 split of the task dataset.

    Returns, per variant, the training history (MSE loss plus sign-agreement
    metric) and the validation MSE before and after training.
    """
    circuits = task_circuits(task)
    labels = task.labels[:, None]
    count = len(circuits)
    order = substream(seed, 1).permutation(count)
    split = int(count * 0.7)
    train_idx, val_idx = order[:split], order[split:]
    train_x = [circuits[i] for i in train_idx]
    val_x = [circuits[i] for i in val_idx]
    train_y, val_y = labels[train_idx], labels[val_idx]

    results: dict[str, dict] = {}
    for name in VARIANTS:
        network = _build_variant(name, task.n_qubits, seed)
        baseline = float(loss_forward(MSE, network.predict(val_x), val_y))
        start = time.perf_counter()
        history = fit(
            network,
            train_x,
            train_y,
            MSE,
            AdamState(lr=lr),
            epochs,
            batch_size=batch_size,
            seed=derive_seed(seed, 2),
            metric=_sign_accuracy,
        )
        seconds = time.perf_counter() - start
        trained = float(loss_forward(MSE, network.predict(val_x), val_y))
        results[name] = {
            "history": history,
            "val_mse_untrained": baseline,
            "val_mse_trained": trained,
            "val_accuracy": _sign_accuracy(network.predict(val_x), val_y),
            "seconds": seconds,
        }
    return results


def qcnn_history_csv(results: dict) -> str:
    """Plot-ready CSV of every variant's training trace and wall time.

    One row per (variant, epoch) with the training loss, the sign-agreement
    metric, and the variant's total training seconds repeated on each row so
    the relative training speed can be read off alongside the curves.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["variant", "epoch", "loss", "accuracy", "train_seconds"])
    for name, report in results.items():
        metrics = report["history"].get("metric") or []
        for epoch, loss_value in enumerate(report["history"]["loss"]):
            metric_value = f"{metrics[epoch]:.10g}" if metrics else ""
            writer.writerow(
                [name, epoch, f"{loss_value:.10g}", metric_value,
                 f"{report['seconds']:.3f}"]
            )
    return out.getvalue()
