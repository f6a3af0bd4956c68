"""Application drivers built on the simulation, gradient, and graph layers.

Each submodule is a small, self-contained experiment:

* :mod:`~qcflow.apps.bloch` — single-qubit binary classifier on two angular blobs;
* :mod:`~qcflow.apps.qcnn` — cluster-state excitation detection with a quantum
  convolutional network and two hybrid variants;
* :mod:`~qcflow.apps.qaoa` — MaxCut via alternating cost/mixer exponentials;
* :mod:`~qcflow.apps.barren` — gradient-variance scan over random deep circuits;
* :mod:`~qcflow.apps.ebm` / :mod:`~qcflow.apps.thermal` — factorized Bernoulli
  energy model and thermal-state targets;
* :mod:`~qcflow.apps.vqt` — variational free-energy training of thermal states;
* :mod:`~qcflow.apps.qmhl` — generative modular-Hamiltonian learning from a
  mixed data state.
"""

from .barren import barren_plateau_scan
from .bloch import BlochDatasetSpec, ClassifierRun, generate_bloch_dataset, run_binary_classifier
from .ebm import BernoulliEBM, all_bitstrings
from .qaoa import (
    MaxCutProblem,
    QAOAResult,
    as_maxcut_problem,
    build_maxcut_qaoa,
    brute_force_maxcut,
    cut_cost,
    maxcut_cost_operator,
    mixer_operator,
    run_qaoa,
)
from .qcnn import (
    ClusterStateTask,
    cluster_state_circuit,
    conv_circuit,
    make_cluster_task,
    pauli_pair_pow,
    pool_circuit,
    qcnn_history_csv,
    qcnn_layers,
    qcnn_pure_circuit,
    qcnn_truncated_circuit,
    run_qcnn_variants,
    task_circuits,
    two_qubit_pool,
    two_qubit_unitary,
)
from .qmhl import QMHLResult, QMHLStep, qmhl_step, run_qmhl
from .thermal import (
    ThermalTarget,
    dense_pauli_matrix,
    fidelity,
    gibbs_state,
    heisenberg_2d,
    log_partition,
)
from .vqt import (
    VQTResult,
    bitstring_states,
    model_density,
    run_vqt,
    vqt_ansatz,
    vqt_free_energy_exact,
    vqt_train,
)

__all__ = [
    "all_bitstrings",
    "as_maxcut_problem",
    "barren_plateau_scan",
    "BernoulliEBM",
    "bitstring_states",
    "BlochDatasetSpec",
    "brute_force_maxcut",
    "build_maxcut_qaoa",
    "ClassifierRun",
    "cluster_state_circuit",
    "ClusterStateTask",
    "conv_circuit",
    "cut_cost",
    "dense_pauli_matrix",
    "fidelity",
    "generate_bloch_dataset",
    "gibbs_state",
    "heisenberg_2d",
    "log_partition",
    "make_cluster_task",
    "maxcut_cost_operator",
    "MaxCutProblem",
    "mixer_operator",
    "model_density",
    "pauli_pair_pow",
    "pool_circuit",
    "QAOAResult",
    "qcnn_history_csv",
    "qcnn_layers",
    "qcnn_pure_circuit",
    "qcnn_truncated_circuit",
    "qmhl_step",
    "QMHLResult",
    "QMHLStep",
    "run_binary_classifier",
    "run_qaoa",
    "run_qcnn_variants",
    "run_qmhl",
    "run_vqt",
    "task_circuits",
    "ThermalTarget",
    "two_qubit_pool",
    "two_qubit_unitary",
    "vqt_ansatz",
    "vqt_free_energy_exact",
    "vqt_train",
    "VQTResult",
]
