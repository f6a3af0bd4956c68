"""qcflow: a differentiable state-vector quantum circuit simulator.

Batched simulation with gate fusion, exact and shot-based expectations,
finite-difference / parameter-shift / stochastic parameter-shift gradients,
a minimal hybrid quantum-classical autodiff graph, and drivers for the
standard variational experiments (classifier, QCNN, QAOA, barren-plateau
scan, VQT/QMHL) plus a fused-vs-unfused benchmark harness.
"""

from .circuit import (
    Circuit,
    Gate,
    ParamExpr,
    Symbol,
    compose,
    exponential_circuit,
    from_json,
    gate_matrix,
    resolve,
    to_json,
)
from .fusion import FusedCircuit, FusedGate, fuse
from .gradients import (
    CENTRAL,
    FORWARD,
    Exact,
    GradRequest,
    GradResult,
    Sampled,
    StochasticConfig,
    finite_difference_grad,
    parameter_shift_grad,
    stochastic_ps_grad,
)
from .graph import (
    AdamState,
    CircuitInput,
    Concat,
    ControlledPQC,
    Dense,
    FiniteDifference,
    Input,
    Network,
    PQC,
    ParameterShift,
    StochasticShift,
    adam_step,
    categorical_accuracy,
    dense_backward,
    dense_forward,
    fit,
    loss_backward,
    loss_forward,
    quantum_backward,
    quantum_forward,
    softmax,
    write_history_csv,
)
from .pauli import (
    PauliString,
    PauliSum,
    identity,
    pauli_sum_from_obj,
    pauli_sum_to_obj,
    pauli_x,
    pauli_y,
    pauli_z,
)
from .rng import derive_seed, substream
from .sim import (
    SampleBatch,
    StateVector,
    apply_fused,
    batch_execute,
    expectation,
    sample,
    sampled_expectation,
    simulate,
    unitary,
)

__version__ = "0.1.0"

__all__ = [
    "adam_step",
    "AdamState",
    "apply_fused",
    "batch_execute",
    "categorical_accuracy",
    "CENTRAL",
    "Circuit",
    "CircuitInput",
    "compose",
    "Concat",
    "ControlledPQC",
    "Dense",
    "dense_backward",
    "dense_forward",
    "derive_seed",
    "Exact",
    "expectation",
    "exponential_circuit",
    "finite_difference_grad",
    "FiniteDifference",
    "fit",
    "FORWARD",
    "from_json",
    "fuse",
    "FusedCircuit",
    "FusedGate",
    "Gate",
    "gate_matrix",
    "GradRequest",
    "GradResult",
    "identity",
    "Input",
    "loss_backward",
    "loss_forward",
    "Network",
    "parameter_shift_grad",
    "ParameterShift",
    "ParamExpr",
    "pauli_sum_from_obj",
    "pauli_sum_to_obj",
    "pauli_x",
    "pauli_y",
    "pauli_z",
    "PauliString",
    "PauliSum",
    "PQC",
    "quantum_backward",
    "quantum_forward",
    "resolve",
    "sample",
    "SampleBatch",
    "Sampled",
    "sampled_expectation",
    "simulate",
    "softmax",
    "StateVector",
    "stochastic_ps_grad",
    "StochasticConfig",
    "StochasticShift",
    "substream",
    "Symbol",
    "to_json",
    "unitary",
    "write_history_csv",
    "__version__",
]
