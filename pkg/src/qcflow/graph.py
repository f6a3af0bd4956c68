"""Hybrid quantum-classical reverse-mode autodiff.

A model is a static DAG wired in functional style::

    x = Input(4)
    h = Dense(8, "relu", seed=1)(x)
    q = ControlledPQC(circuit, [obs])(h)
    model = Network([x], q)

Classical layers are dense affine maps with elementwise/softmax activations.
Quantum nodes evaluate expectation vectors of a parameterized circuit; their
backward pass contracts the upstream gradient with the node's observables into
a single weighted observable per batch row, then differentiates that scalar —
the full [batch, observables, params] Jacobian is never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, resolve
from .gradients import (
    CENTRAL,
    Exact,
    GradRequest,
    Sampled,
    StochasticConfig,
    finite_difference_grad,
    parameter_shift_grad,
    stochastic_ps_grad,
)
from .pauli import PauliSum, as_pauli_sum
from .rng import derive_seed, substream
from .sim import _resolved_ops, expectation, pauli_term_values, run_ops, sampled_expectation, simulate

MSE = "mse"
MAE = "mae"
CATEGORICAL_CROSSENTROPY = "categorical_crossentropy"
SQUARED_HINGE = "squared_hinge"
LOSSES = (MSE, MAE, CATEGORICAL_CROSSENTROPY, SQUARED_HINGE)

ACTIVATIONS = ("linear", "relu", "softmax", "sigmoid")

_CCE_CLIP = 1e-12


# ---------------------------------------------------------------------------
# Differentiator engines (callable adapters over the gradient functions)
# ---------------------------------------------------------------------------


class ParameterShift:
    """Exact parameter-shift engine (the default for quantum nodes)."""

    def __call__(self, request: GradRequest):
        return parameter_shift_grad(request)


class FiniteDifference:
    """Finite-difference engine; supports a batched fast path during backprop."""

    def __init__(self, scheme: str = CENTRAL, epsilon: float = 1e-4):
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.scheme = scheme
        self.epsilon = float(epsilon)

    def __call__(self, request: GradRequest):
        return finite_difference_grad(request, self.scheme, self.epsilon)


class StochasticShift:
    """Stochastic parameter-shift engine with a fixed sampling configuration."""

    def __init__(self, config: StochasticConfig):
        self.config = config

    def __call__(self, request: GradRequest):
        return stochastic_ps_grad(request, self.config)


# ---------------------------------------------------------------------------
# Activations and losses
# ---------------------------------------------------------------------------


def softmax(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax, numerically stabilized; rows sum to 1."""
    x = np.asarray(x, dtype=np.float64)
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _activate(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "linear":
        return z
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "softmax":
        return softmax(z)
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    raise ValueError(f"unknown activation {kind!r}; expected one of {ACTIVATIONS}")


def _activation_backward(kind: str, y: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """d(loss)/d(pre-activation) given the activation output y."""
    if kind == "linear":
        return upstream
    if kind == "relu":
        return upstream * (y > 0.0)
    if kind == "sigmoid":
        return upstream * y * (1.0 - y)
    if kind == "softmax":
        inner = (upstream * y).sum(axis=-1, keepdims=True)
        return y * (upstream - inner)
    raise ValueError(f"unknown activation {kind!r}")


def loss_forward(kind: str, pred: np.ndarray, target: np.ndarray) -> float:
    """Scalar loss, averaged over every entry of the batch."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"prediction shape {pred.shape} != target shape {target.shape}")
    if kind == MSE:
        return float(np.mean((pred - target) ** 2))
    if kind == MAE:
        return float(np.mean(np.abs(pred - target)))
    if kind == CATEGORICAL_CROSSENTROPY:
        p = np.clip(pred, _CCE_CLIP, 1.0)
        per_row = -(target * np.log(p)).sum(axis=-1)
        return float(np.mean(per_row))
    if kind == SQUARED_HINGE:
        margin = np.maximum(0.0, 1.0 - target * pred)
        return float(np.mean(margin**2))
    raise ValueError(f"unknown loss {kind!r}; expected one of {LOSSES}")


def loss_backward(kind: str, pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    """d(loss)/d(pred), including the batch-mean normalization."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"prediction shape {pred.shape} != target shape {target.shape}")
    if kind == MSE:
        return 2.0 * (pred - target) / pred.size
    if kind == MAE:
        return np.sign(pred - target) / pred.size
    if kind == CATEGORICAL_CROSSENTROPY:
        rows = pred.shape[0] if pred.ndim > 1 else 1
        p = np.clip(pred, _CCE_CLIP, 1.0)
        return -(target / p) / rows
    if kind == SQUARED_HINGE:
        margin = np.maximum(0.0, 1.0 - target * pred)
        return -2.0 * target * margin / pred.size
    raise ValueError(f"unknown loss {kind!r}; expected one of {LOSSES}")


def categorical_accuracy(pred: np.ndarray, target: np.ndarray) -> float:
    """Fraction of rows whose argmax prediction matches the argmax target."""
    pred = np.atleast_2d(np.asarray(pred))
    target = np.atleast_2d(np.asarray(target))
    return float(np.mean(pred.argmax(axis=-1) == target.argmax(axis=-1)))


# ---------------------------------------------------------------------------
# Graph nodes
# ---------------------------------------------------------------------------


class Node:
    """Base graph node; subclasses bind parents by being called once."""

    def __init__(self, name: str | None = None):
        self.name = name or f"{type(self).__name__.lower()}_{id(self) & 0xFFFF:x}"
        self.inputs: tuple[Node, ...] = ()
        self._wired = False

    @property
    def output_dim(self) -> int | None:
        raise NotImplementedError

    @property
    def trainable(self) -> list[np.ndarray]:
        return []

    def set_trainable(self, values) -> None:
        if values:
            raise ValueError(f"{self.name} has no trainable parameters")

    def _bind(self, parents) -> "Node":
        if self._wired:
            raise ValueError(f"{self.name} is already wired into a graph")
        self.inputs = tuple(parents)
        self._wired = True
        return self

    # Execution hooks used by Network ------------------------------------
    def run(self, values: dict, batch: int) -> np.ndarray:
        raise NotImplementedError

    def grads(self, values: dict, upstream: np.ndarray):
        """Return (per-input upstream gradients or None, per-parameter gradients)."""
        raise NotImplementedError


class Input(Node):
    """Numeric placeholder of shape [batch, dim], fed at call time."""

    def __init__(self, dim: int, name: str | None = None):
        super().__init__(name)
        if dim < 1:
            raise ValueError("Input dim must be >= 1")
        self.dim = int(dim)

    @property
    def output_dim(self) -> int:
        return self.dim

    def run(self, values, batch):  # value injected by Network before execution
        raise AssertionError("Input nodes are fed, not executed")

    def grads(self, values, upstream):
        return (), []


class CircuitInput(Node):
    """Placeholder for a batch of concrete data circuits."""

    @property
    def output_dim(self) -> None:
        return None

    def run(self, values, batch):
        raise AssertionError("CircuitInput nodes are fed, not executed")

    def grads(self, values, upstream):
        return (), []


class Dense(Node):
    """Affine layer with an elementwise (or softmax) activation.

    Weights are Glorot-uniform, bias zero, both seeded; shapes are fixed when
    the layer is called on its parent (the parent's output width becomes the
    fan-in).
    """

    def __init__(self, units: int, activation: str = "linear", *, seed: int = 0, name: str | None = None):
        super().__init__(name)
        if units < 1:
            raise ValueError("units must be >= 1")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}; expected one of {ACTIVATIONS}")
        self.units = int(units)
        self.activation = activation
        self.seed = int(seed)
        self.weights: np.ndarray | None = None
        self.bias: np.ndarray | None = None

    def __call__(self, parent: Node) -> "Dense":
        self._bind([parent])
        fan_in = parent.output_dim
        if fan_in is None:
            raise ValueError(f"{self.name}: parent {parent.name} has no numeric output")
        limit = np.sqrt(6.0 / (fan_in + self.units))
        rng = substream(self.seed, 0)
        self.weights = rng.uniform(-limit, limit, size=(fan_in, self.units))
        self.bias = np.zeros(self.units, dtype=np.float64)
        return self

    @property
    def output_dim(self) -> int:
        return self.units

    @property
    def trainable(self) -> list[np.ndarray]:
        return [self.weights, self.bias]

    def set_trainable(self, values) -> None:
        w, b = values
        if w.shape != self.weights.shape or b.shape != self.bias.shape:
            raise ValueError(f"{self.name}: parameter shape mismatch")
        self.weights, self.bias = w, b

    def run(self, values, batch):
        return dense_forward(self, values[self.inputs[0]])

    def grads(self, values, upstream):
        dx, dw, db = dense_backward(self, values[self.inputs[0]], upstream)
        return (dx,), [dw, db]


def dense_forward(layer: Dense, x: np.ndarray) -> np.ndarray:
    """Affine map plus activation: activation(x @ W + b)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != layer.weights.shape[0]:
        raise ValueError(
            f"{layer.name}: input shape {x.shape} incompatible with weights {layer.weights.shape}"
        )
    return _activate(layer.activation, x @ layer.weights + layer.bias)


def dense_backward(layer: Dense, x: np.ndarray, upstream: np.ndarray):
    """Gradients of a dense layer: (d_input, d_weights, d_bias)."""
    x = np.asarray(x, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    y = dense_forward(layer, x)
    if upstream.shape != y.shape:
        raise ValueError(f"{layer.name}: upstream shape {upstream.shape} != output shape {y.shape}")
    dz = _activation_backward(layer.activation, y, upstream)
    return dz @ layer.weights.T, x.T @ dz, dz.sum(axis=0)


class Concat(Node):
    """Concatenate numeric parents along the feature axis."""

    def __call__(self, *parents: Node) -> "Concat":
        if len(parents) < 1:
            raise ValueError("Concat needs at least one parent")
        self._bind(parents)
        if any(p.output_dim is None for p in parents):
            raise ValueError(f"{self.name}: all parents must produce numeric outputs")
        return self

    @property
    def output_dim(self) -> int:
        return sum(p.output_dim for p in self.inputs)

    def run(self, values, batch):
        return np.concatenate([values[p] for p in self.inputs], axis=1)

    def grads(self, values, upstream):
        splits = np.cumsum([p.output_dim for p in self.inputs])[:-1]
        return tuple(np.split(upstream, splits, axis=1)), []


class _QuantumNode(Node):
    """Shared machinery of PQC and ControlledPQC."""

    def __init__(
        self,
        model_circuit: Circuit,
        observables,
        *,
        differentiator=None,
        estimator=Exact(),
        name: str | None = None,
    ):
        super().__init__(name)
        observables = [as_pauli_sum(o) for o in observables]
        if not observables:
            raise ValueError(f"{self.name}: observables must be non-empty")
        self.model_circuit = model_circuit
        self.observables = observables
        self.differentiator = differentiator if differentiator is not None else ParameterShift()
        self.estimator = estimator
        self.data_circuits: list[Circuit] = [Circuit(model_circuit.num_qubits, ())]
        self._state_cache: dict[int, tuple[Circuit, np.ndarray]] = {}
        self._calls = 0

    @property
    def symbols(self) -> list[str]:
        return self.model_circuit.symbols

    @property
    def output_dim(self) -> int:
        return len(self.observables)

    def _next_call(self) -> int:
        self._calls += 1
        return self._calls - 1

    def _padded(self, data: Circuit) -> Circuit:
        n = self.model_circuit.num_qubits
        if not data.is_concrete:
            raise ValueError(f"{self.name}: data circuits must be concrete")
        if data.num_qubits > n:
            raise ValueError(
                f"{self.name}: data circuit spans {data.num_qubits} qubits but the "
                f"model circuit has only {n}"
            )
        return Circuit(n, data.gates)

    def _data_batch(self, rows: int) -> list[Circuit]:
        data = list(self.data_circuits)
        if len(data) == rows:
            return data
        if len(data) == 1:
            return data * rows
        raise ValueError(
            f"{self.name}: {len(data)} data circuits cannot serve a batch of {rows} parameter rows"
        )

    def _initial_amps(self, data: list[Circuit]) -> np.ndarray:
        """Stacked post-data-circuit states [batch, 2^n], cached per circuit object."""
        rows = []
        for c in data:
            hit = self._state_cache.get(id(c))
            if hit is None or hit[0] is not c:
                amps = simulate(self._padded(c)).amplitudes
                self._state_cache[id(c)] = (c, amps)
            else:
                amps = hit[1]
            rows.append(amps)
        return np.stack(rows)

    def _combined(self, data: Circuit) -> Circuit:
        padded = self._padded(data)
        return Circuit(padded.num_qubits, padded.gates + self.model_circuit.gates)

    def _batched_expectations(self, data: list[Circuit], bindings: dict) -> np.ndarray:
        """Exact [batch, observables] expectations with one shared parameter row."""
        n = self.model_circuit.num_qubits
        amps = self._initial_amps(data)
        ops = _resolved_ops(resolve(self.model_circuit, bindings))
        amps = run_ops(amps, ops, n, fuse_enabled=True)
        out = np.zeros((len(data), len(self.observables)), dtype=np.float64)
        for k, obs in enumerate(self.observables):
            for term in obs:
                if term.is_identity:
                    out[:, k] += term.coefficient
                else:
                    out[:, k] += term.coefficient * pauli_term_values(amps, term, n)
        return out


def _check_param_batch(node: _QuantumNode, param_batch) -> np.ndarray:
    pb = np.atleast_2d(np.asarray(param_batch, dtype=np.float64))
    want = len(node.symbols)
    if pb.ndim != 2 or pb.shape[1] != want:
        raise ValueError(
            f"{node.name}: symbol mismatch — parameter rows have width "
            f"{pb.shape[-1]} but the model circuit has {want} symbols"
        )
    return pb


def quantum_forward(node: _QuantumNode, param_batch) -> np.ndarray:
    """Expectation matrix [batch, observables]; row b runs data circuit b,
    then the model circuit bound to parameter row b."""
    pb = _check_param_batch(node, param_batch)
    rows = pb.shape[0]
    data = node._data_batch(rows)
    call_id = node._next_call()

    exact = isinstance(node.estimator, Exact)
    shared = rows > 1 and bool(np.all(pb == pb[0]))
    if exact and shared:
        return node._batched_expectations(data, dict(zip(node.symbols, pb[0])))

    out = np.zeros((rows, len(node.observables)), dtype=np.float64)
    for b in range(rows):
        bindings = dict(zip(node.symbols, pb[b]))
        if exact:
            state = simulate(resolve(node._combined(data[b]), bindings))
            for k, obs in enumerate(node.observables):
                out[b, k] = expectation(state, obs)
        else:
            circ = resolve(node._combined(data[b]), bindings)
            for k, obs in enumerate(node.observables):
                seed = derive_seed(node.estimator.seed, call_id, b, k)
                out[b, k] = sampled_expectation(circ, obs, node.estimator.shots, seed)
    return out


def quantum_backward(node: _QuantumNode, param_batch, upstream) -> np.ndarray:
    """Per-row gradient of <sum_k upstream[b,k] * obs_k> w.r.t. the parameter row.

    The upstream gradient is folded into a single weighted observable per row,
    so the cost matches one scalar-gradient call per row regardless of how many
    observables the node has.
    """
    pb = _check_param_batch(node, param_batch)
    rows, width = pb.shape
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != (rows, len(node.observables)):
        raise ValueError(
            f"{node.name}: upstream shape {upstream.shape} != "
            f"({rows}, {len(node.observables)})"
        )
    if width == 0:
        return np.zeros((rows, 0), dtype=np.float64)
    data = node._data_batch(rows)
    call_id = node._next_call()

    exact = isinstance(node.estimator, Exact)
    shared = rows > 1 and bool(np.all(pb == pb[0]))
    diff = node.differentiator
    if exact and shared and isinstance(diff, FiniteDifference):
        return _fd_backward_batched(node, data, pb[0], upstream, diff)

    out = np.zeros((rows, width), dtype=np.float64)
    for b in range(rows):
        weights = upstream[b]
        if not weights.any():
            continue
        weighted = PauliSum([])
        for k, obs in enumerate(node.observables):
            if weights[k] != 0.0:
                weighted = weighted + obs * float(weights[k])
        estimator = node.estimator
        if not exact:
            estimator = Sampled(estimator.shots, derive_seed(estimator.seed, call_id, b))
        request = GradRequest(
            node._combined(data[b]), weighted, dict(zip(node.symbols, pb[b])), estimator
        )
        out[b] = diff(request).gradient
    return out


def _fd_backward_batched(
    node: _QuantumNode,
    data: list[Circuit],
    theta: np.ndarray,
    upstream: np.ndarray,
    diff: FiniteDifference,
) -> np.ndarray:
    """Finite differences with one batched simulation per shifted parameter row.

    Valid because the finite-difference stencil is linear: differencing each
    observable and contracting with the upstream weights equals differencing
    the weighted observable itself.
    """
    symbols = node.symbols
    width = len(symbols)
    out = np.zeros((len(data), width), dtype=np.float64)

    def batch_eval(vec: np.ndarray) -> np.ndarray:
        return node._batched_expectations(data, dict(zip(symbols, vec)))

    if diff.scheme == CENTRAL:
        for j in range(width):
            shift = np.zeros(width)
            shift[j] = diff.epsilon
            deriv = (batch_eval(theta + shift) - batch_eval(theta - shift)) / (2.0 * diff.epsilon)
            out[:, j] = np.einsum("bn,bn->b", deriv, upstream)
    else:
        base = batch_eval(theta)
        for j in range(width):
            shift = np.zeros(width)
            shift[j] = diff.epsilon
            deriv = (batch_eval(theta + shift) - base) / diff.epsilon
            out[:, j] = np.einsum("bn,bn->b", deriv, upstream)
    return out


class PQC(_QuantumNode):
    """Quantum node that owns its trainable circuit parameters.

    Parameters initialize uniformly on [0, 2*pi), seeded. The optional parent
    is a CircuitInput feeding per-example state-preparation circuits.
    """

    def __init__(self, model_circuit, observables, *, differentiator=None,
                 estimator=Exact(), seed: int = 0, name: str | None = None):
        super().__init__(model_circuit, observables, differentiator=differentiator,
                         estimator=estimator, name=name)
        self.seed = int(seed)
        count = len(self.symbols)
        self.params = substream(self.seed, 0).uniform(0.0, 2.0 * np.pi, size=count)

    def __call__(self, data: CircuitInput | None = None) -> "PQC":
        if data is None:
            self._bind([])
        else:
            if not isinstance(data, CircuitInput):
                raise TypeError(f"{self.name}: PQC takes a CircuitInput parent, got {type(data).__name__}")
            self._bind([data])
        return self

    @property
    def trainable(self) -> list[np.ndarray]:
        return [self.params]

    def set_trainable(self, values) -> None:
        (p,) = values
        if p.shape != self.params.shape:
            raise ValueError(f"{self.name}: parameter shape mismatch")
        self.params = p

    def run(self, values, batch):
        if self.inputs:
            self.data_circuits = list(values[self.inputs[0]])
            batch = len(self.data_circuits)
        rows = np.broadcast_to(self.params, (batch, self.params.size))
        return quantum_forward(self, rows)

    def grads(self, values, upstream):
        batch = upstream.shape[0]
        rows = np.broadcast_to(self.params, (batch, self.params.size))
        per_row = quantum_backward(self, rows, upstream)
        input_grads = (None,) if self.inputs else ()
        return input_grads, [per_row.sum(axis=0)]


class ControlledPQC(_QuantumNode):
    """Quantum node whose parameters arrive as an input edge [batch, symbols]."""

    def __call__(self, params: Node, data: CircuitInput | None = None) -> "ControlledPQC":
        if params.output_dim != len(self.symbols):
            raise ValueError(
                f"{self.name}: symbol mismatch — controller provides {params.output_dim} "
                f"values but the model circuit has {len(self.symbols)} symbols"
            )
        self._bind([params] if data is None else [params, data])
        return self

    def run(self, values, batch):
        if len(self.inputs) == 2:
            self.data_circuits = list(values[self.inputs[1]])
        return quantum_forward(self, values[self.inputs[0]])

    def grads(self, values, upstream):
        dparams = quantum_backward(self, values[self.inputs[0]], upstream)
        if len(self.inputs) == 2:
            return (dparams, None), []
        return (dparams,), []


# ---------------------------------------------------------------------------
# Network: topological execution and reverse-mode sweep
# ---------------------------------------------------------------------------


class Network:
    """A wired DAG with one numeric output node."""

    def __init__(self, inputs, output: Node):
        self.inputs = list(inputs)
        self.output = output
        self._order = self._toposort(output)
        fed = set(map(id, self.inputs))
        for node in self._order:
            if isinstance(node, (Input, CircuitInput)) and id(node) not in fed:
                raise ValueError(f"graph reaches unfed input {node.name}")

    @staticmethod
    def _toposort(output: Node) -> list[Node]:
        order: list[Node] = []
        seen: set[int] = set()

        def visit(node: Node, stack: tuple[int, ...]):
            if id(node) in stack:
                raise ValueError("graph contains a cycle")
            if id(node) in seen:
                return
            for parent in node.inputs:
                visit(parent, stack + (id(node),))
            seen.add(id(node))
            order.append(node)

        visit(output, ())
        return order

    # -- feeding ---------------------------------------------------------
    def _normalize_feeds(self, x) -> dict[int, object]:
        if not self.inputs:
            if x:
                raise ValueError("this graph takes no inputs")
            return {}
        if isinstance(x, dict):
            items = list(x.items())
        elif len(self.inputs) == 1:
            items = [(self.inputs[0], x)]
        else:
            if x is None or len(x) != len(self.inputs):
                raise ValueError(f"expected {len(self.inputs)} input feeds")
            items = list(zip(self.inputs, x))
        feeds: dict[int, object] = {}
        for node, value in items:
            if isinstance(node, Input):
                arr = np.atleast_2d(np.asarray(value, dtype=np.float64))
                if arr.shape[1] != node.dim:
                    raise ValueError(f"{node.name}: feed width {arr.shape[1]} != {node.dim}")
                feeds[id(node)] = arr
            elif isinstance(node, CircuitInput):
                feeds[id(node)] = list(value)
            else:
                raise TypeError(f"{node.name} is not an input node")
        return feeds

    @staticmethod
    def _batch_size(feeds: dict[int, object]) -> int:
        sizes = {len(v) for v in feeds.values()}
        if not sizes:
            return 1
        if len(sizes) != 1:
            raise ValueError(f"inconsistent batch sizes across inputs: {sorted(sizes)}")
        return sizes.pop()

    # -- execution ---------------------------------------------------------
    def forward_all(self, x) -> dict[Node, np.ndarray]:
        feeds = self._normalize_feeds(x)
        batch = self._batch_size(feeds)
        values: dict[Node, object] = {}
        for node in self._order:
            if isinstance(node, (Input, CircuitInput)):
                values[node] = feeds[id(node)]
            else:
                values[node] = node.run(values, batch)
        return values

    def forward(self, x) -> np.ndarray:
        return self.forward_all(x)[self.output]

    predict = forward

    # -- parameters --------------------------------------------------------
    def parameters(self) -> list[np.ndarray]:
        return [p for node in self._order for p in node.trainable]

    def set_parameters(self, params) -> None:
        cursor = 0
        for node in self._order:
            count = len(node.trainable)
            if count:
                node.set_trainable(params[cursor : cursor + count])
                cursor += count
        if cursor != len(params):
            raise ValueError(f"expected {cursor} parameter tensors, got {len(params)}")

    # -- reverse sweep -------------------------------------------------------
    def loss_and_grads(self, x, y, loss: str = MSE):
        """Scalar loss, parameter gradients (aligned with parameters()), predictions."""
        values = self.forward_all(x)
        pred = values[self.output]
        y = np.asarray(y, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None]
        loss_value = loss_forward(loss, pred, y)
        upstreams: dict[int, np.ndarray] = {id(self.output): loss_backward(loss, pred, y)}
        param_grads: dict[int, list] = {}
        for node in reversed(self._order):
            upstream = upstreams.pop(id(node), None)
            if isinstance(node, (Input, CircuitInput)):
                continue
            if upstream is None:
                param_grads[id(node)] = [np.zeros_like(p) for p in node.trainable]
                continue
            input_grads, pgrads = node.grads(values, upstream)
            param_grads[id(node)] = list(pgrads)
            for parent, grad in zip(node.inputs, input_grads):
                if grad is None:
                    continue
                if id(parent) in upstreams:
                    upstreams[id(parent)] = upstreams[id(parent)] + grad
                else:
                    upstreams[id(parent)] = grad
        grads = [g for node in self._order for g in param_grads.get(id(node), [])]
        return loss_value, grads, pred


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    """Adam optimizer accumulator; moments allocate lazily on the first step."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(state: AdamState, params, grads):
    """One bias-corrected Adam update; returns (new_params, state).

    The state is mutated in place (moments and step count); parameter arrays
    are replaced, never modified.
    """
    params = list(params)
    grads = [np.asarray(g, dtype=np.float64) for g in grads]
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} parameter tensors but {len(grads)} gradients")
    for p, g in zip(params, grads):
        if np.asarray(p).shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {np.asarray(p).shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("non-finite gradient passed to adam_step")
    if not state.m:
        state.m = [np.zeros_like(np.asarray(p, dtype=np.float64)) for p in params]
        state.v = [np.zeros_like(np.asarray(p, dtype=np.float64)) for p in params]
    state.t += 1
    correct1 = 1.0 - state.beta1**state.t
    correct2 = 1.0 - state.beta2**state.t
    updated = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g**2
        m_hat = state.m[i] / correct1
        v_hat = state.v[i] / correct2
        updated.append(np.asarray(p, dtype=np.float64) - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return updated, state


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------


def _slice_feed(value, idx):
    if isinstance(value, np.ndarray):
        return value[idx]
    return [value[i] for i in idx]


def fit(model: Network, x, y, loss: str, opt: AdamState, epochs: int,
        batch_size: int = 32, seed: int = 0, metric=None) -> dict:
    """Minibatch training with seeded shuffling.

    Returns {"loss": [...]} with one entry per epoch (batch-size-weighted mean),
    plus a "metric" series when a metric callable is given. Zero epochs return
    empty series and leave parameters untouched.
    """
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    feeds = model._normalize_feeds(x)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    count = len(y)
    for value in feeds.values():
        if len(value) != count:
            raise ValueError(f"input feed length {len(value)} != label count {count}")
    by_node = {id(node): feeds[id(node)] for node in model.inputs}
    history: dict[str, list[float]] = {"loss": []}
    if metric is not None:
        history["metric"] = []
    for epoch in range(epochs):
        perm = substream(seed, epoch).permutation(count)
        loss_total = 0.0
        metric_total = 0.0
        for start in range(0, count, batch_size):
            idx = perm[start : start + batch_size]
            xb = {node: _slice_feed(by_node[id(node)], idx) for node in model.inputs}
            yb = y[idx]
            loss_value, grads, pred = model.loss_and_grads(xb, yb, loss)
            params, _ = adam_step(opt, model.parameters(), grads)
            model.set_parameters(params)
            loss_total += loss_value * len(idx)
            if metric is not None:
                metric_total += float(metric(pred, yb)) * len(idx)
        history["loss"].append(loss_total / count)
        if metric is not None:
            history["metric"].append(metric_total / count)
    return history


def write_history_csv(history: dict, fp) -> None:
    """Emit training history as CSV rows of (epoch, loss, metric)."""
    import csv

    writer = csv.writer(fp)
    writer.writerow(["epoch", "loss", "metric"])
    metrics = history.get("metric")
    for epoch, loss_value in enumerate(history["loss"]):
        metric_value = "" if metrics is None else f"{metrics[epoch]:.10g}"
        writer.writerow([epoch, f"{loss_value:.10g}", metric_value])
