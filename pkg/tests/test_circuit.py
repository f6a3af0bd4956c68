"""Circuit construction, gate matrices, composition, resolution, and JSON I/O."""

import json
import math

import numpy as np
import pytest
import scipy.linalg

import dense_reference as ref
from circuit_factories import random_concrete_circuit
from qcflow import gates as qg
from qcflow.circuit import (
    Circuit,
    Gate,
    ParamExpr,
    Symbol,
    as_param_expr,
    compose,
    exponential_circuit,
    from_json,
    gate_matrix,
    resolve,
    to_json,
)
from qcflow.pauli import PauliString, PauliSum, identity, pauli_x, pauli_z


# ---------------------------------------------------------------------------
# Parameter expressions
# ---------------------------------------------------------------------------


def test_param_expr_value_and_scaled():
    e = ParamExpr("theta", 2.0, 0.5)
    assert e.value({"theta": 3.0}) == pytest.approx(6.5)
    s = e.scaled(0.5)
    assert (s.symbol, s.coeff, s.const) == ("theta", 1.0, 0.25)
    const = ParamExpr(None, 0.0, 1.25)
    assert const.is_concrete and const.value() == 1.25


def test_param_expr_missing_binding():
    e = ParamExpr("theta")
    with pytest.raises(KeyError, match="theta"):
        e.value({})
    with pytest.raises(KeyError, match="theta"):
        e.value(None)


def test_param_expr_non_finite_binding():
    with pytest.raises(ValueError):
        ParamExpr("t").value({"t": float("nan")})
    with pytest.raises(ValueError):
        ParamExpr(None, 0.0, float("inf"))


def test_as_param_expr_conversions():
    assert as_param_expr(1.5) == ParamExpr(None, 0.0, 1.5)
    assert as_param_expr("a") == ParamExpr("a", 1.0, 0.0)
    assert as_param_expr(Symbol("b")) == ParamExpr("b", 1.0, 0.0)
    e = ParamExpr("c", 2.0)
    assert as_param_expr(e) is e
    with pytest.raises(TypeError):
        as_param_expr([1.0])


def test_symbol_name_validation():
    with pytest.raises(ValueError):
        Symbol("")


# ---------------------------------------------------------------------------
# Gate validation
# ---------------------------------------------------------------------------


def test_gate_target_validation():
    with pytest.raises(ValueError):
        Gate((0, 0), matrix=np.eye(4))
    with pytest.raises(ValueError):
        Gate((0, 1, 2), matrix=np.eye(8))
    with pytest.raises(ValueError):
        Gate((-1,), matrix=np.eye(2))


def test_gate_rejects_non_unitary_matrix():
    bad = np.eye(2) * (1 + 1e-6)
    with pytest.raises(ValueError, match="unitary"):
        Gate((0,), matrix=bad)
    # tiny deviation below the tolerance is accepted
    Gate((0,), matrix=np.eye(2) * (1 + 1e-12))


def test_gate_fixed_xor_generator():
    with pytest.raises(ValueError):
        Gate((0,), matrix=np.eye(2), generator=PauliSum([pauli_x(0)]), exponent=ParamExpr("a"))
    with pytest.raises(ValueError):
        Gate((0,), exponent=ParamExpr("a"))  # generator missing
    with pytest.raises(ValueError, match="outside"):
        Gate((0,), exponent=ParamExpr("a"), generator=PauliSum([pauli_x(1)]))


def test_gate_matrix_is_read_only():
    g = qg.h(0)
    with pytest.raises(ValueError):
        g.matrix[0, 0] = 2.0


# ---------------------------------------------------------------------------
# Named gate matrices (checked against independent literals and scipy expm)
# ---------------------------------------------------------------------------

_SQ2 = 1.0 / math.sqrt(2.0)

_EXPECTED_FIXED = {
    "x": np.array([[0, 1], [1, 0]]),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.diag([1, -1]),
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]]),
    "s": np.diag([1, 1j]),
    "t": np.diag([1, np.exp(1j * math.pi / 4)]),
}


@pytest.mark.parametrize("name", sorted(_EXPECTED_FIXED))
def test_fixed_single_qubit_gates(name):
    g = getattr(qg, name)(0)
    np.testing.assert_allclose(gate_matrix(g), _EXPECTED_FIXED[name], atol=1e-15)


def test_fixed_two_qubit_gates():
    np.testing.assert_array_equal(gate_matrix(qg.cz(0, 1)), np.diag([1, 1, 1, -1]))
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    np.testing.assert_array_equal(gate_matrix(qg.cnot(0, 1)), cnot)
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    np.testing.assert_array_equal(gate_matrix(qg.swap(0, 1)), swap)


@pytest.mark.parametrize("angle", [0.3, -1.2, math.pi, 2.0])
@pytest.mark.parametrize("name,letter", [("rx", "X"), ("ry", "Y"), ("rz", "Z")])
def test_rotation_gates_half_angle(name, letter, angle):
    g = getattr(qg, name)(angle, 0)
    want = scipy.linalg.expm(-1j * (angle / 2.0) * ref.PAULI[letter])
    np.testing.assert_allclose(gate_matrix(g), want, atol=1e-12)


def test_rotation_gate_symbolic_binding():
    g = qg.ry("theta", 0)
    want = scipy.linalg.expm(-1j * 0.35 * ref.PAULI["Y"])
    np.testing.assert_allclose(gate_matrix(g, {"theta": 0.7}), want, atol=1e-12)
    # Symbol-keyed bindings are accepted too.
    np.testing.assert_allclose(gate_matrix(g, {Symbol("theta"): 0.7}), want, atol=1e-12)


@pytest.mark.parametrize("name,letter", [("xpow", "X"), ("ypow", "Y"), ("zpow", "Z")])
@pytest.mark.parametrize("t", [0.0, 1.0, 0.5, -0.5, 1.7])
def test_pow_gates_phase_convention(name, letter, t):
    """P**t = exp(i*pi*t/2) * exp(-i*(pi*t/2)*P); P**1 == P exactly."""
    got = gate_matrix(getattr(qg, name)(t, 0))
    want = np.exp(1j * math.pi * t / 2.0) * scipy.linalg.expm(
        -1j * (math.pi * t / 2.0) * ref.PAULI[letter]
    )
    np.testing.assert_allclose(got, want, atol=1e-12)
    if t == 1.0:
        np.testing.assert_allclose(got, ref.PAULI[letter], atol=1e-15)
    if t == 0.0:
        np.testing.assert_allclose(got, np.eye(2), atol=1e-15)


def test_zpow_gives_s_dagger():
    np.testing.assert_allclose(gate_matrix(qg.zpow(-0.5, 0)), np.diag([1, -1j]), atol=1e-15)


@pytest.mark.parametrize("t", [1.0, 0.5, -0.3, 2.0])
def test_cnot_pow(t):
    g = qg.cnot_pow(t, 0, 1)
    got = gate_matrix(g)
    np.testing.assert_allclose(got, ref.reference_gate_matrix(g), atol=1e-12)
    if t == 1.0:
        np.testing.assert_allclose(got, gate_matrix(qg.cnot(0, 1)), atol=1e-14)


def test_generator_exp_pi_half_x():
    """exp(-i*(pi/2)*X) == -i*X."""
    g = Gate((0,), exponent=ParamExpr(None, 0.0, math.pi / 2), generator=PauliSum([pauli_x(0)]))
    np.testing.assert_allclose(gate_matrix(g), -1j * ref.PAULI["X"], atol=1e-15)


def test_generator_exp_quarter_pi_z():
    """exp(-i*(pi/4)*Z) == diag(e^{-i pi/4}, e^{i pi/4})."""
    g = Gate((0,), exponent=ParamExpr(None, 0.0, math.pi / 4), generator=PauliSum([pauli_z(0)]))
    want = np.diag([np.exp(-1j * math.pi / 4), np.exp(1j * math.pi / 4)])
    np.testing.assert_allclose(gate_matrix(g), want, atol=1e-15)


def test_generator_identity_term_global_phase():
    g = Gate((0,), exponent=ParamExpr(None, 0.0, 0.7), generator=PauliSum([identity(2.0)]))
    np.testing.assert_allclose(gate_matrix(g), np.exp(-1j * 1.4) * np.eye(2), atol=1e-15)


def test_gate_matrix_multi_term_generator():
    gen = PauliSum([pauli_x(0), pauli_z(0)])  # non-commuting terms force the eigh path
    g = Gate((0,), exponent=ParamExpr(None, 0.0, 0.9), generator=gen)
    want = scipy.linalg.expm(-1j * 0.9 * (ref.PAULI["X"] + ref.PAULI["Z"]))
    np.testing.assert_allclose(gate_matrix(g), want, atol=1e-12)


def test_gate_matrix_two_qubit_generator_vs_expm():
    gen = PauliSum(
        [
            PauliString(0.8, {0: "X", 1: "X"}),
            PauliString(-0.3, {0: "Z"}),
            identity(0.25),
        ]
    )
    g = Gate((0, 1), exponent=ParamExpr(None, 0.0, 1.1), generator=gen)
    np.testing.assert_allclose(gate_matrix(g), ref.reference_gate_matrix(g), atol=1e-12)


def test_gate_matrix_vs_taylor_series_oracle():
    rng = np.random.default_rng(7)
    for _ in range(5):
        v = float(rng.uniform(-1.0, 1.0))
        g = Gate(
            (0,),
            exponent=ParamExpr(None, 0.0, v),
            generator=PauliSum([PauliString(float(rng.uniform(-1, 1)), {0: "Y"})]),
        )
        gen = g.generator.terms[0].coefficient * ref.PAULI["Y"]
        np.testing.assert_allclose(
            gate_matrix(g), ref.taylor_expm(-1j * v * gen), atol=1e-9
        )


def test_random_parameterized_gates_are_unitary():
    rng = np.random.default_rng(11)
    for _ in range(50):
        c = random_concrete_circuit(rng, 3, 4)
        for g in c.gates:
            m = gate_matrix(g)
            err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
            assert err <= 1e-10


# ---------------------------------------------------------------------------
# Circuit composition and resolution
# ---------------------------------------------------------------------------


def test_symbols_first_appearance_order():
    c = Circuit(2, [qg.rx("b", 0), qg.h(1), qg.ry("a", 1), qg.rz("b", 0)])
    assert c.symbols == ["b", "a"]
    assert not c.is_concrete


def test_circuit_target_bounds():
    with pytest.raises(ValueError):
        Circuit(1, [qg.cz(0, 1)])


def test_compose_concatenates_and_shares_symbols():
    a = Circuit(2, [qg.rx("t", 0)])
    b = Circuit(2, [qg.ry("t", 1)])
    c = a + b
    assert c.symbols == ["t"]
    assert len(c) == 2
    u = np.eye(4)
    got = ref.circuit_unitary(c, {"t": 0.4})
    want = ref.circuit_unitary(b, {"t": 0.4}) @ ref.circuit_unitary(a, {"t": 0.4}) @ u
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_compose_qubit_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        compose(Circuit(2), Circuit(3))


def test_compose_associative():
    rng = np.random.default_rng(3)
    a = random_concrete_circuit(rng, 3, 5)
    b = random_concrete_circuit(rng, 3, 5)
    c = random_concrete_circuit(rng, 3, 5)
    assert (a + b) + c == a + (b + c)


def test_resolve_missing_symbol():
    c = Circuit(1, [qg.rx("t", 0), qg.ry("u", 0)])
    with pytest.raises(KeyError, match="u"):
        resolve(c, {"t": 1.0})


def test_resolve_concrete_idempotent():
    rng = np.random.default_rng(5)
    c = random_concrete_circuit(rng, 3, 8)
    assert resolve(c) == c
    assert resolve(resolve(c, None)) == c


def test_resolve_substitutes_values():
    c = Circuit(1, [qg.rx(ParamExpr("t", 2.0, 0.1), 0)])
    r = resolve(c, {"t": 0.45})
    assert r.is_concrete
    want = scipy.linalg.expm(-1j * ((2.0 * 0.45 + 0.1) / 2.0) * ref.PAULI["X"])
    np.testing.assert_allclose(gate_matrix(r.gates[0]), want, atol=1e-12)


# ---------------------------------------------------------------------------
# exponential_circuit
# ---------------------------------------------------------------------------


def test_exponential_circuit_per_term_gates():
    op = PauliSum([PauliString(0.5, {0: "Z", 1: "Z"}), identity(1.5)])
    c = exponential_circuit([op], ["gamma"], num_qubits=2)
    assert len(c.gates) == 1  # identity term dropped
    g = c.gates[0]
    assert g.exponent == ParamExpr("gamma", 0.5, 0.0)
    assert g.generator == PauliSum([PauliString(1.0, {0: "Z", 1: "Z"})])


def test_exponential_circuit_operator_order():
    op_a = PauliSum([pauli_z(0), PauliString(1.0, {1: "Z"})])
    op_b = PauliSum([pauli_x(0)])
    c = exponential_circuit([op_a, op_b], ["g", "b"], num_qubits=2)
    assert [g.symbol for g in c.gates] == ["g", "g", "b"]


def test_exponential_circuit_rejects_non_commuting():
    op = PauliSum([pauli_x(0), pauli_z(0)])
    with pytest.raises(ValueError, match="non-commuting"):
        exponential_circuit([op], [0.5])


def test_exponential_circuit_rejects_large_terms():
    op = PauliSum([PauliString(1.0, {0: "Z", 1: "Z", 2: "Z"})])
    with pytest.raises(ValueError, match="more than 2"):
        exponential_circuit([op], [0.5])


def test_exponential_circuit_matches_expm_up_to_identity_phase():
    # Ring-of-3 cost operator: constant + three commuting ZZ terms.
    const = 1.5
    terms = [PauliString(0.5, {j: "Z", k: "Z"}) for j, k in [(0, 1), (1, 2), (0, 2)]]
    op = PauliSum(terms + [identity(const)])
    gamma = 0.8
    c = exponential_circuit([op], [gamma], num_qubits=3)
    got = ref.circuit_unitary(c)
    h = ref.pauli_sum_matrix(op, 3)
    want = scipy.linalg.expm(-1j * gamma * h) * np.exp(1j * gamma * const)
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_exponential_circuit_infers_register_size():
    op = PauliSum([PauliString(1.0, {2: "X"})])
    assert exponential_circuit([op], [0.3]).num_qubits == 3


def test_exponential_circuit_length_mismatch():
    with pytest.raises(ValueError, match="equal length"):
        exponential_circuit([PauliSum([pauli_x(0)])], [0.1, 0.2])


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def _sample_circuit():
    raw_matrix = np.array([[0, 1j], [1j, 0]])
    gen = PauliSum([PauliString(0.7, {0: "X", 1: "X"}), identity(-0.2)])
    return Circuit(
        3,
        [
            qg.h(0),
            qg.cnot(0, 1),
            qg.ry("theta", 1),
            qg.xpow(0.5, 0),
            qg.cnot_pow("beta", 1, 2),
            Gate((2,), matrix=raw_matrix),
            Gate((0, 1), exponent=ParamExpr("theta", 0.3, 0.1), generator=gen),
        ],
    )


def test_json_round_trip():
    c = _sample_circuit()
    assert from_json(to_json(c)) == c


def test_json_named_parameterized_gate_uses_angle_argument():
    text = json.dumps(
        {
            "num_qubits": 1,
            "gates": [{"name": "ry", "targets": [0], "exponent": {"symbol": "theta"}}],
        }
    )
    assert from_json(text).gates[0] == qg.ry("theta", 0)


def test_json_named_fixed_gate():
    text = json.dumps({"num_qubits": 2, "gates": [{"name": "cnot", "targets": [0, 1]}]})
    assert from_json(text).gates[0] == qg.cnot(0, 1)


@pytest.mark.parametrize(
    "payload,fragment",
    [
        ("not json", "invalid JSON"),
        (json.dumps({"gates": []}), "num_qubits"),
        (json.dumps({"num_qubits": 2, "gates": {}}), "list"),
        (
            json.dumps({"num_qubits": 2, "gates": [{"name": "h", "targets": [0]}, {"name": "nope", "targets": [0]}]}),
            "gates[1]",
        ),
        (
            json.dumps({"num_qubits": 1, "gates": [{"name": "h", "targets": []}]}),
            "targets",
        ),
        (
            json.dumps({"num_qubits": 1, "gates": [{"targets": [0]}]}),
            "gates[0]",
        ),
        (
            json.dumps({"num_qubits": 1, "gates": [{"name": "rx", "targets": [0]}]}),
            "exponent",
        ),
        (
            json.dumps({"num_qubits": 2, "gates": [{"name": "cz", "targets": [0]}]}),
            "2 target",
        ),
        (
            json.dumps(
                {"num_qubits": 1, "gates": [{"targets": [0], "matrix": [[1, 0], [0, 1], [1, 0]]}]}
            ),
            "matrix",
        ),
    ],
)
def test_json_errors(payload, fragment):
    with pytest.raises(ValueError) as err:
        from_json(payload)
    assert fragment in str(err.value)


def test_json_unknown_gate_name_is_reported():
    text = json.dumps({"num_qubits": 1, "gates": [{"name": "frobnicate", "targets": [0]}]})
    with pytest.raises(ValueError, match="frobnicate"):
        from_json(text)
