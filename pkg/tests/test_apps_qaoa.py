"""MaxCut QAOA: problem encoding, cost operator semantics, and the driver."""

import itertools

import numpy as np
import pytest

import dense_reference as ref
from qcflow.apps import (
    MaxCutProblem,
    as_maxcut_problem,
    brute_force_maxcut,
    build_maxcut_qaoa,
    cut_cost,
    maxcut_cost_operator,
    mixer_operator,
    run_qaoa,
)
from qcflow.circuit import resolve
from qcflow.sim import expectation, simulate

TRIANGLE = [(0, 1), (1, 2), (0, 2)]


def _uncut_edges(edges, bits) -> int:
    """Independent count of edges whose endpoints fall on the same side."""
    return sum(1 for u, v in edges if bits[u] == bits[v])


def test_problem_validation():
    with pytest.raises(ValueError):
        MaxCutProblem(2, ((0, 0),))  # self loop
    with pytest.raises(ValueError):
        MaxCutProblem(2, ((0, 1), (1, 0)))  # duplicate after canonicalization
    with pytest.raises(ValueError):
        MaxCutProblem(2, ((0, 2),))  # endpoint out of range
    with pytest.raises(ValueError):
        MaxCutProblem(2, ())  # no edges
    with pytest.raises(ValueError):
        MaxCutProblem(1, ((0, 1),))
    with pytest.raises(ValueError):
        MaxCutProblem(3, ((0, 1),), p=0)


def test_as_maxcut_problem_accepts_edge_lists_and_graphs():
    networkx = pytest.importorskip("networkx")
    from_edges = as_maxcut_problem(TRIANGLE, p=2)
    assert from_edges.nodes == 3
    assert from_edges.p == 2
    assert from_edges.edges == ((0, 1), (1, 2), (0, 2))

    g = networkx.random_regular_graph(d=3, n=6, seed=1)
    from_graph = as_maxcut_problem(g)
    assert from_graph.nodes == 6
    assert len(from_graph.edges) == 9


def test_angle_symbols_per_block():
    problem = as_maxcut_problem(TRIANGLE, p=3)
    assert list(problem.gamma_symbols) == ["gamma_0", "gamma_1", "gamma_2"]
    assert list(problem.eta_symbols) == ["eta_0", "eta_1", "eta_2"]


def test_single_edge_cost_operator_counts_uncut_edges():
    problem = as_maxcut_problem([(0, 1)])
    dense = ref.pauli_sum_matrix(maxcut_cost_operator(problem), 2)
    # |00> and |11> leave the edge uncut (eigenvalue 1); |01>, |10> cut it
    np.testing.assert_allclose(dense, np.diag([1.0, 0.0, 0.0, 1.0]), atol=1e-12)


def test_cost_operator_diagonal_matches_classical_cost():
    rng = np.random.default_rng(3)
    nodes = 5
    edges = [(u, v) for u in range(nodes) for v in range(u + 1, nodes) if rng.random() < 0.5]
    problem = as_maxcut_problem(edges)
    dense = ref.pauli_sum_matrix(maxcut_cost_operator(problem), nodes)
    np.testing.assert_allclose(dense, np.diag(np.diag(dense)), atol=1e-12)
    for index in range(2**nodes):
        bits = [(index >> q) & 1 for q in range(nodes)]
        assert dense[index, index].real == pytest.approx(cut_cost(problem, bits))
        assert cut_cost(problem, bits) == _uncut_edges(edges, bits)


def test_mixer_is_transverse_field():
    problem = as_maxcut_problem(TRIANGLE)
    dense = ref.pauli_sum_matrix(mixer_operator(problem), 3)
    expected = sum(ref.pauli_string_matrix({q: "X"}, 3) for q in range(3))
    np.testing.assert_allclose(dense, expected, atol=1e-12)


def test_build_circuit_structure():
    circuit, cost = build_maxcut_qaoa(TRIANGLE, p=2)
    assert circuit.num_qubits == 3
    assert circuit.symbols == ["gamma_0", "eta_0", "gamma_1", "eta_1"]
    # 3 Hadamards + per block (3 ZZ exponentials + 3 X exponentials)
    assert len(circuit.gates) == 3 + 2 * (3 + 3)
    assert len(cost.terms) == 4  # identity offset + one ZZ per edge


def test_energy_landscape_matches_dense_reference():
    circuit, cost = build_maxcut_qaoa(TRIANGLE, p=1)
    for gamma in (0.0, 0.4, 1.1):
        for eta in (0.2, 0.9):
            bindings = {"gamma_0": gamma, "eta_0": eta}
            lib = expectation(simulate(resolve(circuit, bindings)), cost)
            orc = ref.dense_expectation(circuit, cost, bindings)
            assert lib == pytest.approx(orc, abs=1e-9)


def test_uniform_superposition_energy_is_half_the_edges():
    # at gamma = eta = 0 the state is |+...+>: every ZZ term averages to zero
    circuit, cost = build_maxcut_qaoa(TRIANGLE, p=1)
    state = simulate(resolve(circuit, {"gamma_0": 0.0, "eta_0": 0.0}))
    assert expectation(state, cost) == pytest.approx(1.5, abs=1e-12)


def test_brute_force_against_exhaustive_search():
    rng = np.random.default_rng(8)
    edges = [(u, v) for u in range(6) for v in range(u + 1, 6) if rng.random() < 0.5]
    problem = as_maxcut_problem(edges)
    best_cut, best_bits = brute_force_maxcut(problem)
    cuts = [
        len(edges) - _uncut_edges(edges, bits)
        for bits in itertools.product((0, 1), repeat=6)
    ]
    assert best_cut == max(cuts)
    assert len(edges) - _uncut_edges(edges, best_bits) == best_cut


def test_run_qaoa_two_node_reaches_exact_optimum():
    result = run_qaoa(as_maxcut_problem([(0, 1)]), steps=60, seed=0)
    assert result.cut_value == 1
    assert len(result.energy_history) == 60
    assert result.final_energy < result.initial_energy
    assert result.final_energy == pytest.approx(0.0, abs=0.05)
    # the sampled best bitstring really does cut the edge
    assert result.bitstring[0] != result.bitstring[1]


def test_sampled_cost_invariant():
    # operator eigenvalue on a sampled bitstring == classical uncut count
    problem = as_maxcut_problem(TRIANGLE, p=1)
    result = run_qaoa(problem, steps=20, seed=5)
    dense = ref.pauli_sum_matrix(maxcut_cost_operator(problem), 3)
    index = int(np.dot(result.bitstring, 1 << np.arange(3)))
    assert dense[index, index].real == pytest.approx(cut_cost(problem, result.bitstring))
