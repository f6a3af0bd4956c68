"""Symbolic circuits: construction, composition, resolution, serialization.

A Gate is either a fixed dense unitary (1 or 2 qubits) or a generator
exponential exp(-i * value(exponent) * generator) where the generator is a
PauliSum supported on the gate's targets. Matrices for a gate with
targets (a, b) are written in the local basis where the bit of qubit ``a`` is
the most significant of the two — e.g. CNOT(control, target) is the familiar
[[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]].

State indices are little-endian throughout the library: qubit q is bit q of
the amplitude index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pauli import (
    PauliString,
    PauliSum,
    all_terms_commute,
    as_pauli_sum,
    pauli_sum_from_obj,
    pauli_sum_to_obj,
)

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class Symbol:
    """A named free parameter."""

    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("symbol name must be non-empty")


def _symbol_name(s) -> str | None:
    if s is None:
        return None
    if isinstance(s, Symbol):
        return s.name
    if isinstance(s, str):
        if not s:
            raise ValueError("symbol name must be non-empty")
        return s
    raise TypeError(f"bad symbol {s!r}")


@dataclass(frozen=True)
class ParamExpr:
    """value = coeff * binding(symbol) + const; a plain constant when symbol is None."""

    symbol: str | None = None
    coeff: float = 1.0
    const: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "symbol", _symbol_name(self.symbol))
        object.__setattr__(self, "coeff", float(self.coeff))
        object.__setattr__(self, "const", float(self.const))
        if not (math.isfinite(self.coeff) and math.isfinite(self.const)):
            raise ValueError("ParamExpr coefficients must be finite")

    @property
    def is_concrete(self) -> bool:
        return self.symbol is None

    def value(self, bindings: Mapping[str, float] | None = None) -> float:
        if self.symbol is None:
            return self.const
        if bindings is None or self.symbol not in bindings:
            raise KeyError(f"missing binding for symbol '{self.symbol}'")
        v = float(bindings[self.symbol])
        if not math.isfinite(v):
            raise ValueError(f"non-finite binding for symbol '{self.symbol}'")
        return self.coeff * v + self.const

    def scaled(self, factor: float) -> "ParamExpr":
        return ParamExpr(self.symbol, self.coeff * factor, self.const * factor)


def as_param_expr(value) -> ParamExpr:
    if isinstance(value, ParamExpr):
        return value
    if isinstance(value, Symbol):
        return ParamExpr(value.name)
    if isinstance(value, str):
        return ParamExpr(value)
    if isinstance(value, (int, float)):
        return ParamExpr(None, 0.0, float(value))
    raise TypeError(f"cannot interpret {value!r} as a parameter expression")


class Gate:
    """A fixed-matrix or generator-exponential gate on 1 or 2 target qubits."""

    __slots__ = ("targets", "name", "matrix", "exponent", "generator")

    def __init__(
        self,
        targets: Sequence[int],
        *,
        name: str | None = None,
        matrix: np.ndarray | None = None,
        exponent: ParamExpr | None = None,
        generator: PauliSum | None = None,
    ):
        targets = tuple(int(q) for q in targets)
        if not 1 <= len(targets) <= 2:
            raise ValueError(f"gates act on 1 or 2 qubits, got targets {targets}")
        if len(set(targets)) != len(targets):
            raise ValueError(f"duplicate targets {targets}")
        if any(q < 0 for q in targets):
            raise ValueError(f"negative qubit index in {targets}")

        if matrix is not None:
            if exponent is not None or generator is not None:
                raise ValueError("a gate is either FixedMatrix or GeneratorExp, not both")
            matrix = np.asarray(matrix, dtype=np.complex128)
            dim = 2 ** len(targets)
            if matrix.shape != (dim, dim):
                raise ValueError(f"matrix shape {matrix.shape} does not match targets {targets}")
            err = np.max(np.abs(matrix.conj().T @ matrix - np.eye(dim)))
            if err > UNITARY_TOL:
                raise ValueError(f"matrix is not unitary (max deviation {err:.2e})")
            matrix = matrix.copy()
            matrix.setflags(write=False)
        else:
            if exponent is None or generator is None:
                raise ValueError("GeneratorExp gate needs both exponent and generator")
            generator = as_pauli_sum(generator)
            outside = set(generator.support) - set(targets)
            if outside:
                raise ValueError(f"generator acts on {sorted(outside)} outside targets {targets}")

        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "exponent", exponent)
        object.__setattr__(self, "generator", generator)

    def __setattr__(self, key, value):
        raise AttributeError("Gate is immutable")

    @property
    def is_fixed(self) -> bool:
        return self.matrix is not None

    @property
    def symbol(self) -> str | None:
        if self.exponent is not None:
            return self.exponent.symbol
        return None

    @property
    def is_concrete(self) -> bool:
        return self.symbol is None

    def resolved(self, bindings: Mapping[str, float] | None) -> "Gate":
        """Same gate with its exponent evaluated to a constant."""
        if self.is_fixed or self.exponent.is_concrete:
            return self
        v = self.exponent.value(bindings)
        return Gate(
            self.targets,
            name=self.name,
            exponent=ParamExpr(None, 0.0, v),
            generator=self.generator,
        )

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if (self.targets, self.name, self.exponent) != (other.targets, other.name, other.exponent):
            return False
        if (self.matrix is None) != (other.matrix is None):
            return False
        if self.matrix is not None and not np.array_equal(self.matrix, other.matrix):
            return False
        if (self.generator is None) != (other.generator is None):
            return False
        if self.generator is not None and self.generator != other.generator:
            return False
        return True

    def __repr__(self):
        label = self.name or ("fixed" if self.is_fixed else "exp")
        return f"Gate({label}, targets={self.targets})"


class Circuit:
    """An ordered sequence of gates over a linear register of qubits."""

    __slots__ = ("num_qubits", "gates")

    def __init__(self, num_qubits: int, gates: Iterable[Gate] = ()):
        num_qubits = int(num_qubits)
        if num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        gates = tuple(gates)
        for g in gates:
            if max(g.targets) >= num_qubits:
                raise ValueError(f"gate targets {g.targets} exceed register size {num_qubits}")
        object.__setattr__(self, "num_qubits", num_qubits)
        object.__setattr__(self, "gates", gates)

    def __setattr__(self, key, value):
        raise AttributeError("Circuit is immutable")

    @property
    def symbols(self) -> list[str]:
        """Free symbols in first-appearance (gate-order) order."""
        seen: list[str] = []
        for g in self.gates:
            s = g.symbol
            if s is not None and s not in seen:
                seen.append(s)
        return seen

    @property
    def is_concrete(self) -> bool:
        return all(g.is_concrete for g in self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        return compose(self, other)

    def __len__(self):
        return len(self.gates)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return self.num_qubits == other.num_qubits and self.gates == other.gates

    def __repr__(self):
        return f"Circuit(num_qubits={self.num_qubits}, gates={len(self.gates)})"


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Concatenate two circuits over the same register; shared symbols stay shared."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"qubit-count mismatch: {a.num_qubits} vs {b.num_qubits}")
    return Circuit(a.num_qubits, a.gates + b.gates)


def resolve(c: Circuit, bindings: Mapping[str, float] | None = None) -> Circuit:
    """Evaluate every parameter expression; result is a concrete circuit.

    ``bindings`` must cover every free symbol. Resolving an already-concrete
    circuit with no bindings is the identity.
    """
    bindings = _normalize_bindings(bindings)
    missing = [s for s in c.symbols if s not in bindings]
    if missing:
        raise KeyError(f"missing binding for symbol(s): {', '.join(missing)}")
    return Circuit(c.num_qubits, (g.resolved(bindings) for g in c.gates))


def _normalize_bindings(bindings) -> dict[str, float]:
    if bindings is None:
        return {}
    out = {}
    for k, v in bindings.items():
        name = k.name if isinstance(k, Symbol) else k
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f"non-finite binding for symbol '{name}'")
        out[name] = v
    return out


def gate_matrix(g: Gate, bindings: Mapping[str, float] | None = None) -> np.ndarray:
    """Dense unitary of a gate under ``bindings`` (local basis: targets[0] = MSB)."""
    if g.is_fixed:
        return g.matrix
    bindings = _normalize_bindings(bindings)
    v = g.exponent.value(bindings)
    dim = 2 ** len(g.targets)

    phase = 1.0 + 0.0j
    plain: list[PauliString] = []
    for term in g.generator:
        if term.is_identity:
            phase *= np.exp(-1j * v * term.coefficient)
        else:
            plain.append(term)

    if not plain:
        return phase * np.eye(dim, dtype=np.complex128)
    if len(plain) == 1:
        # exp(-i*eta*P) = cos(eta) I - i sin(eta) P for a single Pauli term
        term = plain[0]
        eta = v * term.coefficient
        p = term.with_coefficient(1.0).matrix(g.targets)
        return phase * (math.cos(eta) * np.eye(dim) - 1j * math.sin(eta) * p)
    h = np.zeros((dim, dim), dtype=np.complex128)
    for term in plain:
        h += term.matrix(g.targets)
    evals, evecs = np.linalg.eigh(h)
    return phase * ((evecs * np.exp(-1j * v * evals)) @ evecs.conj().T)


def exponential_circuit(
    operators: Sequence[PauliSum],
    coefficients: Sequence,
    num_qubits: int | None = None,
) -> Circuit:
    """One gate exp(-i * coeff * term) per Pauli term, per operator, in order.

    Each operator's terms must mutually commute; otherwise the factorization is
    not exact and the call errors instead of silently approximating. Identity
    terms contribute only a global phase and are dropped.
    """
    operators = [as_pauli_sum(op) for op in operators]
    if len(operators) != len(coefficients):
        raise ValueError("operators and coefficients must have equal length")
    gates: list[Gate] = []
    max_q = -1
    for idx, (op, coeff) in enumerate(zip(operators, coefficients)):
        if not all_terms_commute(op):
            raise ValueError(
                f"operator {idx} has non-commuting terms; exponential would need a "
                "Trotter decomposition — issue repeated exponential_circuit calls instead"
            )
        expr = as_param_expr(coeff)
        for term in op:
            if term.is_identity:
                continue
            targets = term.support
            if len(targets) > 2:
                raise ValueError(f"term {term!r} acts on more than 2 qubits")
            gates.append(
                Gate(
                    targets,
                    exponent=expr.scaled(term.coefficient),
                    generator=PauliSum([term.with_coefficient(1.0)]),
                )
            )
            max_q = max(max_q, *targets)
    if num_qubits is None:
        num_qubits = max_q + 1 if max_q >= 0 else 1
    return Circuit(num_qubits, gates)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def _matrix_to_pairs(m: np.ndarray) -> list[list[float]]:
    flat = m.reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _matrix_from_pairs(pairs) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)
    dim = int(round(math.sqrt(flat.size)))
    if dim * dim != flat.size or dim not in (2, 4):
        raise ValueError(f"matrix must be 2x2 or 4x4, got {flat.size} entries")
    return flat.reshape(dim, dim)


def _expr_to_obj(e: ParamExpr | None):
    if e is None:
        return None
    return {"symbol": e.symbol, "coeff": e.coeff, "const": e.const}


def _expr_from_obj(obj) -> ParamExpr:
    if not isinstance(obj, dict):
        raise ValueError("exponent must be an object")
    return ParamExpr(obj.get("symbol"), float(obj.get("coeff", 1.0)), float(obj.get("const", 0.0)))


def to_json(c: Circuit) -> str:
    """Serialize a circuit to the JSON schema used across the CLI."""
    gates = []
    for g in c.gates:
        gates.append(
            {
                "name": g.name,
                "targets": list(g.targets),
                "exponent": _expr_to_obj(g.exponent),
                "matrix": _matrix_to_pairs(g.matrix) if g.matrix is not None else None,
                "generator": pauli_sum_to_obj(g.generator) if g.generator is not None else None,
            }
        )
    return json.dumps({"num_qubits": c.num_qubits, "gates": gates}, indent=2)


def from_json(text: str) -> Circuit:
    """Parse a circuit from JSON, with field-level diagnostics on bad input."""
    from . import gates as gate_lib  # local import to avoid a cycle

    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "num_qubits" not in obj or "gates" not in obj:
        raise ValueError("circuit JSON must be an object with 'num_qubits' and 'gates'")
    try:
        n = int(obj["num_qubits"])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad num_qubits: {obj['num_qubits']!r}") from exc
    raw_gates = obj["gates"]
    if not isinstance(raw_gates, list):
        raise ValueError("'gates' must be a list")

    gates = []
    for i, entry in enumerate(raw_gates):
        where = f"gates[{i}]"
        if not isinstance(entry, dict):
            raise ValueError(f"{where}: expected an object")
        targets = entry.get("targets")
        if not isinstance(targets, list) or not targets:
            raise ValueError(f"{where}: 'targets' must be a non-empty list")
        name = entry.get("name")
        exponent = entry.get("exponent")
        generator = entry.get("generator")
        matrix = entry.get("matrix")
        try:
            if generator is not None:
                g = Gate(
                    targets,
                    name=name,
                    exponent=_expr_from_obj(exponent) if exponent is not None
                    else ParamExpr(None, 0.0, 0.0),
                    generator=pauli_sum_from_obj(generator),
                )
            elif matrix is not None:
                g = Gate(targets, name=name, matrix=_matrix_from_pairs(matrix))
            elif name is not None:
                g = gate_lib.build_named(name, targets, exponent, where)
            else:
                raise ValueError("gate needs a 'name', 'matrix', or 'generator'")
        except ValueError as exc:
            raise ValueError(f"{where}: {exc}") from exc
        gates.append(g)
    return Circuit(n, gates)
