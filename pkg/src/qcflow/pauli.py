"""Pauli strings and real-weighted Pauli sums.

A PauliString is a real coefficient times a tensor product of single-qubit X/Y/Z
factors (identity on every other qubit). A PauliSum is a list of strings merged so
that no two terms share the same factor map. These serve as observables, cost
Hamiltonians, and gate generators.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

_LETTERS = ("X", "Y", "Z")

_MATS = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


class PauliString:
    """coefficient * (product of single-qubit Pauli factors)."""

    __slots__ = ("coefficient", "factors")

    def __init__(self, coefficient: float, factors: Mapping[int, str] | None = None):
        coefficient = float(coefficient)
        if not math.isfinite(coefficient):
            raise ValueError("PauliString coefficient must be finite")
        factors = dict(factors or {})
        for q, letter in factors.items():
            if not isinstance(q, int) or q < 0:
                raise ValueError(f"bad qubit index {q!r}")
            if letter not in _LETTERS:
                raise ValueError(f"bad Pauli letter {letter!r} (want X, Y, or Z)")
        object.__setattr__(self, "coefficient", coefficient)
        object.__setattr__(self, "factors", factors)

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("PauliString is immutable")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.factors))

    @property
    def is_identity(self) -> bool:
        return not self.factors

    def key(self) -> tuple[tuple[int, str], ...]:
        """Canonical factor-map key used for merging."""
        return tuple(sorted(self.factors.items()))

    def with_coefficient(self, c: float) -> "PauliString":
        return PauliString(c, self.factors)

    def matrix(self, targets: tuple[int, ...]) -> np.ndarray:
        """Dense matrix over the ordered qubit tuple ``targets``.

        targets[0] is the most significant local bit. All factor qubits must be
        in ``targets``.
        """
        missing = set(self.factors) - set(targets)
        if missing:
            raise ValueError(f"factors on {sorted(missing)} outside targets {targets}")
        m = np.array([[self.coefficient]], dtype=np.complex128)
        for q in targets:
            m = np.kron(m, _MATS[self.factors.get(q, "I")])
        return m

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return PauliString(self.coefficient * other, self.factors)
        if isinstance(other, PauliString):
            overlap = set(self.factors) & set(other.factors)
            if overlap:
                raise ValueError(
                    f"product of overlapping Pauli strings (qubits {sorted(overlap)}) not supported"
                )
            merged = dict(self.factors)
            merged.update(other.factors)
            return PauliString(self.coefficient * other.coefficient, merged)
        return NotImplemented

    __rmul__ = __mul__

    def __add__(self, other):
        return PauliSum([self]) + other

    def __sub__(self, other):
        return PauliSum([self]) + (-1.0) * other

    def __neg__(self):
        return self * -1.0

    def __eq__(self, other):
        return (
            isinstance(other, PauliString)
            and self.coefficient == other.coefficient
            and self.factors == other.factors
        )

    def __hash__(self):
        return hash((self.coefficient, self.key()))

    def __repr__(self):
        if self.is_identity:
            return f"{self.coefficient:g}*I"
        body = "*".join(f"{l}{q}" for q, l in sorted(self.factors.items()))
        return f"{self.coefficient:g}*{body}"


class PauliSum:
    """Real-weighted sum of Pauli strings, merged on construction."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[PauliString] = ()):
        merged: dict[tuple, float] = {}
        factor_maps: dict[tuple, Mapping[int, str]] = {}
        for t in terms:
            if isinstance(t, PauliSum):
                raise TypeError("pass PauliString terms, not PauliSum")
            k = t.key()
            merged[k] = merged.get(k, 0.0) + t.coefficient
            factor_maps[k] = t.factors
        out = tuple(
            PauliString(c, factor_maps[k]) for k, c in merged.items() if c != 0.0
        )
        object.__setattr__(self, "terms", out)

    def __setattr__(self, name, value):
        raise AttributeError("PauliSum is immutable")

    @property
    def support(self) -> tuple[int, ...]:
        qs: set[int] = set()
        for t in self.terms:
            qs.update(t.factors)
        return tuple(sorted(qs))

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        other = as_pauli_sum(other)
        return PauliSum(self.terms + other.terms)

    def __sub__(self, other):
        return self + (-1.0) * as_pauli_sum(other)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return PauliSum(t * scalar for t in self.terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return sorted(t.key() for t in self.terms) == sorted(t.key() for t in other.terms) and {
            t.key(): t.coefficient for t in self.terms
        } == {t.key(): t.coefficient for t in other.terms}

    def __repr__(self):
        return " + ".join(repr(t) for t in self.terms) or "0"


def as_pauli_sum(obj) -> PauliSum:
    if isinstance(obj, PauliSum):
        return obj
    if isinstance(obj, PauliString):
        return PauliSum([obj])
    if isinstance(obj, (int, float)):
        return PauliSum([PauliString(float(obj))])
    raise TypeError(f"cannot interpret {type(obj).__name__} as PauliSum")


def pauli_x(q: int, coefficient: float = 1.0) -> PauliString:
    return PauliString(coefficient, {q: "X"})


def pauli_y(q: int, coefficient: float = 1.0) -> PauliString:
    return PauliString(coefficient, {q: "Y"})


def pauli_z(q: int, coefficient: float = 1.0) -> PauliString:
    return PauliString(coefficient, {q: "Z"})


def identity(coefficient: float = 1.0) -> PauliString:
    return PauliString(coefficient)


def strings_commute(a: PauliString, b: PauliString) -> bool:
    """Two Pauli strings commute iff they anticommute on an even number of qubits."""
    clashes = 0
    for q, letter in a.factors.items():
        other = b.factors.get(q)
        if other is not None and other != letter:
            clashes += 1
    return clashes % 2 == 0


def all_terms_commute(s: PauliSum) -> bool:
    terms = s.terms
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            if not strings_commute(terms[i], terms[j]):
                return False
    return True


def pauli_sum_to_obj(s: PauliSum) -> list[dict]:
    """JSON-ready representation: list of {"coeff", "paulis"}."""
    return [
        {"coeff": t.coefficient, "paulis": {str(q): l for q, l in sorted(t.factors.items())}}
        for t in s.terms
    ]


def pauli_sum_from_obj(obj) -> PauliSum:
    if not isinstance(obj, list):
        raise ValueError("PauliSum JSON must be a list of terms")
    terms = []
    for i, entry in enumerate(obj):
        if not isinstance(entry, dict) or "coeff" not in entry:
            raise ValueError(f"term {i}: expected object with 'coeff' and 'paulis'")
        paulis = entry.get("paulis") or {}
        try:
            factors = {int(q): str(l) for q, l in paulis.items()}
        except (TypeError, ValueError) as exc:
            raise ValueError(f"term {i}: bad qubit index in {paulis!r}") from exc
        terms.append(PauliString(float(entry["coeff"]), factors))
    return PauliSum(terms)
