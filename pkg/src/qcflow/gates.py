"""Named gate library.

Fixed gates: i, x, y, z, h, s, t, cz, cnot, swap.
Parameterized gates: rx/ry/rz (half-angle: rx(theta) = exp(-i*(theta/2)*X)),
xpow/ypow/zpow (x^t = exp(i*pi*t/2) * exp(-i*(pi*t/2)*X), global phase kept as an
identity generator term), and cnot_pow.

Angle arguments accept a float, a symbol name string, or a ParamExpr.
"""

from __future__ import annotations

import math

import numpy as np

from .circuit import Gate, ParamExpr, as_param_expr
from .pauli import PauliString, PauliSum, identity as pauli_identity

_SQ2 = 1.0 / math.sqrt(2.0)

FIXED_MATRICES: dict[str, np.ndarray] = {
    "i": np.eye(2, dtype=np.complex128),
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128),
    "s": np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    "t": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=np.complex128),
    "cz": np.diag([1, 1, 1, -1]).astype(np.complex128),
    "cnot": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
    ),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
    ),
}


def _fixed(name: str, *targets: int) -> Gate:
    return Gate(targets, name=name, matrix=FIXED_MATRICES[name])


def ident(q: int) -> Gate:
    return _fixed("i", q)


def x(q: int) -> Gate:
    return _fixed("x", q)


def y(q: int) -> Gate:
    return _fixed("y", q)


def z(q: int) -> Gate:
    return _fixed("z", q)


def h(q: int) -> Gate:
    return _fixed("h", q)


def s(q: int) -> Gate:
    return _fixed("s", q)


def t(q: int) -> Gate:
    return _fixed("t", q)


def cz(a: int, b: int) -> Gate:
    return _fixed("cz", a, b)


def cnot(control: int, target: int) -> Gate:
    return _fixed("cnot", control, target)


def swap(a: int, b: int) -> Gate:
    return _fixed("swap", a, b)


def _rotation(name: str, letter: str, angle, q: int) -> Gate:
    expr = as_param_expr(angle)
    return Gate(
        (q,),
        name=name,
        exponent=expr.scaled(0.5),
        generator=PauliSum([PauliString(1.0, {q: letter})]),
    )


def rx(angle, q: int) -> Gate:
    """exp(-i*(angle/2)*X)."""
    return _rotation("rx", "X", angle, q)


def ry(angle, q: int) -> Gate:
    """exp(-i*(angle/2)*Y)."""
    return _rotation("ry", "Y", angle, q)


def rz(angle, q: int) -> Gate:
    """exp(-i*(angle/2)*Z)."""
    return _rotation("rz", "Z", angle, q)


def _power(name: str, letter: str, exponent, q: int) -> Gate:
    expr = as_param_expr(exponent)
    gen = PauliSum([PauliString(1.0, {q: letter}), pauli_identity(-1.0)])
    return Gate((q,), name=name, exponent=expr.scaled(math.pi / 2.0), generator=gen)


def xpow(exponent, q: int) -> Gate:
    """X**t with the Cirq phase convention (X**1 == X exactly)."""
    return _power("xpow", "X", exponent, q)


def ypow(exponent, q: int) -> Gate:
    return _power("ypow", "Y", exponent, q)


def zpow(exponent, q: int) -> Gate:
    return _power("zpow", "Z", exponent, q)


def cnot_pow(exponent, control: int, target: int) -> Gate:
    """CNOT**t: exp(-i*(pi*t/4) * (X_t + Z_c - Z_c X_t - I)); CNOT**1 == CNOT exactly."""
    expr = as_param_expr(exponent)
    gen = PauliSum(
        [
            PauliString(1.0, {target: "X"}),
            PauliString(1.0, {control: "Z"}),
            PauliString(-1.0, {control: "Z", target: "X"}),
            pauli_identity(-1.0),
        ]
    )
    return Gate((control, target), name="cnotpow", exponent=expr.scaled(math.pi / 4.0), generator=gen)


_PARAMETERIZED = {
    "rx": rx,
    "ry": ry,
    "rz": rz,
    "xpow": xpow,
    "ypow": ypow,
    "zpow": zpow,
}


def build_named(name: str, targets, exponent_obj, where: str) -> Gate:
    """Construct a library gate from its JSON fields (no explicit matrix/generator).

    For parameterized names the ``exponent`` field is the gate's angle/exponent
    argument, exactly as passed to the Python constructors.
    """
    name = str(name).lower()
    if name in FIXED_MATRICES:
        if len(targets) != _gate_arity(name):
            raise ValueError(f"gate '{name}' takes {_gate_arity(name)} target(s)")
        return Gate(targets, name=name, matrix=FIXED_MATRICES[name])
    if name in _PARAMETERIZED or name == "cnotpow":
        if exponent_obj is None:
            raise ValueError(f"gate '{name}' needs an 'exponent'")
        expr = ParamExpr(
            exponent_obj.get("symbol"),
            float(exponent_obj.get("coeff", 1.0)),
            float(exponent_obj.get("const", 0.0)),
        )
        if name == "cnotpow":
            if len(targets) != 2:
                raise ValueError("gate 'cnotpow' takes 2 targets")
            return cnot_pow(expr, targets[0], targets[1])
        if len(targets) != 1:
            raise ValueError(f"gate '{name}' takes 1 target")
        return _PARAMETERIZED[name](expr, targets[0])
    raise ValueError(f"unknown gate name '{name}'")


def _gate_arity(name: str) -> int:
    return 2 if name in ("cz", "cnot", "swap", "cnotpow") else 1
