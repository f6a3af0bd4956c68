"""Gate fusion: collapse runs of small gates into dense 2- or 4-dim matrices.

Gates are first scheduled as-soon-as-possible onto a (qubit row x timestep)
lattice: a gate's timestep is the max next-free slot over its targets. The pass
then scans timesteps ascending, rows ascending. Each not-yet-consumed two-qubit
gate becomes an anchor: it absorbs every reachable one-qubit gate on its two
rows, both backward (down to the per-row counter) and forward (until the next
two-qubit gate), and absorbs a following two-qubit gate outright when both row
counters land on it and it is supported on exactly the anchor's rows —
absorption then resumes past it. One-qubit gates left over (only possible on
rows that never meet a two-qubit gate) are emitted as 2x2 fused gates, one per
row. Fused gate count never exceeds the input gate count.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, gate_matrix

_I2 = np.eye(2, dtype=np.complex128)
# Permutation that swaps the two local qubit slots of a 4x4 matrix.
_SWAP4 = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)


class FusedGate:
    """A dense 2x2 or 4x4 unitary over 1 or 2 target qubits (ascending order)."""

    __slots__ = ("matrix", "targets")

    def __init__(self, matrix: np.ndarray, targets: tuple[int, ...]):
        matrix = np.asarray(matrix, dtype=np.complex128)
        dim = 2 ** len(targets)
        if matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {matrix.shape} does not match targets {targets}")
        err = np.max(np.abs(matrix.conj().T @ matrix - np.eye(dim)))
        if err > 1e-9:
            raise ValueError(f"fused matrix is not unitary (max deviation {err:.2e})")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "targets", tuple(targets))

    def __setattr__(self, key, value):
        raise AttributeError("FusedGate is immutable")

    def __repr__(self):
        return f"FusedGate(targets={self.targets})"


class FusedCircuit:
    """Output of the fusion pass: an ordered list of FusedGates."""

    __slots__ = ("num_qubits", "gates")

    def __init__(self, num_qubits: int, gates: list[FusedGate]):
        object.__setattr__(self, "num_qubits", int(num_qubits))
        object.__setattr__(self, "gates", tuple(gates))

    def __setattr__(self, key, value):
        raise AttributeError("FusedCircuit is immutable")

    def __len__(self):
        return len(self.gates)

    def __repr__(self):
        return f"FusedCircuit(num_qubits={self.num_qubits}, gates={len(self.gates)})"


def fuse(c: Circuit) -> FusedCircuit:
    """Fuse a concrete circuit. All gates must act on at most 2 qubits."""
    if not c.is_concrete:
        raise ValueError(f"circuit has unresolved symbols {c.symbols}; resolve() first")
    ops = [(gate_matrix(g), g.targets) for g in c.gates]
    return FusedCircuit(c.num_qubits, fuse_resolved(ops, c.num_qubits))


def fuse_resolved(
    ops: list[tuple[np.ndarray, tuple[int, ...]]], num_qubits: int
) -> list[FusedGate]:
    """Core fusion pass over (matrix, targets) pairs."""
    for _, tg in ops:
        if len(tg) > 2:
            raise ValueError(f"fusion is defined only for gates on <= 2 qubits, got {tg}")

    # ASAP schedule onto the row x timestep lattice.
    frontier = [0] * num_qubits
    grid: dict[tuple[int, int], int] = {}
    times = []
    for idx, (_, tg) in enumerate(ops):
        ts = max(frontier[q] for q in tg)
        for q in tg:
            frontier[q] = ts + 1
            grid[(q, ts)] = idx
        times.append(ts)
    total_t = (max(times) + 1) if times else 0

    consumed = [False] * len(ops)
    counters = [0] * num_qubits
    out: list[FusedGate] = []

    def embed1(u: np.ndarray, slot: int) -> np.ndarray:
        return np.kron(u, _I2) if slot == 0 else np.kron(_I2, u)

    def canonical4(m: np.ndarray, tg: tuple[int, int], a: int) -> np.ndarray:
        # Reorder so the smaller qubit index is the most significant local bit.
        return m if tg[0] == a else _SWAP4 @ m @ _SWAP4

    def forward(row: int, slot: int, start: int, m: np.ndarray):
        tt = start
        while tt < total_t:
            j = grid.get((row, tt))
            if j is not None and not consumed[j]:
                mj, tgj = ops[j]
                if len(tgj) == 1:
                    m = embed1(mj, slot) @ m
                    consumed[j] = True
                else:
                    return tt, m
            tt += 1
        return total_t, m

    for tstep in range(total_t):
        for row in range(num_qubits):
            idx = grid.get((row, tstep))
            if idx is None or consumed[idx]:
                continue
            mat, tg = ops[idx]
            if len(tg) == 1:
                continue
            a, b = sorted(tg)
            fused = canonical4(mat, tg, a)
            consumed[idx] = True
            for r, slot in ((a, 0), (b, 1)):
                for tt in range(tstep - 1, counters[r] - 1, -1):
                    j = grid.get((r, tt))
                    if j is None or consumed[j]:
                        continue
                    mj, tgj = ops[j]
                    if len(tgj) != 1:  # cannot happen: earlier 2q gates were processed
                        raise AssertionError("unconsumed two-qubit gate behind an anchor")
                    fused = fused @ embed1(mj, slot)
                    consumed[j] = True
            ca, fused = forward(a, 0, tstep + 1, fused)
            cb, fused = forward(b, 1, tstep + 1, fused)
            while ca == cb and ca < total_t:
                j = grid.get((a, ca))
                if j is None or j != grid.get((b, cb)) or consumed[j]:
                    break
                mj, tgj = ops[j]
                fused = canonical4(mj, tgj, a) @ fused
                consumed[j] = True
                ca, fused = forward(a, 0, ca + 1, fused)
                cb, fused = forward(b, 1, cb + 1, fused)
            counters[a], counters[b] = ca, cb
            out.append(FusedGate(fused, (a, b)))

    # Residual one-qubit gates: only rows with no two-qubit gate can hold any.
    rows_with_2q = {q for _, tg in ops for q in tg if len(tg) == 2}
    for row in range(num_qubits):
        acc = None
        for tt in range(total_t):
            j = grid.get((row, tt))
            if j is None or consumed[j]:
                continue
            mj, tgj = ops[j]
            if len(tgj) != 1 or row in rows_with_2q:
                raise AssertionError("residual gate on a row touched by a two-qubit gate")
            acc = mj if acc is None else mj @ acc
            consumed[j] = True
        if acc is not None:
            out.append(FusedGate(acc, (row,)))

    if len(out) > len(ops):
        raise AssertionError("fusion increased gate count")
    return out
