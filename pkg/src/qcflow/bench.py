"""Fused-vs-unfused wall-time benchmark over two random circuit families.

Two generators share a layer recipe — one random-axis rotation per qubit, then
a brick pattern of CZs whose offset alternates with the layer index:

* ``random_dense``: the CZ bricks span the whole register, entangling freely;
* ``structured``: the bricks are confined to disjoint fixed-size blocks, so
  entanglement never crosses block boundaries.

``run_bench`` times :func:`qcflow.sim.simulate` over batches of circuits (one
untimed warm-up batch, then the median of three full repetitions on a
monotonic clock; fused timings include the fusion pass itself) and emits one
record per (register size, family, fusion flag) cell. Each record carries a
checksum of every final amplitude vector, rounded to 1e-9, which must agree
between the fused and unfused runs of the same cell.
"""

from __future__ import annotations

import csv
import hashlib
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .fusion import fuse
from .gates import cz, rx, ry, rz
from .rng import derive_seed, substream
from .sim import simulate

CSV_HEADER = "n_qubits,family,fused,raw_gates,fused_gates,wall_time_s,checksum"

RANDOM_DENSE = "random_dense"
STRUCTURED = "structured"
_FAMILIES = (RANDOM_DENSE, STRUCTURED)

_AXES = (rx, ry, rz)
_REPETITIONS = 3


def _rotation_layer(n: int, rng: np.random.Generator) -> list:
    gates = []
    for q in range(n):
        factory = _AXES[int(rng.integers(len(_AXES)))]
        gates.append(factory(float(rng.uniform(0.0, 2.0 * np.pi)), q))
    return gates


def gen_random_dense(n: int, depth: int, seed: int) -> Circuit:
    """Rotation layer + full-width CZ bricks with layer-alternating offset."""
    if n < 2:
        raise ValueError("random-dense circuits need at least 2 qubits")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = substream(seed, n, depth)
    gates = []
    for layer in range(depth):
        gates += _rotation_layer(n, rng)
        offset = layer % 2
        gates += [cz(q, q + 1) for q in range(offset, n - 1, 2)]
    return Circuit(n, gates)


def gen_structured(n: int, depth: int, block_size: int = 4, seed: int = 0) -> Circuit:
    """Same layer recipe, but CZ bricks never cross disjoint block boundaries."""
    if block_size < 2:
        raise ValueError("block_size must be >= 2")
    if n % block_size != 0:
        raise ValueError(f"register size {n} is not divisible by block size {block_size}")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = substream(seed, n, depth)
    gates = []
    for layer in range(depth):
        gates += _rotation_layer(n, rng)
        offset = layer % 2
        for start in range(0, n, block_size):
            gates += [
                cz(q, q + 1)
                for q in range(start + offset, start + block_size - 1, 2)
            ]
    return Circuit(n, gates)


def amplitude_checksum(states) -> str:
    """Hash of amplitude vectors rounded to 1e-9, with -0.0 normalized to +0.0."""
    digest = hashlib.sha256()
    for amps in states:
        amps = np.asarray(amps)
        re = np.round(amps.real, 9) + 0.0
        im = np.round(amps.imag, 9) + 0.0
        digest.update(re.astype("<f8").tobytes())
        digest.update(im.astype("<f8").tobytes())
    return digest.hexdigest()[:16]


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark sweep: several register sizes of one circuit family."""

    n_qubits: tuple = (16,)
    depth: int = 40
    num_circuits: int = 4
    batch_size: int = 2
    family: str = RANDOM_DENSE
    seed: int = 0
    fuse: str = "both"  # on | off | both
    block_size: int = 4
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_qubits", tuple(int(n) for n in self.n_qubits))
        if not self.n_qubits:
            raise ValueError("at least one register size required")
        if self.num_circuits < 1 or self.batch_size < 1:
            raise ValueError("num_circuits and batch_size must be >= 1")
        if self.num_circuits % self.batch_size != 0:
            raise ValueError(
                f"num_circuits ({self.num_circuits}) must be divisible by "
                f"batch_size ({self.batch_size})"
            )
        if self.family not in _FAMILIES:
            raise ValueError(f"family must be one of {_FAMILIES}, got {self.family!r}")
        if self.fuse not in ("on", "off", "both"):
            raise ValueError("fuse must be 'on', 'off', or 'both'")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def fuse_flags(self) -> tuple:
        return {"on": (True,), "off": (False,), "both": (True, False)}[self.fuse]

    def generate(self, n: int) -> list:
        if self.family == RANDOM_DENSE:
            return [
                gen_random_dense(n, self.depth, derive_seed(self.seed, n, i))
                for i in range(self.num_circuits)
            ]
        return [
            gen_structured(n, self.depth, self.block_size, derive_seed(self.seed, n, i))
            for i in range(self.num_circuits)
        ]


@dataclass
class BenchRecord:
    """One (register size, family, fusion flag) timing cell."""

    n_qubits: int
    family: str
    fused: bool
    raw_gate_count: int
    fused_gate_count: int
    wall_time_s: float
    amplitude_checksum: str

    def as_row(self) -> list:
        return [
            str(self.n_qubits),
            self.family,
            "1" if self.fused else "0",
            str(self.raw_gate_count),
            str(self.fused_gate_count),
            f"{self.wall_time_s:.6f}",
            self.amplitude_checksum,
        ]


def _simulate_batch(batch, fused: bool, workers: int):
    if workers == 1:
        return [simulate(c, fuse_enabled=fused) for c in batch]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: simulate(c, fuse_enabled=fused), batch))


def _time_cell(circuits, batch_size: int, fused: bool, workers: int):
    """Median-of-3 wall time over all batches, plus the final states."""
    batches = [circuits[i : i + batch_size] for i in range(0, len(circuits), batch_size)]
    _simulate_batch(batches[0], fused, workers)  # warm-up, excluded from timing
    times = []
    states = None
    for _ in range(_REPETITIONS):
        collected = []
        start = time.perf_counter()
        for batch in batches:
            collected.extend(_simulate_batch(batch, fused, workers))
        times.append(time.perf_counter() - start)
        states = collected
    return float(np.median(times)), [s.amplitudes for s in states]


def run_bench(cfg: BenchConfig) -> list:
    """Execute the sweep and return one BenchRecord per (n, fusion) cell."""
    records = []
    for n in cfg.n_qubits:
        circuits = cfg.generate(n)
        raw_gates = sum(len(c.gates) for c in circuits)
        fused_gates = sum(len(fuse(c).gates) for c in circuits)
        for fused in cfg.fuse_flags:
            wall, states = _time_cell(circuits, cfg.batch_size, fused, cfg.workers)
            records.append(
                BenchRecord(
                    n_qubits=n,
                    family=cfg.family,
                    fused=fused,
                    raw_gate_count=raw_gates,
                    fused_gate_count=fused_gates,
                    wall_time_s=wall,
                    amplitude_checksum=amplitude_checksum(states),
                )
            )
    return records


def records_to_csv(records) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for record in records:
        writer.writerow(record.as_row())
    return out.getvalue()
