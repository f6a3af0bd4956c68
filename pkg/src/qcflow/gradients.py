"""Gradient engines for expectation values of parameterized circuits.

Three families:

* finite differences (forward or central stencil);
* the analytic parameter-shift rule, obtained by rewriting every symbolic gate
  exp(-i*v*sum_k beta_k*P_k) (commuting terms) as a product of per-term
  exponentials exp(-i*eta_k*P_k) with eta_k = beta_k*v, where
  d<H>/d(eta_k) = f(eta_k + pi/4) - f(eta_k - pi/4) exactly;
* stochastic parameter shift, which can independently sample generator terms
  (Pr(k) proportional to |beta_k|), cost terms (Pr(m) proportional to
  |alpha_m|, identity excluded since it cancels in the shifted difference),
  and coordinates (Pr(occurrence) proportional to |scale|*sum_k|beta_k|, with
  unsampled components set to zero for that sample). Importance weights keep
  every combination an unbiased estimator of the exact gradient.

Symbols may appear in several gates; contributions are summed over
occurrences via the chain rule. A gate exponent is an affine function of its
symbol, so each occurrence carries its own d(exponent)/d(symbol) scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .circuit import Circuit, Gate, ParamExpr, _normalize_bindings
from .pauli import PauliString, PauliSum, all_terms_commute, as_pauli_sum
from .rng import derive_seed, substream
from .sim import expectation, sampled_expectation, simulate

CENTRAL = "central"
FORWARD = "forward"
SHIFT = math.pi / 4.0


@dataclass(frozen=True)
class Exact:
    """Expectation values computed exactly from the simulated state."""


@dataclass(frozen=True)
class Sampled:
    """Expectation values estimated from measurement samples."""

    shots: int
    seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class GradRequest:
    """A gradient query: d<observable>/d(symbols) at the given binding point."""

    circuit: Circuit
    observable: PauliSum | PauliString
    bindings: Mapping
    estimator: object = Exact()


@dataclass
class GradResult:
    """gradient indexed by the circuit's symbol order; evaluations = number of
    expectation evaluations performed; degenerate_sampling flags a requested
    sampling axis whose distribution had zero total weight (that axis then
    contributed an exact zero)."""

    gradient: np.ndarray
    evaluations: int
    degenerate_sampling: bool = False


@dataclass(frozen=True)
class StochasticConfig:
    sample_generator_terms: bool = False
    sample_cost_terms: bool = False
    sample_coordinates: bool = False
    num_samples: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


class _Evaluator:
    """Counts expectation evaluations; keys sampled-estimator substreams."""

    def __init__(self, estimator):
        self.estimator = estimator
        self.count = 0

    def __call__(self, circuit: Circuit, observable: PauliSum, key: tuple = None) -> float:
        if key is None:
            key = (self.count,)
        self.count += 1
        if isinstance(self.estimator, Sampled):
            seed = derive_seed(self.estimator.seed, *key)
            return sampled_expectation(circuit, observable, self.estimator.shots, seed)
        return expectation(simulate(circuit), observable)


def finite_difference_grad(
    req: GradRequest, scheme: str = CENTRAL, epsilon: float = 1e-4, evaluator=None
) -> GradResult:
    """Finite-difference gradient.

    Central: (f(x+eps*e_k) - f(x-eps*e_k)) / (2*eps), 2M evaluations.
    Forward: (f(x+eps*e_k) - f(x)) / eps, M+1 evaluations (f(x) shared).

    ``evaluator`` optionally replaces the default all-zeros-state simulation:
    any callable ``(resolved_circuit, observable, key=None) -> float`` with a
    ``count`` attribute (e.g. a weighted mixture over stored initial states).
    """
    if scheme not in (CENTRAL, FORWARD):
        raise ValueError(f"unknown scheme {scheme!r} (want {CENTRAL!r} or {FORWARD!r})")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    circuit = req.circuit
    obs = as_pauli_sum(req.observable)
    bindings = _normalize_bindings(req.bindings)
    symbols = circuit.symbols
    _require_bindings(symbols, bindings)
    if not symbols:
        return GradResult(np.zeros(0), 0)

    ev = _Evaluator(req.estimator) if evaluator is None else evaluator
    start = ev.count

    def f(point):
        return ev(_resolved(circuit, point), obs)

    grad = np.zeros(len(symbols))
    if scheme == CENTRAL:
        for k, s in enumerate(symbols):
            up = dict(bindings, **{s: bindings[s] + epsilon})
            dn = dict(bindings, **{s: bindings[s] - epsilon})
            grad[k] = (f(up) - f(dn)) / (2.0 * epsilon)
    else:
        f0 = f(bindings)
        for k, s in enumerate(symbols):
            up = dict(bindings, **{s: bindings[s] + epsilon})
            grad[k] = (f(up) - f0) / epsilon
    _require_finite(grad)
    return GradResult(grad, ev.count - start)


def parameter_shift_grad(req: GradRequest, evaluator=None) -> GradResult:
    """Exact analytic gradient via the parameter-shift rule.

    Requires every symbolic gate's generator terms to mutually commute.
    Evaluations: 2 per (occurrence, nonzero non-identity generator term).
    ``evaluator`` as in :func:`finite_difference_grad`.
    """
    return _ps_driver(req, StochasticConfig(), evaluator)


def stochastic_ps_grad(req: GradRequest, cfg: StochasticConfig, evaluator=None) -> GradResult:
    """Monte-Carlo parameter-shift gradient; see module docstring for the axes.

    With all sampling flags off and num_samples=1 this is identical to
    parameter_shift_grad.
    """
    return _ps_driver(req, cfg, evaluator)


# ---------------------------------------------------------------------------
# Shared parameter-shift machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Occurrence:
    gate_index: int
    symbol_index: int
    scale: float  # d(exponent value)/d(symbol)
    value: float  # exponent value at the requested binding point
    terms: tuple  # non-identity generator terms with nonzero coefficient


def _require_bindings(symbols, bindings):
    missing = [s for s in symbols if s not in bindings]
    if missing:
        raise KeyError(f"missing binding for symbol(s): {', '.join(missing)}")


def _require_finite(grad):
    if not np.all(np.isfinite(grad)):
        raise ValueError("gradient has non-finite entries")


def _resolved(circuit: Circuit, bindings) -> Circuit:
    return Circuit(circuit.num_qubits, (g.resolved(bindings) for g in circuit.gates))


def _scan_occurrences(circuit: Circuit, bindings, symbols) -> list[_Occurrence]:
    occs = []
    index = {s: i for i, s in enumerate(symbols)}
    for j, g in enumerate(circuit.gates):
        if g.symbol is None:
            continue
        if not all_terms_commute(g.generator):
            raise ValueError(
                f"gate {j}: generator terms do not commute, so the parameter-shift "
                "rule does not apply — use finite_difference_grad instead"
            )
        terms = tuple(t for t in g.generator if not t.is_identity and t.coefficient != 0.0)
        occs.append(
            _Occurrence(j, index[g.symbol], g.exponent.coeff, g.exponent.value(bindings), terms)
        )
    return occs


def _shifted_circuit(base_gates, num_qubits, occ: _Occurrence, shifted_k: int, delta: float):
    """Replace gate ``occ.gate_index`` by its per-term product, with term
    ``shifted_k``'s angle offset by ``delta``."""
    expansion = []
    for k, term in enumerate(occ.terms):
        eta = occ.value * term.coefficient + (delta if k == shifted_k else 0.0)
        expansion.append(
            Gate(
                term.support,
                exponent=ParamExpr(None, 0.0, eta),
                generator=PauliSum([term.with_coefficient(1.0)]),
            )
        )
    gates = base_gates[: occ.gate_index] + tuple(expansion) + base_gates[occ.gate_index + 1 :]
    return Circuit(num_qubits, gates)


def _ps_driver(req: GradRequest, cfg: StochasticConfig, evaluator=None) -> GradResult:
    circuit = req.circuit
    obs = as_pauli_sum(req.observable)
    bindings = _normalize_bindings(req.bindings)
    symbols = circuit.symbols
    _require_bindings(symbols, bindings)
    if not symbols:
        return GradResult(np.zeros(0), 0)

    occs = _scan_occurrences(circuit, bindings, symbols)
    base_gates = tuple(g.resolved(bindings) for g in circuit.gates)
    ev = _Evaluator(req.estimator) if evaluator is None else evaluator
    start = ev.count

    cost_terms = [t for t in obs if not t.is_identity and t.coefficient != 0.0]
    cost_mass = np.array([abs(t.coefficient) for t in cost_terms])
    cost_total = float(cost_mass.sum())

    occ_mass = np.array(
        [abs(o.scale) * sum(abs(t.coefficient) for t in o.terms) for o in occs]
    )
    occ_total = float(occ_mass.sum())

    degenerate = False
    acc = np.zeros(len(symbols))

    for i in range(cfg.num_samples):
        rng = substream(cfg.seed, i)
        term_counter = 0
        sample = np.zeros(len(symbols))

        if cfg.sample_coordinates:
            if occ_total == 0.0:
                degenerate = True
                chosen = []
            else:
                probs = occ_mass / occ_total
                pick = int(rng.choice(len(occs), p=probs))
                chosen = [(occs[pick], 1.0 / probs[pick])]
        else:
            chosen = [(o, 1.0) for o in occs]

        for occ, coord_weight in chosen:
            beta_total = sum(abs(t.coefficient) for t in occ.terms)
            if cfg.sample_generator_terms:
                if beta_total == 0.0:
                    degenerate = True
                    continue
                probs = np.array([abs(t.coefficient) for t in occ.terms]) / beta_total
                k = int(rng.choice(len(occ.terms), p=probs))
                sign = math.copysign(1.0, occ.terms[k].coefficient)
                pairs = [(k, occ.scale * sign * beta_total)]
            else:
                pairs = [(k, occ.scale * t.coefficient) for k, t in enumerate(occ.terms)]

            for k, weight in pairs:
                if weight == 0.0:
                    continue
                if cfg.sample_cost_terms:
                    if cost_total == 0.0:
                        degenerate = True
                        continue
                    m = int(rng.choice(len(cost_terms), p=cost_mass / cost_total))
                    alpha_sign = math.copysign(1.0, cost_terms[m].coefficient)
                    obs_eff = PauliSum(
                        [cost_terms[m].with_coefficient(alpha_sign * cost_total)]
                    )
                else:
                    obs_eff = obs
                f_plus = ev(
                    _shifted_circuit(base_gates, circuit.num_qubits, occ, k, +SHIFT),
                    obs_eff,
                    key=(i, 0, term_counter),
                )
                f_minus = ev(
                    _shifted_circuit(base_gates, circuit.num_qubits, occ, k, -SHIFT),
                    obs_eff,
                    key=(i, 1, term_counter),
                )
                term_counter += 1
                sample[occ.symbol_index] += coord_weight * weight * (f_plus - f_minus)
        acc += sample

    grad = acc / cfg.num_samples
    _require_finite(grad)
    return GradResult(grad, ev.count - start, degenerate)
