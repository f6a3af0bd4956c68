"""Command-line front end.

Subcommands
    simulate     final state vector of a circuit JSON file
    expectation  exact expectation of an observable after a circuit
    sample       measurement counts in the computational basis
    grad         gradient of an expectation by fd / central / ps / sps
    bench        fused-vs-unfused wall-time benchmark (CSV)
    demo         run an application driver; CSV history + JSON summary

Exit codes: 0 success, 1 usage error, 2 runtime error. Circuit and observable
files use the JSON schemas of :func:`qcflow.circuit.from_json` and
:func:`qcflow.pauli.pauli_sum_from_obj`.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import RANDOM_DENSE, STRUCTURED, BenchConfig, records_to_csv, run_bench
from .circuit import from_json, resolve
from .gradients import (
    CENTRAL,
    FORWARD,
    GradRequest,
    StochasticConfig,
    finite_difference_grad,
    parameter_shift_grad,
    stochastic_ps_grad,
)
from .pauli import pauli_sum_from_obj
from .sim import expectation, sample, simulate


class _UsageError(Exception):
    """Bad arguments; carries the relevant parser's usage text."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{message}\n{self.format_usage()}")


def _binding(text: str):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name, float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"binding {name!r} needs a numeric value") from exc


def _int_list(text: str):
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _read_circuit(path: str):
    return from_json(Path(path).read_text())


def _read_observable(path: str):
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid observable JSON in {path}: {exc}") from exc
    return pauli_sum_from_obj(obj)


def _resolved_state(args):
    circuit = _read_circuit(args.circuit)
    return simulate(resolve(circuit, dict(args.bindings or [])))


def _emit(text: str, out_path):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


# ---------------------------------------------------------------------------
# Core subcommands
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    state = _resolved_state(args)
    payload = {
        "num_qubits": state.num_qubits,
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _cmd_expectation(args) -> int:
    state = _resolved_state(args)
    value = expectation(state, _read_observable(args.observable))
    print(f"{value:.6f}")
    return 0


def _cmd_sample(args) -> int:
    state = _resolved_state(args)
    batch = sample(state, args.shots, args.seed)
    counts: dict[str, int] = {}
    for row in batch.bitstrings:
        key = "".join(str(int(b)) for b in row)  # qubit 0 leftmost
        counts[key] = counts.get(key, 0) + 1
    lines = ["bitstring,count"]
    lines += [f"{key},{counts[key]}" for key in sorted(counts)]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_grad(args) -> int:
    circuit = _read_circuit(args.circuit)
    observable = _read_observable(args.observable)
    req = GradRequest(circuit, observable, dict(args.bindings or []))
    if args.method == "fd":
        result = finite_difference_grad(req, FORWARD, epsilon=args.epsilon)
    elif args.method == "central":
        result = finite_difference_grad(req, CENTRAL, epsilon=args.epsilon)
    elif args.method == "ps":
        result = parameter_shift_grad(req)
    else:
        cfg = StochasticConfig(
            sample_generator_terms=args.sample_generator_terms,
            sample_cost_terms=args.sample_cost_terms,
            sample_coordinates=args.sample_coordinates,
            num_samples=args.samples,
            seed=args.seed,
        )
        result = stochastic_ps_grad(req, cfg)
    for symbol, value in zip(circuit.symbols, result.gradient):
        print(f"{symbol} {value:.6f}")
    return 0


def _cmd_bench(args) -> int:
    families = (RANDOM_DENSE, STRUCTURED) if args.family == "both" else (args.family,)
    records = []
    for family in families:
        cfg = BenchConfig(
            n_qubits=tuple(args.n),
            depth=args.depth,
            num_circuits=args.circuits,
            batch_size=args.batch_size,
            family=family,
            seed=args.seed,
            fuse=args.fuse,
            block_size=args.block_size,
            workers=args.workers,
        )
        records.extend(run_bench(cfg))
    _emit(records_to_csv(records), args.out)
    return 0


# ---------------------------------------------------------------------------
# Demos
# ---------------------------------------------------------------------------


def _history_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join(f"{v:.10g}" if isinstance(v, float) else str(v) for v in row)
              for row in rows]
    return "\n".join(lines) + "\n"


def _write_demo_outputs(args, name: str, csv_text: str, summary: dict) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}_history.csv"
    csv_path.write_text(csv_text)
    summary = dict(summary, history_csv=str(csv_path))
    print(json.dumps(_json_ready(summary), indent=2))
    return 0


def _demo_classifier(args) -> int:
    from .apps import BlochDatasetSpec, run_binary_classifier

    spec = BlochDatasetSpec(args.theta_a, args.theta_b, args.samples, seed=args.seed)
    run = run_binary_classifier(spec, epochs=args.epochs, lr=args.lr)
    rows = [
        (epoch, float(loss), float(metric))
        for epoch, (loss, metric) in enumerate(
            zip(run.history["loss"], run.history["metric"])
        )
    ]
    summary = {
        "demo": "classifier",
        "config": {
            "theta_a": args.theta_a, "theta_b": args.theta_b,
            "samples": args.samples, "epochs": args.epochs,
            "lr": args.lr, "seed": args.seed,
        },
        "test_accuracy": run.accuracy,
        "final_loss": float(run.history["loss"][-1]) if rows else None,
    }
    return _write_demo_outputs(args, "classifier", _history_csv(
        ("epoch", "loss", "accuracy"), rows), summary)


def _demo_qcnn(args) -> int:
    from .apps import make_cluster_task, qcnn_history_csv, run_qcnn_variants

    task = make_cluster_task(n_qubits=8, rounds=args.rounds, seed=args.seed)
    results = run_qcnn_variants(
        task, epochs=args.epochs, lr=args.lr, batch_size=args.batch_size, seed=args.seed
    )
    summary = {
        "demo": "qcnn",
        "config": {
            "rounds": args.rounds, "epochs": args.epochs, "lr": args.lr,
            "batch_size": args.batch_size, "seed": args.seed,
        },
        "variants": {
            name: {
                "val_mse_untrained": report["val_mse_untrained"],
                "val_mse_trained": report["val_mse_trained"],
                "val_accuracy": report["val_accuracy"],
                "train_seconds": report["seconds"],
            }
            for name, report in results.items()
        },
    }
    return _write_demo_outputs(args, "qcnn", qcnn_history_csv(results), summary)


def _demo_qaoa(args) -> int:
    import networkx

    from .apps import as_maxcut_problem, brute_force_maxcut, run_qaoa

    graph = networkx.random_regular_graph(d=args.degree, n=args.nodes, seed=args.graph_seed)
    problem = as_maxcut_problem(graph, p=args.p)
    result = run_qaoa(problem, steps=args.steps, lr=args.lr, shots=args.shots, seed=args.seed)
    optimum, _ = brute_force_maxcut(problem)
    rows = [(step, float(e)) for step, e in enumerate(result.energy_history)]
    summary = {
        "demo": "qaoa",
        "config": {
            "nodes": args.nodes, "degree": args.degree, "p": args.p,
            "steps": args.steps, "lr": args.lr, "shots": args.shots,
            "seed": args.seed, "graph_seed": args.graph_seed,
        },
        "cut_value": result.cut_value,
        "optimum_cut": optimum,
        "approximation_ratio": result.cut_value / optimum,
        "bitstring": list(map(int, result.bitstring)),
        "initial_energy": result.initial_energy,
        "final_energy": result.final_energy,
    }
    return _write_demo_outputs(args, "qaoa", _history_csv(("step", "energy"), rows), summary)


def _demo_barren(args) -> int:
    from .apps import barren_plateau_scan

    scan = barren_plateau_scan(args.n, depth=args.depth, trials=args.trials, seed=args.seed)
    rows = [(n, float(v)) for n, v in scan.items()]
    summary = {
        "demo": "barren",
        "config": {"n": args.n, "depth": args.depth, "trials": args.trials, "seed": args.seed},
        "variances": {str(n): v for n, v in scan.items()},
        "strictly_decreasing": all(
            later < earlier
            for earlier, later in zip(list(scan.values()), list(scan.values())[1:])
        ),
    }
    return _write_demo_outputs(args, "barren", _history_csv(
        ("n_qubits", "variance"), rows), summary)


def _demo_vqt(args) -> int:
    from .apps import ThermalTarget, heisenberg_2d, run_vqt

    target = ThermalTarget(heisenberg_2d(2, 2, 1.0, 1.0), args.beta)
    out = run_vqt(
        target, layers=args.layers, steps=args.steps, lr=args.lr,
        samples_per_step=args.samples, seed=args.seed,
    )
    rows = [(step, float(v)) for step, v in enumerate(out["free_energy_history"])]
    summary = {
        "demo": "vqt",
        "config": {
            "beta": args.beta, "layers": args.layers, "steps": args.steps,
            "lr": args.lr, "samples_per_step": args.samples, "seed": args.seed,
        },
        "free_energy": out["free_energy"],
        "free_energy_floor": out["free_energy_floor"],
        "fidelity": out["fidelity"],
    }
    return _write_demo_outputs(args, "vqt", _history_csv(
        ("step", "free_energy"), rows), summary)


def _demo_qmhl(args) -> int:
    from .apps import ThermalTarget, gibbs_state, heisenberg_2d, run_qmhl, run_vqt

    target = ThermalTarget(heisenberg_2d(2, 2, 1.0, 1.0), args.beta)
    if args.source == "vqt":
        vqt_out = run_vqt(
            target, layers=args.layers, steps=args.vqt_steps, lr=args.lr,
            samples_per_step=128, seed=args.vqt_seed,
        )
        data = vqt_out["model_density"]
    else:
        data = gibbs_state(target, 4)
    result = run_qmhl(data, layers=args.layers, steps=args.steps, lr=args.lr, seed=args.seed)
    rows = [(step, float(v)) for step, v in enumerate(result.loss_history)]
    summary = {
        "demo": "qmhl",
        "config": {
            "beta": args.beta, "layers": args.layers, "steps": args.steps,
            "lr": args.lr, "seed": args.seed, "source": args.source,
            "vqt_steps": args.vqt_steps if args.source == "vqt" else None,
            "vqt_seed": args.vqt_seed if args.source == "vqt" else None,
        },
        "fidelity_to_data": result.fidelity,
        "final_loss": float(result.loss_history[-1]) if rows else None,
    }
    return _write_demo_outputs(args, "qmhl", _history_csv(("step", "loss"), rows), summary)


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def _add_circuit_args(p, with_observable=False):
    p.add_argument("circuit", help="circuit JSON file")
    if with_observable:
        p.add_argument("observable", help="observable JSON file (list of Pauli terms)")
    p.add_argument("--bindings", metavar="NAME=VALUE", type=_binding, action="append",
                   help="symbol binding, repeatable")


def _build_parser() -> _Parser:
    parser = _Parser(prog="qcflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qcflow {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", help="final state vector as JSON")
    _add_circuit_args(p)
    p.add_argument("--out", help="write the state JSON here instead of stdout")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("expectation", help="exact expectation value")
    _add_circuit_args(p, with_observable=True)
    p.set_defaults(func=_cmd_expectation)

    p = sub.add_parser("sample", help="measurement counts CSV")
    _add_circuit_args(p)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="write the counts CSV here instead of stdout")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("grad", help="gradient of an expectation value")
    _add_circuit_args(p, with_observable=True)
    p.add_argument("--method", choices=("fd", "central", "ps", "sps"), default="ps")
    p.add_argument("--epsilon", type=float, default=1e-4, help="finite-difference step")
    p.add_argument("--samples", type=int, default=1, help="sps: Monte-Carlo samples")
    p.add_argument("--seed", type=int, default=0, help="sps: sampling seed")
    p.add_argument("--sample-generator-terms", action="store_true",
                   help="sps: sample generator terms instead of enumerating")
    p.add_argument("--sample-cost-terms", action="store_true",
                   help="sps: sample observable terms instead of enumerating")
    p.add_argument("--sample-coordinates", action="store_true",
                   help="sps: sample one symbol per draw instead of all")
    p.set_defaults(func=_cmd_grad)

    p = sub.add_parser("bench", help="fused-vs-unfused benchmark CSV")
    p.add_argument("--n", type=_int_list, default=[16],
                   help="comma-separated register sizes (default 16)")
    p.add_argument("--depth", type=int, default=40)
    p.add_argument("--circuits", type=int, default=4)
    p.add_argument("--batch-size", type=int, default=2)
    p.add_argument("--family", choices=(RANDOM_DENSE, STRUCTURED, "both"), default="both")
    p.add_argument("--fuse", choices=("on", "off", "both"), default="both")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--block-size", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(func=_cmd_bench)

    demo = sub.add_parser("demo", help="application drivers")
    demo_sub = demo.add_subparsers(dest="name", parser_class=_Parser)

    d = demo_sub.add_parser("classifier", help="single-qubit two-blob classifier")
    d.add_argument("--theta-a", type=float, default=1.0)
    d.add_argument("--theta-b", type=float, default=4.0)
    d.add_argument("--samples", type=int, default=200)
    d.add_argument("--epochs", type=int, default=50)
    d.add_argument("--lr", type=float, default=0.1)
    d.add_argument("--seed", type=int, default=2)
    d.set_defaults(func=_demo_classifier)

    d = demo_sub.add_parser("qcnn", help="cluster-state excitation detection, 3 variants")
    d.add_argument("--rounds", type=int, default=14)
    d.add_argument("--epochs", type=int, default=25)
    d.add_argument("--lr", type=float, default=0.02)
    d.add_argument("--batch-size", type=int, default=16)
    d.add_argument("--seed", type=int, default=4)
    d.set_defaults(func=_demo_qcnn)

    d = demo_sub.add_parser("qaoa", help="MaxCut on a random regular graph")
    d.add_argument("--nodes", type=int, default=10)
    d.add_argument("--degree", type=int, default=3)
    d.add_argument("--p", type=int, default=2)
    d.add_argument("--steps", type=int, default=120)
    d.add_argument("--lr", type=float, default=0.05)
    d.add_argument("--shots", type=int, default=2048)
    d.add_argument("--seed", type=int, default=3)
    d.add_argument("--graph-seed", type=int, default=7)
    d.set_defaults(func=_demo_qaoa)

    d = demo_sub.add_parser("barren", help="gradient-variance scan")
    d.add_argument("--n", type=_int_list, default=[2, 4, 6, 8])
    d.add_argument("--depth", type=int, default=50)
    d.add_argument("--trials", type=int, default=200)
    d.add_argument("--seed", type=int, default=9)
    d.set_defaults(func=_demo_barren)

    d = demo_sub.add_parser("vqt", help="variational thermal-state learning")
    d.add_argument("--beta", type=float, default=1.0)
    d.add_argument("--layers", type=int, default=4)
    d.add_argument("--steps", type=int, default=250)
    d.add_argument("--lr", type=float, default=0.05)
    d.add_argument("--samples", type=int, default=128)
    d.add_argument("--seed", type=int, default=11)
    d.set_defaults(func=_demo_vqt)

    d = demo_sub.add_parser("qmhl", help="modular-Hamiltonian learning")
    d.add_argument("--beta", type=float, default=1.0)
    d.add_argument("--layers", type=int, default=4)
    d.add_argument("--steps", type=int, default=300)
    d.add_argument("--lr", type=float, default=0.05)
    d.add_argument("--seed", type=int, default=13)
    d.add_argument("--source", choices=("gibbs", "vqt"), default="gibbs",
                   help="data state: exact Gibbs state or a fresh VQT run's model")
    d.add_argument("--vqt-steps", type=int, default=250)
    d.add_argument("--vqt-seed", type=int, default=11)
    d.set_defaults(func=_demo_qmhl)

    for sp in (demo,):
        sp.set_defaults(func=None)
    parser.set_defaults(func=None)

    # demo shares --out-dir across names
    for name_parser in demo_sub.choices.values():
        name_parser.add_argument("--out-dir", default=".",
                                 help="directory for CSV histories (default: cwd)")
    return parser


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"qcflow: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        print(parser.format_usage(), file=sys.stderr, end="")
        return 1
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, MemoryError) as exc:
        print(f"qcflow: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
