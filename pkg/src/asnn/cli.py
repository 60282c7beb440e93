"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 usage or infeasible/invalid input,
3 segmentation failure, 4 verification divergence.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench as benchmod
from .io import ParseError, format_weight, read_network, write_network
from .layout import flatten
from .netgen import GenSpec, InfeasibleSpec, generate, spec_for
from .network import ValidationError
from .parallel import DebugHooks, ParallelConfig, eval_parallel
from .segmentation import OutputUnreachable, depth, segment
from .sequential import InputArityMismatch, eval_sequential, read_outputs

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_SEGMENT, EXIT_DIVERGED = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _workers(text: str):
    if text == "auto":
        return "auto"
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'auto', got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("workers must be >= 1")
    return n


def _int_list(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _load(path: str):
    try:
        return read_network(path)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc))
    except (ParseError, ValidationError) as exc:
        raise CliError(EXIT_USAGE, str(exc))


def cmd_generate(args) -> int:
    spec = GenSpec(
        input_count=args.inputs,
        output_count=args.outputs,
        hidden_count=args.hidden,
        connection_count=args.connections,
        target_depth=args.depth,
        weight_range=(args.weight_min, args.weight_max),
        seed=args.seed,
    )
    try:
        net = generate(spec)
    except InfeasibleSpec as exc:
        raise CliError(EXIT_USAGE, str(exc))
    try:
        write_network(net, args.out, provenance=spec)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc))
    print(f"nodes={net.node_count} connections={len(net.connections)} depth={depth(segment(net))}")
    return EXIT_OK


def cmd_segment(args) -> int:
    net = _load(args.path)
    a = segment(net, strict=False)
    if args.json:
        print(
            json.dumps(
                {
                    "depth": depth(a),
                    "layers": [list(m) for m in a.layers],
                    "unassigned": sorted(a.unassigned),
                }
            )
        )
    else:
        widths = ",".join(str(w) for w in a.widths)
        print(f"layers={depth(a)} widths=[{widths}] unassigned={len(a.unassigned)}")
    missing = a.unassigned.intersection(net.outputs)
    if missing:
        raise CliError(EXIT_SEGMENT, f"output node(s) unreachable: {sorted(missing)}")
    return EXIT_OK


def _prepare(net):
    try:
        return flatten(net, segment(net))
    except OutputUnreachable as exc:
        raise CliError(EXIT_SEGMENT, str(exc))


def cmd_eval(args) -> int:
    net = _load(args.path)
    layout = _prepare(net)
    try:
        if args.backend == "seq":
            state = eval_sequential(layout, args.inputs)
        else:
            cfg = ParallelConfig(workers=args.workers, engine=args.engine)
            state = eval_parallel(layout, args.inputs, cfg)
    except InputArityMismatch as exc:
        raise CliError(EXIT_USAGE, str(exc))
    for v in read_outputs(state, net):
        print(format_weight(v))
    return EXIT_OK


def _fault_weight(layout, seq_state) -> int:
    """Index of the edge whose sign flip moves its target's sum the most."""
    contrib = np.abs(layout.in_weights * seq_state.outputs[layout.in_nodes])
    return int(np.argmax(contrib))


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise CliError(EXIT_USAGE, "--trials must be >= 1")
    if not 1 <= args.min_conn <= args.max_conn:
        raise CliError(EXIT_USAGE, "need 1 <= --min-conn <= --max-conn")
    if not 2 <= args.min_depth <= args.max_depth:
        raise CliError(EXIT_USAGE, "need 2 <= --min-depth <= --max-depth")

    master = np.random.SeedSequence(args.seed)
    cfg = ParallelConfig(workers=args.workers, engine=args.engine)
    for trial, child in enumerate(master.spawn(args.trials)):
        net_seed = int(child.generate_state(1, np.uint64)[0])
        rng = np.random.Generator(np.random.PCG64(child))
        conns = int(rng.integers(args.min_conn, args.max_conn + 1))
        d = int(rng.integers(args.min_depth, args.max_depth + 1))
        spec = spec_for(
            conns,
            d,
            net_seed,
            inputs=int(rng.integers(1, 17)),
            outputs=int(rng.integers(1, 9)),
        )
        try:
            net = generate(spec)
        except InfeasibleSpec as exc:
            raise CliError(EXIT_USAGE, f"trial {trial}: {exc}")
        layout = flatten(net, segment(net))
        x = rng.uniform(-2.0, 2.0, size=len(net.inputs))

        seq = eval_sequential(layout, x)
        hooks = DebugHooks(flip_weight=_fault_weight(layout, seq)) if args.inject_fault else None
        par = eval_parallel(layout, x, cfg, hooks)

        diff = np.abs(seq.outputs.astype(np.float64) - par.outputs.astype(np.float64))
        bad = np.flatnonzero(diff > args.tolerance)
        if bad.size:
            # first divergence in evaluation order
            pos = np.flatnonzero(np.isin(layout.ids, bad))[0]
            k = int(layout.ids[pos])
            node = int(layout.original_ids[k])
            print(
                f"DIVERGENCE trial={trial} node={node} layer={int(layout.layer[pos])} "
                f"sequential={format_weight(seq.outputs[k])} parallel={format_weight(par.outputs[k])} "
                f"abs_diff={diff[k]:.3e}"
            )
            print(
                f"reproduce: asnn generate --inputs {spec.input_count} --outputs {spec.output_count} "
                f"--hidden {spec.hidden_count} --connections {spec.connection_count} "
                f"--depth {spec.target_depth} --seed {net_seed} -o diverged.asnn"
            )
            return EXIT_DIVERGED
        if args.verbose:
            print(
                f"trial {trial}: connections={conns} depth={d} nodes={layout.node_count} "
                f"max_abs_diff={float(diff.max()):.3e}"
            )
    print(f"verify: {args.trials} trial(s) agree within {args.tolerance:g}")
    return EXIT_OK


def cmd_bench(args) -> int:
    master = np.random.SeedSequence(args.seed)
    pairs = [(c, d) for c in args.connections for d in args.depths]
    corpus = {}
    for (c, d), child in zip(pairs, master.spawn(len(pairs))):
        seed = int(child.generate_state(1, np.uint64)[0])
        spec = spec_for(c, d, seed, inputs=args.net_inputs, outputs=args.net_outputs)
        try:
            corpus[f"c{c:07d}_d{d:03d}"] = generate(spec)
        except InfeasibleSpec as exc:
            raise CliError(EXIT_USAGE, f"connections={c} depth={d}: {exc}")

    cfg = ParallelConfig(workers=args.workers, engine=args.engine)
    report = benchmod.run_bench(
        corpus,
        cfg,
        args.warmup,
        reps_seq=args.reps_seq,
        reps_par=args.reps_par,
        include_preprocessing=args.include_preprocessing,
    )
    meta = dict(report.metadata)
    meta["seed"] = str(args.seed)
    meta["failures"] = str(len(report.failures))
    for name, message in report.failures:
        meta[f"failure.{name}"] = message
    try:
        paths = benchmod.write_csv(report.records, report.speedups, args.csv, meta)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc))
    for s in sorted(report.speedups, key=lambda s: s.network_id):
        print(f"{s.network_id} connections={s.connections} layers={s.layers} speedup={s.speedup:.3f}")
    print("wrote " + " ".join(str(p) for p in paths))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asnn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a random layered network")
    g.add_argument("--inputs", type=int, required=True)
    g.add_argument("--outputs", type=int, required=True)
    g.add_argument("--hidden", type=int, required=True)
    g.add_argument("--connections", type=int, required=True)
    g.add_argument("--depth", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--weight-min", type=float, default=-1.0)
    g.add_argument("--weight-max", type=float, default=1.0)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("segment", help="print the layer structure of a network file")
    s.add_argument("path")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_segment)

    e = sub.add_parser("eval", help="activate a network once")
    e.add_argument("path")
    e.add_argument("--inputs", type=_float_list, required=True, help="comma-separated values")
    e.add_argument("--backend", choices=["seq", "par"], default="seq")
    e.add_argument("--workers", type=_workers, default="auto")
    e.add_argument("--engine", choices=["compiled", "threads"], default="compiled")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="check parallel results against the sequential evaluator")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--min-conn", type=int, default=100)
    v.add_argument("--max-conn", type=int, default=50_000)
    v.add_argument("--min-depth", type=int, default=3)
    v.add_argument("--max-depth", type=int, default=40)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tolerance", type=float, default=1e-5)
    v.add_argument("--workers", type=_workers, default="auto")
    v.add_argument("--engine", choices=["compiled", "threads"], default="compiled")
    v.add_argument("--verbose", action="store_true")
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="time both evaluators over a generated sweep")
    b.add_argument("--connections", type=_int_list, required=True)
    b.add_argument("--depths", type=_int_list, required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--reps-seq", type=int, default=benchmod.SEQ_REPS)
    b.add_argument("--reps-par", type=int, default=benchmod.PAR_REPS)
    b.add_argument("--warmup", type=int, default=1)
    b.add_argument("--workers", type=_workers, default="auto")
    b.add_argument("--engine", choices=["compiled", "threads"], default="compiled")
    b.add_argument("--net-inputs", type=int, default=16)
    b.add_argument("--net-outputs", type=int, default=8)
    b.add_argument("--include-preprocessing", action="store_true")
    b.add_argument("--csv", required=True, help="output path prefix")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "bench" and (args.reps_seq < 1 or args.reps_par < 1 or args.warmup < 1):
        print("asnn: error: repetition and warmup counts must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except CliError as exc:
        print(f"asnn: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
