"""Command-line entry point: ``generate``, ``learn``, ``experiment``, ``bench``.

Exit codes: 0 success, 1 internal error, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .errors import GGMError
from .experiment import (
    ExperimentConfig,
    bench_learn,
    derive_seed,
    loglog_slope,
    run_experiment,
    write_experiment,
)
from .model import ModelParams, derive_params, generate_model, load_model, save_model
from .recovery import evaluate, recover_graph, report_dict, write_report
from .sampler import draw_samples, read_samples_csv, write_samples_csv

log = logging.getLogger("sparsitron_ggm")

EXIT_OK, EXIT_INTERNAL, EXIT_BAD_INPUT = 0, 1, 2

# flag name -> ExperimentConfig field
_CONFIG_FLAGS = {
    "p": "p",
    "degree": "degree",
    "T": "T",
    "M": "M",
    "delta": "delta",
    "trials": "trials",
    "seed": "seed",
    "stride": "candidate_stride",
    "fresh_per_node": "fresh_samples_per_node",
    "perfect_input": "perfect_input",
    "out": "output_path",
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--p", type=int)
    parser.add_argument("--degree", type=int)
    parser.add_argument("--kappa-min", type=float, dest="kappa_min")
    parser.add_argument("--kappa-max", type=float, dest="kappa_max")
    parser.add_argument("--T", type=int)
    parser.add_argument("--M", type=int)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--stride", type=int)
    parser.add_argument("--fresh-per-node", action="store_true", default=None, dest="fresh_per_node")
    parser.add_argument("--out")


def build_config(args) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
    for flag, name in _CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[name] = value
    lo, hi = data.get("strength_range", ExperimentConfig.strength_range)
    if args.kappa_min is not None:
        lo = args.kappa_min
    if args.kappa_max is not None:
        hi = args.kappa_max
    if hi < lo:
        hi = lo
    data["strength_range"] = (lo, hi)
    return ExperimentConfig.from_dict(data)


def cmd_generate(args) -> int:
    config = build_config(args)
    out = Path(config.output_path or ".")
    out.mkdir(parents=True, exist_ok=True)
    model = generate_model(
        config.p, config.degree, config.strength_range, derive_seed(config.seed, 0, 0)
    )
    params = derive_params(model)
    block = draw_samples(model, config.T + config.M, derive_seed(config.seed, 0, 1))
    save_model(model, out / "model.json")
    write_samples_csv(block, out / "samples.csv")
    kappa = "absent" if params.kappa is None else repr(params.kappa)
    print(f"kappa={kappa} lambda={params.lam!r} theta_max={params.theta_max!r} nu_max={params.nu_max!r}")
    print(f"wrote {out / 'model.json'} and {out / 'samples.csv'} ({block.m} rows, {len(model.edges)} edges)")
    return EXIT_OK


def _learn_params(args, model_data):
    values = dict(model_data.get("params", {})) if model_data else {}
    overrides = {
        "kappa": args.kappa,
        "lambda": args.lam,
        "theta_max": args.theta_max,
        "nu_max": args.nu_max,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    missing = [k for k in ("lambda", "theta_max", "nu_max") if values.get(k) is None]
    if missing:
        raise GGMError(f"missing model parameters: {', '.join(missing)}")
    params = ModelParams.from_dict(values)
    if params.kappa is None:
        raise GGMError("kappa is required (graph file has no edges); pass --kappa")
    return params


def cmd_learn(args) -> int:
    model = None
    model_data = None
    if args.model:
        model_data = json.loads(Path(args.model).read_text())
        if "theta" in model_data:
            model = load_model(args.model)
            model_data.setdefault("params", derive_params(model).to_dict())
    params = _learn_params(args, model_data)
    block = read_samples_csv(args.samples)
    T = args.T if args.T is not None else 20_000
    M = args.M if args.M is not None else 2_000
    delta = args.delta if args.delta is not None else 0.1
    stride = args.stride if args.stride is not None else 1
    graph, estimates = recover_graph(block, params, T, M, delta, stride=stride)
    metrics = evaluate(graph, model, estimates) if model is not None else None
    report = report_dict(graph, estimates, metrics)
    if args.out:
        write_report(report, args.out)
    print(f"recovered {len(graph.edges())} edges (threshold {graph.threshold:.6g})")
    if metrics is not None:
        print(
            f"exact_match={metrics.exact_match} missed={metrics.missed_edges} extra={metrics.extra_edges}"
        )
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = build_config(args)

    def progress(k, metrics):
        log.info("trial %d exact=%s missed=%d extra=%d", k, metrics.exact_match,
                 metrics.missed_edges, metrics.extra_edges)

    report = run_experiment(config, progress=progress)
    if config.output_path:
        write_experiment(report, config.output_path)
    print(f"success_rate={report.success_rate:.4f} over {config.trials} trials")
    return EXIT_OK


def cmd_bench(args) -> int:
    p_list = [int(x) for x in args.p_list.split(",")]
    if any(p < 2 for p in p_list):
        raise GGMError("every p must be >= 2")
    T = args.T if args.T is not None else 4_500
    M = args.M if args.M is not None else 500
    seed = args.seed if args.seed is not None else 0
    rows = bench_learn(p_list, T, M, seed, repeats=args.repeats)
    fields = ["p", "total_seconds", "per_node_seconds", "hedge_seconds", "score_seconds"]
    out = sys.stdout if not args.out else open(args.out, "w", newline="")
    try:
        writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    if len(rows) >= 2:
        slope = loglog_slope([r["p"] for r in rows], [r["total_seconds"] for r in rows])
        print(f"log-log slope of total time vs p: {slope:.3f}", file=sys.stderr)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsitron-ggm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a random model and a sample CSV")
    _add_common(gen)
    gen.set_defaults(func=cmd_generate)

    learn = sub.add_parser("learn", help="recover the graph from a sample CSV")
    _add_common(learn)
    learn.add_argument("--model", help="model JSON (params and, if present, ground truth)")
    learn.add_argument("--samples", required=True)
    learn.add_argument("--kappa", type=float)
    learn.add_argument("--lambda", type=float, dest="lam")
    learn.add_argument("--theta-max", type=float, dest="theta_max")
    learn.add_argument("--nu-max", type=float, dest="nu_max")
    learn.set_defaults(func=cmd_learn)

    exp = sub.add_parser("experiment", help="repeated generate/learn/evaluate trials")
    _add_common(exp)
    exp.add_argument("--perfect-input", action="store_true", default=None, dest="perfect_input",
                     help="threshold the exact weight vectors instead of learning")
    exp.set_defaults(func=cmd_experiment)

    bench = sub.add_parser("bench", help="time graph learning across p")
    _add_common(bench)
    bench.add_argument("--p-list", default="8,16,32")
    bench.add_argument("--repeats", type=int, default=1)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (GGMError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
