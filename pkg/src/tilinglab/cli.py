"""Command-line front door.

One binary, one subcommand per invocation.  Exit codes: 0 success,
1 invalid input, 2 an exact answer could not be reached (budget
exhausted or search inconclusive).  All randomness flows from --seed;
identical invocations produce byte-identical canonical output.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from . import families
from .factor import InputError, SearchBudget, has_kr_factor
from .graphs import Graph, GraphError, LabeledPartition, bits, mask_of
from .io import read_graph, write_graph
from .partition import (
    PartitionParams,
    build_good_partition,
    has_gamma_independent_set,
    min_edges_subset,
    verify_good_partition,
)
from .pipeline import STAGE_DONE, run_pipeline, vertex_cover_sweep
from .report import SCHEMA, canonical_json, render_histogram, report_csv
from .robustness import (
    EXACT_ENUMERATION_CEILING,
    EngineUnknownError,
    SamplingConfig,
    count_factor_subsets,
    estimate_factor_probability,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNKNOWN = 2


def _emit(payload: dict, output: Optional[str]) -> None:
    payload = dict(payload)
    payload["schema"] = SCHEMA
    text = canonical_json(payload)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _budget(args) -> SearchBudget:
    return SearchBudget(max_nodes=args.max_nodes, deadline=args.deadline)


def _params(args) -> PartitionParams:
    return PartitionParams(
        alpha=args.alpha,
        beta=args.beta,
        beta_prime=args.beta_prime,
        gamma=args.gamma,
        n=args.n,
        r=args.r,
    )


def _read_partition(path: str) -> LabeledPartition:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        return LabeledPartition.from_json(json.load(fh))


def cmd_gen(args) -> int:
    spec = families.FamilySpec.parse(args.family)
    if args.seed is not None:
        spec = families.FamilySpec(
            spec.family, r=spec.r, n=spec.n, v=spec.v, d=spec.d, seed=args.seed
        )
    g, partition = families.generate(spec)
    comments = [f"family {args.family}"]
    write_graph(args.output, g, comments)
    if args.partition_out:
        if partition is None:
            raise InputError(f"family {spec.family!r} has no canonical partition")
        with open(args.partition_out, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(partition.to_json()))
    return EXIT_OK


def cmd_check_factor(args) -> int:
    g = read_graph(args.graph)
    res = has_kr_factor(g, args.r, _budget(args))
    _emit({"command": "check-factor", "r": args.r, "result": res.to_json()},
          args.output)
    return EXIT_UNKNOWN if res.exists is None else EXIT_OK


def cmd_count_subsets(args) -> int:
    g = read_graph(args.graph)
    try:
        est = count_factor_subsets(g, args.r, _budget(args))
    except EngineUnknownError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    _emit({"command": "count-subsets", "estimate": est.to_json()}, args.output)
    return EXIT_OK


def cmd_estimate_prob(args) -> int:
    g = read_graph(args.graph)
    cfg = SamplingConfig(p=args.p, trials=args.trials, seed=args.seed,
                         budget_per_trial=_budget(args))
    est = estimate_factor_probability(g, args.r, cfg)
    _emit({"command": "estimate-prob", "estimate": est.to_json()}, args.output)
    return EXIT_UNKNOWN if est.unknown_trials else EXIT_OK


def cmd_find_sparse(args) -> int:
    g = read_graph(args.graph)
    if args.gamma is not None:
        res = has_gamma_independent_set(
            g, args.size, args.gamma, args.n_scale or g.n, _budget(args)
        )
        _emit({
            "command": "find-sparse",
            "found": res.found,
            "witness": None if res.witness is None else sorted(bits(res.witness)),
            "min_edges": res.min_edges,
            "threshold": res.threshold,
        }, args.output)
        return EXIT_UNKNOWN if res.found is None else EXIT_OK
    res = min_edges_subset(g, args.size, _budget(args))
    _emit({
        "command": "find-sparse",
        "subset": sorted(bits(res.subset)),
        "edges_inside": res.edges_inside,
        "exact": res.is_exact,
    }, args.output)
    return EXIT_OK if res.is_exact else EXIT_UNKNOWN


def cmd_build_partition(args) -> int:
    g = read_graph(args.graph)
    out = build_good_partition(g, _params(args), budget=_budget(args))
    payload = {
        "command": "build-partition",
        "partition": None if out.partition is None else out.partition.to_json(),
        "report": None if out.report is None else out.report.to_json(),
        "failure": out.failure,
    }
    _emit(payload, args.output)
    if out.report is not None and out.report.inconclusive:
        return EXIT_UNKNOWN
    return EXIT_OK


def cmd_verify_partition(args) -> int:
    g = read_graph(args.graph)
    p = _read_partition(args.partition)
    report = verify_good_partition(g, p, _params(args), _budget(args))
    _emit({"command": "verify-partition", "report": report.to_json()}, args.output)
    return EXIT_UNKNOWN if report.inconclusive else EXIT_OK


def cmd_run_pipeline(args) -> int:
    g = read_graph(args.graph)
    p = _read_partition(args.partition)
    params = _params(args)
    report = verify_good_partition(g, p, params, _budget(args))
    if not report.is_good:
        print(
            f"error: partition is not good, failing conditions: {report.failing()}",
            file=sys.stderr,
        )
        return EXIT_INPUT
    state = run_pipeline(g, p, params, relaxed=args.relaxed)
    payload = {
        "command": "run-pipeline",
        "stage": state.stage,
        "failure": state.failure,
        "ledger": state.ledger.to_json(),
        "factor": None if state.factor is None else state.factor.to_json(params.r),
    }
    _emit(payload, args.output)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(state.trace_jsonl())
    return EXIT_OK if state.stage == STAGE_DONE else EXIT_UNKNOWN


def cmd_vc_sweep(args) -> int:
    g = read_graph(args.graph)
    report = vertex_cover_sweep(
        g, args.r, args.n, partitions=args.partitions, seed=args.seed,
        allow_near_regular=args.allow_near_regular, budget=_budget(args),
    )
    _emit({"command": "vc-sweep", "report": report.to_json()}, args.output)
    return EXIT_OK


def cmd_report(args) -> int:
    g = read_graph(args.graph)
    os.makedirs(args.outdir, exist_ok=True)
    graph_id = os.path.splitext(os.path.basename(args.graph))[0]
    sampled = args.sampled or g.n > EXACT_ENUMERATION_CEILING
    if sampled:
        cfg = SamplingConfig(p=args.p, trials=args.trials, seed=args.seed,
                             budget_per_trial=_budget(args))
        est = estimate_factor_probability(g, args.r, cfg)
    else:
        try:
            est = count_factor_subsets(g, args.r, _budget(args))
        except EngineUnknownError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_UNKNOWN
    row = {
        "graph_id": graph_id,
        "r": args.r,
        "mode": est.mode,
        "p": est.p,
        "trials": est.trials,
        "count_with_empty": est.count_with_empty,
        "count_without_empty": est.count_without_empty,
        "fraction": est.fraction,
        "std_error": est.std_error,
        "unknown_trials": est.unknown_trials,
        "histogram": None if est.histogram is None else list(est.histogram),
    }
    with open(os.path.join(args.outdir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json({"schema": SCHEMA, "report": row}))
    with open(os.path.join(args.outdir, "report.csv"), "w", encoding="utf-8") as fh:
        fh.write(report_csv([row]))
    if est.mode == "exact":
        render_histogram(
            est.histogram,
            os.path.join(args.outdir, "histogram.png"),
            title=f"{graph_id}: good subsets by size (r={args.r})",
        )
    return EXIT_UNKNOWN if (est.unknown_trials or 0) else EXIT_OK


def _add_common(sp, graph=True) -> None:
    if graph:
        sp.add_argument("-g", "--graph", required=True, help="graph file path")
    sp.add_argument("-o", "--output", help="write canonical JSON here instead of stdout")
    sp.add_argument("--max-nodes", type=int, default=20_000_000,
                    help="search budget: node limit")
    sp.add_argument("--deadline", type=float, default=120.0,
                    help="search budget: wall-clock seconds")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker cap (accepted for compatibility; execution is sequential)")


def _add_params(sp) -> None:
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--beta-prime", type=float, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--n", type=int, required=True, help="scale parameter")
    sp.add_argument("-r", type=int, required=True, help="clique order")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tilinglab",
        description="clique-factor laboratory: generation, search, counting, pipelines",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="generate a family instance")
    sp.add_argument("family", help='family shorthand, e.g. "balanced:r=3,n=3"')
    sp.add_argument("-o", "--output", required=True, help="graph file to write")
    sp.add_argument("--partition-out", help="write the canonical partition JSON here")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("check-factor", help="exact K_r-factor decision")
    _add_common(sp)
    sp.add_argument("-r", type=int, required=True)
    sp.set_defaults(func=cmd_check_factor)

    sp = sub.add_parser("count-subsets", help="exact good-subset count")
    _add_common(sp)
    sp.add_argument("-r", type=int, required=True)
    sp.set_defaults(func=cmd_count_subsets)

    sp = sub.add_parser("estimate-prob", help="Monte Carlo factor probability")
    _add_common(sp)
    sp.add_argument("-r", type=int, required=True)
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_estimate_prob)

    sp = sub.add_parser("find-sparse", help="sparsest subset of a given size")
    _add_common(sp)
    sp.add_argument("--size", type=int, required=True)
    sp.add_argument("--gamma", type=float, default=None,
                    help="decide gamma-independence instead of reporting the minimum")
    sp.add_argument("--n-scale", type=int, default=None)
    sp.set_defaults(func=cmd_find_sparse)

    sp = sub.add_parser("build-partition", help="construct a good partition")
    _add_common(sp)
    _add_params(sp)
    sp.set_defaults(func=cmd_build_partition)

    sp = sub.add_parser("verify-partition", help="check the seven partition conditions")
    _add_common(sp)
    _add_params(sp)
    sp.add_argument("--partition", required=True, help="partition JSON file")
    sp.set_defaults(func=cmd_verify_partition)

    sp = sub.add_parser("run-pipeline", help="extremal-case factor construction")
    _add_common(sp)
    _add_params(sp)
    sp.add_argument("--partition", required=True, help="partition JSON file")
    sp.add_argument("--trace", help="write a JSONL stage trace here")
    sp.add_argument("--relaxed", action="store_true",
                    help="allow non-good fallback vertices in clique extensions")
    sp.set_defaults(func=cmd_run_pipeline)

    sp = sub.add_parser("vc-sweep", help="per-class minimum vertex cover sweep")
    _add_common(sp)
    sp.add_argument("-r", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--partitions", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--allow-near-regular", action="store_true")
    sp.set_defaults(func=cmd_vc_sweep)

    sp = sub.add_parser("report", help="robustness report with figures")
    _add_common(sp)
    sp.add_argument("-r", type=int, required=True)
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--sampled", action="store_true",
                    help="force Monte Carlo mode even below the exact ceiling")
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_report)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GraphError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
