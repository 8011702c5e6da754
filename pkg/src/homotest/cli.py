"""Command-line interface.

Subcommands: ``test`` (one hypothesis test, JSON report), ``describe``
(statistic plus bootstrap p-values under several nulls, with optional
figures), ``generate`` (draw a synthetic graph from a model file), and
``simulate`` (Monte Carlo rejection-rate sweep from a scenario file).

Exit codes: 0 success, 2 parse/validation problems, 3 degenerate input
(statistic undefined on the observed graph). The master seed comes from
--seed, falling back to the HOMOTEST_SEED environment variable, then 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .errors import (
    AssignmentError,
    DegenerateInputError,
    HomotestError,
    ParseError,
    SearchSpaceError,
    ValidationError,
)
from .experiments import ScenarioConfig, run_scenario
from .graph import parse_edge_list, parse_labels, write_edge_list
from .inference import asymptotic_test, bootstrap_test, labeled_bootstrap_test
from .models import expected_matrix, params_from_dict, planted_for, sampler_for
from .homophily import gamma
from .rng import substream, substream_seed

_NULL_CHOICES = ("er", "chung-lu", "lsm")
_DETECTOR_CHOICES = ("walktrap", "walktrap-t", "local-search", "exhaustive")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write_output(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HOMOTEST_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"HOMOTEST_SEED must be an integer, got {env!r}") from None


def _load_graph(args):
    return parse_edge_list(
        _read_text(args.input),
        indexing=args.indexing,
        symmetrize=True,
        drop_self_loops=True,
    )


def cmd_test(args) -> int:
    g = _load_graph(args)
    seed = _resolve_seed(args)
    if args.method == "asymptotic":
        if args.null != "er":
            raise ValidationError("the asymptotic test supports only the er null")
        if args.labels:
            raise ValidationError("the asymptotic test does not take fixed labels")
        report = asymptotic_test(
            g,
            detector=args.detector,
            k=args.k,
            alpha=args.alpha,
            epsilon=args.epsilon,
            equal_sizes=(args.count == "equal"),
            seed=seed,
            t=args.walk_length,
        )
    elif args.labels:
        labels = parse_labels(_read_text(args.labels), n=g.n)
        report = labeled_bootstrap_test(
            g,
            labels,
            null=args.null,
            B=args.replicates,
            alpha=args.alpha,
            seed=seed,
            threads=args.threads,
        )
    else:
        report = bootstrap_test(
            g,
            null=args.null,
            detector=args.detector,
            B=args.replicates,
            alpha=args.alpha,
            seed=seed,
            threads=args.threads,
            t=args.walk_length,
        )
    _write_output(report.to_json(), args.output)
    if args.samples_csv and report.bootstrap_samples is not None:
        from .figures import samples_csv

        Path(args.samples_csv).write_text(samples_csv(report.bootstrap_samples))
    return 0


def cmd_describe(args) -> int:
    g = _load_graph(args)
    seed = _resolve_seed(args)
    nulls = [x.strip() for x in args.nulls.split(",") if x.strip()]
    if not nulls:
        raise ValidationError("--nulls must name at least one null model")
    reports = {}
    for idx, null in enumerate(nulls):
        reports[null] = bootstrap_test(
            g,
            null=null,
            detector=args.detector,
            B=args.replicates,
            alpha=args.alpha,
            seed=substream_seed(seed, 100 + idx),
            threads=args.threads,
        )
    first = next(iter(reports.values()))
    doc = {
        "schema_version": 1,
        "n": g.n,
        "m": g.m,
        "detector": first.detector,
        "t_obs": first.t_obs,
        "B": args.replicates,
        "alpha": args.alpha,
        "seed": seed,
        "nulls": {
            null: {
                "p_value": rep.p_value,
                "p_display": rep.p_display(),
                "reject": rep.reject,
                "flags": rep.flags,
            }
            for null, rep in reports.items()
        },
    }

    # CSV reports always get figures next to the delimited files
    figures = args.figures
    if figures is None and args.format == "csv":
        figures = args.output if args.output else "."
    if figures:
        from .detection import detect_communities
        from .figures import adjacency_csv, fig_adjacency_blocks, fig_null_histograms

        fig_dir = Path(figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        fig_null_histograms(
            {null: rep.bootstrap_samples for null, rep in reports.items()},
            first.t_obs,
            str(fig_dir / "histogram.svg"),
        )
        c_obs, _ = detect_communities(g, args.detector, rng=substream(seed, 0), t=4)
        fig_adjacency_blocks(g, c_obs, str(fig_dir / "adjacency.png"))
        (fig_dir / "adjacency.csv").write_text(adjacency_csv(g, c_obs))

    if args.format == "csv":
        from .figures import samples_csv

        out_dir = Path(args.output) if args.output else Path(".")
        out_dir.mkdir(parents=True, exist_ok=True)
        for null, rep in reports.items():
            safe = null.replace("-", "_")
            (out_dir / f"samples_{safe}.csv").write_text(
                samples_csv(rep.bootstrap_samples)
            )
        doc_no_samples = json.dumps(doc, indent=2) + "\n"
        (out_dir / "metadata.json").write_text(doc_no_samples)
    else:
        doc["nulls"] = {
            null: {**entry, "samples": reports[null].to_dict()["bootstrap_samples"]}
            for null, entry in doc["nulls"].items()
        }
        _write_output(json.dumps(doc, indent=2) + "\n", args.output)
    return 0


def cmd_generate(args) -> int:
    spec = json.loads(_read_text(args.model))
    seed = _resolve_seed(args)
    params = params_from_dict(spec, rng=substream(seed, 0))
    sampler = sampler_for(params)
    g = sampler(substream(seed, 1))
    _write_output(write_edge_list(g, indexing=args.indexing), args.output)
    planted = planted_for(params)
    if args.labels_out:
        if planted is None:
            raise ValidationError("model has no planted labels to write")
        Path(args.labels_out).write_text(
            "\n".join(str(x) for x in planted.labels) + "\n"
        )
    if args.summary:
        summary = {
            "kind": type(params).__name__,
            "n": g.n,
            "m": g.m,
            "density": g.density(),
            "seed": seed,
        }
        if planted is not None:
            summary["population_homophily"] = gamma(
                expected_matrix(params, rng=substream(seed, 2)).values, planted
            )
        Path(args.summary).write_text(json.dumps(summary, indent=2) + "\n")
    return 0


def cmd_simulate(args) -> int:
    config = ScenarioConfig.from_json(_read_text(args.scenario))
    result = run_scenario(config, threads=args.threads)
    _write_output(result.to_csv(), args.output)
    if args.figures:
        from .figures import fig_rejection_curve

        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        fig_rejection_curve(result, str(fig_dir / "rejection_curve.png"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homotest",
        description="Homophily measurement and hypothesis tests for networks.",
    )
    parser.add_argument("--version", action="version", version=f"homotest {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default: HOMOTEST_SEED or 0)")
    common.add_argument("--threads", type=int, default=1, help="worker processes (results identical for any value)")
    common.add_argument("--output", default=None, help="output file (default: stdout)")

    graphish = argparse.ArgumentParser(add_help=False)
    graphish.add_argument("input", help="edge-list file (two ids per line, # comments allowed)")
    graphish.add_argument("--indexing", choices=("zero", "one"), default="zero")

    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", parents=[common, graphish], help="run one hypothesis test")
    p_test.add_argument("--method", choices=("bootstrap", "asymptotic"), default="bootstrap")
    p_test.add_argument("--null", choices=_NULL_CHOICES, default="er")
    p_test.add_argument("--detector", choices=_DETECTOR_CHOICES, default="walktrap")
    p_test.add_argument("--labels", default=None, help="fixed labels file (skips detection)")
    p_test.add_argument("-B", "--replicates", type=int, default=200)
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--k", type=int, default=None, help="community count for the threshold (default: detected)")
    p_test.add_argument("--epsilon", type=float, default=0.0)
    p_test.add_argument("--count", choices=("equal", "general"), default="equal",
                        help="search-space count in the threshold")
    p_test.add_argument("--walk-length", type=int, default=4)
    p_test.add_argument("--samples-csv", default=None, help="also write replicate values as CSV")
    p_test.set_defaults(func=cmd_test)

    p_desc = sub.add_parser("describe", parents=[common, graphish],
                            help="statistic and bootstrap p-values under several nulls")
    p_desc.add_argument("--nulls", default="er,chung-lu", help="comma-separated null models")
    p_desc.add_argument("--detector", choices=_DETECTOR_CHOICES, default="walktrap")
    p_desc.add_argument("-B", "--replicates", type=int, default=200)
    p_desc.add_argument("--alpha", type=float, default=0.05)
    p_desc.add_argument("--figures", default=None, help="directory for histogram and adjacency figures")
    p_desc.add_argument("--format", choices=("json", "csv"), default="json")
    p_desc.set_defaults(func=cmd_describe)

    p_gen = sub.add_parser("generate", parents=[common], help="draw a synthetic graph")
    p_gen.add_argument("--model", required=True, help="model parameter JSON file")
    p_gen.add_argument("--indexing", choices=("zero", "one"), default="zero")
    p_gen.add_argument("--labels-out", default=None, help="write planted labels here")
    p_gen.add_argument("--summary", default=None, help="write a JSON summary here")
    p_gen.set_defaults(func=cmd_generate)

    p_sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo rejection-rate sweep")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON file")
    p_sim.add_argument("--figures", default=None, help="directory for the rejection-curve figure")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, SearchSpaceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateInputError, AssignmentError) as exc:
        print(f"error: degenerate input: {exc}", file=sys.stderr)
        return 3
    except HomotestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
