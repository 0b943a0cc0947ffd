"""Command-line pipeline: ``gen``, ``run``, ``vote``, ``select``, ``bench``, ``report``.

Every stage reads and writes only dataset files and ``OUT/cache.jsonl``, so
stages can be re-run independently.  Exit codes: 0 success, 1 validation
error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import cache
from .benchmarks import ConsensusConfig, consensus_cluster_count, expected_value_baseline
from .dataset import DatasetError, load_csv, subsample
from .ensemble import CONSTRUCTIONS, SCHEMES, EnsembleError, smallest_mode
from .experiment import (
    ConfigError,
    approach_votes,
    default_config,
    global_vote_records,
    load_config,
    load_datasets,
    run_experiment,
    top_level_datasets,
    vote_records,
    write_datasets,
)
from .grid import GridError
from .report import REPORTS, ReportError, emit_report
from .selection import rank_by_accuracy, rank_by_stability, rankings_csv

log = logging.getLogger("ensemble_k")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _config(args):
    config = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        config = config.with_seed(args.seed)
    return config


def _out(args, config=None) -> Path:
    if args.out:
        return Path(args.out)
    if config is not None:
        return Path(config.output)
    return Path("results")


def cmd_gen(args):
    config = _config(args)
    paths = write_datasets(load_datasets(config), _out(args, config) / "datasets")
    for p in paths:
        print(p)


def cmd_run(args):
    config = _config(args)
    if args.construction or args.scheme:
        import dataclasses
        config = dataclasses.replace(
            config,
            construction=args.construction or config.construction,
            scheme=args.scheme or config.scheme,
        )
    out = _out(args, config)
    summary = run_experiment(config, out, workers=args.workers)
    print(f"cache: {out / 'cache.jsonl'}")
    print(f"datasets: {summary['n_datasets']}  cells: {summary['n_cells']}  "
          f"failed: {summary['n_failed_cells']}")
    for approach, acc in summary["accuracy"].items():
        print(f"  {approach:<10} accuracy {100 * acc:6.2f}")


def cmd_vote(args):
    path = _out(args) / "cache.jsonl"
    records = cache.read_cache(path)
    tables = cache.load_tables(records)
    records = cache.replace_records(path, "vote", vote_records(tables))
    records = cache.replace_records(path, "global_vote", global_vote_records(records))
    construction = args.construction or "mode"
    scheme = args.scheme or "full"
    for ds, votes in approach_votes(records).items():
        print(f"{ds}\t{votes[(construction, scheme)]}")


def _ranking_record(kind, scope, c):
    return {
        "type": "ranking", "kind": kind, "scope": scope,
        "algorithm": c.algorithm, "hyper_index": c.hyper_index,
        "hyperparameters": c.hyper_text(), "metric_index": c.metric_index,
        "metric": c.metric, "score": c.score, "rank": c.rank,
    }


def accuracy_rankings(records, construction, scheme) -> dict:
    """``{scope: ranking}``: per parent in subset mode, one ``all`` scope otherwise."""
    tables = {t.dataset_id: t for t in cache.load_tables(records)}
    parents = {d["dataset_id"]: d["parent"] for d in cache.of_type(records, "dataset")}
    votes = approach_votes(records)
    out = {}
    if any(p is not None for p in parents.values()):
        for scope, v in votes.items():
            subs = [t for ds, t in tables.items() if parents.get(ds) == scope]
            out[scope] = rank_by_accuracy(subs, v[(construction, scheme)])
    else:
        global_k = smallest_mode([v[(construction, scheme)] for v in votes.values()])
        out["all"] = rank_by_accuracy(list(tables.values()), global_k)
    return out


def cmd_select(args):
    out = _out(args)
    path = out / "cache.jsonl"
    records = cache.read_cache(path)
    construction = args.construction or "mode"
    scheme = args.scheme or "full"
    new = []
    acc = accuracy_rankings(records, construction, scheme)
    text = []
    for scope, ranking in acc.items():
        new.extend(_ranking_record("accuracy", scope, c) for c in ranking)
        text.append(rankings_csv(ranking))
    vote_by_table = {v["dataset_id"]: v["k"] for v in cache.of_type(records, "vote", stage="run")
                     if (v["construction"], v["scheme"]) == (construction, scheme)}
    stab_text = []
    for t in cache.load_tables(records):
        ranking = rank_by_stability(t, vote_by_table[t.dataset_id])
        new.extend(_ranking_record("stability", t.dataset_id, c) for c in ranking)
        stab_text.append(f"# {t.dataset_id}\n" + rankings_csv(ranking))
    cache.replace_records(path, "ranking", new)
    (out / "rankings.csv").write_text("".join(text))
    (out / "rankings_stability.csv").write_text("".join(stab_text))
    first = next(iter(acc.values()))
    for c in first:
        if c.rank > 3:
            break
        print(f"{c.rank}\t{c.score:.2f}\t{c.algorithm}\t{c.hyper_text()}\t{c.metric}")


def _dataset_for(record, config, out):
    path = out / "datasets" / f"{record['dataset_id']}.csv"
    if path.exists():
        return load_csv(path)
    for p in config.csv_paths:
        if Path(p).stem == record["dataset_id"]:
            return load_csv(p)
    raise DatasetError(f"dataset file for {record['dataset_id']} not found")


def cmd_bench(args):
    config = _config(args)
    out = _out(args, config)
    path = out / "cache.jsonl"
    records = cache.read_cache(path)
    tables = cache.load_tables(records)
    truth = {d["dataset_id"]: d["true_k"] for d in cache.of_type(records, "dataset")}
    if any(truth[t.dataset_id] is None for t in tables):
        raise ConfigError("benchmarks need labelled datasets")
    bench = [{
        "type": "benchmark", "kind": "expected_value", "name": "expected_value",
        "accuracy": expected_value_baseline(tables, [truth[t.dataset_id] for t in tables]),
    }]

    opts = config.bench
    grid = cache.load_grid(records)
    ranking = next(iter(accuracy_rankings(records, args.construction or "mode",
                                          args.scheme or "full").values()))
    top = top_level_datasets(records)
    limit = opts.get("max_datasets")
    if limit is not None:
        top = top[: int(limit)]
    for algo in ("kmeans", "gmm"):
        if algo not in grid.names:
            continue
        best = next(c for c in ranking if c.algorithm == algo)
        variants = {"D": grid.get(algo).hypers[0], "B": grid.get(algo).hypers[best.hyper_index]}
        for tag, hyper in variants.items():
            hits, per = 0, {}
            for i, rec in enumerate(top):
                data = subsample(_dataset_for(rec, config, out), int(opts.get("cap", 1000)), i)
                cc = ConsensusConfig(
                    algorithm=algo, hyper=dict(hyper), k_range=grid.k_range,
                    n_resamples=int(opts.get("n_resamples", 50)),
                    subsample_fraction=float(opts.get("subsample_fraction", 0.8)),
                    seed=int(np.random.SeedSequence([grid.master_seed, i]).generate_state(1)[0]),
                )
                k = consensus_cluster_count(data, cc)
                per[rec["dataset_id"]] = k
                hits += int(k == rec["true_k"])
            bench.append({
                "type": "benchmark", "kind": "consensus", "name": f"{algo} ({tag})",
                "hyper": dict(hyper), "accuracy": 100.0 * hits / max(len(top), 1), "guesses": per,
            })
    cache.replace_records(path, "benchmark", bench)
    for b in bench:
        print(f"{b['name']:<16} {b['accuracy']:6.2f}")


def cmd_report(args):
    out = _out(args)
    csv_text, aligned = emit_report(out / "cache.jsonl", args.kind)
    rep = out / "reports"
    rep.mkdir(parents=True, exist_ok=True)
    (rep / f"{args.kind}.csv").write_text(csv_text)
    (rep / f"{args.kind}.txt").write_text(aligned)
    sys.stdout.write(aligned)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment YAML (default: the shipped grid)")
    common.add_argument("--out", help="output directory holding datasets/ and cache.jsonl")
    common.add_argument("--workers", type=int, default=1, help="parallel grid workers")
    common.add_argument("--seed", type=int, help="master seed override")
    common.add_argument("--construction", choices=CONSTRUCTIONS)
    common.add_argument("--scheme", choices=SCHEMES)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ensemble-k", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("gen", cmd_gen, "generate blob datasets as CSV"),
        ("run", cmd_run, "evaluate the grid, vote and write the cache"),
        ("vote", cmd_vote, "recompute votes from cached cells"),
        ("select", cmd_select, "rank algorithm/hyperparameter combinations"),
        ("bench", cmd_bench, "expected-value and consensus clustering baselines"),
        ("report", cmd_report, "print a report table"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        if name == "report":
            p.add_argument("--kind", choices=REPORTS, default="table4")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConfigError, GridError, DatasetError, cache.CacheError, ReportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (EnsembleError, RuntimeError, ValueError, OSError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
