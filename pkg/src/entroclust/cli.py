"""Command-line interface: ``entroclust {cluster,elbow,rank,export-dfg}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import INITS, METHODS, Clustering, cluster_er, method_tag, run_method, single_cluster
from .evaluation import (
    derive_rng,
    elbow_csv,
    elbow_sweep,
    rank_table,
    read_matrix_csv,
    weighted_metrics,
)
from .event_log import CsvConfig, VariantLog, read_log

DEFAULT_ELBOW_METHODS = ("random", "freq-kmeans", "ec-pp", "ec-split-pp")


class UsageError(Exception):
    pass


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def parse_k_range(text: str) -> list[int]:
    """``"a..b"`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"malformed k range {text!r}; expected a..b") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"invalid k range {text!r}")
    return list(range(lo, hi + 1))


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="event log file")
    p.add_argument("--format", choices=("csv", "xes", "variants-json"), default="csv")
    p.add_argument("--case-col", default="case")
    p.add_argument("--activity-col", default="activity")
    p.add_argument("--order-col", default="timestamp")
    p.add_argument("--order-kind", choices=("timestamp", "index"), default="timestamp")
    p.add_argument("--delimiter", default=",")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--include-sentinels", type=_bool, default=True,
                   help="count BOS/EOS nodes in graph density and entropy (default true)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for candidate scoring")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entroclust", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a log and write artifacts")
    _add_input_args(p)
    p.add_argument("--method", choices=METHODS, default="ec")
    p.add_argument("--init", choices=sorted(INITS), default=None,
                   help="seeding for ec/ec-split (default pp)")
    p.add_argument("-k", type=int, required=True)
    _add_run_args(p)

    p = sub.add_parser("elbow", help="sweep k and tabulate weighted metrics")
    _add_input_args(p)
    p.add_argument("--k-range", required=True, help="inclusive range a..b")
    p.add_argument("--methods", default=",".join(DEFAULT_ELBOW_METHODS),
                   help="comma-separated method tags, e.g. ec-pp,ec-split-ppnorm,random,freq-kmeans")
    _add_run_args(p)

    p = sub.add_parser("rank", help="average ranks, Friedman and Nemenyi for a metric matrix")
    p.add_argument("--matrix", required=True, help="CSV: method,log1,log2,...")
    p.add_argument("--metric", default="metric")
    p.add_argument("--higher-is-better", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("export-dfg", help="write DOT files for the full log or selected clusters")
    _add_input_args(p)
    p.add_argument("--clustering", help="clustering.json from a previous 'cluster' run")
    p.add_argument("--cluster", type=int, action="append", help="cluster index (repeatable)")
    p.add_argument("--out", required=True)
    return parser


def _load(args) -> VariantLog:
    cfg = CsvConfig(args.case_col, args.activity_col, args.order_col, args.order_kind, args.delimiter)
    return read_log(args.input, args.format, cfg)


def _config(args, *skip: str) -> dict:
    """Arguments that determine the outputs; execution details are left out."""
    drop = {"out", "jobs", *skip}
    return {k: v for k, v in sorted(vars(args).items()) if k not in drop}


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_cluster(args) -> int:
    log = _load(args)
    if args.k < 1 or args.k > len(log):
        raise UsageError(f"-k must be between 1 and the number of variants ({len(log)}), got {args.k}")
    if args.init is not None and args.method not in ("ec", "ec-split"):
        raise UsageError("--init applies only to --method ec or ec-split")
    tag = method_tag(args.method, args.init)
    rng = derive_rng(args.seed, tag, args.k)
    result = run_method(log, args.method, args.k, rng, init=args.init, n_jobs=args.jobs)
    result.rng_seed = args.seed

    config = _config(args)
    config_line = json.dumps(config, sort_keys=True)
    out = Path(args.out)

    _write(out / "clustering.json", _dump({"config": config, **result.to_json()}))

    buf = io.StringIO()
    buf.write(f"# config: {config_line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case_id", "cluster"])
    for j, c in enumerate(result.clusters):
        for i in sorted(c.member_indices):
            for case_id in log[i].expanded_case_ids(i):
                w.writerow([case_id, j])
    _write(out / "assignments.csv", buf.getvalue())

    for j, c in enumerate(result.clusters):
        dot = c.dfg.to_dot(name=f"cluster_{j}", comment=f"config: {config_line}")
        _write(out / f"cluster_{j}.dot", dot)

    row = weighted_metrics(result, log, args.include_sentinels, log_name=Path(args.input).name)
    _write(out / "metrics.json", _dump({"config": config, **row.to_json()}))

    for j, c in enumerate(result.clusters):
        print(f"cluster {j}: cases={c.case_count} variants={len(c.member_indices)} "
              f"avg_er={cluster_er(log, c):.4f}")
    return 0


def cmd_elbow(args) -> int:
    ks = parse_k_range(args.k_range)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    log = _load(args)
    if max(ks) > len(log):
        raise UsageError(f"k range exceeds the number of variants ({len(log)})")
    cells = elbow_sweep(log, ks, methods, seed=args.seed,
                        include_sentinels=args.include_sentinels, n_jobs=args.jobs)
    header = f"# config: {json.dumps(_config(args), sort_keys=True)}\n"
    _write(Path(args.out) / "elbow.csv", header + elbow_csv(cells))
    for c in cells:
        if c.error:
            print(f"warning: {c.method} k={c.k}: {c.error}", file=sys.stderr)
    return 0


def cmd_rank(args) -> int:
    methods, logs, X = read_matrix_csv(Path(args.matrix).read_text(encoding="utf-8"))
    missing = [logs[j] for j in range(len(logs)) if np.isnan(X[:, j]).any()]
    if missing:
        raise UsageError(
            "matrix has missing cells in column(s) " + ", ".join(missing)
            + "; remove those logs from the CSV and rank the remaining subset"
        )
    table = rank_table(methods, logs, X, metric=args.metric, lower_is_better=not args.higher_is_better)
    if table.friedman_chi2 is None:
        print("note: Friedman test needs at least 2 logs and 2 methods; statistics omitted", file=sys.stderr)
    report = {"config": _config(args), **table.to_json()}
    _write(Path(args.out) / f"rank_{args.metric}.json", _dump(report))
    return 0


def cmd_export_dfg(args) -> int:
    log = _load(args)
    out = Path(args.out)
    comment = f"config: {json.dumps(_config(args), sort_keys=True)}"
    if not args.clustering:
        if args.cluster:
            raise UsageError("--cluster requires --clustering")
        clustering = single_cluster(log)
        _write(out / "full_log.dot", clustering.clusters[0].dfg.to_dot(name="full_log", comment=comment))
        return 0
    data = json.loads(Path(args.clustering).read_text(encoding="utf-8"))
    clustering = Clustering.from_json(data, log)
    wanted = args.cluster if args.cluster else list(range(clustering.k))
    for j in wanted:
        if not 0 <= j < clustering.k:
            raise UsageError(f"unknown cluster id {j}; clustering has {clustering.k} clusters")
    for j in wanted:
        dot = clustering.clusters[j].dfg.to_dot(name=f"cluster_{j}", comment=comment)
        _write(out / f"cluster_{j}.dot", dot)
    return 0


COMMANDS = {
    "cluster": cmd_cluster,
    "elbow": cmd_elbow,
    "rank": cmd_rank,
    "export-dfg": cmd_export_dfg,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError, KeyError) as exc:
        print(f"entroclust {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
