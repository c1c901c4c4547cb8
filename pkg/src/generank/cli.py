"""Command-line pipeline: select, evaluate, rank, merge, compare.

Each subcommand is one pipeline stage. Options resolve with the precedence
command line > config file (--config, JSON object) > built-in defaults, and
the resolved configuration is echoed into every output artifact so a run
can be reproduced from its outputs. All outputs are deterministic for a
fixed seed; wall-clock timings go to a separate timings file so report
files stay byte-identical across reruns.

Exit codes: 0 success, 1 unexpected failure, 2 usage or config error,
3 missing input file, 4 invalid data or options.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ._seeds import derive_seed
from .columnar import discretize
from .dataset import DatasetError, load_dataset, merge_common, save_dataset
from .evaluate import EvaluationReport, compare_reports, nested_cv
from .folds import FoldPlan
from .forest import BalancedRandomForest
from .mrmr import select
from .ranking import feature_importance, rank_genes

THREADS_ENV = "GENERANK_THREADS"

DEFAULTS = {
    "id_col": "gene",
    "label_col": "label",
    "fraction": None,
    "fractions": None,
    "k": None,
    "trees": 500,
    "max_depth": None,
    "min_samples_leaf": 1,
    "max_levels": 256,
    "seed": 0,
    "threads": None,  # filled from the environment, then 1
    "out_dir": ".",
    "outer_folds": 10,
    "inner_folds": 5,
    "folds": 10,
    "top_genes": 7,
    "top_features": 5,
    "include_positives": False,
    "baseline_name": None,
}


class ConfigError(ValueError):
    """Raised for malformed --config files or option combinations."""


def _parse_fractions(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse fraction list '{text}'") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="generank",
        description="Gene prioritization pipeline: mRMR selection, balanced "
        "random forest, nested cross-validation.",
        epilog=f"The {THREADS_ENV} environment variable sets the default "
        "worker thread count.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file with default option values")
        p.add_argument("--seed", type=int, help="master random seed")
        p.add_argument("--threads", type=int, help="worker threads (never changes results)")
        p.add_argument("--out-dir", help="directory for output files")

    def add_dataset_opts(p, with_b=True):
        p.add_argument("--dataset", help="dataset file (delimited text with header)")
        if with_b:
            p.add_argument(
                "--dataset-b",
                help="second dataset; merged with --dataset on common genes",
            )
        p.add_argument("--id-col", help="gene id column name (default: gene)")
        p.add_argument("--label-col", help="0/1 label column name (default: label)")

    def add_forest_opts(p):
        p.add_argument("--trees", type=int, help="number of trees (default: 500)")
        p.add_argument("--max-depth", type=int, help="tree depth cap (default: none)")
        p.add_argument(
            "--min-samples-leaf", type=int, help="minimum samples per leaf (default: 1)"
        )

    p_select = sub.add_parser("select", help="rank features on the full dataset")
    add_common(p_select)
    add_dataset_opts(p_select)
    p_select.add_argument("--fraction", type=float, help="fraction of features to keep")
    p_select.add_argument("--k", type=int, help="explicit number of features to keep")
    p_select.add_argument("--max-levels", type=int, help="discretization cap (default: 256)")
    p_select.set_defaults(func=cmd_select)

    p_eval = sub.add_parser("evaluate", help="nested cross-validated evaluation")
    add_common(p_eval)
    add_dataset_opts(p_eval)
    add_forest_opts(p_eval)
    p_eval.add_argument("--fraction", type=float, help="fixed selection fraction")
    p_eval.add_argument(
        "--fractions", help="comma-separated candidate fractions tuned per outer fold"
    )
    p_eval.add_argument("--max-levels", type=int)
    p_eval.add_argument("--outer-folds", type=int, help="outer folds (default: 10)")
    p_eval.add_argument("--inner-folds", type=int, help="inner folds (default: 5)")
    p_eval.set_defaults(func=cmd_evaluate)

    p_rank = sub.add_parser("rank", help="out-of-fold gene ranking and importances")
    add_common(p_rank)
    add_dataset_opts(p_rank)
    add_forest_opts(p_rank)
    p_rank.add_argument("--fraction", type=float, help="selection fraction")
    p_rank.add_argument("--max-levels", type=int)
    p_rank.add_argument("--folds", type=int, help="cross-validation folds (default: 10)")
    p_rank.add_argument("--top-genes", type=int, help="genes to export, 0 for all (default: 7)")
    p_rank.add_argument(
        "--top-features", type=int, help="features to export, 0 for all (default: 5)"
    )
    p_rank.add_argument(
        "--include-positives",
        action="store_const",
        const=True,
        help="rank every gene, not only unlabeled ones",
    )
    p_rank.set_defaults(func=cmd_rank)

    p_merge = sub.add_parser("merge", help="merge two datasets on common genes")
    add_common(p_merge)
    p_merge.add_argument("dataset_a", help="first dataset file")
    p_merge.add_argument("dataset_b", help="second dataset file")
    p_merge.add_argument("--id-col")
    p_merge.add_argument("--label-col")
    p_merge.set_defaults(func=cmd_merge)

    p_cmp = sub.add_parser("compare", help="paired t-tests between two reports")
    add_common(p_cmp)
    p_cmp.add_argument("report", help="evaluation report JSON")
    p_cmp.add_argument("baseline", help="baseline report JSON sharing the seed")
    p_cmp.add_argument("--baseline-name", help="label for the baseline column")
    p_cmp.set_defaults(func=cmd_compare)

    return parser


class Options:
    """Resolved options: command line over config file over defaults."""

    def __init__(self, args: argparse.Namespace):
        self._cli = {
            key: value
            for key, value in vars(args).items()
            if key not in ("func", "command", "config") and value is not None
        }
        self._config = {}
        if getattr(args, "config", None):
            path = Path(args.config)
            if not path.exists():
                raise FileNotFoundError(f"config file not found: {path}")
            try:
                loaded = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
            if not isinstance(loaded, dict):
                raise ConfigError(f"config file {path} must hold a JSON object")
            self._config = loaded
        self.command = args.command

    def get(self, key: str, fallback=None):
        if key in self._cli:
            return self._cli[key]
        if key in self._config:
            return self._config[key]
        if key in DEFAULTS and DEFAULTS[key] is not None:
            return DEFAULTS[key]
        return fallback

    @property
    def threads(self) -> int:
        value = self.get("threads")
        if value is None:
            env = os.environ.get(THREADS_ENV)
            if env:
                try:
                    value = int(env)
                except ValueError:
                    raise ConfigError(
                        f"{THREADS_ENV} must be an integer, got '{env}'"
                    ) from None
        value = 1 if value is None else int(value)
        if value < 1:
            raise ConfigError(f"threads must be >= 1, got {value}")
        return value

    @property
    def out_dir(self) -> Path:
        path = Path(self.get("out_dir"))
        path.mkdir(parents=True, exist_ok=True)
        return path


def _load_input(opts: Options) -> tuple:
    """Load --dataset, merging --dataset-b onto it when present."""
    path = opts.get("dataset")
    if not path:
        raise ConfigError("--dataset is required")
    id_col = opts.get("id_col")
    label_col = opts.get("label_col")
    data = load_dataset(path, id_column=id_col, label_column=label_col)
    path_b = opts.get("dataset_b")
    if path_b:
        data_b = load_dataset(path_b, id_column=id_col, label_column=label_col)
        data = merge_common(data, data_b)
    return data


def _forest_from(opts: Options, threads: int) -> BalancedRandomForest:
    return BalancedRandomForest(
        n_estimators=int(opts.get("trees")),
        max_depth=opts.get("max_depth"),
        min_samples_leaf=int(opts.get("min_samples_leaf")),
        n_jobs=threads,
    )


def _echo_config(opts: Options, keys: list[str]) -> dict:
    config = {"command": opts.command}
    for key in keys:
        config[key] = opts.get(key)
    config["threads"] = opts.threads
    return config


def _tsv_header(config: dict) -> list[str]:
    return [
        "# generated-by: generank " + config["command"],
        "# config: " + json.dumps(config, sort_keys=True),
    ]


def _write_lines(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + "\n")


def cmd_select(opts: Options) -> int:
    fraction = opts.get("fraction")
    k = opts.get("k")
    if (fraction is None) == (k is None):
        raise ConfigError("give exactly one of --fraction and --k")
    data = _load_input(opts)
    matrix = discretize(data, max_levels=int(opts.get("max_levels")))
    result = select(matrix, k=k, fraction=fraction)
    if result.truncated:
        print(
            f"note: requested {result.requested_k} features, dataset has "
            f"{matrix.n_features}; selection truncated",
            file=sys.stderr,
        )
    config = _echo_config(
        opts, ["dataset", "dataset_b", "id_col", "label_col", "fraction", "k",
               "max_levels", "seed"]
    )
    out = opts.out_dir / "features.tsv"
    _write_lines(out, _tsv_header(config) + result.export_lines(data.feature_names))
    print(f"wrote {out} ({len(result)} features)")
    return 0


def cmd_evaluate(opts: Options) -> int:
    fraction = opts.get("fraction")
    fractions = opts.get("fractions")
    if isinstance(fractions, str):
        fractions = _parse_fractions(fractions)
    if (fraction is None) == (fractions is None):
        raise ConfigError("give exactly one of --fraction and --fractions")
    data = _load_input(opts)
    threads = opts.threads
    config = _echo_config(
        opts, ["dataset", "dataset_b", "id_col", "label_col", "fraction",
               "trees", "max_depth", "min_samples_leaf", "max_levels",
               "outer_folds", "inner_folds", "seed"]
    )
    config["fractions"] = fractions
    report = nested_cv(
        data,
        fraction=fraction,
        fractions=fractions,
        forest=_forest_from(opts, threads),
        n_outer=int(opts.get("outer_folds")),
        n_inner=int(opts.get("inner_folds")),
        max_levels=int(opts.get("max_levels")),
        seed=int(opts.get("seed")),
        n_jobs=threads,
        config=config,
    )
    report_path = opts.out_dir / "report.json"
    timings_path = opts.out_dir / "timings.json"
    report.save(report_path)
    report.save_timings(timings_path)
    print(report.summary_table())
    totals = report.timings_dict()["total_seconds"]
    print(
        "seconds: "
        + "  ".join(f"{phase}={totals[phase]:.2f}" for phase in sorted(totals))
    )
    print(f"wrote {report_path} and {timings_path}")
    return 0


def cmd_rank(opts: Options) -> int:
    fraction = opts.get("fraction")
    if fraction is None:
        raise ConfigError("--fraction is required")
    data = _load_input(opts)
    threads = opts.threads
    seed = int(opts.get("seed"))
    max_levels = int(opts.get("max_levels"))
    template = _forest_from(opts, threads)
    config = _echo_config(
        opts, ["dataset", "dataset_b", "id_col", "label_col", "fraction",
               "trees", "max_depth", "min_samples_leaf", "max_levels",
               "folds", "top_genes", "top_features", "include_positives", "seed"]
    )

    plan = FoldPlan.build(data.labels, int(opts.get("folds")), seed)
    ranking = rank_genes(
        data,
        fraction=float(fraction),
        forest=template,
        plan=plan,
        max_levels=max_levels,
        n_jobs=threads,
        novel_only=not bool(opts.get("include_positives")),
    )
    top_genes = int(opts.get("top_genes"))
    gene_lines = ranking.export_lines()
    if top_genes > 0:
        gene_lines = gene_lines[:top_genes]
    ranking_path = opts.out_dir / "ranking.tsv"
    _write_lines(ranking_path, _tsv_header(config) + gene_lines)

    # importance describes one final model fitted on the full dataset
    matrix = discretize(data, max_levels=max_levels)
    picked = select(matrix, fraction=float(fraction))
    model = BalancedRandomForest(
        n_estimators=int(opts.get("trees")),
        max_depth=opts.get("max_depth"),
        min_samples_leaf=int(opts.get("min_samples_leaf")),
        random_state=derive_seed(seed, "final-forest"),
        n_jobs=threads,
    )
    codes = matrix.codes[:, picked.selected]
    model.fit(codes, data.labels)
    report = feature_importance(
        model,
        codes,
        data.labels,
        [data.feature_names[j] for j in picked.selected],
        seed=derive_seed(seed, "importance"),
    )
    top_features = int(opts.get("top_features"))
    feature_lines = report.export_lines()
    if top_features > 0:
        feature_lines = feature_lines[:top_features]
    importance_path = opts.out_dir / "importance.tsv"
    _write_lines(importance_path, _tsv_header(config) + feature_lines)

    print(f"wrote {ranking_path} and {importance_path}")
    return 0


def cmd_merge(opts: Options) -> int:
    id_col = opts.get("id_col")
    label_col = opts.get("label_col")
    a = load_dataset(opts.get("dataset_a"), id_column=id_col, label_column=label_col)
    b = load_dataset(opts.get("dataset_b"), id_column=id_col, label_column=label_col)
    merged = merge_common(a, b)
    config = _echo_config(opts, ["dataset_a", "dataset_b", "id_col", "label_col", "seed"])
    out = opts.out_dir / "merged.csv"
    save_dataset(
        merged, out, id_column=id_col, label_column=label_col,
        header_comments=["generated-by: generank merge",
                         "config: " + json.dumps(config, sort_keys=True)],
    )
    print(
        f"wrote {out}: {merged.n_genes} common genes, {merged.n_positives} "
        f"positives, {merged.n_features} features"
    )
    return 0


def cmd_compare(opts: Options) -> int:
    report_path = Path(opts.get("report"))
    baseline_path = Path(opts.get("baseline"))
    for path in (report_path, baseline_path):
        if not path.exists():
            raise FileNotFoundError(f"report file not found: {path}")
    report = EvaluationReport.load(report_path)
    baseline = EvaluationReport.load(baseline_path)
    results = compare_reports(
        report, baseline, baseline_name=opts.get("baseline_name")
    )
    out = opts.out_dir / "ttest.json"
    payload = {
        "config": _echo_config(opts, ["report", "baseline", "baseline_name"]),
        "report": str(report_path),
        "baseline": str(baseline_path),
        "seed": report.seed,
        "t_tests": results,
    }
    out.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    print(f"{'metric':>8}  {'t':>9}  {'p':>9}")
    for row in results:
        print(f"{row['metric']:>8}  {row['t']:9.4f}  {row['p']:9.6f}")
    print(f"wrote {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = Options(args)
        return args.func(opts)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # pragma: no cover - defensive
        print(f"unexpected error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
