#!/usr/bin/env python3
"""
Main entry point for the rank similarity toolkit
Command-line access to the metrics, importance-file comparison, sampling
distributions, the pooled t-test and the explainer similarity study
"""
import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

# Add project root to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.config import DEFAULT_ALPHA, DEFAULT_JOBS  # noqa: E402
from src.constants import ExitCode, MetricName, Task  # noqa: E402
from src.metrics import d_max, evaluate_metric, kendall_tau, spearman_distance, weighted_difference  # noqa: E402
from src.ranking import FeatureId, Permutation, RankedList, canonicalize_pair  # noqa: E402
from src.reports import (  # noqa: E402
    emit_reports,
    emit_sample_distribution,
    ingest_importances,
    summary_table,
    write_comparison,
    write_importances,
    write_similarity_matrix,
)
from src.stats import (  # noqa: E402
    distribution_shape_findings,
    kde,
    pooled_ttest,
    sample_metric_distribution,
    summarize,
    ttest_from_summary,
)
from src.study import (  # noqa: E402
    ConfigKeyError,
    StudyConfig,
    compare_records,
    load_study_config,
    run_study,
    similarity_matrix,
    with_overrides,
)
from src.utils import ExplanationError, NumericAssertionError, format_float, logger  # noqa: E402

WORKED_EXAMPLES = (
    ("Example 1: two explainers disagree on two adjacent pairs", (1, 2, 3, 4, 5), (2, 1, 3, 5, 4)),
    ("Example 2a: swap at the bottom of the list", (1, 2, 3, 4, 5), (1, 2, 3, 5, 4)),
    ("Example 2b: swap at the top of the list", (1, 2, 3, 4, 5), (2, 1, 3, 4, 5)),
    ("Example 3: complete reversal", (1, 2, 3, 4, 5), (5, 4, 3, 2, 1)),
)


class RankcheckArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the toolkit's usage code"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE, f"{self.prog}: error: {message}\n")


def parse_ranked_list(text: str, labels: dict) -> RankedList:
    """
    Parse a comma-separated ranked list, most important first

    Labels are shared between the two lists of one command so that the same
    token always names the same feature.
    """
    tokens = [token.strip() for token in text.split(',')]
    if not tokens or any(not token for token in tokens):
        raise ValueError(f"Malformed ranked list: {text!r}")
    items = []
    for token in tokens:
        labels.setdefault(token, len(labels))
        items.append(FeatureId(labels[token], token))
    return RankedList(tuple(items))


def print_header(title: str):
    print(f"\n{'='*60}")
    print(title)
    print(f"{'='*60}")


def cmd_distance(args) -> int:
    labels = {}
    reference = parse_ranked_list(args.a, labels)
    other = parse_ranked_list(args.b, labels)
    r, r_star = canonicalize_pair(reference, other)
    result = evaluate_metric(args.metric, r, r_star, symmetric=args.symmetric)

    print_header(f"DISTANCE ({result.name}{', symmetric' if args.symmetric else ''})")
    print(f"r  = {list(r.values)}")
    print(f"r* = {list(r_star.values)}")
    print(f"{result.name}: {format_float(result.value)}")
    print(f"{'='*60}\n")
    return ExitCode.SUCCESS


def cmd_compare(args) -> int:
    records = ingest_importances(args.input)
    out_dir = Path(args.out_dir) if args.out_dir else None

    if args.matrix:
        matrix = similarity_matrix(records, args.metric, by_absolute=not args.signed)
        names = sorted({name for pair in matrix for name in pair})
        print_header(f"SIMILARITY MATRIX ({args.metric}, rows = reference)")
        print("\t".join([''] + names))
        for ref in names:
            print("\t".join([ref] + [f"{matrix[(ref, other)]:.6f}" for other in names]))
        if out_dir:
            path = write_similarity_matrix(matrix, out_dir / 'similarity_matrix.csv')
            print(f"\n✅ Matrix written to {path}")
        return ExitCode.SUCCESS

    if not args.reference or not args.comparison:
        raise argparse.ArgumentError(None, "--reference and --comparison are required unless --matrix is given")

    by_name = {}
    for record in records:
        by_name.setdefault(record.explainer_name, []).append(record)
    for name in (args.reference, args.comparison):
        if name not in by_name:
            raise ValueError(f"Explainer {name!r} not found in {args.input}; present: {', '.join(sorted(by_name))}")

    values = compare_records(
        by_name[args.reference], by_name[args.comparison],
        args.metric, symmetric=args.symmetric, by_absolute=not args.signed,
    )
    print_header(f"COMPARE {args.reference} (reference) vs {args.comparison} - {args.metric}")
    for instance_id, value in values.items():
        print(f"  instance {instance_id}: {format_float(value)}")
    print(f"\nAverage over {len(values)} instances: {format_float(float(np.mean(list(values.values()))))}")

    if out_dir:
        path = write_comparison(values, out_dir / 'comparison.csv', args.reference, args.comparison, args.metric)
        print(f"✅ Per-instance values written to {path}")
        if args.save_importances:
            saved = write_importances(by_name[args.reference] + by_name[args.comparison],
                                      out_dir / 'importances.csv')
            print(f"✅ Importances written to {saved}")
    print(f"{'='*60}\n")
    return ExitCode.SUCCESS


def _sampling_summary(x: int, n: int, seed: int, jobs: int):
    shreyan, pearson = sample_metric_distribution(x, n, seed=seed, jobs=jobs)
    summaries = {'shreyan': summarize(shreyan), 'pearson_normalized': summarize(pearson)}
    findings = distribution_shape_findings(shreyan)
    return shreyan, pearson, summaries, findings


def _print_summaries(summaries, labels):
    table = summary_table(summaries, labels)
    print(table.to_string())


def cmd_sample_dist(args) -> int:
    shreyan, pearson, summaries, findings = _sampling_summary(args.x, args.n, args.seed, args.jobs)
    labels = {'shreyan': 'Shreyan', 'pearson_normalized': 'Pearson'}

    print_header(f"SAMPLING DISTRIBUTION (x={args.x}, n={args.n}, seed={args.seed})")
    _print_summaries(summaries, labels)
    print(f"\nShreyan median: {format_float(float(np.median(shreyan)))}")
    if findings:
        for finding in findings:
            print(f"⚠️  {finding}")
    else:
        print("✅ Shreyan sample centres below 0.5 with a right skew")

    if args.out_dir:
        densities = {}
        for key, sample in (('shreyan', shreyan), ('pearson_normalized', pearson)):
            try:
                densities[key] = kde(sample)
            except ValueError as exc:
                logger.warning(f"No density curve for {key}: {exc}")
                densities[key] = None
        written = emit_sample_distribution(shreyan, pearson, summaries, densities, findings,
                                           args.out_dir, plots=not args.no_plots)
        print(f"\n✅ {len(written)} files written to {args.out_dir}")
    print(f"{'='*60}\n")
    return ExitCode.SUCCESS


def _read_sample(path: str) -> np.ndarray:
    if not Path(path).is_file():
        raise FileNotFoundError(f"Sample file not found: {path}")
    return np.loadtxt(path, dtype=float, delimiter=',', ndmin=1).ravel()


def cmd_ttest(args, parser) -> int:
    if args.summary is not None:
        if args.a or args.b:
            parser.error("use either --a/--b or --summary, not both")
        m1, v1, n1, m2, v2, n2 = args.summary
        if not (float(n1).is_integer() and float(n2).is_integer()):
            parser.error("sample sizes in --summary must be integers")
        result = ttest_from_summary(m1, v1, int(n1), m2, v2, int(n2), args.alpha)
    else:
        if not (args.a and args.b):
            parser.error("--a and --b are both required (or give --summary)")
        result = pooled_ttest(_read_sample(args.a), _read_sample(args.b), args.alpha)

    print_header("POOLED TWO-SAMPLE T-TEST")
    print(f"t = {format_float(result.t)}")
    print(f"df = {format_float(result.df)}")
    print(f"p (two-sided) = {format_float(result.p_two_sided)}")
    print(f"{'✅' if result.reject_null else '❌'} {result.verdict}")
    print(f"{'='*60}\n")
    return ExitCode.SUCCESS


def cmd_study(args) -> int:
    config = load_study_config(args.config) if args.config else StudyConfig()
    config = with_overrides(config, seed=args.seed, output_dir=args.out_dir)

    print_header(f"EXPLAINER SIMILARITY STUDY ({config.reference.kind} vs {config.comparison.kind})")
    result = run_study(config, jobs=args.jobs, keep_records=args.save_importances)
    written = emit_reports(result, config.output_dir, config.alpha, config.metric, plots=not args.no_plots)

    if args.save_importances:
        # one file per run: instance ids restart in every cell
        for run in result.runs:
            records = [record for pair in run.records for record in pair]
            name = f"{run.task}_{run.model_kind}_rep{run.rep}.csv"
            written.append(write_importances(records, Path(config.output_dir) / 'importances' / name))

    for task, sample in ((Task.REGRESSION, result.reg_data), (Task.CLASSIFICATION, result.class_data)):
        mean = format_float(float(np.mean(sample))) if sample else 'n/a'
        print(f"{task}: {len(sample)} runs, mean {config.metric} = {mean}")
    if result.ttest is not None:
        print(f"t = {format_float(result.ttest.t)}, p = {format_float(result.ttest.p_two_sided)}")
        print(f"Verdict: {result.ttest.verdict}")
    if result.failures:
        print(f"⚠️  {len(result.failures)} cell(s) failed; see failures.csv")
    print(f"\n✅ {len(written)} files written to {config.output_dir}")
    print(f"{'='*60}\n")
    return ExitCode.SUCCESS


def cmd_examples(args) -> int:
    for title, r_values, other_values in WORKED_EXAMPLES:
        r, r_star = Permutation(r_values), Permutation(other_values)
        x = len(r)
        print_header(title)
        print(f"r  = {list(r_values)}")
        print(f"r* = {list(other_values)}")
        print(f"d_max = {format_float(d_max(x))}")
        print(f"d = {format_float(weighted_difference(r, r_star))}")
        print(f"d_s = {format_float(evaluate_metric(MetricName.SHREYAN, r, r_star).value)}")
        print(f"Spearman distance = {format_float(spearman_distance(r, r_star))}")
        print(f"Kendall tau = {format_float(kendall_tau(r, r_star))}")

    _, _, summaries, findings = _sampling_summary(9, args.n, args.seed, DEFAULT_JOBS)
    print_header(f"Example 4: sampling distribution (x=9, n={args.n}, seed={args.seed})")
    _print_summaries(summaries, {'shreyan': 'Shreyan', 'pearson_normalized': 'Pearson'})
    for finding in findings:
        print(f"⚠️  {finding}")
    print(f"{'='*60}\n")
    return ExitCode.SUCCESS


def build_parser() -> RankcheckArgumentParser:
    """Argument parser with one subcommand per tool"""
    parser = RankcheckArgumentParser(
        prog='rankcheck.py',
        description='Compare ranked feature-importance lists with the Shreyan Distance and baseline metrics',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Similarity of two ranked lists (first list is the reference)
  python rankcheck.py distance 1,2,3,4,5 2,1,3,5,4

  # Same pair with Kendall's tau
  python rankcheck.py distance A,B,C,D,E B,A,C,E,D --metric kendall

  # Compare two explainers stored in an importance file
  python rankcheck.py compare --input importances.csv --reference lime --comparison kernel_shap

  # Sampling distribution over random permutation pairs
  python rankcheck.py sample-dist --x 9 --n 1000 --seed 0 --out-dir results/sampling

  # Pooled t-test from summary statistics
  python rankcheck.py ttest --summary 0.649809 0.013377 114 0.692116 0.010448 75

  # Full regression-vs-classification study
  python rankcheck.py study --config study.env --out-dir results --jobs 4
        """
    )
    sub = parser.add_subparsers(dest='command', required=True, parser_class=RankcheckArgumentParser)

    metric_kwargs = dict(type=MetricName.resolve, choices=MetricName.ALL, default=MetricName.SHREYAN,
                         help='shreyan|spearman|kendall|wkendall|pearson (default: shreyan)')

    distance = sub.add_parser('distance', help='Similarity of two comma-separated ranked lists')
    distance.add_argument('a', help='Reference ranked list, most important first (e.g. 1,2,3)')
    distance.add_argument('b', help='Compared ranked list over the same items')
    distance.add_argument('--metric', **metric_kwargs)
    distance.add_argument('--symmetric', action='store_true', help='Average both reference directions')

    compare = sub.add_parser('compare', help='Compare explainers in an importance CSV/JSON file')
    compare.add_argument('--input', required=True, help='Importance file (explainer,instance_id,feature,importance)')
    compare.add_argument('--reference', help='Reference explainer name')
    compare.add_argument('--comparison', help='Compared explainer name')
    compare.add_argument('--metric', **metric_kwargs)
    compare.add_argument('--symmetric', action='store_true', help='Average both reference directions')
    compare.add_argument('--signed', action='store_true', help='Rank by signed score instead of magnitude')
    compare.add_argument('--matrix', action='store_true', help='Similarity for every ordered explainer pair')
    compare.add_argument('--out-dir', help='Write result CSVs here')
    compare.add_argument('--save-importances', action='store_true',
                         help='Re-emit the compared records in the normalized importance format')

    sample = sub.add_parser('sample-dist', help='Metric sampling distribution over random permutation pairs')
    sample.add_argument('--x', type=int, default=9, help='Permutation length (default: 9)')
    sample.add_argument('--n', type=int, default=1000, help='Number of random pairs (default: 1000)')
    sample.add_argument('--seed', type=int, default=0, help='Seed (default: 0)')
    sample.add_argument('--jobs', type=int, default=DEFAULT_JOBS, help='Worker threads (default: 1)')
    sample.add_argument('--out-dir', help='Write samples, densities and plots here')
    sample.add_argument('--no-plots', action='store_true', help='Skip SVG output')

    ttest = sub.add_parser('ttest', help='Pooled two-sample t-test')
    ttest.add_argument('--a', help='First sample file (one value per line)')
    ttest.add_argument('--b', help='Second sample file')
    ttest.add_argument('--summary', type=float, nargs=6, metavar=('M1', 'V1', 'N1', 'M2', 'V2', 'N2'),
                       help='Means, sample variances and sizes of both samples')
    ttest.add_argument('--alpha', type=float, default=DEFAULT_ALPHA, help='Significance level (default: 0.05)')

    study = sub.add_parser('study', help='Regression-vs-classification explainer similarity study')
    study.add_argument('--config', help='Study config file (KEY=VALUE lines)')
    study.add_argument('--seed', type=int, help='Override MASTER_SEED')
    study.add_argument('--out-dir', help='Override OUTPUT_DIR')
    study.add_argument('--jobs', type=int, default=DEFAULT_JOBS, help='Worker threads (default: 1)')
    study.add_argument('--no-plots', action='store_true', help='Skip SVG output')
    study.add_argument('--save-importances', action='store_true', help='Also write per-run importance files under importances/')

    examples = sub.add_parser('examples', help='Print the worked metric examples')
    examples.add_argument('--n', type=int, default=1000, help='Pairs for the sampling example (default: 1000)')
    examples.add_argument('--seed', type=int, default=0, help='Seed for the sampling example (default: 0)')

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the subcommand and map failures to exit codes"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else ExitCode.USAGE

    handlers = {
        'distance': cmd_distance,
        'compare': cmd_compare,
        'sample-dist': cmd_sample_dist,
        'ttest': lambda a: cmd_ttest(a, parser),
        'study': cmd_study,
        'examples': cmd_examples,
    }
    try:
        return handlers[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else ExitCode.USAGE
    except (ConfigKeyError, argparse.ArgumentError) as e:
        message = e.args[0] if isinstance(e, ConfigKeyError) else e.message
        logger.error(f"Usage error: {message}")
        print(f"\n❌ ERROR: {message}\n", file=sys.stderr)
        return ExitCode.USAGE
    except NumericAssertionError as e:
        logger.error(f"Numeric assertion failed: {str(e)}")
        print(f"\n❌ NUMERIC ERROR: {str(e)}\n", file=sys.stderr)
        return ExitCode.NUMERIC
    except (ValueError, OSError, ExplanationError) as e:
        logger.error(f"Error running {args.command}: {str(e)}")
        print(f"\n❌ ERROR: {str(e)}\n", file=sys.stderr)
        return ExitCode.DATA


if __name__ == '__main__':
    sys.exit(main())
