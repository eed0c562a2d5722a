"""
Report emission and importance file I/O
Reads and writes the importance CSV/JSON format and renders study and
sampling-distribution results as CSV, JSON, text and SVG files
"""
import json
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from src.constants import IMPORTANCE_COLUMNS, SUMMARY_ROWS, Task  # noqa: E402
from src.ranking import FeatureId, ImportanceRecord  # noqa: E402
from src.stats import DensityCurve, SummaryStats  # noqa: E402
from src.utils import format_float, logger  # noqa: E402

# Fixed SVG ids and no timestamp, so plots are reproducible
matplotlib.rcParams['svg.hashsalt'] = 'rankcheck'
_SVG_METADATA = {'Date': None}

TASK_COLUMNS = {Task.REGRESSION: 'Regression', Task.CLASSIFICATION: 'Classification'}


class ImportanceFileError(ValueError):
    """Malformed importance file; the message names the offending row"""


def _write(path: Path, writer: Callable[[Path], None]) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        writer(path)
    except OSError as exc:
        logger.error(f"Failed to write {path}: {exc}")
        raise OSError(f"Cannot write {path}: {exc}") from exc
    logger.debug(f"Wrote {path}")
    return path


def _write_text(path: Path, text: str) -> Path:
    return _write(path, lambda p: p.write_text(text, encoding='utf-8'))


def _write_frame(path: Path, frame: pd.DataFrame, index: bool = False) -> Path:
    return _write(path, lambda p: frame.to_csv(p, index=index, encoding='utf-8', lineterminator='\n'))


def _write_json(path: Path, payload) -> Path:
    return _write_text(path, json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + '\n')


def _save_figure(fig, path: Path) -> Path:
    try:
        return _write(path, lambda p: fig.savefig(p, format='svg', metadata=_SVG_METADATA))
    finally:
        plt.close(fig)


# ---------------------------------------------------------------------------
# Importance files
# ---------------------------------------------------------------------------

def importance_rows(records: Sequence[ImportanceRecord]) -> List[Dict[str, str]]:
    """Flatten records into importance-file rows (numbers as round-trip text)"""
    rows = []
    for record in records:
        for feature in record.features:
            rows.append({
                'explainer': record.explainer_name,
                'instance_id': str(record.instance_id),
                'feature': feature.label,
                'importance': format_float(record.scores[feature]),
            })
    return rows


def write_importances(records: Sequence[ImportanceRecord], path) -> Path:
    """
    Write records in the importance file format

    A `.json` suffix writes an array of row objects; anything else writes
    CSV with header explainer,instance_id,feature,importance.

    Args:
        records: Records to write
        path: Output file

    Returns:
        The written path
    """
    path = Path(path)
    rows = importance_rows(records)
    if path.suffix.lower() == '.json':
        payload = [
            {
                'explainer': row['explainer'],
                'instance_id': int(row['instance_id']),
                'feature': row['feature'],
                'importance': float(row['importance']),
            }
            for row in rows
        ]
        _write_json(path, payload)
    else:
        _write_frame(path, pd.DataFrame(rows, columns=list(IMPORTANCE_COLUMNS)))
    logger.info(f"Wrote {len(records)} importance records to {path}")
    return path


def _cell_text(value) -> str:
    if isinstance(value, str):
        return value
    if value is None or isinstance(value, bool):
        return ''
    return repr(value)


def _read_rows(path: Path) -> Tuple[pd.DataFrame, int]:
    """Rows as text plus the file row number of the first data row"""
    if path.suffix.lower() == '.json':
        try:
            payload = json.loads(path.read_text(encoding='utf-8'))
        except json.JSONDecodeError as exc:
            raise ImportanceFileError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(payload, list) or not all(isinstance(row, dict) for row in payload):
            raise ImportanceFileError(f"{path}: expected an array of row objects")
        columns = list(dict.fromkeys(key for row in payload for key in row))
        rows = [[_cell_text(row.get(column)) for column in columns] for row in payload]
        return pd.DataFrame(rows, columns=columns, dtype=str), 1
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError as exc:
        raise ImportanceFileError(f"{path}: empty file") from exc
    except pd.errors.ParserError as exc:
        raise ImportanceFileError(f"{path}: {exc}") from exc
    return frame, 2


def ingest_importances(path) -> List[ImportanceRecord]:
    """
    Read importance records from a CSV or JSON file

    Rows are grouped by (explainer, instance_id). Feature labels get indices
    in order of first appearance, and every group must cover every feature
    exactly once.

    Args:
        path: CSV or JSON file in the importance format

    Returns:
        Records in order of first appearance of their group

    Raises:
        FileNotFoundError: If the file does not exist
        ImportanceFileError: On missing columns, duplicate rows, partial
            coverage or unparseable values; the message names the row
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Importance file not found: {path}")
    frame, first_row = _read_rows(path)

    missing = [column for column in IMPORTANCE_COLUMNS if column not in frame.columns]
    if missing:
        raise ImportanceFileError(f"{path}: missing columns {', '.join(missing)} (row 1)")
    if frame.empty:
        raise ImportanceFileError(f"{path}: no importance rows")

    feature_index: Dict[str, int] = {}
    groups: Dict[Tuple[str, int], Dict[str, float]] = {}
    group_rows: Dict[Tuple[str, int], int] = {}

    for offset, row in enumerate(frame[list(IMPORTANCE_COLUMNS)].itertuples(index=False)):
        row_number = offset + first_row
        explainer, instance_text, feature, importance_text = (str(v).strip() for v in row)
        if not explainer or not feature:
            raise ImportanceFileError(f"{path}: empty explainer or feature at row {row_number}")
        try:
            instance_id = int(instance_text)
        except ValueError:
            raise ImportanceFileError(f"{path}: instance_id {instance_text!r} is not an integer at row {row_number}")
        try:
            importance = float(importance_text)
        except ValueError:
            raise ImportanceFileError(f"{path}: importance {importance_text!r} is not a number at row {row_number}")
        if not np.isfinite(importance):
            raise ImportanceFileError(f"{path}: invalid importance {importance_text} at row {row_number}")

        key = (explainer, instance_id)
        scores = groups.setdefault(key, {})
        group_rows.setdefault(key, row_number)
        if feature in scores:
            raise ImportanceFileError(
                f"{path}: duplicate row for explainer={explainer}, instance={instance_id}, "
                f"feature={feature} at row {row_number}"
            )
        feature_index.setdefault(feature, len(feature_index))
        scores[feature] = importance

    records = []
    for key, scores in groups.items():
        absent = [name for name in feature_index if name not in scores]
        if absent:
            raise ImportanceFileError(
                f"{path}: partial feature coverage for explainer={key[0]}, instance={key[1]} "
                f"(starting row {group_rows[key]}); missing {', '.join(absent)}"
            )
        records.append(ImportanceRecord(
            key[0], key[1],
            {FeatureId(feature_index[name], name): value for name, value in scores.items()},
        ))

    logger.info(f"Read {len(records)} importance records ({len(feature_index)} features) from {path}")
    return records


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

def summary_table(summaries: Mapping[str, Optional[SummaryStats]], columns: Mapping[str, str]) -> pd.DataFrame:
    """Statistic rows (minmax..kurtosis) by one column per sample"""
    table = {}
    for key, label in columns.items():
        summary = summaries.get(key)
        if summary is None:
            table[label] = [''] * len(SUMMARY_ROWS)
            continue
        low, high = summary.minmax
        table[label] = [
            f"({format_float(low)}, {format_float(high)})",
            format_float(summary.mean),
            format_float(summary.variance),
            format_float(summary.skewness),
            format_float(summary.kurtosis),
        ]
    return pd.DataFrame(table, index=pd.Index(SUMMARY_ROWS, name='statistic'))


def density_frame(curve: DensityCurve) -> pd.DataFrame:
    return pd.DataFrame({
        'grid': [format_float(v) for v in curve.grid],
        'density': [format_float(v) for v in curve.density],
    })


def write_similarity_matrix(matrix: Mapping[Tuple[str, str], float], path) -> Path:
    """Write an explainer-pair similarity matrix (rows = reference)"""
    names = sorted({name for pair in matrix for name in pair})
    frame = pd.DataFrame(
        [[format_float(matrix[(ref, other)]) for other in names] for ref in names],
        index=pd.Index(names, name='reference'),
        columns=names,
    )
    return _write_frame(Path(path), frame, index=True)


def write_comparison(values: Mapping[int, float], path, reference: str, comparison: str, metric: str) -> Path:
    """Per-instance similarities of one explainer pair"""
    frame = pd.DataFrame({
        'reference': reference,
        'comparison': comparison,
        'metric': metric,
        'instance_id': list(values),
        'value': [format_float(v) for v in values.values()],
    }, columns=['reference', 'comparison', 'metric', 'instance_id', 'value'])
    return _write_frame(Path(path), frame)


# ---------------------------------------------------------------------------
# Plots
# ---------------------------------------------------------------------------

def plot_instance_bars(instance_ids: Sequence[int], values: Sequence[float], title: str, path) -> Path:
    """Bar per instance with a horizontal line at the mean"""
    fig, ax = plt.subplots(figsize=(8, 4))
    positions = np.arange(len(values))
    ax.bar(positions, values, color='tab:blue')
    mean = float(np.mean(values))
    ax.axhline(mean, color='red', label=f"average = {mean:.4f}")
    ax.set_xticks(positions)
    ax.set_xticklabels([str(i) for i in instance_ids], fontsize=6)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel('instance')
    ax.set_ylabel('similarity')
    ax.set_title(title)
    ax.legend(loc='lower right')
    fig.tight_layout()
    return _save_figure(fig, Path(path))


def plot_densities(curves: Mapping[str, DensityCurve], title: str, path) -> Path:
    """Density polylines, one per labelled curve"""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, curve in curves.items():
        ax.plot(curve.grid, curve.density, label=label)
    ax.set_xlabel('similarity')
    ax.set_ylabel('density')
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save_figure(fig, Path(path))


# ---------------------------------------------------------------------------
# Study reports
# ---------------------------------------------------------------------------

def study_report_text(result, alpha: float, metric: str = 'shreyan') -> str:
    """Plain-text hypotheses, test outcome and failed cells"""
    lines = [
        "Explainer similarity study",
        "=" * 60,
        f"Metric: {metric}",
        "H0: the true mean explainer similarity is the same for regression and classification",
        "Ha: the true mean explainer similarity differs between regression and classification",
        f"Significance level: {alpha}",
        "",
        f"Regression runs: {len(result.reg_data)}",
        f"Classification runs: {len(result.class_data)}",
    ]
    for task, label in TASK_COLUMNS.items():
        summary = result.summaries.get(task)
        if summary is not None:
            lines.append(f"{label} mean: {format_float(summary.mean)} (variance {format_float(summary.variance)})")
    lines.append("")
    if result.ttest is None:
        lines.append("t-test: not computed (see log)")
    else:
        t = result.ttest
        lines += [
            f"t = {format_float(t.t)}",
            f"df = {format_float(t.df)}",
            f"p (two-sided) = {format_float(t.p_two_sided)}",
            f"Verdict: {t.verdict}",
        ]
    lines.append("")
    if result.failures:
        lines.append(f"Failed cells ({len(result.failures)}):")
        for failure in result.failures:
            lines.append(f"  {failure.task}/{failure.model_kind}/rep {failure.rep}: {failure.error}")
    else:
        lines.append("Failed cells: none")
    return "\n".join(lines) + "\n"


def emit_reports(result, out_dir, alpha: float, metric: str = 'shreyan', plots: bool = True) -> List[Path]:
    """
    Write every study output file

    Args:
        result: StudyResult
        out_dir: Output directory (created if missing)
        alpha: Significance level used by the study
        metric: Metric name for labels
        plots: Also write SVG plots

    Returns:
        Paths written, normative files first

    Raises:
        OSError: On I/O failure, naming the path
    """
    out = Path(out_dir)
    written = [_write_frame(out / 'summary.csv', summary_table(result.summaries, TASK_COLUMNS), index=True)]

    runs = pd.DataFrame(
        [(r.task, r.model_kind, r.rep, len(r.values), format_float(r.average)) for r in result.runs],
        columns=['task', 'model', 'rep', 'n_instances', 'average'],
    )
    written.append(_write_frame(out / 'runs.csv', runs))

    per_instance = pd.DataFrame(
        [
            (r.task, r.model_kind, r.rep, instance_id, format_float(value))
            for r in result.runs
            for instance_id, value in zip(r.instance_ids, r.values)
        ],
        columns=['task', 'model', 'rep', 'instance_id', 'value'],
    )
    written.append(_write_frame(out / 'per_instance.csv', per_instance))

    for task in Task.ALL:
        curve = result.densities.get(task)
        if curve is not None:
            written.append(_write_frame(out / f"density_{task}.csv", density_frame(curve)))

    if result.ttest is not None:
        payload = dict(result.ttest.to_dict(), verdict=result.ttest.verdict)
        written.append(_write_json(out / 'ttest.json', payload))

    failures = pd.DataFrame(
        [(f.task, f.model_kind, f.rep, f.error) for f in result.failures],
        columns=['task', 'model', 'rep', 'error'],
    )
    written.append(_write_frame(out / 'failures.csv', failures))
    written.append(_write_text(out / 'report.txt', study_report_text(result, alpha, metric)))

    if plots:
        for run in result.runs:
            title = f"{run.task} / {run.model_kind} / rep {run.rep}"
            written.append(plot_instance_bars(
                run.instance_ids, run.values, title,
                out / 'plots' / f"instances_{run.task}_{run.model_kind}_rep{run.rep}.svg",
            ))
        curves = {TASK_COLUMNS[t]: c for t, c in result.densities.items() if c is not None}
        if curves:
            written.append(plot_densities(curves, f"Density of run averages ({metric})", out / 'plots' / 'density.svg'))

    logger.info(f"Wrote {len(written)} report files to {out}")
    return written


# ---------------------------------------------------------------------------
# Sampling distribution reports
# ---------------------------------------------------------------------------

def emit_sample_distribution(
    shreyan: Sequence[float],
    pearson: Sequence[float],
    summaries: Mapping[str, SummaryStats],
    densities: Mapping[str, Optional[DensityCurve]],
    findings: Sequence[str],
    out_dir,
    plots: bool = True
) -> List[Path]:
    """
    Write a sampling-distribution run: raw samples, summaries, densities

    Args:
        shreyan: Shreyan similarities of the random pairs
        pearson: Normalized Pearson similarities of the same pairs
        summaries: 'shreyan' / 'pearson_normalized' -> SummaryStats
        densities: Same keys -> DensityCurve or None
        findings: Shape-check findings (may be empty)
        out_dir: Output directory
        plots: Also write the density SVG

    Returns:
        Paths written
    """
    out = Path(out_dir)
    labels = {'shreyan': 'Shreyan', 'pearson_normalized': 'Pearson'}
    samples = pd.DataFrame({
        'shreyan': [format_float(v) for v in shreyan],
        'pearson_normalized': [format_float(v) for v in pearson],
    })
    written = [
        _write_frame(out / 'samples.csv', samples),
        _write_frame(out / 'summary.csv', summary_table(summaries, labels), index=True),
    ]
    for key, curve in densities.items():
        if curve is not None:
            written.append(_write_frame(out / f"density_{key}.csv", density_frame(curve)))
    text = "\n".join(findings) + "\n" if findings else "shape checks passed\n"
    written.append(_write_text(out / 'findings.txt', text))

    curves = {labels[k]: c for k, c in densities.items() if c is not None}
    if plots and curves:
        written.append(plot_densities(curves, 'Sampling distribution over random permutation pairs',
                                      out / 'density.svg'))
    logger.info(f"Wrote {len(written)} sampling-distribution files to {out}")
    return written
