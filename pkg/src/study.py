"""
Explainer comparison study
Per-instance explainer comparison, the regression-vs-classification study
loop and its statistical analysis
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from dotenv import dotenv_values

from src.config import (
    DEFAULT_ALPHA,
    DEFAULT_CLASS_SEP,
    DEFAULT_JOBS,
    DEFAULT_MASTER_SEED,
    DEFAULT_N_CLASSES,
    DEFAULT_N_FEATURES,
    DEFAULT_N_INFORMATIVE,
    DEFAULT_N_ROWS,
    DEFAULT_NOISE_SD,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_REPS,
    DEFAULT_TEST_FRACTION,
)
from src.constants import ERROR_MESSAGES, ExplainerKind, MetricName, ModelKind, Task
from src.datasets import SplitDataset, make_classification, make_regression, split_and_standardize
from src.explainers import ExplainerConfig, explain
from src.metrics import evaluate_metric, resolve_metric
from src.models import TrainedModel, fit
from src.ranking import ImportanceRecord, canonicalize_pair, rank_features
from src.stats import DensityCurve, SummaryStats, TTestResult, kde, pooled_ttest, summarize
from src.utils import ExplanationError, derive_seed, logger, parse_bool, validate_positive_int

# Sub-stream keys appended to a cell seed
_SPLIT_STREAM = 1
_EXPLAIN_STREAM = 2


@dataclass(frozen=True)
class StudyConfig:
    """Declarative description of a regression-vs-classification similarity study"""
    regression_models: Tuple[str, ...] = ModelKind.REGRESSION
    classification_models: Tuple[str, ...] = ModelKind.CLASSIFICATION
    reps: int = DEFAULT_REPS
    n_rows: int = DEFAULT_N_ROWS
    n_features: int = DEFAULT_N_FEATURES
    n_informative: int = DEFAULT_N_INFORMATIVE
    n_classes: int = DEFAULT_N_CLASSES
    class_sep: float = DEFAULT_CLASS_SEP
    noise_sd: float = DEFAULT_NOISE_SD
    test_fraction: float = DEFAULT_TEST_FRACTION
    reference: ExplainerConfig = field(default_factory=lambda: ExplainerConfig.default(ExplainerKind.LIME))
    comparison: ExplainerConfig = field(default_factory=lambda: ExplainerConfig.default(ExplainerKind.KERNEL_SHAP))
    metric: str = MetricName.SHREYAN
    symmetric: bool = False
    by_absolute: bool = True
    self_test: bool = False
    alpha: float = DEFAULT_ALPHA
    master_seed: int = DEFAULT_MASTER_SEED
    output_dir: str = DEFAULT_OUTPUT_DIR

    def __post_init__(self):
        validate_positive_int(self.reps, 'reps')
        if not self.regression_models or not self.classification_models:
            raise ValueError("study needs at least one model per task")
        for task, kinds in ((Task.REGRESSION, self.regression_models),
                            (Task.CLASSIFICATION, self.classification_models)):
            for kind in kinds:
                if kind not in ModelKind.for_task(task):
                    raise ValueError(f"{ERROR_MESSAGES['INCOMPATIBLE_KIND']}: {kind} / {task}")
        if self.reference.kind == self.comparison.kind and not self.self_test:
            raise ValueError("reference and comparison explainers must differ (set SELF_TEST for the null check)")
        metric = resolve_metric(self.metric)
        if metric not in MetricName.UNIT_INTERVAL:
            raise ValueError(f"study metric must be one of {MetricName.UNIT_INTERVAL}, got {self.metric}")
        object.__setattr__(self, 'metric', metric)
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        validate_positive_int(self.master_seed, 'master_seed', minimum=0)

    def models_for(self, task: str) -> Tuple[str, ...]:
        return self.regression_models if task == Task.REGRESSION else self.classification_models


@dataclass(frozen=True)
class RunResult:
    """Per-instance similarities for one fitted model"""
    model_kind: str
    task: str
    rep: int
    instance_ids: Tuple[int, ...]
    values: Tuple[float, ...]
    average: float
    records: Tuple[Tuple[ImportanceRecord, ImportanceRecord], ...] = field(default=(), repr=False, compare=False)


@dataclass(frozen=True)
class CellFailure:
    """A study cell that was skipped"""
    task: str
    model_kind: str
    rep: int
    error: str


@dataclass(frozen=True, eq=False)
class StudyResult:
    """Everything a study produces"""
    reg_data: Tuple[float, ...]
    class_data: Tuple[float, ...]
    runs: Tuple[RunResult, ...]
    summaries: Mapping[str, Optional[SummaryStats]]
    densities: Mapping[str, Optional[DensityCurve]]
    ttest: Optional[TTestResult]
    failures: Tuple[CellFailure, ...] = ()

    def data_for(self, task: str) -> Tuple[float, ...]:
        return self.reg_data if task == Task.REGRESSION else self.class_data


_CONFIG_KEYS = {
    'REGRESSION_MODELS', 'CLASSIFICATION_MODELS', 'REPS', 'N_ROWS', 'N_FEATURES',
    'N_INFORMATIVE', 'N_CLASSES', 'CLASS_SEP', 'NOISE_SD', 'TEST_FRACTION',
    'REFERENCE_EXPLAINER', 'COMPARISON_EXPLAINER', 'LIME_SAMPLES', 'SHAP_SAMPLES',
    'LIME_KERNEL_WIDTH', 'LIME_RIDGE', 'SHAP_BACKGROUND', 'SHAP_BACKGROUND_ROWS',
    'METRIC', 'SYMMETRIC', 'SIGNED_RANKING', 'SELF_TEST', 'ALPHA', 'MASTER_SEED', 'OUTPUT_DIR',
}


class ConfigKeyError(KeyError):
    """Study config file names a key the study does not know"""


def _explainer_config(kind: str, values: Mapping[str, str]) -> ExplainerConfig:
    kind = ExplainerKind.resolve(kind)
    if kind == ExplainerKind.LIME:
        overrides = {}
        if values.get('LIME_SAMPLES'):
            overrides['n_samples'] = int(values['LIME_SAMPLES'])
        if values.get('LIME_KERNEL_WIDTH'):
            overrides['kernel_width'] = float(values['LIME_KERNEL_WIDTH'])
        if values.get('LIME_RIDGE'):
            overrides['ridge_strength'] = float(values['LIME_RIDGE'])
        return ExplainerConfig.default(kind, **overrides)
    overrides = {}
    if values.get('SHAP_SAMPLES'):
        overrides['n_samples'] = int(values['SHAP_SAMPLES'])
    if values.get('SHAP_BACKGROUND'):
        overrides['background'] = values['SHAP_BACKGROUND']
    if values.get('SHAP_BACKGROUND_ROWS'):
        overrides['background_rows'] = int(values['SHAP_BACKGROUND_ROWS'])
    return ExplainerConfig.default(kind, **overrides)


def _kinds(text: str) -> Tuple[str, ...]:
    return tuple(k.strip().lower() for k in text.split(',') if k.strip())


def study_config_from_mapping(values: Mapping[str, Optional[str]]) -> StudyConfig:
    """
    Build a StudyConfig from flat KEY=VALUE settings

    Args:
        values: Parsed key/value pairs (unset keys take the defaults)

    Returns:
        StudyConfig

    Raises:
        ConfigKeyError: On an unknown key
        ValueError: On an invalid value
    """
    unknown = sorted(set(values) - _CONFIG_KEYS)
    if unknown:
        raise ConfigKeyError(f"Unknown study config keys: {', '.join(unknown)}")
    values = {k: v for k, v in values.items() if v not in (None, '')}

    kwargs = {}
    if 'REGRESSION_MODELS' in values:
        kwargs['regression_models'] = _kinds(values['REGRESSION_MODELS'])
    if 'CLASSIFICATION_MODELS' in values:
        kwargs['classification_models'] = _kinds(values['CLASSIFICATION_MODELS'])
    for key, name, cast in (
        ('REPS', 'reps', int), ('N_ROWS', 'n_rows', int), ('N_FEATURES', 'n_features', int),
        ('N_INFORMATIVE', 'n_informative', int), ('N_CLASSES', 'n_classes', int),
        ('CLASS_SEP', 'class_sep', float), ('NOISE_SD', 'noise_sd', float),
        ('TEST_FRACTION', 'test_fraction', float), ('ALPHA', 'alpha', float),
        ('MASTER_SEED', 'master_seed', int), ('METRIC', 'metric', str), ('OUTPUT_DIR', 'output_dir', str),
    ):
        if key in values:
            kwargs[name] = cast(values[key])
    for key, name in (('SYMMETRIC', 'symmetric'), ('SELF_TEST', 'self_test')):
        if key in values:
            kwargs[name] = parse_bool(values[key])
    if 'SIGNED_RANKING' in values:
        kwargs['by_absolute'] = not parse_bool(values['SIGNED_RANKING'])

    kwargs['reference'] = _explainer_config(values.get('REFERENCE_EXPLAINER', ExplainerKind.LIME), values)
    kwargs['comparison'] = _explainer_config(values.get('COMPARISON_EXPLAINER', ExplainerKind.KERNEL_SHAP), values)
    return StudyConfig(**kwargs)


def load_study_config(path) -> StudyConfig:
    """Read a study config file (dotenv-style KEY=VALUE lines)"""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Study config not found: {path}")
    return study_config_from_mapping(dotenv_values(path))


def similarity_between(
    reference: ImportanceRecord,
    other: ImportanceRecord,
    metric: str = MetricName.SHREYAN,
    symmetric: bool = False,
    by_absolute: bool = True
) -> float:
    """
    Similarity of two explanations of the same instance

    Both records are ranked, canonicalized with `reference` first and
    compared with the metric.
    """
    r, r_star = canonicalize_pair(rank_features(reference, by_absolute), rank_features(other, by_absolute))
    return evaluate_metric(metric, r, r_star, symmetric=symmetric).value


def compare_records(
    reference: Sequence[ImportanceRecord],
    other: Sequence[ImportanceRecord],
    metric: str = MetricName.SHREYAN,
    symmetric: bool = False,
    by_absolute: bool = True
) -> Dict[int, float]:
    """
    Per-instance similarity of two explainers' records, matched on instance id

    Args:
        reference: Records of the reference explainer
        other: Records of the compared explainer
        metric: Metric name
        symmetric: Average both reference directions
        by_absolute: Rank by magnitude

    Returns:
        instance_id -> similarity, ascending by instance id
    """
    ref_by_id = {r.instance_id: r for r in reference}
    other_by_id = {r.instance_id: r for r in other}
    missing = sorted(set(ref_by_id) ^ set(other_by_id))
    if missing:
        raise ValueError(f"Explainers cover different instances; unmatched ids: {missing}")
    return {
        instance_id: similarity_between(ref_by_id[instance_id], other_by_id[instance_id], metric, symmetric, by_absolute)
        for instance_id in sorted(ref_by_id)
    }


def similarity_matrix(
    records: Iterable[ImportanceRecord],
    metric: str = MetricName.SHREYAN,
    by_absolute: bool = True
) -> Dict[Tuple[str, str], float]:
    """
    Mean per-instance similarity for every ordered explainer pair

    Args:
        records: Records of two or more explainers over the same instances
        metric: Metric name
        by_absolute: Rank by magnitude

    Returns:
        (reference, comparison) -> mean similarity; the diagonal is included
    """
    grouped: Dict[str, List[ImportanceRecord]] = {}
    for record in records:
        grouped.setdefault(record.explainer_name, []).append(record)
    names = sorted(grouped)
    matrix = {}
    for ref in names:
        for other in names:
            values = compare_records(grouped[ref], grouped[other], metric, by_absolute=by_absolute)
            matrix[(ref, other)] = float(np.mean(list(values.values())))
    return matrix


def compare_explainers(
    model: TrainedModel,
    split: SplitDataset,
    ref_config: ExplainerConfig,
    cmp_config: ExplainerConfig,
    metric: str = MetricName.SHREYAN,
    instances: Optional[np.ndarray] = None,
    instance_ids: Optional[Sequence[int]] = None,
    symmetric: bool = False,
    by_absolute: bool = True,
    rep: int = 0,
    keep_records: bool = False
) -> RunResult:
    """
    Explain each instance with both explainers and compare the rankings

    Args:
        model: Model under explanation
        split: Its training/test data
        ref_config: Reference explainer (canonicalization order)
        cmp_config: Compared explainer
        metric: Metric name
        instances: Rows to explain; defaults to all test rows
        instance_ids: Ids for those rows; defaults to 0..n-1
        symmetric: Average both reference directions
        by_absolute: Rank by magnitude
        rep: Repetition index recorded on the result
        keep_records: Attach the ImportanceRecords to the result

    Returns:
        RunResult with the per-instance values and their mean

    Raises:
        ExplanationError: If an explainer fails, naming the instance
    """
    if instances is None:
        instances = split.X_test
    instances = np.atleast_2d(instances)
    if instances.shape[0] == 0:
        raise ValueError("no instances to explain")
    if instance_ids is None:
        instance_ids = range(instances.shape[0])
    instance_ids = tuple(int(i) for i in instance_ids)
    if len(instance_ids) != instances.shape[0]:
        raise ValueError(ERROR_MESSAGES['LENGTH_MISMATCH'])

    values = []
    kept = []
    for instance_id, row in zip(instance_ids, instances):
        pair = []
        for config in (ref_config, cmp_config):
            try:
                pair.append(explain(model, split, row, config, instance_id))
            except Exception as exc:
                logger.error(f"{config.kind} failed on instance {instance_id}: {exc}")
                raise ExplanationError(instance_id, config.kind, exc) from exc
        value = similarity_between(pair[0], pair[1], metric, symmetric, by_absolute)
        logger.debug(f"Instance {instance_id}: {metric}={value:.6f}")
        values.append(value)
        if keep_records:
            kept.append(tuple(pair))

    return RunResult(
        model_kind=model.kind,
        task=model.task,
        rep=rep,
        instance_ids=instance_ids,
        values=tuple(values),
        average=float(np.mean(values)),
        records=tuple(kept),
    )


def cell_seed(master_seed: int, task: str, model_index: int, rep: int) -> Tuple[int, ...]:
    """Dataset seed of one study cell; distinct cells never share a seed"""
    return derive_seed(master_seed, Task.ALL.index(task), model_index, rep)


def run_cell(config: StudyConfig, task: str, model_index: int, rep: int, keep_records: bool = False) -> RunResult:
    """
    One study cell: regenerate data, split, fit, compare explainers

    Args:
        config: Study settings
        task: Task of the cell
        model_index: Position of the model kind in the task's list
        rep: Repetition index
        keep_records: Attach explanations to the result

    Returns:
        RunResult
    """
    kind = config.models_for(task)[model_index]
    seed = cell_seed(config.master_seed, task, model_index, rep)
    if task == Task.REGRESSION:
        ds = make_regression(config.n_rows, config.n_features, config.n_informative, config.noise_sd, seed)
    else:
        ds = make_classification(config.n_rows, config.n_features, config.n_informative,
                                 config.n_classes, config.class_sep, seed)
    split = split_and_standardize(ds, config.test_fraction, derive_seed(seed, _SPLIT_STREAM))
    model = fit(kind, split)

    explain_seed = derive_seed(seed, _EXPLAIN_STREAM)
    return compare_explainers(
        model, split,
        config.reference.with_seed(explain_seed),
        config.comparison.with_seed(explain_seed),
        metric=config.metric,
        symmetric=config.symmetric,
        by_absolute=config.by_absolute,
        rep=rep,
        keep_records=keep_records,
    )


def analyze_samples(reg_data: Sequence[float], class_data: Sequence[float], alpha: float = DEFAULT_ALPHA):
    """
    Summaries, density curves and the pooled t-test for the two task samples

    Degenerate pieces (too few values, no spread) come back as None with a
    warning instead of failing the study.

    Returns:
        (summaries, densities, ttest)
    """
    summaries: Dict[str, Optional[SummaryStats]] = {}
    densities: Dict[str, Optional[DensityCurve]] = {}
    for task, sample in ((Task.REGRESSION, reg_data), (Task.CLASSIFICATION, class_data)):
        summaries[task] = summarize(sample) if len(sample) >= 2 else None
        densities[task] = None
        if len(sample) >= 2:
            try:
                densities[task] = kde(sample)
            except ValueError as exc:
                logger.warning(f"No density curve for {task}: {exc}")

    ttest = None
    if len(reg_data) >= 2 and len(class_data) >= 2:
        try:
            ttest = pooled_ttest(reg_data, class_data, alpha)
        except ValueError as exc:
            logger.warning(f"t-test skipped: {exc}")
    else:
        logger.warning("t-test skipped: each task needs at least two run averages")
    return summaries, densities, ttest


def run_study(config: StudyConfig, jobs: int = DEFAULT_JOBS, keep_records: bool = False) -> StudyResult:
    """
    Run every (task, model, rep) cell and test for a difference in means

    H0: the true mean explainer similarity is the same for regression and
    classification tasks. Failed cells are logged, recorded and skipped.

    Args:
        config: Study settings
        jobs: Worker threads for the cells; results do not depend on it
        keep_records: Attach explanations to each run

    Returns:
        StudyResult
    """
    validate_positive_int(jobs, 'jobs')
    cells = [
        (task, model_index, rep)
        for task in Task.ALL
        for model_index in range(len(config.models_for(task)))
        for rep in range(config.reps)
    ]
    logger.info(f"Running study: {len(cells)} cells, metric={config.metric}, "
                f"{config.reference.kind} vs {config.comparison.kind}, jobs={jobs}")

    def execute(cell):
        task, model_index, rep = cell
        kind = config.models_for(task)[model_index]
        try:
            run = run_cell(config, task, model_index, rep, keep_records)
            logger.info(f"{task}/{kind}/rep {rep}: average {config.metric} = {run.average:.6f}")
            return run
        except Exception as exc:
            logger.error(f"{task}/{kind}/rep {rep} failed: {exc}")
            return CellFailure(task, kind, rep, str(exc))

    if jobs == 1:
        outcomes = [execute(cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(execute, cells))

    runs = tuple(o for o in outcomes if isinstance(o, RunResult))
    failures = tuple(o for o in outcomes if isinstance(o, CellFailure))
    reg_data = tuple(r.average for r in runs if r.task == Task.REGRESSION)
    class_data = tuple(r.average for r in runs if r.task == Task.CLASSIFICATION)

    summaries, densities, ttest = analyze_samples(reg_data, class_data, config.alpha)
    if ttest is not None:
        logger.info(f"t={ttest.t:.4f}, df={ttest.df:.0f}, p={ttest.p_two_sided:.4g}: {ttest.verdict}")
    if failures:
        logger.warning(f"{len(failures)} study cell(s) failed")

    return StudyResult(reg_data, class_data, runs, summaries, densities, ttest, failures)


def with_overrides(config: StudyConfig, seed: Optional[int] = None, output_dir: Optional[str] = None) -> StudyConfig:
    """Apply CLI overrides to a loaded config"""
    changes = {}
    if seed is not None:
        changes['master_seed'] = seed
    if output_dir is not None:
        changes['output_dir'] = output_dir
    return replace(config, **changes) if changes else config
