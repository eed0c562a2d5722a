import math

import numpy as np
import pandas as pd
import pytest
from scipy import integrate

from src.constants import ExplainerKind, MetricName, ModelKind, Task
from src.explainers import ExplainerConfig
from src.models import fit
from src.ranking import ImportanceRecord
from src.reports import emit_reports
from src.study import (
    ConfigKeyError,
    RunResult,
    StudyConfig,
    analyze_samples,
    cell_seed,
    compare_explainers,
    compare_records,
    load_study_config,
    run_study,
    similarity_between,
    similarity_matrix,
    study_config_from_mapping,
    with_overrides,
)
from src.utils import ExplanationError

FAST_LIME = ExplainerConfig.default(ExplainerKind.LIME, n_samples=50)
FAST_SHAP = ExplainerConfig.default(ExplainerKind.KERNEL_SHAP, n_samples=64)


def small_study(**overrides):
    settings = dict(
        regression_models=(ModelKind.OLS, ModelKind.KNN),
        classification_models=(ModelKind.LOGISTIC, ModelKind.GAUSSIAN_NB),
        reps=1, n_rows=30, n_features=4, n_informative=2,
        reference=FAST_LIME, comparison=FAST_SHAP,
    )
    settings.update(overrides)
    return StudyConfig(**settings)


def with_moments(mean, variance, n, seed):
    z = np.random.default_rng(seed).standard_normal(n)
    z = (z - z.mean()) / z.std(ddof=1)
    return mean + math.sqrt(variance) * z


def record(explainer, instance_id, values):
    return ImportanceRecord.from_values(explainer, instance_id, values)


def test_identical_records_are_fully_similar():
    a = record('lime', 0, [0.3, -2.0, 1.1, 0.0])
    assert similarity_between(a, record('kernel_shap', 0, [0.3, -2.0, 1.1, 0.0])) == 1.0


def test_reversed_records():
    a = record('lime', 0, [5, 4, 3, 2, 1])
    b = record('kernel_shap', 0, [1, 2, 3, 4, 5])
    assert similarity_between(a, b) == pytest.approx(0.1)


def test_signed_ranking_changes_the_comparison():
    a = record('lime', 0, [-5.0, 1.0])
    b = record('kernel_shap', 0, [5.0, 1.0])
    assert similarity_between(a, b) == 1.0
    assert similarity_between(a, b, by_absolute=False) == 0.0


def test_compare_records_matches_instance_ids():
    ref = [record('lime', i, [3, 2, 1]) for i in (2, 0, 1)]
    other = [record('kernel_shap', i, [3, 2, 1] if i else [1, 2, 3]) for i in (0, 1, 2)]
    values = compare_records(ref, other)
    assert list(values) == [0, 1, 2]
    assert values[1] == values[2] == 1.0
    assert values[0] < 1.0


def test_compare_records_rejects_unmatched_instances():
    with pytest.raises(ValueError, match="unmatched ids"):
        compare_records([record('lime', 0, [1, 2])], [record('kernel_shap', 1, [1, 2])])


def test_similarity_matrix():
    records = [record('lime', i, [3, 2, 1]) for i in range(3)]
    records += [record('kernel_shap', i, [1, 2, 3]) for i in range(3)]
    matrix = similarity_matrix(records)
    assert set(matrix) == {(a, b) for a in ('kernel_shap', 'lime') for b in ('kernel_shap', 'lime')}
    assert matrix[('lime', 'lime')] == 1.0
    # reversal of three features: d_s = 1 - 8/9
    assert matrix[('lime', 'kernel_shap')] == pytest.approx(1 / 9)
    assert matrix[('kernel_shap', 'lime')] == pytest.approx(1 / 9)


def test_dummy_model_explanations_agree(regression_split):
    model = fit(ModelKind.DUMMY, regression_split)
    run = compare_explainers(model, regression_split, FAST_LIME, FAST_SHAP, keep_records=True)
    assert run.average == 1.0
    assert run.instance_ids == tuple(range(regression_split.X_test.shape[0]))
    assert len(run.records) == len(run.values)


def test_compare_explainers_on_selected_instances(linear_model, regression_split):
    run = compare_explainers(linear_model, regression_split, FAST_LIME, FAST_SHAP,
                             instances=regression_split.X_test[:2], instance_ids=[10, 11], rep=4)
    assert run.instance_ids == (10, 11)
    assert run.rep == 4
    assert all(0.0 <= v <= 1.0 for v in run.values)
    assert run.average == pytest.approx(np.mean(run.values))


def test_compare_explainers_names_failing_instance(monkeypatch, linear_model, regression_split):
    def broken(model, split, row, config, instance_id):
        raise np.linalg.LinAlgError("singular")

    monkeypatch.setattr('src.study.explain', broken)
    with pytest.raises(ExplanationError) as info:
        compare_explainers(linear_model, regression_split, FAST_LIME, FAST_SHAP,
                           instances=regression_split.X_test[:2], instance_ids=[10, 11])
    assert info.value.instance_id == 10
    assert info.value.explainer == ExplainerKind.LIME


def test_compare_explainers_id_length_mismatch(linear_model, regression_split):
    with pytest.raises(ValueError, match="length mismatch"):
        compare_explainers(linear_model, regression_split, FAST_LIME, FAST_SHAP,
                           instances=regression_split.X_test[:2], instance_ids=[1])


def test_cell_seeds_are_distinct():
    seeds = {cell_seed(0, task, m, rep) for task in Task.ALL for m in range(4) for rep in range(5)}
    assert len(seeds) == 2 * 4 * 5


def test_study_is_independent_of_worker_count():
    config = small_study()
    one = run_study(config, jobs=1)
    two = run_study(config, jobs=2)
    assert one.reg_data == two.reg_data
    assert one.class_data == two.class_data
    assert [(r.task, r.model_kind) for r in one.runs] == [
        (Task.REGRESSION, ModelKind.OLS), (Task.REGRESSION, ModelKind.KNN),
        (Task.CLASSIFICATION, ModelKind.LOGISTIC), (Task.CLASSIFICATION, ModelKind.GAUSSIAN_NB),
    ]
    assert all(0.0 <= v <= 1.0 for v in one.reg_data + one.class_data)
    assert not one.failures


def test_study_depends_on_master_seed():
    a = run_study(small_study(master_seed=1))
    b = run_study(small_study(master_seed=2))
    assert a.reg_data + a.class_data != b.reg_data + b.class_data


def test_self_test_is_the_null_case():
    config = small_study(comparison=FAST_LIME, self_test=True)
    result = run_study(config)
    assert set(result.reg_data) == set(result.class_data) == {1.0}
    assert result.ttest.t == 0.0
    assert result.ttest.p_two_sided == 1.0
    assert not result.ttest.reject_null
    assert result.densities[Task.REGRESSION] is None
    assert result.summaries[Task.REGRESSION].degenerate


def test_failed_cells_are_skipped_and_reported(monkeypatch):
    def fake_cell(config, task, model_index, rep, keep_records=False):
        if task == Task.CLASSIFICATION and model_index == 0:
            raise RuntimeError("IRLS exploded")
        value = 0.5 + 0.1 * rep + 0.01 * model_index
        return RunResult(config.models_for(task)[model_index], task, rep, (0,), (value,), value)

    monkeypatch.setattr('src.study.run_cell', fake_cell)
    result = run_study(small_study(reps=2))
    assert len(result.reg_data) == 4
    assert result.class_data == pytest.approx((0.51, 0.61))
    assert len(result.failures) == 2
    assert {f.model_kind for f in result.failures} == {ModelKind.LOGISTIC}
    assert all('IRLS exploded' in f.error for f in result.failures)
    assert result.ttest is not None


def test_published_summary_reproduces_the_test_statistic():
    reg = with_moments(0.649809, 0.013377, 114, seed=0)
    cls = with_moments(0.692116, 0.010448, 75, seed=1)
    summaries, densities, ttest = analyze_samples(reg, cls)
    assert summaries[Task.REGRESSION].mean == pytest.approx(0.649809)
    assert summaries[Task.CLASSIFICATION].variance == pytest.approx(0.010448)
    assert ttest.t == pytest.approx(-2.574, abs=0.01)
    assert ttest.df == 187
    assert ttest.reject_null
    assert densities[Task.REGRESSION].integral() == pytest.approx(1.0, abs=0.02)


def test_analysis_with_too_few_runs():
    summaries, densities, ttest = analyze_samples([0.5], [0.4, 0.6])
    assert summaries[Task.REGRESSION] is None
    assert densities[Task.REGRESSION] is None
    assert summaries[Task.CLASSIFICATION].n == 2
    assert ttest is None


@pytest.mark.parametrize('overrides, message', [
    (dict(comparison=FAST_LIME), "must differ"),
    (dict(metric='kendall'), "study metric"),
    (dict(regression_models=(ModelKind.LOGISTIC,)), "incompatible"),
    (dict(alpha=1.0), "alpha"),
    (dict(reps=0), "reps"),
])
def test_invalid_study_config(overrides, message):
    with pytest.raises(ValueError, match=message):
        small_study(**overrides)


def test_metric_alias_is_resolved():
    assert small_study(metric='pearson').metric == MetricName.PEARSON_NORMALIZED


def test_config_from_mapping():
    config = study_config_from_mapping({
        'REGRESSION_MODELS': 'ols, Ridge',
        'REPS': '2',
        'METRIC': 'pearson',
        'SIGNED_RANKING': 'true',
        'LIME_SAMPLES': '300',
        'SHAP_BACKGROUND': 'k_rows',
        'OUTPUT_DIR': '',
    })
    assert config.regression_models == (ModelKind.OLS, ModelKind.RIDGE)
    assert config.classification_models == ModelKind.CLASSIFICATION
    assert config.reps == 2
    assert config.metric == MetricName.PEARSON_NORMALIZED
    assert not config.by_absolute
    assert config.reference.n_samples == 300
    assert config.comparison.background == 'k_rows'
    assert config.output_dir == 'results'


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigKeyError, match="N_TREES"):
        study_config_from_mapping({'N_TREES': '10'})


def test_load_study_config(tmp_path):
    path = tmp_path / 'study.env'
    path.write_text("# two reps\nREPS=2\nREFERENCE_EXPLAINER=shap\nCOMPARISON_EXPLAINER=lime\nMASTER_SEED=7\n")
    config = load_study_config(path)
    assert config.reps == 2
    assert config.reference.kind == ExplainerKind.KERNEL_SHAP
    assert config.comparison.kind == ExplainerKind.LIME
    assert with_overrides(config, seed=3, output_dir='out').master_seed == 3
    assert with_overrides(config) is config
    with pytest.raises(FileNotFoundError):
        load_study_config(tmp_path / 'missing.env')


@pytest.mark.slow
def test_default_study_end_to_end(tmp_path):
    config = StudyConfig()
    runs = {'serial': run_study(config, jobs=1), 'threaded': run_study(config, jobs=4),
            'repeat': run_study(config, jobs=1)}
    result = runs['serial']
    assert len(result.reg_data) == len(result.class_data) == 12
    assert all(0.0 <= v <= 1.0 for v in result.reg_data + result.class_data)
    assert not result.failures
    assert 0.0 <= result.ttest.p_two_sided <= 1.0

    written = {
        name: emit_reports(run, tmp_path / name, alpha=config.alpha, plots=False)
        for name, run in runs.items()
    }
    files = [p.relative_to(tmp_path / 'serial') for p in written['serial']]
    assert {p.suffix for p in files} == {'.csv', '.json', '.txt'}
    for name in ('threaded', 'repeat'):
        assert [p.relative_to(tmp_path / name) for p in written[name]] == files
        for path in files:
            assert (tmp_path / name / path).read_bytes() == (tmp_path / 'serial' / path).read_bytes(), path

    for task in ('regression', 'classification'):
        density = pd.read_csv(tmp_path / 'serial' / f"density_{task}.csv")
        assert integrate.trapezoid(density['density'], density['grid']) == pytest.approx(1.0, abs=0.02)
