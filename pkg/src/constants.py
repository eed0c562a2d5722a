"""
Constants and enumerations for the toolkit
"""

# Learning Tasks
class Task:
    REGRESSION = 'regression'
    CLASSIFICATION = 'classification'

    ALL = (REGRESSION, CLASSIFICATION)


# Model Kinds
class ModelKind:
    DUMMY = 'dummy'
    OLS = 'ols'
    RIDGE = 'ridge'
    KNN = 'knn'
    LOGISTIC = 'logistic'
    GAUSSIAN_NB = 'gaussian_nb'

    REGRESSION = (DUMMY, OLS, RIDGE, KNN)
    CLASSIFICATION = (DUMMY, LOGISTIC, KNN, GAUSSIAN_NB)

    @classmethod
    def for_task(cls, task: str) -> tuple:
        return cls.REGRESSION if task == Task.REGRESSION else cls.CLASSIFICATION


# Explainer Kinds (the tuple order is part of seed derivation)
class ExplainerKind:
    LIME = 'lime'
    KERNEL_SHAP = 'kernel_shap'

    ALL = (LIME, KERNEL_SHAP)
    ALIASES = {'shap': KERNEL_SHAP, 'kernelshap': KERNEL_SHAP}

    @classmethod
    def index(cls, kind: str) -> int:
        return cls.ALL.index(kind)

    @classmethod
    def resolve(cls, name: str) -> str:
        name = name.strip().lower()
        return cls.ALIASES.get(name, name)


# Kernel SHAP Backgrounds
class BackgroundKind:
    TRAIN_MEAN = 'train_mean'
    K_ROWS = 'k_rows'


# Rank Metrics
class MetricName:
    SHREYAN = 'shreyan'
    SPEARMAN_DISTANCE = 'spearman_distance'
    KENDALL_TAU = 'kendall_tau'
    WEIGHTED_KENDALL_TAU = 'weighted_kendall_tau'
    PEARSON_NORMALIZED = 'pearson_normalized'

    ALL = (SHREYAN, SPEARMAN_DISTANCE, KENDALL_TAU, WEIGHTED_KENDALL_TAU, PEARSON_NORMALIZED)
    UNIT_INTERVAL = (SHREYAN, PEARSON_NORMALIZED)
    ALIASES = {
        'spearman': SPEARMAN_DISTANCE,
        'kendall': KENDALL_TAU,
        'wkendall': WEIGHTED_KENDALL_TAU,
        'pearson': PEARSON_NORMALIZED,
    }

    @classmethod
    def resolve(cls, name: str) -> str:
        name = name.strip().lower()
        return cls.ALIASES.get(name, name)


# Process Exit Codes
class ExitCode:
    SUCCESS = 0
    USAGE = 1
    DATA = 2
    NUMERIC = 3


# Importance File Columns
IMPORTANCE_COLUMNS = ('explainer', 'instance_id', 'feature', 'importance')

# Summary Table Rows
SUMMARY_ROWS = ('minmax', 'mean', 'variance', 'skewness', 'kurtosis')

# Error Messages
ERROR_MESSAGES = {
    'NO_FEATURES': 'no features',
    'INVALID_IMPORTANCE': 'invalid importance',
    'INCOMPARABLE': 'incomparable rankings',
    'NOT_PERMUTATION': 'not a permutation of 1..x',
    'EMPTY_RANKING': 'empty ranking',
    'UNDEFINED': 'undefined for fewer than two features',
    'D_EXCEEDS_DMAX': 'weighted difference exceeds d_max',
    'SAMPLE_TOO_SMALL': 'sample needs at least two values',
    'DEGENERATE_SAMPLES': 'degenerate samples',
    'DEGENERATE_SAMPLE': 'degenerate sample',
    'INVALID_SHAPE': 'invalid shape parameters',
    'SPLIT_TOO_SMALL': 'too-small splits',
    'DIMENSION_MISMATCH': 'dimension mismatch',
    'INCOMPATIBLE_KIND': 'model kind incompatible with task',
    'KERNEL_WIDTH': 'kernel width too small',
    'CONSTRAINT_COALITION': 'constraint coalition',
    'LENGTH_MISMATCH': 'length mismatch',
    'UNKNOWN_METRIC': 'unknown metric',
    'UNKNOWN_EXPLAINER': 'unknown explainer',
}
