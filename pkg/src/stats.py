"""
Statistics for similarity studies
Summary tables, the pooled two-sample t-test, kernel density curves and
sampling distributions of the rank metrics over random permutation pairs
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import integrate, special
from scipy import stats as sps

from src.config import DEFAULT_ALPHA, KDE_GRID_PAD, KDE_GRID_POINTS, SAMPLE_CHUNK
from src.constants import ERROR_MESSAGES
from src.metrics import pearson_similarity_normalized, shreyan_similarity
from src.ranking import Permutation
from src.utils import Seed, derive_seed, logger, make_rng, validate_positive_int


@dataclass(frozen=True)
class SummaryStats:
    """describe-style summary of one sample"""
    minmax: Tuple[float, float]
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    n: int
    degenerate: bool = False

    def as_row(self) -> Dict[str, object]:
        return {
            'minmax': self.minmax,
            'mean': self.mean,
            'variance': self.variance,
            'skewness': self.skewness,
            'kurtosis': self.kurtosis,
        }


@dataclass(frozen=True)
class TTestResult:
    """Outcome of a pooled two-sample t-test"""
    t: float
    df: float
    p_two_sided: float
    alpha: float
    reject_null: bool

    @property
    def verdict(self) -> str:
        if self.reject_null:
            return f"reject H0 at alpha={self.alpha}: the true means differ"
        return f"fail to reject H0 at alpha={self.alpha}: no evidence the true means differ"

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass(frozen=True)
class DensityCurve:
    """Gaussian KDE evaluated on an even grid"""
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self) -> float:
        return float(integrate.trapezoid(self.density, self.grid))

    def peak(self) -> float:
        return float(self.grid[int(np.argmax(self.density))])


def _as_sample(sample: Sequence[float]) -> np.ndarray:
    values = np.asarray(sample, dtype=float).ravel()
    if values.size < 2:
        raise ValueError(ERROR_MESSAGES['SAMPLE_TOO_SMALL'])
    if not np.all(np.isfinite(values)):
        raise ValueError("sample contains non-finite values")
    return values


def summarize(sample: Sequence[float]) -> SummaryStats:
    """
    Summary statistics in the layout of the study table

    Skewness and excess kurtosis use central moments with n denominators
    (no bias correction); variance uses n - 1.

    Args:
        sample: At least two finite values

    Returns:
        SummaryStats; skewness and kurtosis are 0 with degenerate=True when
        the sample has no spread
    """
    values = _as_sample(sample)
    minmax = (float(values.min()), float(values.max()))
    mean = float(values.mean())
    variance = float(values.var(ddof=1))
    if np.ptp(values) == 0:
        logger.debug(f"Degenerate sample of {values.size} identical values")
        return SummaryStats(minmax, mean, 0.0, 0.0, 0.0, int(values.size), degenerate=True)
    skewness = float(sps.skew(values, bias=True))
    kurtosis = float(sps.kurtosis(values, fisher=True, bias=True))
    return SummaryStats(minmax, mean, variance, skewness, kurtosis, int(values.size))


def student_t_two_sided_p(t: float, df: float) -> float:
    """
    Two-sided Student-t tail probability P(|T| >= |t|)

    Uses the regularized incomplete beta identity I_{df/(df+t^2)}(df/2, 1/2).
    """
    if df <= 0:
        raise ValueError(f"Degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    p = float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))
    return min(max(p, 0.0), 1.0)


def ttest_from_summary(
    mean1: float,
    var1: float,
    n1: int,
    mean2: float,
    var2: float,
    n2: int,
    alpha: float = DEFAULT_ALPHA
) -> TTestResult:
    """
    Pooled-variance two-sample t-test from sufficient statistics

    Args:
        mean1, var1, n1: First sample mean, sample variance (n-1) and size
        mean2, var2, n2: Second sample mean, sample variance and size
        alpha: Significance level

    Returns:
        TTestResult

    Raises:
        ValueError: On invalid sizes, negative variances, or zero pooled
            variance with unequal means
    """
    validate_positive_int(n1, 'n1', minimum=2)
    validate_positive_int(n2, 'n2', minimum=2)
    if var1 < 0 or var2 < 0:
        raise ValueError("variances must be non-negative")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")

    df = n1 + n2 - 2
    pooled = ((n1 - 1) * var1 + (n2 - 1) * var2) / df
    se = math.sqrt(pooled * (1.0 / n1 + 1.0 / n2))
    diff = mean1 - mean2

    if diff == 0:
        t, p = 0.0, 1.0
    elif se == 0:
        raise ValueError(ERROR_MESSAGES['DEGENERATE_SAMPLES'])
    else:
        t = diff / se
        p = student_t_two_sided_p(t, df)

    result = TTestResult(t=float(t), df=float(df), p_two_sided=p, alpha=alpha, reject_null=p < alpha)
    logger.debug(f"Pooled t-test: t={result.t:.6f}, df={df}, p={result.p_two_sided:.6g}")
    return result


def pooled_ttest(a: Sequence[float], b: Sequence[float], alpha: float = DEFAULT_ALPHA) -> TTestResult:
    """
    Equal-variance two-sample t-test on raw samples

    Args:
        a: First sample (at least two values)
        b: Second sample (at least two values)
        alpha: Significance level

    Returns:
        TTestResult
    """
    a = _as_sample(a)
    b = _as_sample(b)
    return ttest_from_summary(
        float(a.mean()), float(a.var(ddof=1)), int(a.size),
        float(b.mean()), float(b.var(ddof=1)), int(b.size),
        alpha
    )


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 * min(sd, IQR/1.34) * n^(-1/5); falls back to sd when the IQR is zero"""
    sd = float(values.std(ddof=1))
    iqr = float(sps.iqr(values))
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    if spread == 0:
        raise ValueError(ERROR_MESSAGES['DEGENERATE_SAMPLE'])
    return 0.9 * spread * values.size ** (-0.2)


def kde(sample: Sequence[float], points: int = KDE_GRID_POINTS) -> DensityCurve:
    """
    Gaussian kernel density estimate with Silverman's bandwidth

    Args:
        sample: At least two values with nonzero spread
        points: Grid size

    Returns:
        DensityCurve on [min - 3h, max + 3h]
    """
    values = _as_sample(sample)
    h = silverman_bandwidth(values)
    grid = np.linspace(values.min() - KDE_GRID_PAD * h, values.max() + KDE_GRID_PAD * h, points)
    # gaussian_kde scales its kernel by the sample sd
    estimator = sps.gaussian_kde(values, bw_method=h / values.std(ddof=1))
    density = estimator(grid)
    return DensityCurve(grid=grid, density=density, bandwidth=h)


def _sample_chunk(x: int, draws: int, seed: Seed) -> Tuple[List[float], List[float]]:
    rng = make_rng(seed)
    shreyan, pearson = [], []
    for _ in range(draws):
        r = Permutation.of(rng.permutation(x) + 1)
        r_star = Permutation.of(rng.permutation(x) + 1)
        shreyan.append(shreyan_similarity(r, r_star))
        pearson.append(pearson_similarity_normalized(r, r_star))
    return shreyan, pearson


def sample_metric_distribution(
    x: int,
    n_samples: int,
    seed: Seed = 0,
    jobs: int = 1
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sampling distribution of the Shreyan and normalized Pearson metrics

    Draws independent uniformly random ordered permutation pairs. Draws are
    split into fixed-size chunks, each seeded by (seed, chunk index), so the
    result does not depend on the number of workers.

    Args:
        x: Permutation length (>= 2)
        n_samples: Number of pairs (>= 1)
        seed: Base seed
        jobs: Worker threads

    Returns:
        (shreyan sample, pearson_normalized sample)
    """
    validate_positive_int(x, 'x', minimum=2)
    validate_positive_int(n_samples, 'n_samples')
    validate_positive_int(jobs, 'jobs')

    chunks = [
        (index, min(SAMPLE_CHUNK, n_samples - start))
        for index, start in enumerate(range(0, n_samples, SAMPLE_CHUNK))
    ]

    def run(chunk):
        index, draws = chunk
        return _sample_chunk(x, draws, derive_seed(seed, index))

    if jobs == 1:
        parts = [run(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(run, chunks))

    shreyan = np.array([v for part in parts for v in part[0]])
    pearson = np.array([v for part in parts for v in part[1]])
    logger.info(f"Sampled {n_samples} permutation pairs of size {x}")
    return shreyan, pearson


def distribution_shape_findings(shreyan: Sequence[float]) -> List[str]:
    """
    Check the expected shape of a Shreyan sampling distribution

    The metric is expected to centre below 0.5 with a right skew under
    random pairs. Misses are logged and returned rather than corrected.

    Args:
        shreyan: Sample of Shreyan similarities

    Returns:
        Human-readable findings; empty when both checks hold
    """
    values = _as_sample(shreyan)
    findings = []
    median = float(np.median(values))
    skewness = float(sps.skew(values, bias=True))
    if median >= 0.5:
        findings.append(f"median {median:.4f} is not below 0.5")
    if skewness <= 0:
        findings.append(f"skewness {skewness:.4f} is not positive (no right skew)")
    for finding in findings:
        logger.warning(f"Sampling distribution finding: {finding}")
    return findings
