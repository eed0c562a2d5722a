"""
Configuration file for the rankcheck explainer-similarity toolkit
Logging can be steered with environment variables or a .env file;
numeric defaults are fixed so results never depend on the environment
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Logging Configuration
LOG_FILE = os.getenv('RANKCHECK_LOG_FILE', 'rankcheck.log')
LOG_LEVEL = os.getenv('RANKCHECK_LOG_LEVEL', 'INFO').upper()
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Study Defaults
DEFAULT_ALPHA = 0.05
DEFAULT_REPS = 3
DEFAULT_MASTER_SEED = 0
DEFAULT_OUTPUT_DIR = 'results'
DEFAULT_JOBS = 1

# Dataset Generator Defaults
DEFAULT_N_ROWS = 100
DEFAULT_N_FEATURES = 20
DEFAULT_N_INFORMATIVE = 5
DEFAULT_N_CLASSES = 2
DEFAULT_CLASS_SEP = 1.0
DEFAULT_NOISE_SD = 0.0
DEFAULT_TEST_FRACTION = 0.2
MAX_INFORMATIVE_WEIGHT = 100.0

# Model Defaults
RIDGE_LAMBDA = 1.0
OLS_FALLBACK_LAMBDA = 1e-8
KNN_NEIGHBORS = 5
LOGISTIC_L2 = 1e-6
LOGISTIC_MAX_ITER = 50
LOGISTIC_TOL = 1e-8
NB_VARIANCE_FLOOR = 1e-9

# Explainer Defaults
LIME_SAMPLES = 1000
LIME_RIDGE = 1.0
LIME_KERNEL_SCALE = 0.75  # kernel width = scale * sqrt(p)
SHAP_SAMPLES = 2048
SHAP_BACKGROUND_ROWS = 10
SHAP_JITTER = 1e-10
SHAP_EXHAUSTIVE_MAX_FEATURES = 10
MIN_EXPLAINER_SAMPLES = 10

# Statistics Defaults
KDE_GRID_POINTS = 200
KDE_GRID_PAD = 3.0  # grid spans [min - pad*h, max + pad*h]
SAMPLE_CHUNK = 250  # draws per independently seeded chunk
