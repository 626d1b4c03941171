"""BVP windowing, Gramian angular fields, stationarity and ANOVA tooling, and a NumPy CNN."""

from importlib.resources import files

from .errors import BvpError
from .gaf import GafImage, GafKind, encode_windows, gadf, gasf, paa
from .ingest import Condition, SessionManifest, SyntheticConfig, TimeSeries, generate_synthetic_corpus, load_sessions
from .stationarity import Stationarity, adf_test, classify_stationarity, kpss_test, stationarity_report
from .stats import ScoreTable, anova_classic, anova_welch, demo_score_table, experience_analysis, feature_condition_analysis
from .windowing import WindowSet, WindowSpec, effective_length, rescale, segment, window_count

__version__ = "0.1.0"

DEMO_SCORES = files(__name__) / "data" / "demo_scores.csv"

__all__ = [
    "BvpError", "Condition", "DEMO_SCORES", "GafImage", "GafKind", "ScoreTable", "SessionManifest", "Stationarity",
    "SyntheticConfig", "TimeSeries", "WindowSet", "WindowSpec", "adf_test", "anova_classic", "anova_welch",
    "classify_stationarity", "demo_score_table", "effective_length", "encode_windows", "experience_analysis",
    "feature_condition_analysis", "gadf", "gasf", "generate_synthetic_corpus", "kpss_test", "load_sessions", "paa",
    "rescale", "segment", "stationarity_report", "window_count",
]
